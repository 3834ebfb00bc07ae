import json

import pytest

from multivote import cli, constructions, sim
from multivote.freeride import audit_election, find_free_rides
from multivote.scoring import parse_rule
from multivote.solvers import solve, winner_of_issue


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        import io
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def running_path(tmp_path):
    path = tmp_path / "running.json"
    path.write_text(constructions.running_example().election.to_json())
    return path


@pytest.fixture
def egal_path(tmp_path):
    path = tmp_path / "egal.json"
    path.write_text(constructions.egal_free_ride_example().election.to_json())
    return path


def test_solve_pav_on_running_example(capsys, running_path):
    code, out, _ = run(capsys, "solve", str(running_path), "--rule", "thiele:pav@opt")
    assert code == 0
    doc = json.loads(out)
    assert doc["outcome"] == ["a", "a", "a", "b"]
    assert [w["candidate"] for w in doc["winners"]] == ["a", "a", "a", "b"]
    assert doc["score"] == [154]


@pytest.mark.parametrize("rule", ["thiele:util", "owa:leximin@opt", "owa:egal", "thiele:pav@seq",
                                  "thiele:pow:0.5@seq", "owa:hybrid:40@seq"])
def test_solve_matches_library(capsys, running_path, rule):
    e = constructions.running_example().election
    code, out, _ = run(capsys, "solve", str(running_path), "--rule", rule)
    assert code == 0
    expected = solve(e, parse_rule(rule)).outcome
    assert json.loads(out)["outcome"] == list(e.labels(expected))


def test_solve_output_is_byte_deterministic(capsys, running_path):
    first = run(capsys, "solve", str(running_path), "--rule", "thiele:pav@seq", "--trace")[1]
    second = run(capsys, "solve", str(running_path), "--rule", "thiele:pav@seq", "--trace")[1]
    assert first == second
    trace = json.loads(first)["trace"]
    assert trace[2]["scores"][:2] == [[0, [22]], [1, [33]]]


def test_fraction_scores_are_strings(capsys, egal_path):
    code, out, _ = run(capsys, "solve", str(egal_path), "--rule", "thiele:pav")
    assert code == 0
    assert json.loads(out)["score"] == ["7/2"]


def test_inline_json_and_stdin(capsys, monkeypatch, egal_path):
    text = egal_path.read_text()
    a = run(capsys, "solve", "--json", text, "--rule", "owa:egal")
    b = run(capsys, "solve", "-", "--rule", "owa:egal", stdin=text, monkeypatch=monkeypatch)
    c = run(capsys, "solve", str(egal_path), "--rule", "owa:egal")
    assert a == b == c


def test_winner_query(capsys, running_path):
    e = constructions.running_example().election
    rule = parse_rule("owa:leximin")
    for issue in range(4):
        for label in "abc":
            code, out, _ = run(capsys, "winner", str(running_path), "--rule", "owa:leximin",
                               "--issue", str(issue), "--candidate", label)
            assert code == 0
            expected = winner_of_issue(e, rule, issue, e.issues[issue].index(label))
            assert out.strip() == ("true" if expected else "false")
    assert run(capsys, "winner", str(running_path), "--rule", "thiele:util", "--issue", "2",
               "--candidate", "0")[1].strip() == "true"


def test_freeride_egal_example(capsys, egal_path):
    code, out, _ = run(capsys, "freeride", str(egal_path), "--rule", "owa:egal@opt", "--voter",
                       "1", "--issue", "0")
    assert code == 0
    findings = json.loads(out)["findings"]
    assert len(findings) == 1
    assert findings[0]["class"] == "successful"
    assert findings[0]["deviated_labels"] == ["a", "y"]
    every = json.loads(run(capsys, "freeride", str(egal_path), "--rule", "owa:egal",
                           "--voter", "1", "--issue", "0", "--all-ballots")[1])["findings"]
    assert len(every) == 2


def test_freeride_matches_library_all_issues(capsys, tmp_path):
    fx = constructions.seq_egal_harmful()
    path = tmp_path / "h.json"
    path.write_text(fx.election.to_json())
    code, out, _ = run(capsys, "freeride", str(path), "--rule", "owa:egal@seq", "--voter", "0")
    assert code == 0
    lib = [f.to_dict() for i in range(fx.election.k)
           for f in find_free_rides(fx.election, fx.rule, 0, i)]
    got = json.loads(out)["findings"]
    for g in got:
        g.pop("truthful_labels")
        g.pop("deviated_labels")
    assert got == lib


def test_freeride_manipulate(capsys, tmp_path):
    fx = constructions.seq_thiele_manipulation()
    path = tmp_path / "m.json"
    path.write_text(fx.election.to_json())
    doc = json.loads(run(capsys, "freeride", str(path), "--rule", "thiele:pav@seq", "--voter",
                         "0", "--manipulate")[1])
    assert doc["manipulable"] is True and doc["witness"]["class"] == "successful"


def test_audit_matches_library(capsys, tmp_path):
    fx = constructions.seq_egal_harmful()
    path = tmp_path / "h.json"
    path.write_text(fx.election.to_json())
    code, out, _ = run(capsys, "audit", str(path), "--rule", "owa:egal@seq")
    assert code == 0
    assert json.loads(out) == audit_election(fx.election, fx.rule).to_dict()
    assert out == run(capsys, "audit", str(path), "--rule", "owa:egal@seq")[1]


def test_simulate_utilitarian_row_is_zero(capsys):
    code, out, _ = run(capsys, "simulate", "--seed", "42", "--elections", "10", "--rules",
                       "thiele:pow:0")
    assert code == 0
    rows = sim.parse_csv(out)
    assert len(rows) == 1
    assert (rows[0].q1, rows[0].q2, rows[0].q3) == (0.0, 0.0, 0.0)


def test_simulate_matches_library_and_writes_artifacts(capsys, tmp_path):
    args = ["--seed", "3", "--elections", "6", "--voters", "7", "--issues", "5",
            "--candidates", "3", "--rules", "thiele:pav,owa:leximin"]
    svg, png, raw, csv_path = (tmp_path / n for n in ("p.svg", "p.png", "raw.jsonl", "m.csv"))
    code, out, _ = run(capsys, "simulate", *args, "--svg", str(svg), "--plot", str(png),
                       "--raw", str(raw), "--out", str(csv_path))
    assert code == 0 and out == ""
    config = sim.ExperimentConfig(sim.GeometryConfig(7, 5, 3, 1.2, 3), 6,
                                  ("thiele:pav", "owa:leximin"))
    result = sim.run_experiment(config)
    assert csv_path.read_bytes() == sim.emit_csv(result.rows)
    assert svg.read_bytes() == sim.emit_svg_plot(result.rows)
    assert png.read_bytes().startswith(b"\x89PNG")
    assert len(raw.read_text().splitlines()) == 6 * 2 * 7


def test_fixture_dump(capsys):
    code, out, _ = run(capsys, "fixture", "seq-egal-harmful")
    assert code == 0
    doc = json.loads(out)
    assert doc["expected_truthful"] == list("aaabb")
    assert doc["expected_deviated"] == list("aabaa")
    assert run(capsys, "fixture", "list")[1].split() == list(constructions.FIXTURES)
    code, out, _ = run(capsys, "fixture", "running-example", "--election")
    assert code == 0
    assert out.strip() == constructions.running_example().election.to_json()


@pytest.mark.parametrize("argv", [
    ["solve", "--rule", "owa:egal"],
    ["solve", "x.json", "--json", "{}", "--rule", "owa:egal"],
    ["solve", "missing.json", "--rule", "owa:egal"],
    ["fixture", "nope"],
    ["simulate", "--rules", "thiele:pav@opt"],
    ["simulate", "--slack", "0.5"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert cli.main(argv) == 2


def test_bad_rule_is_usage_error(capsys, running_path):
    code, _, err = run(capsys, "solve", str(running_path), "--rule", "thiele:magic")
    assert code == 2 and "usage error" in err


def test_domain_errors_exit_1(capsys, running_path, monkeypatch):
    code, _, err = run(capsys, "solve", "--json", '{"issues":[{"candidates":["a"]}],'
                       '"approvals":[[[3]]]}', "--rule", "owa:egal")
    assert code == 1 and "out of range" in err
    monkeypatch.setenv("MULTIVOTE_BUDGET", "10")
    code, out, err = run(capsys, "solve", str(running_path), "--rule", "thiele:pav@opt")
    assert code == 1 and out == ""
    assert "81 outcomes" in err and "budget of 10" in err
    code, _, _ = run(capsys, "freeride", str(running_path), "--rule", "owa:egal", "--voter", "500")
    assert code == 1
    code, _, _ = run(capsys, "solve", str(running_path), "--rule", "owa:hybrid:100")
    assert code == 1
