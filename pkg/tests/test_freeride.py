import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multivote import constructions
from multivote.core import Deviation, satisfaction
from multivote.freeride import (HARMFUL, NEUTRAL, SUCCESSFUL, SearchTooLarge, audit_election,
                                can_manipulate_by_free_riding, classify, fast_path_applies,
                                find_free_rides, is_free_ride, recognize_free_riding)
from multivote.scoring import (comparator_rule, owa_rule, parse_rule, pav_f, thiele_rule,
                               utilitarian_f)
from multivote.solvers import solve

from conftest import elections, random_corpus


def test_classification_is_sign_of_delta():
    assert [classify(d) for d in (-2, -1, 0, 1, 3)] == [HARMFUL, HARMFUL, NEUTRAL, SUCCESSFUL,
                                                       SUCCESSFUL]


def test_egalitarian_example():
    fx = constructions.egal_free_ride_example()
    e, rule = fx.election, fx.rule
    finding = is_free_ride(e, rule, fx.deviation)
    assert e.labels(finding.deviated_outcome) == ("a", "y")
    assert (finding.delta_sat, finding.kind) == (1, SUCCESSFUL)
    assert recognize_free_riding(e, rule, 1, 0)
    found = find_free_rides(e, rule, 1, 0)
    assert len(found) == 1 and found[0].kind == SUCCESSFUL
    both = find_free_rides(e, rule, 1, 0, distinct=False)
    assert [sorted(f.deviation.replacements[0]) for f in both] == [[], [1]]


def test_approving_the_winner_is_not_a_free_ride():
    fx = constructions.egal_free_ride_example()
    assert is_free_ride(fx.election, fx.rule, Deviation.make(1, {0: [0, 1]})) is None


def test_voter_not_approving_winner_cannot_free_ride():
    fx = constructions.seq_thiele_manipulation()
    e, rule = fx.election, fx.rule
    last = e.k - 1
    # voters 0 and 1 do not approve the truthful last winner a
    assert not recognize_free_riding(e, rule, 0, last)
    assert find_free_rides(e, rule, 1, last) == []


def test_seq_egal_harm_fixture_flags():
    fx = constructions.seq_egal_harmful()
    e, rule = fx.election, fx.rule
    finding = is_free_ride(e, rule, fx.deviation)
    assert e.labels(finding.deviated_outcome) == tuple("aabaa")
    assert (finding.delta_sat, finding.kind) == (-1, HARMFUL)
    assert recognize_free_riding(e, rule, 0, 1)
    assert audit_election(e, rule).pair(0, 1).harmful


def test_seq_pav_manipulation_fixture():
    fx = constructions.seq_thiele_manipulation()
    e, rule = fx.election, fx.rule
    assert (e.n, e.k, {i.size for i in e.issues}) == (4, 3, {2})
    found = find_free_rides(e, rule, 0, 0)
    assert len(found) == 1 and found[0].kind == SUCCESSFUL and found[0].delta_sat == 1
    ok, witness = can_manipulate_by_free_riding(e, rule, 0)
    assert ok and witness.kind == SUCCESSFUL


def test_seq_pav_harm_fixture_cannot_manipulate_on_first_issue():
    fx = constructions.seq_thiele_harmful()
    e, rule = fx.election, fx.rule
    assert e.n == 9
    found = find_free_rides(e, rule, 0, 0, fast=False, distinct=False)
    assert found and all(f.kind == HARMFUL for f in found)
    assert not any(f.kind == SUCCESSFUL for f in find_free_rides(e, rule, 0, 0, fast=False))


def test_owa_manipulation_audit():
    fx = constructions.owa_manipulation()
    report = audit_election(fx.election, fx.rule)
    assert report.pair(1, 0).successful
    assert report.to_dict()["rule"] == "owa:egal@opt"


def test_utilitarian_running_example_is_all_neutral():
    e = constructions.running_example().election
    for mode in ("opt", "seq"):
        rule = thiele_rule(utilitarian_f(), mode)
        report = audit_election(e, rule)
        assert not any(p.successful or p.harmful for p in report.pairs)


@settings(max_examples=60, deadline=None)
@given(elections(n_max=4, k_max=3), st.sampled_from(["opt", "seq"]), st.booleans())
def test_utilitarian_cannot_be_manipulated(e, mode, generalized):
    rule = thiele_rule(utilitarian_f(), mode)
    for v in range(e.n):
        ok, witness = can_manipulate_by_free_riding(e, rule, v, generalized)
        assert not ok and witness is None
    assert not any(p.successful or p.harmful for p in audit_election(e, rule, generalized).pairs)


@settings(max_examples=80, deadline=None)
@given(elections(n_max=4, k_max=3))
def test_leximin_opt_free_rides_never_harm(e):
    rule = comparator_rule("leximin")
    for v in range(e.n):
        for i in range(e.k):
            for f in find_free_rides(e, rule, v, i, fast=False, distinct=False):
                assert f.delta_sat >= 0


def _check_fast_path(e, rule):
    truthful = solve(e, rule).outcome
    for v in range(e.n):
        for i in range(e.k):
            full = find_free_rides(e, rule, v, i, fast=False, distinct=False, truthful=truthful)
            fast = find_free_rides(e, rule, v, i, truthful=truthful)
            assert bool(full) == bool(fast)
            # every valid ballot leads to one and the same outcome
            assert len({f.deviated_outcome for f in full}) <= 1
            if fast:
                assert fast[0].deviated_outcome == full[0].deviated_outcome


def test_sequential_fast_path_on_larger_corpus():
    rule = parse_rule("thiele:pav@seq")
    for e in random_corpus(31, 200, n_max=6, k_max=6, c_max=4):
        _check_fast_path(e, rule)


@pytest.mark.parametrize("text", ["owa:leximin@seq", "owa:egal@seq", "thiele:pow:0.5@seq",
                                  "owa:hybrid:1@seq"])
def test_sequential_fast_path_other_rules(text):
    rule = parse_rule(text)
    for e in random_corpus(32, 120, n_min=2, c_max=4):
        _check_fast_path(e, rule)


def test_fast_path_guard():
    assert fast_path_applies(parse_rule("thiele:pav@seq"), False)
    assert not fast_path_applies(parse_rule("thiele:pav@seq"), True)
    assert not fast_path_applies(parse_rule("owa:leximin@opt"), False)
    assert fast_path_applies(owa_rule([1, 1, 0], "seq"), False)


def test_generalized_allows_other_approved_winner():
    e = constructions._election([["a", "b", "c"]] * 2, [[{"a", "b"}, "a"], ["a", "a"], ["b", "b"]])
    rule = thiele_rule(utilitarian_f(), "seq")
    assert e.labels(solve(e, rule).outcome) == ("a", "a")
    plain = find_free_rides(e, rule, 0, 0, distinct=False, fast=False)
    assert {e.labels(f.deviated_outcome)[0] for f in plain} == {"a"}
    general = find_free_rides(e, rule, 0, 0, generalized=True)
    assert {e.labels(f.deviated_outcome)[0] for f in general} == {"a", "b"}
    assert all(f.delta_sat == 0 and f.generalized for f in general)


def test_multi_issue_manipulation_and_caps():
    fx = constructions.opt_thiele_manipulation()
    e, rule = fx.election, fx.rule
    ok, witness = can_manipulate_by_free_riding(e, rule, 0)
    assert ok and satisfaction(e, 0, witness.deviated_outcome) > satisfaction(
        e, 0, witness.truthful_outcome)
    with pytest.raises(SearchTooLarge):
        can_manipulate_by_free_riding(e, rule, 0, deviation_cap=1)
    with pytest.raises(SearchTooLarge):
        find_free_rides(e, rule, 0, 0, candidate_cap=1)


def test_audit_flags_follow_finding_classes():
    rule = comparator_rule("egal")
    for e in random_corpus(33, 100, n_min=2):
        for p in audit_election(e, rule).pairs:
            kinds = {f.kind for f in p.findings}
            assert p.successful == (SUCCESSFUL in kinds)
            assert p.harmful == (HARMFUL in kinds)


def test_audit_report_counts():
    fx = constructions.seq_egal_harmful()
    report = audit_election(fx.election, fx.rule)
    counts = report.voter_counts()
    assert set(counts) == set(range(fx.election.n))
    assert counts[0][1] >= 1
    d = report.to_dict()
    assert len(d["pairs"]) == fx.election.n * fx.election.k
    assert set(d["pairs"][0]) == {"voter", "issue", "successful", "harmful"}


def test_pav_rule_string():
    assert str(thiele_rule(pav_f(), "seq")) == "thiele:pav@seq"
