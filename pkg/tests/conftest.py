import random

import pytest
from hypothesis import strategies as st

from multivote.core import Election, IssueSpec

_ACCEPTANCE: dict[str, list[tuple[str, str]]] = {}


def random_election(rng: random.Random, n_max: int = 5, k_max: int = 4, c_max: int = 3,
                    shuffle_tiebreak: bool = True, n_min: int = 1) -> Election:
    n = rng.randint(n_min, n_max)
    k = rng.randint(1, k_max)
    issues = []
    for _ in range(k):
        m = rng.randint(1, c_max)
        order = list(range(m))
        if shuffle_tiebreak:
            rng.shuffle(order)
        issues.append(IssueSpec.make([f"c{j}" for j in range(m)], order))
    approvals = [[{c for c in range(issue.size) if rng.random() < 0.45} for issue in issues]
                 for _ in range(n)]
    return Election.build(issues, approvals)


def random_corpus(seed: int, count: int, **kw) -> list[Election]:
    rng = random.Random(seed)
    return [random_election(rng, **kw) for _ in range(count)]


@st.composite
def elections(draw, n_max: int = 5, k_max: int = 4, c_max: int = 3, n_min: int = 1):
    n = draw(st.integers(n_min, n_max))
    sizes = draw(st.lists(st.integers(1, c_max), min_size=1, max_size=k_max))
    issues = [IssueSpec.make([f"c{j}" for j in range(m)], draw(st.permutations(range(m))))
              for m in sizes]
    approvals = [[draw(st.frozensets(st.integers(0, m - 1), max_size=m)) for m in sizes]
                 for _ in range(n)]
    return Election.build(issues, approvals)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    _ACCEPTANCE.setdefault(label, []).append((report.nodeid.split("::")[-1], report.outcome))


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        record_property("criterion", marker.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE):
        results = _ACCEPTANCE[label]
        ok = all(outcome == "passed" for _, outcome in results)
        failed = [name for name, outcome in results if outcome != "passed"]
        line = f"{'PASS' if ok else 'FAIL'}  criterion {label}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
