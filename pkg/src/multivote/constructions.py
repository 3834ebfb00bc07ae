"""Hand-built elections that exhibit free-riding, with their expected outcomes.

Voters and issues are 0-based in code; the docstrings number them from 1
("voter 1" is index 0).  Letter candidates are indexed alphabetically
(a=0, b=1, ...); candidates ``a1..an`` by subscript (a1=0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .core import Deviation, Election, IssueSpec, Outcome
from .freeride import HARMFUL, SUCCESSFUL
from .scoring import (RuleSpec, Score, ThieleFunction, comparator_rule, owa_family_vector,
                      owa_rule, pav_f, thiele_rule)


@dataclass(frozen=True)
class Fixture:
    name: str
    election: Election
    rule: RuleSpec | None
    expected_truthful: Outcome | None = None
    deviation: Deviation | None = None
    expected_deviated: Outcome | None = None
    expected_class: str | None = None
    expected_outcomes: Mapping[str, Outcome] = field(default_factory=dict)
    notes: str = ""

    def to_dict(self) -> dict[str, Any]:
        e = self.election
        out: dict[str, Any] = {"name": self.name, "election": e.to_dict()}
        if self.rule is not None:
            out["rule"] = str(self.rule)
        if self.expected_truthful is not None:
            out["expected_truthful"] = list(e.labels(self.expected_truthful))
        if self.deviation is not None:
            out["deviation"] = self.deviation.to_dict()
            out["expected_deviated"] = list(e.labels(self.expected_deviated))
            out["expected_class"] = self.expected_class
        if self.expected_outcomes:
            out["expected_outcomes"] = {r: list(e.labels(o))
                                        for r, o in self.expected_outcomes.items()}
        if self.notes:
            out["notes"] = self.notes
        return out


def _letters(count: int) -> list[str]:
    return [chr(ord("a") + j) for j in range(count)]


def _election(candidates: Sequence[Sequence[str]], ballots: Sequence[Sequence[str | set]],
              tiebreaks: Sequence[Sequence[int]] | None = None) -> Election:
    """``ballots[v][i]`` is a label, or a set of labels, approved by ``v`` on issue ``i``."""
    issues = [IssueSpec.make(cands, None if tiebreaks is None else tiebreaks[i])
              for i, cands in enumerate(candidates)]
    approvals = []
    for row in ballots:
        approvals.append([{issues[i].index(lab) for lab in ([b] if isinstance(b, str) else b)}
                          for i, b in enumerate(row)])
    return Election.build(issues, approvals)


def _idx(election: Election, labels: Sequence[str]) -> Outcome:
    return election.parse_outcome(labels)


def _first_drop(f: ThieleFunction, start: int, limit: int = 4096) -> int:
    """Smallest ``j >= start`` with ``f(j-1) > f(j)``."""
    table = f.table(limit)
    for j in range(max(start, 2), limit + 1):
        if table[j - 2] > table[j - 1]:
            return j
    raise ValueError(f"Thiele function {f.spec()} never decreases: the rule is utilitarian")


def _owa_weights(rule: RuleSpec, n: int, k: int) -> tuple[Score, ...]:
    if rule.kind == "owa":
        return rule.owa.weights
    if rule.kind != "comparator":
        raise ValueError("an OWA rule is required")
    if rule.comparator == "hybrid":
        return owa_family_vector("hybrid", n, k, rule.x).weights
    return owa_family_vector(rule.comparator, n, k).weights


# -- running example ------------------------------------------------------


def running_example() -> Fixture:
    """100 voters, 4 issues over {a, b, c}: 66 always approve a, 33 b, one c."""
    ballots = [["a"] * 4] * 66 + [["b"] * 4] * 33 + [["c"] * 4]
    e = _election([_letters(3)] * 4, ballots)
    expected = {
        "thiele:util@opt": _idx(e, "aaaa"),
        "owa:hybrid:0@opt": _idx(e, "aaaa"),
        "owa:leximin@opt": _idx(e, "aabc"),
        "owa:egal@opt": _idx(e, "aabc"),
        "thiele:pav@opt": _idx(e, "aaab"),
        "thiele:pav@seq": _idx(e, "aaba"),
    }
    return Fixture("running-example", e, comparator_rule("leximin"), _idx(e, "aabc"),
                   expected_outcomes=expected,
                   notes="voters 0-65 approve a, 66-98 approve b, 99 approves c on every issue")


def egal_free_ride_example(voter: int = 1) -> Fixture:
    """Three voters, two issues; issue 1 is unanimous for a, issue 2 split x/y/z.

    Voter 2 (or 3) drops a on issue 1 in favour of b and the egalitarian
    optimum moves to her candidate on issue 2.
    """
    if voter not in (1, 2):
        raise ValueError("only voters 1 and 2 (0-based) can free-ride here")
    e = _election([["a", "b"], ["x", "y", "z"]], [["a", "x"], ["a", "y"], ["a", "z"]])
    deviation = Deviation.make(voter, {0: [e.issues[0].index("b")]})
    return Fixture("egal-free-ride", e, comparator_rule("egal"), _idx(e, ["a", "x"]), deviation,
                   _idx(e, ["a", "y" if voter == 1 else "z"]), SUCCESSFUL)


# -- manipulability witnesses ---------------------------------------------


def _thiele_witness(f: ThieleFunction) -> tuple[Election, int]:
    # k = first index with f(k-1) > f(k).  Using k unanimous issues needs
    # f(k) > f(k+1) at the contested issue; k-1 unanimous issues always work.
    k = _first_drop(f, 2)
    unanimous = k if f(k) > f(k + 1) else k - 1
    ballots = [["a"] * unanimous + [last] for last in ("b", "b", "a", "a")]
    return _election([["a", "b"]] * (unanimous + 1), ballots), unanimous


def seq_thiele_manipulation(f: ThieleFunction | None = None) -> Fixture:
    """Four voters approve a on the first issues; the last issue splits 2-2.

    Voter 1 drops a on the first issue; her lower satisfaction makes b win the
    contested issue.
    """
    f = f or pav_f()
    e, u = _thiele_witness(f)
    deviation = Deviation.make(0, {0: [1]})
    return Fixture("seq-thiele-manipulation", e, thiele_rule(f, "seq"), (0,) * (u + 1),
                   deviation, (0,) * u + (1,), SUCCESSFUL)


def opt_thiele_manipulation(f: ThieleFunction | None = None) -> Fixture:
    """Same election as the sequential case; voter 1 drops a on the last unanimous issue."""
    f = f or pav_f()
    e, u = _thiele_witness(f)
    deviation = Deviation.make(0, {u - 1: [1]})
    return Fixture("opt-thiele-manipulation", e, thiele_rule(f, "opt"), (0,) * (u + 1),
                   deviation, (0,) * u + (1,), SUCCESSFUL)


def _owa_witness(voters: int) -> Election:
    if voters < 2:
        raise ValueError("need at least two voters")
    cands = [f"a{j + 1}" for j in range(voters)]
    ballots = [["a1", "a1"], ["a1", "a2"]]
    ballots += [[f"a{v + 1}", {"a1", "a2"}] for v in range(2, voters)]
    return _election([cands, cands], ballots)


def _require_owa_gap(rule: RuleSpec, voters: int) -> None:
    w = _owa_weights(rule, voters, 2)
    if len(w) != voters:
        raise ValueError(f"OWA vector has length {len(w)}, construction needs {voters}")
    if not w[0] > w[-1]:
        raise ValueError("construction needs alpha_1 > alpha_n (rule must not be utilitarian)")


def owa_manipulation(rule: RuleSpec | None = None, voters: int = 3) -> Fixture:
    """Two issues over a1..ak with k voters; voter 2 swaps a1 for a2 on issue 1."""
    rule = (rule or comparator_rule("egal")).with_mode("opt")
    _require_owa_gap(rule, voters)
    e = _owa_witness(voters)
    deviation = Deviation.make(1, {0: [1]})
    return Fixture("owa-manipulation", e, rule, (0, 0), deviation, (0, 1), SUCCESSFUL)


def seq_owa_manipulation(rule: RuleSpec | None = None, voters: int = 3) -> Fixture:
    """Sequential variant of :func:`owa_manipulation` on the same election."""
    rule = (rule or comparator_rule("egal")).with_mode("seq")
    _require_owa_gap(rule, voters)
    e = _owa_witness(voters)
    deviation = Deviation.make(1, {0: [1]})
    return Fixture("seq-owa-manipulation", e, rule, (0, 0), deviation, (0, 1), SUCCESSFUL)


# -- harmful free-riding --------------------------------------------------


def seq_thiele_harmful(f: ThieleFunction | None = None) -> Fixture:
    """Nine voters over candidates a..g; i-1 unanimous issues then four more.

    ``i`` is the first index with f(i) > f(i+1).  Voter 1 free-rides on issue
    ``i`` (empty ballot); b then wins issue i+1 but she loses issues i+2 and
    i+3.
    """
    f = f or pav_f()
    i = _first_drop(f, 2) - 1
    rows = [
        ["a", "a", "a", "b", "b", "c", "d", "e", "f"],
        ["b", "a", "c", "b", "b", "a", "a", "a", "b"],
        ["b", "a", "c", "b", "e", "a", "f", {"a", "b"}, "g"],
        ["b", "c", "d", "e", "b", "f", "a", "a", "g"],
    ]
    ballots = [["a"] * (i - 1) + [rows[j][v] for j in range(4)] for v in range(9)]
    e = _election([_letters(7)] * (i + 3), ballots)
    prefix = "a" * (i - 1)
    deviation = Deviation.make(0, {i - 1: []})
    return Fixture("seq-thiele-harmful", e, thiele_rule(f, "seq"), _idx(e, prefix + "aabb"),
                   deviation, _idx(e, prefix + "abaa"), HARMFUL)


def seq_owa_harmful(n: int = 8, rule: RuleSpec | None = None) -> Fixture:
    """Four issues, n >= 8 voters, candidates a1..an, higher index wins ties.

    Requires a nonincreasing alpha with alpha_3 > alpha_{n-2}; the default is
    alpha = (1, 1, 1, 0, ..., 0).  Voter n switches from an to a1 on issue 1.
    """
    if n < 8:
        raise ValueError("construction needs n >= 8")
    rule = (rule or owa_rule([1, 1, 1] + [0] * (n - 3))).with_mode("seq")
    w = _owa_weights(rule, n, 4)
    if len(w) != n:
        raise ValueError(f"OWA vector has length {len(w)}, construction needs {n}")
    if any(w[j] < w[j + 1] for j in range(n - 1)):
        raise ValueError("construction needs a nonincreasing OWA vector")
    if not w[2] > w[n - 3]:
        raise ValueError("construction needs alpha_3 > alpha_{n-2}")

    def a(j: int) -> str:
        return f"a{j}"

    ballots: list[list[str]] = [[] for _ in range(n)]
    for v in range(1, n + 1):
        b = ballots[v - 1]
        b.append(a(n) if 3 <= v <= n - 3 or v == n else a(v))
        b.append(a(n) if v <= 3 else a(1) if v >= n - 2 else a(v))
        b.append(a(4) if v in (1, 4) else a(n) if v in (n - 1, n) else a(v))
        b.append(a(2) if v in (2, 3) else a(n) if v in (n - 2, n) else a(v))
    candidates = []
    for i in range(4):
        used = sorted({int(b[i][1:]) for b in ballots})
        candidates.append([a(j) for j in used])
    tiebreaks = [list(range(len(c)))[::-1] for c in candidates]
    e = _election(candidates, ballots, tiebreaks)
    deviation = Deviation.make(n - 1, {0: [e.issues[0].index(a(1))]})
    return Fixture("seq-owa-harmful", e, rule, _idx(e, [a(n)] * 4), deviation,
                   _idx(e, [a(n), a(1), a(4), a(2)]), HARMFUL,
                   notes="candidate sets hold only approved candidates; ties prefer higher index")


def seq_egal_harmful() -> Fixture:
    """Five voters, five issues over {a, b, c}; voter 1 free-rides on issue 2."""
    table = ["babbb", "baaba", "baacb", "aabab", "aabab"]
    e = _election([_letters(3)] * 5, [list(row) for row in table])
    deviation = Deviation.make(0, {1: [e.issues[1].index("b")]})
    return Fixture("seq-egal-harmful", e, comparator_rule("egal", "seq"), _idx(e, "aaabb"),
                   deviation, _idx(e, "aabaa"), HARMFUL)


FIXTURES: dict[str, Callable[[], Fixture]] = {
    "running-example": running_example,
    "egal-free-ride": egal_free_ride_example,
    "seq-thiele-manipulation": seq_thiele_manipulation,
    "opt-thiele-manipulation": opt_thiele_manipulation,
    "owa-manipulation": owa_manipulation,
    "seq-owa-manipulation": seq_owa_manipulation,
    "seq-thiele-harmful": seq_thiele_harmful,
    "seq-owa-harmful": seq_owa_harmful,
    "seq-egal-harmful": seq_egal_harmful,
}
