"""Free-riding: detection, enumeration, classification and audits.

A voter free-rides on issue ``i`` by dropping the truthful winner ``w_i``
from her ballot while ``w_i`` still wins.  The generalized variant only asks
that the new winner of ``i`` is still truthfully approved.  The effect is
always measured against the voter's truthful ballots.

For sequential rules a single ballot needs testing: with ``B = {}`` every
other candidate of the issue has its lowest possible round score while the
winner's score does not depend on ``B``, so ``w_i`` survives some ballot iff
it survives the empty one, and once it survives the later rounds see the
same satisfactions whatever ``B`` was.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from .core import Deviation, Election, Outcome, ValidationError, apply_deviation, satisfaction
from .scoring import RuleSpec
from .solvers import BudgetExceeded, SolverBudget, solve

SUCCESSFUL = "successful"
HARMFUL = "harmful"
NEUTRAL = "neutral"

DEFAULT_CANDIDATE_CAP = 12
DEFAULT_DEVIATION_CAP = 2 ** 16


class SearchTooLarge(BudgetExceeded):
    def __init__(self, what: str, size: int, cap: int):
        self.size = size
        self.cap = cap
        Exception.__init__(self, f"free-riding search too large: {what} is {size}, cap is {cap}")


def classify(delta_sat: int) -> str:
    if delta_sat > 0:
        return SUCCESSFUL
    if delta_sat < 0:
        return HARMFUL
    return NEUTRAL


@dataclass(frozen=True)
class FreeRideFinding:
    voter: int
    issues: tuple[int, ...]
    deviation: Deviation
    truthful_outcome: Outcome
    deviated_outcome: Outcome
    delta_sat: int
    kind: str
    generalized: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "voter": self.voter,
            "issues": list(self.issues),
            "ballots": {str(i): sorted(b) for i, b in sorted(self.deviation.replacements.items())},
            "truthful_outcome": list(self.truthful_outcome),
            "deviated_outcome": list(self.deviated_outcome),
            "delta_sat": self.delta_sat,
            "class": self.kind,
            "generalized": self.generalized,
        }


def is_free_ride(election: Election, rule: RuleSpec, deviation: Deviation,
                 generalized: bool = False, budget: SolverBudget | None = None,
                 truthful: Outcome | None = None) -> FreeRideFinding | None:
    """Check the free-riding conditions for ``deviation``; ``None`` if they fail."""
    if truthful is None:
        truthful = solve(election, rule, budget).outcome
    v = deviation.voter
    row = election.approvals[v] if 0 <= v < election.n else None
    if row is None:
        raise ValidationError(f"voter {v} out of range")
    for i, ballot in deviation.replacements.items():
        if truthful[i] not in row[i] or truthful[i] in ballot:
            return None
    deviated = solve(apply_deviation(election, deviation), rule, budget).outcome
    for i in deviation.replacements:
        if generalized:
            if deviated[i] not in row[i]:
                return None
        elif deviated[i] != truthful[i]:
            return None
    delta = satisfaction(election, v, deviated) - satisfaction(election, v, truthful)
    return FreeRideFinding(v, deviation.issues, deviation, truthful, deviated, delta,
                           classify(delta), generalized)


def fast_path_applies(rule: RuleSpec, generalized: bool) -> bool:
    if not rule.sequential or generalized:
        return False
    if rule.kind == "owa":
        return all(w >= 0 for w in rule.owa.weights)
    return True


def _ballots(election: Election, issue: int, winner: int, cap: int) -> Iterator[frozenset[int]]:
    others = [c for c in range(election.issues[issue].size) if c != winner]
    if len(others) + 1 > cap:
        raise SearchTooLarge(f"issue {issue} candidate count", len(others) + 1, cap)
    for size in range(len(others) + 1):
        for combo in itertools.combinations(others, size):
            yield frozenset(combo)


def find_free_rides(election: Election, rule: RuleSpec, voter: int, issue: int,
                    generalized: bool = False, budget: SolverBudget | None = None,
                    fast: bool = True, distinct: bool = True,
                    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
                    truthful: Outcome | None = None) -> list[FreeRideFinding]:
    """All single-issue free-rides of ``voter`` on ``issue``.

    Ballots are tried smallest first.  With ``distinct`` only the first ballot
    per resulting outcome is reported.
    """
    if not 0 <= voter < election.n:
        raise ValidationError(f"voter {voter} out of range")
    if not 0 <= issue < election.k:
        raise ValidationError(f"issue {issue} out of range")
    if truthful is None:
        truthful = solve(election, rule, budget).outcome
    winner = truthful[issue]
    if winner not in election.approvals[voter][issue]:
        return []
    if fast and fast_path_applies(rule, generalized):
        ballots: Sequence[frozenset[int]] | Iterator[frozenset[int]] = [frozenset()]
    else:
        ballots = _ballots(election, issue, winner, candidate_cap)
    found = []
    seen = set()
    for ballot in ballots:
        finding = is_free_ride(election, rule, Deviation(voter, {issue: ballot}),
                               generalized, budget, truthful)
        if finding is None:
            continue
        if distinct:
            if finding.deviated_outcome in seen:
                continue
            seen.add(finding.deviated_outcome)
        found.append(finding)
    return found


def recognize_free_riding(election: Election, rule: RuleSpec, voter: int, issue: int,
                          generalized: bool = False, budget: SolverBudget | None = None) -> bool:
    return bool(find_free_rides(election, rule, voter, issue, generalized, budget))


def can_manipulate_by_free_riding(election: Election, rule: RuleSpec, voter: int,
                                  generalized: bool = False, single_issue_only: bool = False,
                                  budget: SolverBudget | None = None,
                                  deviation_cap: int = DEFAULT_DEVIATION_CAP
                                  ) -> tuple[bool, FreeRideFinding | None]:
    """Search for a free-ride that raises the voter's truthful satisfaction."""
    truthful = solve(election, rule, budget).outcome
    row = election.approvals[voter]
    eligible = [i for i in range(election.k) if truthful[i] in row[i]]
    if single_issue_only:
        for i in eligible:
            for finding in find_free_rides(election, rule, voter, i, generalized, budget,
                                           truthful=truthful):
                if finding.kind == SUCCESSFUL:
                    return True, finding
        return False, None

    fast = fast_path_applies(rule, generalized)
    options = {}
    for i in eligible:
        options[i] = [frozenset()] if fast else list(_ballots(election, i, truthful[i],
                                                               DEFAULT_CANDIDATE_CAP))
    total = 0
    for size in range(1, len(eligible) + 1):
        for subset in itertools.combinations(eligible, size):
            count = 1
            for i in subset:
                count *= len(options[i])
            total += count
    if total > deviation_cap:
        raise SearchTooLarge("number of candidate deviations", total, deviation_cap)
    for size in range(1, len(eligible) + 1):
        for subset in itertools.combinations(eligible, size):
            for combo in itertools.product(*(options[i] for i in subset)):
                deviation = Deviation(voter, dict(zip(subset, combo)))
                finding = is_free_ride(election, rule, deviation, generalized, budget, truthful)
                if finding is not None and finding.kind == SUCCESSFUL:
                    return True, finding
    return False, None


@dataclass(frozen=True)
class PairAudit:
    voter: int
    issue: int
    successful: bool
    harmful: bool
    findings: tuple[FreeRideFinding, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class AuditReport:
    rule: str
    pairs: tuple[PairAudit, ...]

    def pair(self, voter: int, issue: int) -> PairAudit:
        for p in self.pairs:
            if p.voter == voter and p.issue == issue:
                return p
        raise KeyError((voter, issue))

    def voter_counts(self) -> dict[int, tuple[int, int]]:
        """voter -> (issues with successful free-riding, issues with harmful free-riding)."""
        counts: dict[int, list[int]] = {}
        for p in self.pairs:
            c = counts.setdefault(p.voter, [0, 0])
            c[0] += p.successful
            c[1] += p.harmful
        return {v: (s, h) for v, (s, h) in counts.items()}

    def to_dict(self) -> dict[str, Any]:
        return {
            "pairs": [{"voter": p.voter, "issue": p.issue,
                       "successful": p.successful, "harmful": p.harmful} for p in self.pairs],
            "rule": self.rule,
        }


def audit_election(election: Election, rule: RuleSpec, generalized: bool = False,
                   budget: SolverBudget | None = None) -> AuditReport:
    truthful = solve(election, rule, budget).outcome
    pairs = []
    for v in range(election.n):
        for i in range(election.k):
            findings = tuple(find_free_rides(election, rule, v, i, generalized, budget,
                                             truthful=truthful))
            kinds = {f.kind for f in findings}
            pairs.append(PairAudit(v, i, SUCCESSFUL in kinds, HARMFUL in kinds, findings))
    return AuditReport(str(rule), tuple(pairs))
