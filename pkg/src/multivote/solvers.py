"""Winner determination for optimization and sequential rules."""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass
from typing import Sequence

from .core import Election, Outcome, ValidationError, compare_outcomes_tiebreak, satisfactions
from .scoring import EPS, Key, RuleSpec, compare_keys

DEFAULT_MAX_OUTCOMES = 2 ** 24
ORACLE_MAX_OUTCOMES = 2 ** 20
BUDGET_ENV = "MULTIVOTE_BUDGET"


class BudgetExceeded(Exception):
    """The outcome space is larger than the solver budget allows."""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"instance too large: {size} outcomes exceed the budget of {cap} "
                         f"(set {BUDGET_ENV} to raise the cap)")


@dataclass(frozen=True)
class SolverBudget:
    max_outcomes: int = DEFAULT_MAX_OUTCOMES
    enable_pruning: bool = True

    def __post_init__(self):
        if self.max_outcomes < 1:
            raise ValueError("max_outcomes must be at least 1")

    @classmethod
    def from_env(cls, enable_pruning: bool = True) -> SolverBudget:
        raw = os.environ.get(BUDGET_ENV)
        if not raw:
            return cls(enable_pruning=enable_pruning)
        try:
            cap = int(float(raw))
        except ValueError as exc:
            raise ValidationError(f"{BUDGET_ENV}={raw!r} is not a number") from exc
        return cls(cap, enable_pruning)


@dataclass(frozen=True)
class RoundTrace:
    issue: int
    scores: tuple[tuple[int, Key], ...]  # (candidate, round key) in tie-break order
    winner: int


@dataclass(frozen=True)
class SolveResult:
    outcome: Outcome
    score: Key
    trace: tuple[RoundTrace, ...] | None = None


def approvers(election: Election) -> list[list[list[int]]]:
    """``approvers(e)[i][c]`` lists the voters approving candidate ``c`` on issue ``i``."""
    table = [[[] for _ in range(issue.size)] for issue in election.issues]
    for v, row in enumerate(election.approvals):
        for i, ballot in enumerate(row):
            for c in ballot:
                table[i][c].append(v)
    return table


def select_best(keyed: Sequence[tuple[int, Key]]) -> int:
    """First candidate (in the given order) whose key is maximal, column by column.

    Float columns treat values within ``EPS`` of the column maximum as tied.
    """
    alive = list(keyed)
    for col in range(len(alive[0][1])):
        top = max(key[col] for _, key in alive)
        if isinstance(top, float):
            tol = EPS * abs(top)
            alive = [(c, key) for c, key in alive if top - key[col] <= tol]
        else:
            alive = [(c, key) for c, key in alive if key[col] == top]
    return alive[0][0]


def solve(election: Election, rule: RuleSpec, budget: SolverBudget | None = None) -> SolveResult:
    if rule.sequential:
        return solve_sequential(election, rule)
    return solve_optimization(election, rule, budget)


def solve_sequential(election: Election, rule: RuleSpec) -> SolveResult:
    rule.check(election)
    app = approvers(election)
    sats = [0] * election.n
    marginal = rule.thiele.table(election.k + 1) if rule.kind == "thiele" else None
    outcome = []
    trace = []
    for i, issue in enumerate(election.issues):
        keyed = []
        for c in issue.tiebreak:
            if marginal is not None:
                key = (sum((marginal[sats[v]] for v in app[i][c]), 0),)
            else:
                trial = list(sats)
                for v in app[i][c]:
                    trial[v] += 1
                key = rule.key(trial, election)
            keyed.append((c, key))
        winner = select_best(keyed)
        for v in app[i][winner]:
            sats[v] += 1
        outcome.append(winner)
        trace.append(RoundTrace(i, tuple(keyed), winner))
    return SolveResult(tuple(outcome), rule.key(sats, election), tuple(trace))


def solve_optimization(election: Election, rule: RuleSpec,
                       budget: SolverBudget | None = None) -> SolveResult:
    """Score-maximal outcome, ties resolved towards the tie-break-minimal outcome.

    Outcomes are visited in tie-break order and only a strict improvement
    replaces the incumbent, so the first maximum found is the answer.
    """
    budget = budget or SolverBudget()
    rule.check(election)
    size = election.outcome_space_size()
    if size > budget.max_outcomes:
        raise BudgetExceeded(size, budget.max_outcomes)
    if rule.kind == "thiele":
        return _thiele_search(election, rule, budget.enable_pruning)
    return _exhaustive(election, rule)


def _exhaustive(election: Election, rule: RuleSpec) -> SolveResult:
    app = approvers(election)
    orders = [issue.tiebreak for issue in election.issues]
    k, n = election.k, election.n
    sats = [0] * n
    chosen = [0] * k
    best: list = [None, None]

    def visit(i: int) -> None:
        if i == k:
            key = rule.key(sats, election)
            if best[0] is None or compare_keys(key, best[0]) > 0:
                best[0], best[1] = key, tuple(chosen)
            return
        for c in orders[i]:
            chosen[i] = c
            for v in app[i][c]:
                sats[v] += 1
            visit(i + 1)
            for v in app[i][c]:
                sats[v] -= 1

    visit(0)
    return SolveResult(best[1], best[0])


def _thiele_search(election: Election, rule: RuleSpec, prune: bool) -> SolveResult:
    # Bound on issues i.. given current satisfactions: each issue's best marginal.
    # Satisfactions only grow and f is nonincreasing, so the bound is admissible.
    app = approvers(election)
    orders = [issue.tiebreak for issue in election.issues]
    marginal = rule.thiele.table(election.k + 1)
    k = election.k
    sats = [0] * election.n
    chosen = [0] * k
    best: list = [None, None]

    def bound(start: int):
        total = 0
        for j in range(start, k):
            total = total + max(sum((marginal[sats[v]] for v in voters), 0) for voters in app[j])
        return total

    def visit(i: int, score) -> None:
        if i == k:
            if best[0] is None or compare_keys((score,), (best[0],)) > 0:
                best[0], best[1] = score, tuple(chosen)
            return
        if prune and best[0] is not None and score + bound(i) <= best[0]:
            return
        for c in orders[i]:
            chosen[i] = c
            gain = sum((marginal[sats[v]] for v in app[i][c]), 0)
            for v in app[i][c]:
                sats[v] += 1
            visit(i + 1, score + gain)
            for v in app[i][c]:
                sats[v] -= 1

    visit(0, 0)
    return SolveResult(best[1], (best[0],))


def winner_of_issue(election: Election, rule: RuleSpec, issue: int, candidate: int,
                    budget: SolverBudget | None = None) -> bool:
    if not 0 <= issue < election.k:
        raise ValidationError(f"issue {issue} out of range")
    if not 0 <= candidate < election.issues[issue].size:
        raise ValidationError(f"candidate {candidate} out of range for issue {issue}")
    return solve(election, rule, budget).outcome[issue] == candidate


def brute_force_oracle(election: Election, rule: RuleSpec) -> SolveResult:
    """Plain enumeration of every outcome; independent reference for tests."""
    rule.check(election)
    size = election.outcome_space_size()
    if size > ORACLE_MAX_OUTCOMES:
        raise BudgetExceeded(size, ORACLE_MAX_OUTCOMES)
    scored = []
    for outcome in itertools.product(*(range(issue.size) for issue in election.issues)):
        scored.append((outcome, rule.key(satisfactions(election, outcome), election)))
    top = scored[0][1]
    for _, key in scored:
        if compare_keys(key, top) > 0:
            top = key
    winners = [o for o, key in scored if compare_keys(key, top) == 0]
    order = functools.cmp_to_key(lambda a, b: compare_outcomes_tiebreak(a, b, election))
    outcome = min(winners, key=order)
    return SolveResult(outcome, dict(scored)[outcome])
