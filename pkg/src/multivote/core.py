"""Election data model for multi-issue approval voting.

An election has ``k`` issues, each with its own candidate list, and ``n``
voters who submit one approval set per issue.  Voters, issues and candidates
are dense 0-based integers; candidate labels are metadata only.

Every issue carries a tie-break permutation (earlier entries are preferred).
Outcomes are compared lexicographically by issue index, each position by that
issue's permutation, which gives all rules a single total order on outcomes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

Outcome = tuple[int, ...]
SortedSatVector = tuple[int, ...]


class ValidationError(ValueError):
    """Raised when an election, outcome or deviation breaks an invariant."""

    def __init__(self, violations: Sequence[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class IssueSpec:
    candidates: tuple[str, ...]
    tiebreak: tuple[int, ...]

    @classmethod
    def make(cls, candidates: Iterable[str], tiebreak: Iterable[int] | None = None) -> IssueSpec:
        candidates = tuple(str(c) for c in candidates)
        if tiebreak is None:
            tiebreak = range(len(candidates))
        return cls(candidates, tuple(int(t) for t in tiebreak))

    @property
    def size(self) -> int:
        return len(self.candidates)

    def rank(self) -> tuple[int, ...]:
        """Position of each candidate in the tie-break order (0 = most preferred)."""
        pos = [0] * len(self.tiebreak)
        for r, c in enumerate(self.tiebreak):
            pos[c] = r
        return tuple(pos)

    def index(self, label: str) -> int:
        return self.candidates.index(label)


@dataclass(frozen=True)
class Election:
    """``approvals[v][i]`` is voter ``v``'s approval set on issue ``i``."""

    issues: tuple[IssueSpec, ...]
    approvals: tuple[tuple[frozenset[int], ...], ...]
    _ranks: tuple[tuple[int, ...], ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_ranks", tuple(issue.rank() for issue in self.issues)
                           if _is_permutation_list(self.issues) else ())

    @classmethod
    def build(cls, issues: Sequence[IssueSpec], approvals: Sequence[Sequence[Iterable[int]]],
              check: bool = True) -> Election:
        election = cls(tuple(issues),
                       tuple(tuple(frozenset(int(c) for c in ballot) for ballot in row)
                             for row in approvals))
        if check:
            problems = validate(election)
            if problems:
                raise ValidationError(problems)
        return election

    @property
    def k(self) -> int:
        return len(self.issues)

    @property
    def n(self) -> int:
        return len(self.approvals)

    def ballot(self, voter: int, issue: int) -> frozenset[int]:
        return self.approvals[voter][issue]

    def tiebreak_rank(self, issue: int) -> tuple[int, ...]:
        return self._ranks[issue]

    def outcome_space_size(self) -> int:
        size = 1
        for issue in self.issues:
            size *= issue.size
        return size

    def labels(self, outcome: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.issues[i].candidates[c] for i, c in enumerate(outcome))

    def parse_outcome(self, labels: Sequence[str]) -> Outcome:
        if len(labels) != self.k:
            raise ValidationError(f"outcome has {len(labels)} entries, expected {self.k}")
        return tuple(self.issues[i].index(lab) for i, lab in enumerate(labels))

    # -- JSON --------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        issues = []
        for issue in self.issues:
            entry: dict[str, Any] = {"candidates": list(issue.candidates)}
            if issue.tiebreak != tuple(range(issue.size)):
                entry["tiebreak"] = list(issue.tiebreak)
            issues.append(entry)
        return {
            "issues": issues,
            "voters": self.n,
            "approvals": [[sorted(b) for b in row] for row in self.approvals],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Election:
        try:
            issues = [IssueSpec.make(spec["candidates"], spec.get("tiebreak"))
                      for spec in data["issues"]]
            approvals = data["approvals"]
            voters = int(data.get("voters", len(approvals)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed election document: {exc}") from exc
        if voters != len(approvals):
            raise ValidationError(f"'voters' is {voters} but {len(approvals)} approval rows given")
        return cls.build(issues, approvals)

    @classmethod
    def from_json(cls, text: str) -> Election:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class Deviation:
    voter: int
    replacements: Mapping[int, frozenset[int]]

    @classmethod
    def make(cls, voter: int, replacements: Mapping[int, Iterable[int]]) -> Deviation:
        return cls(int(voter), {int(i): frozenset(int(c) for c in b)
                                for i, b in sorted(replacements.items())})

    @property
    def issues(self) -> tuple[int, ...]:
        return tuple(sorted(self.replacements))

    def to_dict(self) -> dict[str, Any]:
        return {"voter": self.voter,
                "replacements": {str(i): sorted(b) for i, b in sorted(self.replacements.items())}}


def _is_permutation_list(issues: Sequence[IssueSpec]) -> bool:
    return all(sorted(issue.tiebreak) == list(range(issue.size)) for issue in issues)


def validate(election: Election) -> list[str]:
    """Return the list of invariant violations (empty when the election is valid)."""
    problems = []
    if election.k < 1:
        problems.append("election needs at least one issue")
    if election.n < 1:
        problems.append("election needs at least one voter")
    for i, issue in enumerate(election.issues):
        if issue.size == 0:
            problems.append(f"issue {i} has no candidates")
        if sorted(issue.tiebreak) != list(range(issue.size)):
            problems.append(f"issue {i}: tiebreak {list(issue.tiebreak)} is not a permutation "
                            f"of 0..{issue.size - 1}")
    for v, row in enumerate(election.approvals):
        if len(row) != election.k:
            problems.append(f"voter {v} has {len(row)} ballots, expected {election.k}")
            continue
        for i, ballot in enumerate(row):
            bad = sorted(c for c in ballot if not 0 <= c < election.issues[i].size)
            if bad:
                problems.append(f"voter {v}, issue {i}: candidate index {bad} out of range "
                                f"(issue has {election.issues[i].size} candidates)")
    return problems


def check_outcome(election: Election, outcome: Sequence[int]) -> Outcome:
    if len(outcome) != election.k:
        raise ValidationError(f"outcome has {len(outcome)} entries, expected {election.k}")
    for i, c in enumerate(outcome):
        if not 0 <= c < election.issues[i].size:
            raise ValidationError(f"outcome entry {c} out of range for issue {i}")
    return tuple(int(c) for c in outcome)


def satisfaction(election: Election, voter: int, outcome: Sequence[int]) -> int:
    if not 0 <= voter < election.n:
        raise ValidationError(f"voter {voter} out of range 0..{election.n - 1}")
    outcome = check_outcome(election, outcome)
    row = election.approvals[voter]
    return sum(1 for i, w in enumerate(outcome) if w in row[i])


def satisfactions(election: Election, outcome: Sequence[int]) -> list[int]:
    """Unsorted per-voter satisfaction, indexed by voter."""
    outcome = check_outcome(election, outcome)
    return [sum(1 for i, w in enumerate(outcome) if w in row[i]) for row in election.approvals]


def sorted_sat_vector(election: Election, outcome: Sequence[int]) -> SortedSatVector:
    return tuple(sorted(satisfactions(election, outcome)))


def apply_deviation(election: Election, deviation: Deviation) -> Election:
    if not deviation.replacements:
        raise ValidationError("deviation must replace at least one ballot")
    v = deviation.voter
    if not 0 <= v < election.n:
        raise ValidationError(f"deviation voter {v} out of range")
    row = list(election.approvals[v])
    for i, ballot in deviation.replacements.items():
        if not 0 <= i < election.k:
            raise ValidationError(f"deviation issue {i} out of range")
        if any(not 0 <= c < election.issues[i].size for c in ballot):
            raise ValidationError(f"deviation ballot {sorted(ballot)} invalid for issue {i}")
        row[i] = frozenset(ballot)
    approvals = election.approvals[:v] + (tuple(row),) + election.approvals[v + 1:]
    return Election(election.issues, approvals)


def compare_outcomes_tiebreak(a: Sequence[int], b: Sequence[int], election: Election) -> int:
    """-1 if ``a`` is preferred by tie-breaking, 1 if ``b`` is, 0 if equal."""
    a = check_outcome(election, a)
    b = check_outcome(election, b)
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            rank = election.tiebreak_rank(i)
            return -1 if rank[x] < rank[y] else 1
    return 0
