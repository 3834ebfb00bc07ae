"""2d-Euclidean simulations of single-issue free-riding under sequential rules.

Voters and candidates are uniform points in the unit square; voter points are
shared by all issues and candidates are drawn per issue.  A voter approves
every candidate within ``slack`` times her distance to the closest one.

Randomness comes from numpy's Philox4x64 counter-based generator keyed by
``(seed mod 2**64) << 64 | election_index``, so every election has its own
stream and results do not depend on how elections are spread over workers.

For each (voter, issue) pair the auditor applies the empty-ballot free-ride
(see :mod:`multivote.freeride` for why one ballot suffices for sequential
rules) and classifies the change in the voter's truthful satisfaction.
All deviations of one election are simulated together as a numpy batch.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .core import Election, IssueSpec
from .freeride import audit_election
from .scoring import EPS, RuleSpec, parse_rule

CSV_COLUMNS = ("family", "x", "q1", "q2", "q3", "elections", "eligible_voters")
THIELE_GRID = tuple(i / 4 for i in range(13))


@dataclass(frozen=True)
class GeometryConfig:
    n: int = 20
    k: int = 20
    m: int = 4
    slack: float = 1.2
    seed: int = 0

    def __post_init__(self):
        if min(self.n, self.k, self.m) < 1:
            raise ValueError("n, k and m must be at least 1")
        if self.slack < 1:
            raise ValueError("slack must be at least 1")


def default_rules(n: int) -> tuple[str, ...]:
    thiele = tuple(f"thiele:pow:{x:g}@seq" for x in THIELE_GRID)
    owa = tuple(f"owa:hybrid:{x}@seq" for x in range(n))
    return thiele + owa


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    elections: int = 1000
    rules: tuple[str, ...] = ()
    jobs: int = 1
    pooled_q3: bool = False

    def __post_init__(self):
        if self.elections < 1:
            raise ValueError("need at least one election")
        if not self.rules:
            object.__setattr__(self, "rules", default_rules(self.geometry.n))
        for text in self.rules:
            if not parse_rule(text, "seq").sequential:
                raise ValueError(f"simulations use sequential rules only, got {text!r}")

    def parsed_rules(self) -> list[RuleSpec]:
        return [parse_rule(text, "seq") for text in self.rules]


@dataclass(frozen=True)
class MetricsRow:
    family: str
    x: float | int | None
    q1: float
    q2: float
    q3: float
    elections: int
    eligible_voters: int


@dataclass(frozen=True)
class ExperimentResult:
    rows: list[MetricsRow]
    rules: tuple[str, ...]
    counts: np.ndarray  # (elections, rules, voters, 2): successful / harmful issue counts

    def records(self) -> Iterable[dict]:
        for e in range(self.counts.shape[0]):
            for r, rule in enumerate(self.rules):
                for v in range(self.counts.shape[2]):
                    s, h = self.counts[e, r, v]
                    yield {"election": e, "rule": rule, "voter": v,
                           "successful": int(s), "harmful": int(h)}


# -- sampling -------------------------------------------------------------


def _rng(seed: int, index: int) -> np.random.Generator:
    key = ((seed % 2 ** 64) << 64) | (index % 2 ** 64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_approvals(config: GeometryConfig, index: int) -> np.ndarray:
    """Boolean array ``(k, m, n)``: does voter ``v`` approve candidate ``c`` of issue ``i``."""
    rng = _rng(config.seed, index)
    voters = rng.random((config.n, 2))
    candidates = rng.random((config.k, config.m, 2))
    d2 = ((candidates[:, :, None, :] - voters[None, None, :, :]) ** 2).sum(-1)
    closest = d2.min(axis=1, keepdims=True)
    return d2 <= config.slack ** 2 * closest


def election_from_array(approvals: np.ndarray) -> Election:
    k, m, n = approvals.shape
    issues = [IssueSpec.make([f"c{j}" for j in range(m)])] * k
    rows = [[np.flatnonzero(approvals[i, :, v]).tolist() for i in range(k)] for v in range(n)]
    return Election.build(issues, rows)


def sample_election(config: GeometryConfig, index: int) -> Election:
    return election_from_array(sample_approvals(config, index))


# -- batched sequential auditing ------------------------------------------


def _to_array(election: Election) -> tuple[np.ndarray, np.ndarray]:
    """Approvals ``(k, m, n)`` with candidates in tie-break order, and a validity mask."""
    m = max(issue.size for issue in election.issues)
    a = np.zeros((election.k, m, election.n), dtype=bool)
    valid = np.zeros((election.k, m), dtype=bool)
    for i, issue in enumerate(election.issues):
        pos = issue.rank()
        valid[i, :issue.size] = True
        for v, row in enumerate(election.approvals):
            for c in row[i]:
                a[i, pos[c], v] = True
    return a, valid


class _RoundScorer:
    """Vectorized round keys of a sequential rule: ``(D, m, n)`` trial satisfactions -> key columns."""

    def __init__(self, rule: RuleSpec, n: int, k: int):
        if rule.kind == "owa" and len(rule.owa) != n:
            raise ValueError(f"OWA vector has length {len(rule.owa)} but there are {n} voters")
        if rule.kind == "comparator" and rule.comparator == "hybrid" and rule.x > n - 1:
            raise ValueError(f"hybrid parameter x={rule.x} exceeds n-1={n - 1}")
        self.rule = rule
        self.n = n
        self.thiele = None
        self.weights = None
        if rule.kind == "thiele":
            self.thiele = np.array([float(v) for v in rule.thiele.table(k + 1)] + [0.0])
        elif rule.kind == "owa":
            self.weights = np.array([float(w) for w in rule.owa.weights])
        elif rule.comparator == "egal":
            self.split = 1
            self.tail = False
        else:
            x = rule.x if rule.comparator == "hybrid" else n - 1
            self.split = n - x
            self.tail = True

    def keys(self, sats: np.ndarray, approve: np.ndarray, dev_rows: np.ndarray,
             dev_voters: np.ndarray) -> tuple[list[np.ndarray], bool]:
        """Key columns ``(D, m)`` for one round; ``approve`` is ``(m, n)``."""
        if self.thiele is not None:
            marg = self.thiele[sats]
            scores = marg @ approve.T.astype(float)
            if dev_rows.size:
                scores[dev_rows] -= marg[dev_rows, dev_voters][:, None] * approve[:, dev_voters].T
            return [scores], True
        trial = sats[:, None, :] + approve[None, :, :]
        if dev_rows.size:
            trial[dev_rows, :, dev_voters] -= approve[:, dev_voters].T
        trial.sort(axis=2)
        if self.weights is not None:
            return [trial @ self.weights], True
        cols = [trial[:, :, :self.split].sum(axis=2)]
        if self.tail:
            cols.extend(trial[:, :, j] for j in range(self.split, self.n))
        return cols, False


def _pick(columns: list[np.ndarray], is_float: bool, valid: np.ndarray) -> np.ndarray:
    alive = np.broadcast_to(valid, columns[0].shape).copy()
    for col in columns:
        vals = np.where(alive, col, -np.inf)
        top = vals.max(axis=1, keepdims=True)
        if is_float:
            alive &= vals >= top - EPS * np.abs(top)
        else:
            alive &= vals == top
    return alive.argmax(axis=1)


def _run_batch(a: np.ndarray, valid: np.ndarray, scorer: _RoundScorer, dev_voter: np.ndarray,
               dev_issue: np.ndarray, start: list[np.ndarray] | None) -> np.ndarray:
    """Sequential outcomes for a batch; row ``d`` drops voter ``dev_voter[d]`` on ``dev_issue[d]``.

    Rows must be sorted by ``dev_issue``.  Row ``d`` equals the truthful run
    before its issue, so it joins at that round from ``start[issue]``.
    """
    k, m, n = a.shape
    rows = dev_voter.shape[0]
    sats = np.zeros((rows, n), dtype=np.int64)
    outcome = np.zeros((rows, k), dtype=np.int64)
    for r in range(k):
        end = int(np.searchsorted(dev_issue, r, side="right"))
        if end == 0:
            continue
        if start is not None:
            joining = slice(int(np.searchsorted(dev_issue, r, side="left")), end)
            sats[joining] = start[r]
            outcome[joining, :r] = start[k][:r]
        active = sats[:end]
        hit = np.flatnonzero(dev_issue[:end] == r)
        voters = dev_voter[hit]
        cols, is_float = scorer.keys(active, a[r], hit, voters)
        winner = _pick(cols, is_float, valid[r])
        active += a[r][winner]
        if hit.size:
            active[hit, voters] -= a[r][winner[hit], voters]
        outcome[:end, r] = winner
    return outcome


def batch_audit(election: Election | np.ndarray, rule: RuleSpec) -> np.ndarray:
    """Per-voter ``(successful issues, harmful issues)`` counts, shape ``(n, 2)``.

    Accepts an :class:`Election` or a ``(k, m, n)`` approval array whose
    candidate axis is already in tie-break order.
    """
    if isinstance(election, Election):
        a, valid = _to_array(election)
    else:
        a = np.asarray(election, dtype=bool)
        valid = np.ones(a.shape[:2], dtype=bool)
    k, m, n = a.shape
    scorer = _RoundScorer(rule, n, k)
    ai = a.astype(np.int64)

    none = np.full(1, -1, dtype=np.int64)
    truthful = _run_batch(ai, valid, scorer, none, none, None)[0]
    prefix = [np.zeros(n, dtype=np.int64)]
    for r in range(k):
        prefix.append(prefix[-1] + ai[r, truthful[r]])
    start = prefix[:k] + [truthful]

    issues_idx, voters_idx = np.nonzero(a[np.arange(k), truthful, :])
    counts = np.zeros((n, 2), dtype=np.int64)
    if issues_idx.size == 0:
        return counts
    deviated = _run_batch(ai, valid, scorer, voters_idx, issues_idx, start)
    kept = deviated[np.arange(issues_idx.size), issues_idx] == truthful[issues_idx]
    base = prefix[k][voters_idx]
    after = ai[np.arange(k)[None, :], deviated, voters_idx[:, None]].sum(axis=1)
    delta = after - base
    np.add.at(counts[:, 0], voters_idx[kept & (delta > 0)], 1)
    np.add.at(counts[:, 1], voters_idx[kept & (delta < 0)], 1)
    return counts


def audit_for_metrics(election: Election, rule: RuleSpec, method: str = "batch") -> list[tuple[int, int]]:
    """Per voter: number of issues with successful and with harmful single-issue free-riding."""
    if not rule.sequential:
        raise ValueError("metrics are defined for sequential rules")
    if method == "batch":
        return [tuple(int(c) for c in row) for row in batch_audit(election, rule)]
    if method != "reference":
        raise ValueError(f"unknown method {method!r}")
    report = audit_election(election, rule)
    counts = report.voter_counts()
    return [counts[v] for v in range(election.n)]


# -- experiment -----------------------------------------------------------


def _audit_chunk(args: tuple[GeometryConfig, tuple[str, ...], int, int]) -> np.ndarray:
    geometry, rule_texts, lo, hi = args
    rules = [parse_rule(text, "seq") for text in rule_texts]
    out = np.zeros((hi - lo, len(rules), geometry.n, 2), dtype=np.int64)
    for e in range(lo, hi):
        approvals = sample_approvals(geometry, e)
        for r, rule in enumerate(rules):
            out[e - lo, r] = batch_audit(approvals, rule)
    return out


def rule_coordinates(rule: RuleSpec, n: int) -> tuple[str, float | int | None]:
    """Family name and parameter ``x`` used for reporting a rule."""
    if rule.kind == "thiele":
        f = rule.thiele
        if f.name == "util":
            return "thiele", 0.0
        if f.name == "pav":
            return "thiele", 1.0
        if f.name == "pow":
            return "thiele", float(f.param)
        return f"thiele-{f.name}", None
    if rule.kind == "comparator":
        if rule.comparator == "hybrid":
            return "owa", int(rule.x)
        if rule.comparator == "leximin":
            return "owa", n - 1
        return "owa-egal", None
    return "owa-vec", None


def summarize(counts: np.ndarray, pooled_q3: bool = False) -> tuple[float, float, float, int]:
    """Q1, Q2, Q3 and number of eligible (election, voter) pairs from ``(E, n, 2)`` counts."""
    succ, harm = counts[..., 0], counts[..., 1]
    q1 = float(np.mean((succ > 0).mean(axis=1)))
    q2 = float(np.mean((harm > 0).mean(axis=1)))
    eligible = (succ + harm) > 0
    total = succ + harm
    risk = np.divide(harm, total, out=np.zeros(harm.shape, dtype=float), where=eligible)
    if pooled_q3:
        q3 = float(risk[eligible].mean()) if eligible.any() else 0.0
    else:
        per_election = [float(risk[e][eligible[e]].mean())
                        for e in range(counts.shape[0]) if eligible[e].any()]
        q3 = float(np.mean(per_election)) if per_election else 0.0
    return q1, q2, q3, int(eligible.sum())


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    g = config.geometry
    jobs = max(1, config.jobs)
    chunk = max(1, -(-config.elections // (jobs * 4)))
    tasks = [(g, tuple(config.rules), lo, min(lo + chunk, config.elections))
             for lo in range(0, config.elections, chunk)]
    if jobs == 1:
        parts = [_audit_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_audit_chunk, tasks))
    counts = np.concatenate(parts, axis=0)
    rows = []
    for r, rule in enumerate(config.parsed_rules()):
        family, x = rule_coordinates(rule, g.n)
        q1, q2, q3, eligible = summarize(counts[:, r], config.pooled_q3)
        rows.append(MetricsRow(family, x, q1, q2, q3, config.elections, eligible))
    return ExperimentResult(rows, tuple(config.rules), counts)


# -- output ---------------------------------------------------------------


def _fmt_x(x) -> str:
    return "" if x is None else repr(x)


def emit_csv(rows: Sequence[MetricsRow]) -> bytes:
    if not rows:
        raise ValueError("no metrics rows to write")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([row.family, _fmt_x(row.x), repr(row.q1), repr(row.q2), repr(row.q3),
                         row.elections, row.eligible_voters])
    return buf.getvalue().encode()


def parse_csv(data: bytes | str) -> list[MetricsRow]:
    text = data.decode() if isinstance(data, bytes) else data
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        x_text = rec["x"]
        x = None if x_text == "" else int(x_text) if x_text.lstrip("-").isdigit() else float(x_text)
        rows.append(MetricsRow(rec["family"], x, float(rec["q1"]), float(rec["q2"]),
                               float(rec["q3"]), int(rec["elections"]),
                               int(rec["eligible_voters"])))
    return rows


def write_records(result: ExperimentResult, fh: IO[str]) -> None:
    for rec in result.records():
        fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def emit_svg_plot(rows: Sequence[MetricsRow]) -> bytes:
    from .plotting import render_metrics

    return render_metrics(rows, "svg")
