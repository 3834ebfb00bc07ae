"""Score functions, comparators and rule definitions.

Scores are either exact (``int``/``Fraction``) or ``float``.  Floats are
compared with a relative tolerance ``EPS``; two floats within it count as a
tie and tie-breaking decides.

Leximin, egalitarian and the hybrid family ``alpha_x`` are evaluated with
exact comparators on the sorted satisfaction vector instead of dot products
with tiny weights.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

from .core import Election, ValidationError, satisfactions

EPS = 1e-9

Score = int | Fraction | float
Key = tuple  # lexicographically compared, larger is better


def close(a: Score, b: Score) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= EPS * max(abs(a), abs(b))
    return a == b


def compare_scores(a: Score, b: Score) -> int:
    if close(a, b):
        return 0
    return 1 if a > b else -1


def compare_keys(a: Key, b: Key) -> int:
    """Lexicographic comparison; 1 means ``a`` is better."""
    for x, y in zip(a, b):
        c = compare_scores(x, y)
        if c:
            return c
    return (len(a) > len(b)) - (len(a) < len(b))


# -- OWA ------------------------------------------------------------------


@dataclass(frozen=True)
class OwaVector:
    weights: tuple[Score, ...]

    def __post_init__(self):
        if not self.weights:
            raise ValueError("OWA vector must be nonempty")
        if not self.weights[0] > 0:
            raise ValueError("first OWA weight must be positive")
        if any(w < 0 for w in self.weights):
            raise ValueError("OWA weights must be nonnegative")

    @classmethod
    def of(cls, weights: Sequence[Score | str]) -> OwaVector:
        return cls(tuple(_number(w) for w in weights))

    @property
    def exact(self) -> bool:
        return all(isinstance(w, Rational) for w in self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def scaled(self, factor: Score) -> OwaVector:
        return OwaVector(tuple(w * factor for w in self.weights))


def owa_score(alpha: OwaVector, s: Sequence[int]) -> Score:
    if len(alpha) != len(s):
        raise ValueError(f"OWA vector has length {len(alpha)}, satisfaction vector {len(s)}")
    return sum((w * x for w, x in zip(alpha.weights, s)), 0)


def owa_family_vector(family: str, n: int, k: int, x: int | None = None) -> OwaVector:
    """Exact weight vector for utilitarian, egalitarian, leximin or hybrid(x)."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if family in ("utilitarian", "util"):
        return OwaVector((Fraction(1, n),) * n)
    if family in ("egalitarian", "egal"):
        return OwaVector((Fraction(1),) + (Fraction(0),) * (n - 1))
    if family == "leximin":
        x = n - 1
    elif family != "hybrid":
        raise ValueError(f"unknown OWA family {family!r}")
    if x is None or not 0 <= x <= n - 1:
        raise ValueError(f"hybrid parameter x must lie in [0, {n - 1}], got {x}")
    head = (Fraction(1),) * (n - x)
    tail = tuple(Fraction(1, (k * n) ** j) for j in range(1, x + 1))
    return OwaVector(head + tail)


def leximin_compare(s: Sequence[int], t: Sequence[int]) -> int:
    if len(s) != len(t):
        raise ValueError("satisfaction vectors differ in length")
    s, t = tuple(sorted(s)), tuple(sorted(t))
    return (s > t) - (s < t)


def hybrid_key(x: int, s: Sequence[int]) -> Key:
    n = len(s)
    if not 0 <= x <= n - 1:
        raise ValueError(f"hybrid parameter x must lie in [0, {n - 1}], got {x}")
    s = sorted(s)
    return (sum(s[:n - x]),) + tuple(s[n - x:])


def hybrid_owa_compare(x: int, s: Sequence[int], t: Sequence[int]) -> int:
    if len(s) != len(t):
        raise ValueError("satisfaction vectors differ in length")
    a, b = hybrid_key(x, s), hybrid_key(x, t)
    return (a > b) - (a < b)


# -- Thiele ---------------------------------------------------------------


@dataclass(frozen=True)
class ThieleFunction:
    """A nonincreasing ``f`` with ``f(1) > 0``; ``table(k)`` holds ``f(1..k)``."""

    name: str
    param: Score | None
    func: Callable[[int], Score] = field(compare=False, repr=False)
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, i: int) -> Score:
        return self.table(i)[i - 1]

    def table(self, k: int) -> tuple[Score, ...]:
        k = max(k, 1)
        cached = self._memo.get("table")
        if cached is None or len(cached) < k:
            cached = _thiele_table(self, max(k, 2 * len(cached or ())))
            self._memo["table"] = cached
            self._memo.pop("prefix", None)
        return cached[:k]

    def prefix(self, k: int) -> tuple[Score, ...]:
        """``prefix[s] = f(1) + ... + f(s)`` for ``s`` in ``0..k``."""
        k = max(k, 1)
        cached = self._memo.get("prefix")
        if cached is None or len(cached) < k + 1:
            acc: Score = 0
            out = [acc]
            for v in self.table(k):
                acc = acc + v
                out.append(acc)
            cached = self._memo["prefix"] = tuple(out)
        return cached[:k + 1]

    @property
    def is_utilitarian(self) -> bool:
        return self.name == "util" or (self.name == "pow" and self.param == 0)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Rational) for v in self.table(2))

    def spec(self) -> str:
        if self.name == "pow":
            return f"pow:{_fmt(self.param)}"
        if self.name == "lex":
            return f"lex:{self.param}"
        return self.name


def _thiele_table(f: ThieleFunction, k: int) -> tuple[Score, ...]:
    values = tuple(f.func(i) for i in range(1, k + 1))
    if not values[0] > 0:
        raise ValueError(f"Thiele function {f.name}: f(1) must be positive")
    for i in range(1, k):
        if values[i] > values[i - 1] or values[i] < 0:
            raise ValueError(f"Thiele function {f.name} must be nonnegative and nonincreasing")
    return values


def utilitarian_f() -> ThieleFunction:
    return ThieleFunction("util", None, lambda i: 1)


def pav_f() -> ThieleFunction:
    return ThieleFunction("pav", None, lambda i: Fraction(1, i))


def power_f(x: float | int | Fraction) -> ThieleFunction:
    """``f(i) = i**-x``; exact whenever ``x`` is a nonnegative integer."""
    if x < 0:
        raise ValueError("power parameter must be nonnegative")
    if float(x).is_integer():
        e = int(x)
        return ThieleFunction("pow", e, lambda i: Fraction(1, i ** e))
    xf = float(x)
    return ThieleFunction("pow", xf, lambda i: i ** -xf)


def lex_simulated_f(k: int, n: int) -> ThieleFunction:
    kn = k * n
    return ThieleFunction("lex", kn, lambda i: Fraction(1, kn ** (i - 1)))


def custom_f(name: str, func: Callable[[int], Score]) -> ThieleFunction:
    return ThieleFunction(name, None, func)


def thiele_score(f: ThieleFunction, election: Election, outcome: Sequence[int]) -> Score:
    sats = satisfactions(election, outcome)
    prefix = f.prefix(election.k)
    return sum((prefix[s] for s in sats), 0)


# -- rules ----------------------------------------------------------------

COMPARATORS = ("leximin", "egal", "hybrid")


@dataclass(frozen=True)
class RuleSpec:
    """A voting rule: Thiele function, OWA vector or exact comparator, plus mode.

    ``mode`` is ``"opt"`` (global optimization) or ``"seq"`` (issue by issue).
    """

    kind: str
    mode: str = "opt"
    thiele: ThieleFunction | None = None
    owa: OwaVector | None = None
    comparator: str | None = None
    x: int | None = None

    def __post_init__(self):
        if self.mode not in ("opt", "seq"):
            raise ValueError(f"mode must be 'opt' or 'seq', got {self.mode!r}")
        if self.kind == "thiele" and self.thiele is None:
            raise ValueError("thiele rule needs a ThieleFunction")
        if self.kind == "owa" and self.owa is None:
            raise ValueError("owa rule needs an OwaVector")
        if self.kind == "comparator":
            if self.comparator not in COMPARATORS:
                raise ValueError(f"unknown comparator {self.comparator!r}")
            if self.comparator == "hybrid" and (self.x is None or self.x < 0):
                raise ValueError("hybrid comparator needs x >= 0")
        if self.kind not in ("thiele", "owa", "comparator"):
            raise ValueError(f"unknown rule kind {self.kind!r}")

    def with_mode(self, mode: str) -> RuleSpec:
        return RuleSpec(self.kind, mode, self.thiele, self.owa, self.comparator, self.x)

    @property
    def sequential(self) -> bool:
        return self.mode == "seq"

    @property
    def is_utilitarian(self) -> bool:
        if self.kind == "thiele":
            return self.thiele.is_utilitarian
        if self.kind == "comparator":
            return self.comparator == "hybrid" and self.x == 0
        w = self.owa.weights
        return all(v == w[0] for v in w)

    @property
    def exact(self) -> bool:
        if self.kind == "thiele":
            return self.thiele.exact
        if self.kind == "owa":
            return self.owa.exact
        return True

    def check(self, election: Election) -> None:
        n = election.n
        if self.kind == "owa" and len(self.owa) != n:
            raise ValidationError(f"OWA vector has length {len(self.owa)} but election has {n} voters")
        if self.kind == "comparator" and self.comparator == "hybrid" and not self.x <= n - 1:
            raise ValidationError(f"hybrid parameter x={self.x} exceeds n-1={n - 1}")
        if self.kind == "thiele":
            self.thiele.table(election.k + 1)

    def key(self, sats: Sequence[int], election: Election | None = None) -> Key:
        """Comparison key of an outcome from its (unsorted) satisfaction vector."""
        if self.kind == "thiele":
            prefix = self.thiele.prefix(max(sats, default=0) if election is None else election.k)
            return (sum((prefix[s] for s in sats), 0),)
        s = sorted(sats)
        if self.kind == "owa":
            return (owa_score(self.owa, s),)
        if self.comparator == "leximin":
            return tuple(s)
        if self.comparator == "egal":
            return (s[0],)
        return hybrid_key(self.x, s)

    def __str__(self) -> str:
        if self.kind == "thiele":
            body = f"thiele:{self.thiele.spec()}"
        elif self.kind == "owa":
            body = "owa:vec:" + ",".join(_fmt(w) for w in self.owa.weights)
        elif self.comparator == "hybrid":
            body = f"owa:hybrid:{self.x}"
        else:
            body = f"owa:{self.comparator}"
        return f"{body}@{self.mode}"


def thiele_rule(f: ThieleFunction, mode: str = "opt") -> RuleSpec:
    return RuleSpec("thiele", mode, thiele=f)


def owa_rule(alpha: OwaVector | Sequence[Score], mode: str = "opt") -> RuleSpec:
    if not isinstance(alpha, OwaVector):
        alpha = OwaVector.of(alpha)
    return RuleSpec("owa", mode, owa=alpha)


def comparator_rule(name: str, mode: str = "opt", x: int | None = None) -> RuleSpec:
    return RuleSpec("comparator", mode, comparator=name, x=x)


_RULE_RE = re.compile(r"^(?P<body>[a-z]+(?::[^@]+)?)(?:@(?P<mode>opt|seq))?$")


def parse_rule(text: str, default_mode: str = "opt") -> RuleSpec:
    """Parse ``thiele:pav@seq``, ``owa:hybrid:3@opt``, ``thiele:pow:0.5`` ..."""
    m = _RULE_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse rule {text!r}")
    mode = m.group("mode") or default_mode
    parts = m.group("body").split(":")
    try:
        if parts[0] == "thiele":
            name = parts[1]
            if name == "util" and len(parts) == 2:
                return thiele_rule(utilitarian_f(), mode)
            if name == "pav" and len(parts) == 2:
                return thiele_rule(pav_f(), mode)
            if name == "pow" and len(parts) == 3:
                return thiele_rule(power_f(_number(parts[2])), mode)
            if name == "lex" and len(parts) == 3:
                return thiele_rule(lex_simulated_f(1, int(parts[2])), mode)
        elif parts[0] == "owa":
            name = parts[1]
            if name in ("egal", "leximin") and len(parts) == 2:
                return comparator_rule(name, mode)
            if name == "util" and len(parts) == 2:
                return comparator_rule("hybrid", mode, 0)
            if name == "hybrid" and len(parts) == 3:
                return comparator_rule("hybrid", mode, int(parts[2]))
            if name == "vec" and len(parts) == 3:
                return owa_rule(OwaVector.of(parts[2].split(",")), mode)
    except (IndexError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse rule {text!r}: {exc}") from exc
    raise ValueError(f"cannot parse rule {text!r}")


def _number(text: Score | str) -> Score:
    if not isinstance(text, str):
        return text
    text = text.strip()
    if re.fullmatch(r"-?\d+", text):
        return int(text)
    if re.fullmatch(r"-?\d+/\d+", text):
        return Fraction(text)
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {text!r}")
    return value


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(int(value)) if value.is_integer() else repr(value)
    return str(value)
