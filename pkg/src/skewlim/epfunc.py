"""Quasi-affine eventually periodic maps from the naturals to the naturals.

For ``n >= threshold`` with ``n % period == r`` the value is
``slope[r] * n + intercept[r]``; below the threshold it is read from
``prefix``. Slopes are nonnegative rationals so that left inverses (halving
and the like) stay in the class; every value is still a natural number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MalformedInput, NotInjective, NotRepresentable, PeriodOverflow
from .periodic import PeriodicSet, check_period, from_eventual, lcm, period_cap, ps_member


@dataclass(frozen=True)
class EPFunction:
    threshold: int
    period: int
    pieces: tuple  # ((slope, intercept), ...) as Fractions, one per residue
    prefix: tuple
    _ints: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        # integer form (A, B, D) of each piece: value = (A*n + B) // D
        ints = []
        for a, b in self.pieces:
            d = math.lcm(a.denominator, b.denominator)
            ints.append((int(a * d), int(b * d), d))
        object.__setattr__(self, "_ints", tuple(ints))

    def __call__(self, n: int) -> int:
        return ef_eval(self, n)

    def __str__(self):
        return to_dsl(self)

    def piece(self, n: int):
        return self.pieces[n % self.period]

    def first_in_class(self, r: int) -> int:
        """Least n >= threshold with n % period == r."""
        return self.threshold + (r - self.threshold) % self.period

    def slope_denominator(self) -> int:
        return lcm(*(a.denominator for a, _ in self.pieces))

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "period": self.period,
            "pieces": [[_num_str(a), _num_str(b)] for a, b in self.pieces],
            "prefix": list(self.prefix),
        }


def _num_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def ef_canonicalize(threshold, period, pieces, prefix=()) -> EPFunction:
    try:
        threshold = int(threshold)
        period = int(period)
        pieces = tuple((Fraction(a), Fraction(b)) for a, b in pieces)
        prefix = tuple(int(v) for v in prefix)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad function data: {exc}") from None
    if period < 1 or len(pieces) != period:
        raise MalformedInput(f"need exactly one piece per residue of period {period}")
    if threshold < 0 or len(prefix) != threshold:
        raise MalformedInput(f"prefix length {len(prefix)} != threshold {threshold}")
    if any(v < 0 for v in prefix):
        raise MalformedInput("prefix values must be natural numbers")
    for r, (a, b) in enumerate(pieces):
        if a < 0:
            raise MalformedInput(f"negative slope in class {r}")
        n0 = threshold + (r - threshold) % period
        v0 = a * n0 + b
        if v0 < 0 or v0.denominator != 1 or (a * period).denominator != 1:
            raise MalformedInput(f"class {r} does not map into the naturals")
    d = period
    for cand in range(1, period + 1):
        if period % cand == 0 and all(pieces[j] == pieces[j % cand] for j in range(period)):
            d = cand
            break
    pieces = pieces[:d]
    n = threshold
    while n > 0:
        a, b = pieces[(n - 1) % d]
        if prefix[n - 1] != a * (n - 1) + b:
            break
        n -= 1
    return EPFunction(n, d, pieces, prefix[:n])


def affine(slope, intercept=0) -> EPFunction:
    return ef_canonicalize(0, 1, [(slope, intercept)])


def identity() -> EPFunction:
    return affine(1, 0)


def constant(c: int) -> EPFunction:
    return affine(0, c)


def ef_eval(f: EPFunction, n: int) -> int:
    if n < f.threshold:
        return f.prefix[n]
    a, b, d = f._ints[n % f.period]
    return (a * n + b) // d


def _from_values(threshold: int, period: int, value) -> EPFunction:
    """Build from a function known to be affine per class mod ``period`` from ``threshold`` on."""
    check_period(period)
    pieces = []
    for r in range(period):
        n0 = threshold + (r - threshold) % period
        v0, v1 = value(n0), value(n0 + period)
        a = Fraction(v1 - v0, period)
        pieces.append((a, v0 - a * n0))
    return ef_canonicalize(threshold, period, pieces, [value(n) for n in range(threshold)])


def _entry_bound(f: EPFunction, target_threshold: int) -> int:
    """Least N >= f.threshold with f(n) >= target_threshold for every non-constant class beyond N."""
    n = f.threshold
    for a, b in f.pieces:
        if a > 0:
            n = max(n, math.ceil((target_threshold - b) / a))
    return n


def ef_compose(f: EPFunction, g: EPFunction) -> EPFunction:
    """The map n -> f(g(n))."""
    p = check_period(lcm(g.period, f.period * g.slope_denominator()))
    n = _entry_bound(g, f.threshold)
    return _from_values(n, p, lambda k: ef_eval(f, ef_eval(g, k)))


def _stable_threshold(f: EPFunction, g: EPFunction, start: int, period: int) -> int:
    """Beyond the returned bound, sign(f(n) - g(n)) is constant on each class mod period."""
    n = start
    for r in range(period):
        n0 = start + (r - start) % period
        af, bf = f.piece(n0)
        ag, bg = g.piece(n0)
        da, db = af - ag, bf - bg
        if da != 0:
            n = max(n, math.floor(abs(db) / abs(da)) + 1)
    return n


_RELS = {
    "<": lambda x, y: x < y,
    "<=": lambda x, y: x <= y,
    "≤": lambda x, y: x <= y,
    "=": lambda x, y: x == y,
}


def ef_compare_set(rel: str, f: EPFunction, g: EPFunction) -> PeriodicSet:
    """The set {n : f(n) rel g(n)}."""
    try:
        op = _RELS[rel]
    except KeyError:
        raise MalformedInput(f"unknown relation {rel!r}") from None
    p = check_period(lcm(f.period, g.period))
    n = _stable_threshold(f, g, max(f.threshold, g.threshold), p)
    return from_eventual(n, p, lambda k: op(ef_eval(f, k), ef_eval(g, k)))


def ef_preimage(f: EPFunction, a: PeriodicSet) -> PeriodicSet:
    """The set {n : f(n) in a}."""
    p = check_period(lcm(f.period, a.period * f.slope_denominator()))
    n = _entry_bound(f, a.threshold)
    return from_eventual(n, p, lambda k: ps_member(a, ef_eval(f, k)))


def _progressions(f: EPFunction):
    """Image of each eventual class as (start, step, slope, intercept)."""
    out = []
    for r, (a, b) in enumerate(f.pieces):
        n0 = f.first_in_class(r)
        out.append((int(a * n0 + b), int(a * f.period), a, b, n0))
    return out


def _ap_meet(c1, s1, c2, s2):
    """Whether {c1 + s1 t} and {c2 + s2 t} (t >= 0, steps > 0) intersect."""
    g = math.gcd(s1, s2)
    if (c1 - c2) % g:
        return False
    return True  # a common residue class meets both progressions infinitely often


def _in_ap(v, c, s):
    return v >= c and (v - c) % s == 0


def find_collision(f: EPFunction):
    """A pair n != m with f(n) == f(m), or None. Decided in closed form."""
    aps = _progressions(f)
    for r, (c, s, a, b, n0) in enumerate(aps):
        if s == 0:
            return (n0, n0 + f.period)
    seen = {}
    for n, v in enumerate(f.prefix):
        if v in seen:
            return (seen[v], n)
        seen[v] = n
        for c, s, a, b, n0 in aps:
            if _in_ap(v, c, s):
                return (n, int((v - b) / a))
    for i in range(len(aps)):
        for j in range(i + 1, len(aps)):
            c1, s1, a1, b1, _ = aps[i]
            c2, s2, a2, b2, _ = aps[j]
            if _ap_meet(c1, s1, c2, s2):
                big = max(c1, c2)
                v = big
                while not (_in_ap(v, c1, s1) and _in_ap(v, c2, s2)):
                    v += 1
                return (int((v - b1) / a1), int((v - b2) / a2))
    return None


def ef_is_injective(f: EPFunction) -> bool:
    return find_collision(f) is None


def ef_left_inverse(f: EPFunction) -> EPFunction:
    """A map g with g(f(n)) == n for every n; off the image g is 0."""
    hit = find_collision(f)
    if hit is not None:
        raise NotInjective(f"{to_dsl(f)} identifies {hit[0]} and {hit[1]}", witness=hit)
    aps = _progressions(f)
    q = lcm(*(s for _, s, *_ in aps))
    if q > period_cap():
        raise NotRepresentable(f"left inverse needs period {q} beyond cap {period_cap()}")
    threshold = max([c for c, *_ in aps] + [v + 1 for v in f.prefix])
    inverse_prefix = {v: n for n, v in enumerate(f.prefix)}

    def value(m):
        if m in inverse_prefix:
            return inverse_prefix[m]
        for c, s, a, b, _ in aps:
            if _in_ap(m, c, s):
                return int((m - b) / a)
        return 0

    return _from_values(threshold, q, value)


# text form  N:p:[(a0,b0),(a1,b1),...]:v0,v1,...

_DSL_RE = re.compile(r"^\s*(\d+)\s*:\s*(\d+)\s*:\s*\[(.*)\]\s*:\s*([\d,\s]*)$")
_PIECE_RE = re.compile(r"\(\s*([-\d/]+)\s*,\s*([-\d/]+)\s*\)")


def parse_function(text: str) -> EPFunction:
    m = _DSL_RE.match(text)
    if not m:
        raise MalformedInput(f"not a function 'N:p:[(a,b),...]:prefix': {text!r}")
    body = m.group(3)
    pieces = _PIECE_RE.findall(body)
    if _PIECE_RE.sub("", body).replace(",", "").strip():
        raise MalformedInput(f"bad piece list {body!r}")
    prefix = [int(x) for x in m.group(4).split(",") if x.strip()]
    return ef_canonicalize(int(m.group(1)), int(m.group(2)), pieces, prefix)


def to_dsl(f: EPFunction) -> str:
    pieces = ",".join(f"({_num_str(a)},{_num_str(b)})" for a, b in f.pieces)
    prefix = ",".join(str(v) for v in f.prefix)
    return f"{f.threshold}:{f.period}:[{pieces}]:{prefix}"


def from_json(data: dict) -> EPFunction:
    try:
        return ef_canonicalize(data["threshold"], data["period"], data["pieces"], data.get("prefix", ()))
    except KeyError as exc:
        raise MalformedInput(f"missing field {exc}") from None


__all__ = [
    "EPFunction",
    "PeriodOverflow",
    "affine",
    "constant",
    "ef_canonicalize",
    "ef_compare_set",
    "ef_compose",
    "ef_eval",
    "ef_is_injective",
    "ef_left_inverse",
    "ef_preimage",
    "identity",
    "parse_function",
    "to_dsl",
]
