"""Eventually periodic subsets of the naturals.

A set is stored as ``(threshold N, period p, residues R, prefix)``: below ``N``
membership is read from ``prefix``, from ``N`` on ``n`` is a member iff
``n % p in R``. Every public constructor returns the canonical form (minimal
period, then minimal threshold), so ``==`` is extensional equality.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable

from . import kernels
from .errors import MalformedInput, PeriodOverflow

DEFAULT_PERIOD_CAP = 10**6

_period_cap = contextvars.ContextVar("period_cap", default=DEFAULT_PERIOD_CAP)


def period_cap() -> int:
    return _period_cap.get()


@contextlib.contextmanager
def period_cap_scope(cap: int):
    """Temporarily change the period cap used by every combining operation."""
    if cap < 1:
        raise ValueError("period cap must be positive")
    token = _period_cap.set(cap)
    try:
        yield cap
    finally:
        _period_cap.reset(token)


def check_period(p: int) -> int:
    cap = _period_cap.get()
    if p > cap:
        raise PeriodOverflow(p, cap)
    return p


def lcm(*xs: int) -> int:
    return math.lcm(*xs) if xs else 1


@dataclass(frozen=True)
class PeriodicSet:
    threshold: int
    period: int
    residues: frozenset
    prefix: tuple

    def __contains__(self, n: int) -> bool:
        return ps_member(self, n)

    def __str__(self):
        return to_dsl(self)

    def __and__(self, other):
        return ps_combine("intersection", self, other)

    def __or__(self, other):
        return ps_combine("union", self, other)

    def __sub__(self, other):
        return ps_combine("difference", self, other)

    def __invert__(self):
        return ps_complement(self)

    def eventual(self, n: int) -> bool:
        """Membership according to the periodic rule, ignoring the prefix."""
        return n % self.period in self.residues

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "period": self.period,
            "residues": sorted(self.residues),
            "prefix": "".join("1" if b else "0" for b in self.prefix),
        }


def ps_canonicalize(threshold, period, residues, prefix=()) -> PeriodicSet:
    """Validate raw data and bring it to canonical form."""
    try:
        threshold = int(threshold)
        period = int(period)
        residues = frozenset(int(r) for r in residues)
        prefix = tuple(bool(int(b)) for b in prefix)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"bad periodic set data: {exc}") from None
    if period < 1:
        raise MalformedInput(f"period must be >= 1, got {period}")
    check_period(period)
    if threshold < 0 or len(prefix) != threshold:
        raise MalformedInput(f"prefix length {len(prefix)} != threshold {threshold}")
    if any(r < 0 or r >= period for r in residues):
        raise MalformedInput(f"residues must lie in [0, {period})")
    rule = bytes(1 if j in residues else 0 for j in range(period))
    d = kernels.minimal_period(rule)
    new_residues = frozenset(j for j in range(d) if rule[j])
    rule = rule[:d]
    n = kernels.trim_threshold(bytes(prefix), rule)
    return PeriodicSet(n, d, new_residues, prefix[:n])


def from_eventual(threshold: int, period: int, member: Callable[[int], bool]) -> PeriodicSet:
    """Build a set from a predicate known to be ``period``-periodic from ``threshold`` on."""
    check_period(period)
    prefix = tuple(bool(member(n)) for n in range(threshold))
    residues = set()
    for n in range(threshold, threshold + period):
        if member(n):
            residues.add(n % period)
    return ps_canonicalize(threshold, period, residues, prefix)


def omega() -> PeriodicSet:
    return PeriodicSet(0, 1, frozenset({0}), ())


def empty() -> PeriodicSet:
    return PeriodicSet(0, 1, frozenset(), ())


def residue_class(r: int, m: int) -> PeriodicSet:
    return ps_canonicalize(0, m, {r % m})


def finite_set(elements: Iterable[int]) -> PeriodicSet:
    elements = set(elements)
    n = max(elements) + 1 if elements else 0
    return ps_canonicalize(n, 1, (), [k in elements for k in range(n)])


def cofinite_set(excluded: Iterable[int]) -> PeriodicSet:
    return ps_complement(finite_set(excluded))


def ps_member(a: PeriodicSet, n: int) -> bool:
    if n < a.threshold:
        return a.prefix[n]
    return n % a.period in a.residues


def ps_complement(a: PeriodicSet) -> PeriodicSet:
    return ps_canonicalize(
        a.threshold,
        a.period,
        set(range(a.period)) - a.residues,
        [not b for b in a.prefix],
    )


_OPS = {
    "union": lambda x, y: x or y,
    "intersection": lambda x, y: x and y,
    "difference": lambda x, y: x and not y,
}


def ps_combine(kind: str, a: PeriodicSet, b: PeriodicSet) -> PeriodicSet:
    try:
        op = _OPS[kind]
    except KeyError:
        raise MalformedInput(f"unknown set operation {kind!r}") from None
    p = check_period(lcm(a.period, b.period))
    n = max(a.threshold, b.threshold)
    return from_eventual(n, p, lambda k: op(ps_member(a, k), ps_member(b, k)))


def ps_classify(a: PeriodicSet) -> str:
    if not a.residues:
        return "Finite"
    if len(a.residues) == a.period:
        return "Cofinite"
    return "Bilateral"


def ps_subset(a: PeriodicSet, b: PeriodicSet) -> bool:
    return ps_combine("difference", a, b) == empty()


# text form  N:p:{r1,r2}:bits

_DSL_RE = re.compile(r"^\s*(\d+)\s*:\s*(\d+)\s*:\s*\{([\d,\s]*)\}\s*:\s*([01]*)\s*$")


def parse_set(text: str) -> PeriodicSet:
    m = _DSL_RE.match(text)
    if not m:
        raise MalformedInput(f"not a periodic set 'N:p:{{r,...}}:bits': {text!r}")
    body = m.group(3).strip()
    residues = [int(x) for x in body.split(",") if x.strip()] if body else []
    return ps_canonicalize(int(m.group(1)), int(m.group(2)), residues, m.group(4))


def to_dsl(a: PeriodicSet) -> str:
    res = ",".join(str(r) for r in sorted(a.residues))
    bits = "".join("1" if b else "0" for b in a.prefix)
    return f"{a.threshold}:{a.period}:{{{res}}}:{bits}"


def from_json(data: dict) -> PeriodicSet:
    try:
        return ps_canonicalize(data["threshold"], data["period"], data["residues"], data.get("prefix", ""))
    except KeyError as exc:
        raise MalformedInput(f"missing field {exc}") from None
