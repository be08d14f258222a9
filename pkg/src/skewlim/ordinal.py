"""Ordinals below omega squared, written ``w*B+C``."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import total_ordering

from .errors import MalformedInput, NotALimit


class Ordering(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"

    def __str__(self):
        return self.value

    def flip(self) -> "Ordering":
        if self is Ordering.LESS:
            return Ordering.GREATER
        if self is Ordering.GREATER:
            return Ordering.LESS
        return self

    @classmethod
    def of_sign(cls, x: int) -> "Ordering":
        if x < 0:
            return cls.LESS
        if x > 0:
            return cls.GREATER
        return cls.EQUAL


@total_ordering
@dataclass(frozen=True)
class SmallOrdinal:
    """The ordinal ``omega * omega_coeff + finite_part``."""

    omega_coeff: int = 0
    finite_part: int = 0

    def __post_init__(self):
        if self.omega_coeff < 0 or self.finite_part < 0:
            raise MalformedInput(f"negative ordinal component in {self!r}")

    def _key(self):
        return (self.omega_coeff, self.finite_part)

    def __lt__(self, other):
        if not isinstance(other, SmallOrdinal):
            return NotImplemented
        return self._key() < other._key()

    def __str__(self):
        return f"w*{self.omega_coeff}+{self.finite_part}"

    @property
    def is_limit(self) -> bool:
        return ord_is_limit(self)

    @property
    def is_successor(self) -> bool:
        return self.finite_part > 0

    def pred(self) -> "SmallOrdinal":
        if self.finite_part == 0:
            raise ValueError(f"{self} has no predecessor")
        return SmallOrdinal(self.omega_coeff, self.finite_part - 1)

    def succ(self) -> "SmallOrdinal":
        return ord_succ(self)

    def limit_part(self) -> "SmallOrdinal":
        return SmallOrdinal(self.omega_coeff, 0)

    @classmethod
    def parse(cls, text: str) -> "SmallOrdinal":
        return parse_ordinal(text)


def finite(n: int) -> SmallOrdinal:
    return SmallOrdinal(0, n)


OMEGA = SmallOrdinal(1, 0)

_ORD_RE = re.compile(
    r"^\s*(?:(?P<w>w|ω)(?:\s*\*\s*(?P<b>\d+))?)?\s*(?:(?(w)\+)\s*(?P<c>\d+))?\s*$"
)


def parse_ordinal(text: str) -> SmallOrdinal:
    """Parse ``w*B+C``; ``w``, ``w*2``, ``w+3`` and plain ``7`` are also accepted."""
    m = _ORD_RE.match(text)
    if not m or (m.group("w") is None and m.group("c") is None):
        raise MalformedInput(f"not an ordinal below w^2: {text!r}")
    if m.group("w") is None:
        return SmallOrdinal(0, int(m.group("c")))
    b = int(m.group("b")) if m.group("b") is not None else 1
    c = int(m.group("c")) if m.group("c") is not None else 0
    return SmallOrdinal(b, c)


def ord_compare(a: SmallOrdinal, b: SmallOrdinal) -> Ordering:
    if a._key() < b._key():
        return Ordering.LESS
    if a._key() > b._key():
        return Ordering.GREATER
    return Ordering.EQUAL


def ord_succ(a: SmallOrdinal) -> SmallOrdinal:
    return SmallOrdinal(a.omega_coeff, a.finite_part + 1)


def ord_is_limit(a: SmallOrdinal) -> bool:
    return a.finite_part == 0 and a.omega_coeff > 0


def ord_fund_seq(lam: SmallOrdinal, n: int) -> SmallOrdinal:
    """n-th term of the standard cofinal sequence of a limit ordinal."""
    if not ord_is_limit(lam):
        raise NotALimit(f"{lam} is not a limit ordinal")
    return SmallOrdinal(lam.omega_coeff - 1, n)


def ordinals_upto(bound: SmallOrdinal, finite_span: int):
    """Ordinals <= bound, with each omega-block truncated to ``finite_span`` successors."""
    out = []
    for c in range(bound.omega_coeff + 1):
        top = bound.finite_part if c == bound.omega_coeff else finite_span
        for f in range(0, top + 1):
            out.append(SmallOrdinal(c, f))
    return out
