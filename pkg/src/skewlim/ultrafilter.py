"""Representable ultrafilters on the algebra of eventually periodic sets.

Three kinds exist: principal ones, profinite points (a coherent choice of one
residue class per modulus, which decides every eventually periodic set by its
periodic rule alone), and pushforwards of a profinite point along an
``EPFunction``.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field

from . import epfunc, periodic
from .epfunc import EPFunction, ef_compose, ef_eval, ef_preimage
from .errors import MalformedInput
from .periodic import PeriodicSet, lcm, ps_classify, ps_combine, ps_complement, ps_member


def crt_pair(r1: int, m1: int, r2: int, m2: int):
    """Solve x = r1 (mod m1), x = r2 (mod m2); None when incompatible."""
    g = math.gcd(m1, m2)
    if (r2 - r1) % g:
        return None
    l = m1 // g * m2
    k = ((r2 - r1) // g * pow(m1 // g, -1, m2 // g)) % (m2 // g) if m2 // g > 1 else 0
    return (r1 + m1 * k) % l, l


@dataclass(frozen=True)
class ProfinitePoint:
    """Either a base integer or a finite table ``modulus -> residue``.

    A table is read through its CRT solution ``x`` modulo the lcm of the listed
    moduli; unlisted moduli get ``x mod m``.
    """

    base_integer: int | None = 0
    table: tuple = ()

    def __post_init__(self):
        if self.base_integer is None and not self.table:
            raise MalformedInput("a profinite point needs a base integer or a table")
        if self.base_integer is not None and self.base_integer < 0:
            raise MalformedInput("base integer must be natural")
        for m, r in self.table:
            if m < 1:
                raise MalformedInput(f"modulus must be >= 1, got {m}")

    @classmethod
    def from_table(cls, table: dict) -> "ProfinitePoint":
        return cls(None, tuple(sorted((int(m), int(r) % int(m)) for m, r in table.items())))

    def _solution(self):
        x, l = 0, 1
        for m, r in self.table:
            sol = crt_pair(x, l, r, m)
            if sol is None:
                raise MalformedInput(f"incoherent residue table {dict(self.table)}")
            x, l = sol
        return x

    def residue(self, m: int) -> int:
        if self.base_integer is not None:
            return self.base_integer % m
        listed = dict(self.table)
        if m in listed:
            return listed[m]
        return self._solution() % m

    def __str__(self):
        if self.base_integer is not None:
            return str(self.base_integer)
        return "{" + ",".join(f"{m}->{r}" for m, r in self.table) + "}"


def uf_coherence_check(pt: ProfinitePoint) -> bool:
    """Listed residues agree wherever their moduli overlap (in particular k | m)."""
    if pt.base_integer is not None:
        return True
    for (k, rk), (m, rm) in itertools.combinations(pt.table, 2):
        if (rk - rm) % math.gcd(k, m):
            return False
    return True


class RepUltrafilter:
    principal = False

    def member(self, a: PeriodicSet) -> bool:
        return uf_member(self, a)


@dataclass(frozen=True)
class Principal(RepUltrafilter):
    point: int
    principal = True

    def __str__(self):
        return f"principal:{self.point}"


@dataclass(frozen=True)
class Profinite(RepUltrafilter):
    point: ProfinitePoint = field(default_factory=ProfinitePoint)

    def residue(self, m: int) -> int:
        return self.point.residue(m)

    def __str__(self):
        return f"profinite:{self.point}"


@dataclass(frozen=True)
class Mapped(RepUltrafilter):
    """Pushforward of ``Profinite(base)`` along ``map``; the map is never constant on the base class."""

    base: ProfinitePoint
    map: EPFunction

    def residue(self, m: int) -> int:
        # f(n) mod m is constant on the base class mod q, far enough out
        q = lcm(self.map.period, m * self.map.slope_denominator())
        r = self.base.residue(q)
        n = r + q * (self.map.threshold + 1)
        return ef_eval(self.map, n) % m

    def __str__(self):
        return f"mapped:(profinite:{self.base}; {epfunc.to_dsl(self.map)})"


def profinite(x: int = 0) -> Profinite:
    return Profinite(ProfinitePoint(x))


def uf_member(u: RepUltrafilter, a: PeriodicSet) -> bool:
    if isinstance(u, Principal):
        return ps_member(a, u.point)
    if isinstance(u, Profinite):
        return u.residue(a.period) in a.residues
    if isinstance(u, Mapped):
        # the preimage is periodic mod q from n0 on, and a profinite point reads only that rule
        f = u.map
        q = lcm(f.period, a.period * f.slope_denominator())
        n0 = epfunc._entry_bound(f, a.threshold)
        r = u.base.residue(q)
        return ps_member(a, ef_eval(f, n0 + (r - n0) % q))
    raise TypeError(f"not a representable ultrafilter: {u!r}")


def uf_member_via_preimage(u: RepUltrafilter, a: PeriodicSet) -> bool:
    """Membership computed through the full preimage set; slower, kept as a cross-check."""
    if isinstance(u, Mapped):
        return uf_member(Profinite(u.base), ef_preimage(u.map, a))
    return uf_member(u, a)


def residue_of(u: RepUltrafilter, m: int) -> int:
    """The unique r such that the class of r mod m belongs to u."""
    if isinstance(u, Principal):
        return u.point % m
    return u.residue(m)


def _normalize_mapped(base: ProfinitePoint, f: EPFunction) -> RepUltrafilter:
    if f == epfunc.identity():
        return Profinite(base)
    r = base.residue(f.period)
    a, b = f.pieces[r]
    if a == 0:
        return Principal(int(b))
    return Mapped(base, f)


def uf_pushforward(f: EPFunction, u: RepUltrafilter) -> RepUltrafilter:
    if isinstance(u, Principal):
        return Principal(ef_eval(f, u.point))
    if isinstance(u, Profinite):
        return _normalize_mapped(u.point, f)
    if isinstance(u, Mapped):
        return _normalize_mapped(u.base, ef_compose(f, u.map))
    raise TypeError(f"not a representable ultrafilter: {u!r}")


@dataclass
class AxiomReport:
    ultrafilter: str
    memberships: list
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "check": "uf-axioms",
            "status": "pass" if self.ok else "fail",
            "ultrafilter": self.ultrafilter,
            "memberships": self.memberships,
            "violations": self.violations,
        }


def uf_check_axioms(u: RepUltrafilter, sample) -> AxiomReport:
    sample = list(sample)
    member = {}
    violations = []
    memberships = []
    for a in sample:
        inside = uf_member(u, a)
        member[a] = inside
        memberships.append([periodic.to_dsl(a), inside])
        if inside == uf_member(u, ps_complement(a)):
            violations.append({"law": "dichotomy", "set": periodic.to_dsl(a)})
        if not u.principal and ps_classify(a) == "Cofinite" and not inside:
            violations.append({"law": "cofinite", "set": periodic.to_dsl(a)})
        if u.principal is False and ps_classify(a) == "Finite" and inside:
            violations.append({"law": "finite", "set": periodic.to_dsl(a)})
    for a, b in itertools.combinations(sample, 2):
        meet = ps_combine("intersection", a, b)
        if member[a] and member[b] and not uf_member(u, meet):
            violations.append({"law": "intersection", "sets": [periodic.to_dsl(a), periodic.to_dsl(b)]})
        if member[a] and ps_combine("difference", a, b) == periodic.empty() and not member[b]:
            violations.append({"law": "superset", "sets": [periodic.to_dsl(a), periodic.to_dsl(b)]})
        if member[b] and ps_combine("difference", b, a) == periodic.empty() and not member[a]:
            violations.append({"law": "superset", "sets": [periodic.to_dsl(b), periodic.to_dsl(a)]})
    return AxiomReport(str(u), memberships, violations)


def all_periodic_sets(max_period: int):
    """Every canonical set with threshold 0 and period at most ``max_period``."""
    out = set()
    for p in range(1, max_period + 1):
        for bits in itertools.product((False, True), repeat=p):
            out.add(periodic.ps_canonicalize(0, p, [r for r in range(p) if bits[r]]))
    return sorted(out, key=lambda a: (a.period, sorted(a.residues)))


def uf_axiom_sweep(u: RepUltrafilter, seed: int = 0, max_period: int = 12, n_random: int = 200,
                   n_pairs: int = 50) -> dict:
    """Dichotomy and the cofinite/finite laws on every small periodic set plus random prefixed ones;
    closure laws on all pairs of a smaller sample."""
    rng = random.Random(seed)
    singles = all_periodic_sets(max_period) + [random_periodic_set(rng) for _ in range(n_random)]
    singles += [periodic.cofinite_set(rng.sample(range(12), rng.randint(0, 5))) for _ in range(20)]
    pairs = [random_periodic_set(rng) for _ in range(n_pairs)]
    violations = []
    checked = 0
    for a in singles:
        inside = uf_member(u, a)
        checked += 1
        if inside == uf_member(u, ps_complement(a)):
            violations.append({"law": "dichotomy", "set": periodic.to_dsl(a)})
        kind = ps_classify(a)
        if not u.principal and kind == "Cofinite" and not inside:
            violations.append({"law": "cofinite", "set": periodic.to_dsl(a)})
        if not u.principal and kind == "Finite" and inside:
            violations.append({"law": "finite", "set": periodic.to_dsl(a)})
    report = uf_check_axioms(u, pairs)
    violations += report.violations
    return {
        "check": "uf-axioms",
        "status": "pass" if not violations else "fail",
        "ultrafilter": str(u),
        "sets_checked": checked,
        "pair_sample": len(pairs),
        "violations": violations[:20],
    }


@dataclass(frozen=True)
class EqualUpTo:
    bound: int


@dataclass(frozen=True)
class DistinguishedBy:
    witness: PeriodicSet


def random_periodic_set(rng: random.Random, max_period: int = 12, max_threshold: int = 6,
                        min_period: int = 1) -> PeriodicSet:
    p = rng.randint(min_period, max_period)
    n = rng.randint(0, max_threshold)
    residues = [r for r in range(p) if rng.random() < 0.5]
    prefix = [rng.random() < 0.5 for _ in range(n)]
    return periodic.ps_canonicalize(n, p, residues, prefix)


def uf_equal_bounded(u: RepUltrafilter, v: RepUltrafilter, bound: int, extra_samples: int = 16):
    """Agreement on every residue class with modulus <= bound, plus a fixed random sample."""
    if u.principal != v.principal:
        pt = u.point if u.principal else v.point
        return DistinguishedBy(periodic.cofinite_set([pt]) if v.principal else periodic.finite_set([pt]))
    if u.principal:
        if u.point == v.point:
            return EqualUpTo(bound)
        return DistinguishedBy(periodic.finite_set([u.point]))
    for m in range(1, bound + 1):
        r = residue_of(u, m)
        if residue_of(v, m) != r:
            return DistinguishedBy(periodic.residue_class(r, m))
    rng = random.Random(bound)
    for _ in range(extra_samples):
        a = random_periodic_set(rng, max_period=2 * bound, min_period=min(bound + 1, 2 * bound))
        if uf_member(u, a) != uf_member(v, a):
            return DistinguishedBy(a if uf_member(u, a) else ps_complement(a))
    return EqualUpTo(bound)


# text forms: principal:7  profinite:0  profinite:{2->1,6->5}  mapped:(profinite:0; <function>)

_TABLE_RE = re.compile(r"^\{\s*((?:\d+\s*->\s*\d+\s*,?\s*)*)\}$")


def parse_point(text: str) -> ProfinitePoint:
    text = text.strip()
    if text.isdigit():
        return ProfinitePoint(int(text))
    m = _TABLE_RE.match(text)
    if not m:
        raise MalformedInput(f"not a profinite point: {text!r}")
    pairs = re.findall(r"(\d+)\s*->\s*(\d+)", m.group(1))
    pt = ProfinitePoint.from_table({int(a): int(b) for a, b in pairs})
    if not pt.table:
        raise MalformedInput("empty residue table")
    return pt


def parse_ultrafilter(text: str) -> RepUltrafilter:
    text = text.strip()
    kind, sep, rest = text.partition(":")
    if not sep:
        raise MalformedInput(f"expected kind:payload, got {text!r}")
    kind = kind.strip()
    if kind == "principal":
        if not rest.strip().isdigit():
            raise MalformedInput(f"bad principal point {rest!r}")
        return Principal(int(rest))
    if kind == "profinite":
        return Profinite(parse_point(rest))
    if kind == "mapped":
        rest = rest.strip()
        if not (rest.startswith("(") and rest.endswith(")")):
            raise MalformedInput("mapped ultrafilter must be mapped:(base; function)")
        base_text, sep, fn_text = rest[1:-1].partition(";")
        if not sep:
            raise MalformedInput("mapped ultrafilter needs 'base; function'")
        base = parse_ultrafilter(base_text)
        return uf_pushforward(epfunc.parse_function(fn_text.strip()), base)
    raise MalformedInput(f"unknown ultrafilter kind {kind!r}")
