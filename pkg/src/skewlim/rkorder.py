"""Rank-1 terms as maps, Rudin-Keisler certificates, and export of the term order."""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass

from . import epfunc
from .epfunc import EPFunction, _from_values, ef_compose, ef_is_injective, ef_left_inverse
from .errors import MalformedInput, RankTooHigh
from .ordinal import Ordering
from .terms import Term, level_patch_bound, level_period, levels, term_compare, term_eval, term_rank, to_dsl
from .ultrafilter import EqualUpTo, Profinite, ProfinitePoint, RepUltrafilter, uf_equal_bounded, uf_pushforward

DEFAULT_BOUND = 720


def term_to_map(t: Term) -> EPFunction:
    """The map n -> t(v1 := n)."""
    if term_rank(t) > 1:
        raise RankTooHigh(f"{to_dsl(t)} has rank {term_rank(t)}; only rank <= 1 terms are maps")
    if any(l < 1 for l in levels(t)):
        raise MalformedInput(f"{to_dsl(t)} uses a level below 1")
    return _from_values(level_patch_bound(t, 1), level_period(t, 1), lambda n: term_eval(t, {1: n}))


def rk_le_check(u: RepUltrafilter, v: RepUltrafilter, f: EPFunction, bound: int = DEFAULT_BOUND) -> bool:
    """Whether f pushes v onto u, up to the bounded equality test."""
    return isinstance(uf_equal_bounded(uf_pushforward(f, v), u, bound), EqualUpTo)


@dataclass(frozen=True)
class RKWitness:
    forward: EPFunction
    backward: EPFunction
    bound: int
    verdict: str  # "Equivalent" or "Unconfirmed"

    def to_json(self) -> dict:
        return {"f": epfunc.to_dsl(self.forward), "g": epfunc.to_dsl(self.backward), "bound": self.bound,
                "verdict": self.verdict}


def rk_equiv_injective(f: EPFunction, u: RepUltrafilter, bound: int = DEFAULT_BOUND) -> RKWitness:
    """Certify that the image of u under an injective f is RK-equivalent to u."""
    g = ef_left_inverse(f)
    image = uf_pushforward(f, u)
    ok = rk_le_check(image, u, f, bound) and rk_le_check(u, image, g, bound)
    return RKWitness(f, g, bound, "Equivalent" if ok else "Unconfirmed")


# order export


def sort_terms(terms, u: RepUltrafilter, k: int | None = None):
    """Groups of mutually equal terms, in increasing order."""
    terms = list(terms)
    if not terms:
        return []
    if k is None:
        k = max(max(term_rank(t), 0) for t in terms)
    cmp = functools.lru_cache(maxsize=None)(lambda a, b: term_compare(a, b, u, k))
    ordered = sorted(sorted(set(terms), key=to_dsl), key=functools.cmp_to_key(lambda a, b: _sign(cmp(a, b))))
    groups = [[ordered[0]]]
    for t in ordered[1:]:
        if cmp(groups[-1][0], t) is Ordering.EQUAL:
            groups[-1].append(t)
        else:
            groups.append([t])
    return groups


def _sign(v: Ordering) -> int:
    return {Ordering.LESS: -1, Ordering.EQUAL: 0, Ordering.GREATER: 1}[v]


def order_export(terms, u: RepUltrafilter, fmt: str = "json", k: int | None = None):
    """The computed chain: a list of groups of DSL strings (json) or a DOT digraph (dot)."""
    groups = [[to_dsl(t) for t in g] for g in sort_terms(terms, u, k)]
    if fmt == "json":
        return groups
    if fmt == "dot":
        lines = ["digraph order {", "  rankdir=LR;"]
        for i, g in enumerate(groups):
            label = " = ".join(g).replace('"', '\\"')
            lines.append(f'  n{i} [label="{label}"];')
        for i in range(len(groups) - 1):
            lines.append(f"  n{i} -> n{i + 1};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise MalformedInput(f"unknown export format {fmt!r}")


# random instances for sweeps


def random_map(rng: random.Random, max_period: int = 3, max_slope: int = 3, max_threshold: int = 3) -> EPFunction:
    p = rng.randint(1, max_period)
    n = rng.randint(0, max_threshold)
    pieces = [(rng.randint(0, max_slope), rng.randint(0, 6)) for _ in range(p)]
    prefix = [rng.randint(0, 20) for _ in range(n)]
    return epfunc.ef_canonicalize(n, p, pieces, prefix)


def random_injective_map(rng: random.Random, **kw) -> EPFunction:
    while True:
        f = random_map(rng, **kw)
        if ef_is_injective(f):
            return f


def random_profinite(rng: random.Random) -> Profinite:
    return Profinite(ProfinitePoint(rng.randint(0, 10**6)))


def rk_sweep(seed: int = 0, injective: int = 50, triples: int = 100, bound: int = DEFAULT_BOUND) -> dict:
    rng = random.Random(seed)
    failures = []
    for _ in range(injective):
        f = random_injective_map(rng)
        u = random_profinite(rng)
        w = rk_equiv_injective(f, u, bound)
        if w.verdict != "Equivalent":
            failures.append({"kind": "equivalence", "f": epfunc.to_dsl(f), "u": str(u)})
    for _ in range(triples):
        w_uf = random_profinite(rng)
        g, f = random_map(rng), random_map(rng)
        v = uf_pushforward(g, w_uf)
        u = uf_pushforward(f, v)
        if not rk_le_check(u, u, epfunc.identity(), bound):
            failures.append({"kind": "reflexivity", "u": str(u)})
        if rk_le_check(u, v, f, bound) and rk_le_check(v, w_uf, g, bound):
            if not rk_le_check(u, w_uf, ef_compose(f, g), bound):
                failures.append({"kind": "transitivity", "f": epfunc.to_dsl(f), "g": epfunc.to_dsl(g),
                                 "w": str(w_uf)})
        else:
            failures.append({"kind": "pushforward", "f": epfunc.to_dsl(f), "g": epfunc.to_dsl(g), "w": str(w_uf)})
    return {"check": "rk-slice", "status": "pass" if not failures else "fail", "seed": seed,
            "injective": injective, "triples": triples, "bound": bound, "failures": failures}
