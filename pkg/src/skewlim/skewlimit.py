"""Skew ultralimits: the transfinite direct system, its limit threads and audits.

Two carriers are supported. ``OmegaCarrier`` is (omega, <=) over a
representable ultrafilter, with stage payloads given as terms. Level
conventions for the skew system:

* a finite stage ``m`` uses levels ``1..m``, level ``m`` being the outermost
  ultrapower index;
* a stage ``lam + j`` above a limit uses levels ``<= j``; limit threads are
  stored top-aligned, so the canonical map from a finite stage ``m`` into a
  limit shifts every level down by ``m``.

``FiniteCarrier`` is a finite structure over a principal ultrafilter on a
finite index set; every stage is an honest quotient and limits are represented
by base elements (all maps in the system are isomorphisms there).

Embeddings are computed case by case from the definition of the system;
``closed_form_shift`` states the resulting rule for the omega carrier so tests
can check one against the other.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import DiagramViolation, InvalidRepresentative, MalformedInput, NoRepresentative, StageCapExceeded
from .logic import FiniteStructure, finite_ultrapower
from .periodic import empty
from .periodic import to_dsl as set_dsl
from .ordinal import OMEGA, Ordering, SmallOrdinal, finite, ord_is_limit, ordinals_upto, parse_ordinal
from .terms import (
    Const, Patch, Substitution, Term, Var, generic_reduct, levels, normalize, random_term, term_apply,
    term_compare, to_dsl, verdict_sets,
)
from .ultrafilter import Profinite, RepUltrafilter, parse_point, profinite

DEFAULT_CAP = SmallOrdinal(2, 8)
LEVEL_BLOCK = 10**9  # diagonal variant: the level of successor stage w*c+j is c*LEVEL_BLOCK + j


@dataclass(frozen=True)
class OmegaCarrier:
    u: RepUltrafilter = field(default_factory=profinite)

    def __str__(self):
        return f"omega[{self.u}]"


@dataclass(frozen=True)
class FiniteCarrier:
    structure: FiniteStructure
    index_size: int
    point: int

    def __post_init__(self):
        if not 0 <= self.point < self.index_size:
            raise MalformedInput(f"point {self.point} outside index set of size {self.index_size}")

    def __str__(self):
        return f"finite[|M|={self.structure.size}, |I|={self.index_size}, a={self.point}]"


def _fp(a: SmallOrdinal) -> int:
    return a.finite_part


def closed_form_shift(gamma: SmallOrdinal, alpha: SmallOrdinal) -> int:
    """Level shift effected by e_{gamma alpha} in the skew omega system."""
    return _fp(alpha) - _fp(gamma)


class DirectSystem:
    """Lazily evaluated direct system ``(M_beta, e_{beta gamma})`` for ``beta <= gamma <= alpha``."""

    def __init__(self, carrier, alpha: SmallOrdinal, cap: SmallOrdinal = DEFAULT_CAP, variant: str = "skew"):
        if alpha > cap:
            raise StageCapExceeded(f"rank {alpha} exceeds the stage cap {cap}")
        if variant not in ("skew", "diagonal"):
            raise MalformedInput(f"unknown variant {variant!r}")
        if variant == "diagonal" and not isinstance(carrier, OmegaCarrier):
            raise MalformedInput("the diagonal variant is implemented for the omega carrier")
        self.carrier = carrier
        self.alpha = alpha
        self.cap = cap
        self.variant = variant
        self._memo = {}

    def __repr__(self):
        return f"DirectSystem({self.carrier}, {self.alpha}, variant={self.variant})"

    def stages(self, finite_span: int = 3):
        return ordinals_upto(self.alpha, finite_span)

    def _check_stage(self, *stages):
        for s in stages:
            if s > self.alpha:
                raise StageCapExceeded(f"stage {s} lies above the system rank {self.alpha}")

    # payloads

    def is_valid(self, stage: SmallOrdinal, x) -> bool:
        if isinstance(self.carrier, FiniteCarrier):
            return isinstance(x, int) and 0 <= x < self.structure(stage).size
        lv = levels(x)
        if stage == finite(0):
            return not lv
        if self.variant == "diagonal":
            return all(_decode(l) is not None and finite(1) <= _decode(l) <= stage for l in lv)
        if stage.omega_coeff == 0:
            return all(1 <= l <= stage.finite_part for l in lv)
        return all(l <= stage.finite_part for l in lv)

    def require_valid(self, stage, x):
        if not self.is_valid(stage, x):
            raise InvalidRepresentative(f"{_show(x)} is not an element of stage {stage}", stage, _show(x))

    def top_level(self, stage: SmallOrdinal) -> int:
        """Level of the outermost index of a successor stage."""
        if self.variant == "diagonal":
            return stage.omega_coeff * LEVEL_BLOCK + stage.finite_part
        return stage.finite_part

    def equal(self, stage, x, y) -> bool:
        return self.compare(stage, x, y) is Ordering.EQUAL

    def compare(self, stage, x, y) -> Ordering:
        if isinstance(self.carrier, FiniteCarrier):
            return Ordering.EQUAL if x == y else Ordering.of_sign(x - y)
        k = max([0] + list(levels(x) | levels(y)))
        return term_compare(x, y, self.carrier.u, k)

    # finite-carrier stages

    def structure(self, stage: SmallOrdinal) -> FiniteStructure:
        if stage == finite(0) or stage.is_limit:
            return self.carrier.structure
        return self.ultrapower(stage).structure

    def ultrapower(self, stage: SmallOrdinal):
        """The quotient ``prod_a M_beta`` realizing successor stage ``beta + 1``."""
        key = ("up", stage)
        if key not in self._memo:
            c = self.carrier
            self._memo[key] = finite_ultrapower(self.structure(stage.pred()), c.index_size, c.point)
        return self._memo[key]

    def collapse(self, stage: SmallOrdinal, x: int) -> int:
        """Carry an element of ``stage`` down to the base structure by repeated principal collapse."""
        key = ("down", stage)
        table = self._memo.get(key)
        if table is None:
            table = list(range(self.structure(stage).size))
            s = stage
            while s.is_successor:
                step = self.ultrapower(s).collapse
                table = [step[v] for v in table]
                s = s.pred()
            self._memo[key] = table
        return table[x]

    # embeddings

    def embed(self, beta: SmallOrdinal, gamma: SmallOrdinal, x):
        """``e_{beta gamma}(x)``."""
        if beta > gamma:
            raise MalformedInput(f"no embedding from stage {beta} down to {gamma}")
        self._check_stage(beta, gamma)
        self.require_valid(beta, x)
        if isinstance(self.carrier, FiniteCarrier):
            return self._embed_finite(beta, gamma, x)
        return term_apply(self.substitution(beta, gamma, levels(x)), x)

    def substitution(self, beta, gamma, lv) -> Substitution:
        """The level map of ``e_{beta gamma}`` on the levels ``lv``."""
        mapping = self._levelmap(beta, gamma, frozenset(lv))
        return Substitution.explicit(dict(mapping))

    def _levelmap(self, gamma, alpha, lv):
        key = ("lv", gamma, alpha, lv)
        if key not in self._memo:
            self._memo[key] = tuple(sorted(self._levelmap_raw(gamma, alpha, lv).items()))
        return dict(self._memo[key])

    def _levelmap_raw(self, gamma, alpha, lv):
        if gamma == alpha or self.variant == "diagonal":
            # the diagonal variant composes diagonals only, which fix term syntax
            return {l: l for l in lv}
        if alpha.is_limit:
            # direct limit: threads are top-aligned
            return {l: l - _fp(gamma) for l in lv}
        beta = alpha.pred()
        if gamma == finite(0):
            if alpha == finite(1):
                return {}  # the diagonal; stage 0 payloads are closed
            return _compose(self._levelmap(gamma, finite(1), lv), lambda m: self._levelmap(finite(1), alpha, m))
        if gamma.is_successor:
            # successor source: the lift of e_{delta beta}
            delta = gamma.pred()
            top = self.top_level(gamma)
            inner = self._levelmap(delta, beta, lv - {top})
            if top in lv:
                inner[top] = self.top_level(alpha)
            return inner
        # limit source: route through the least finite stage holding a representative
        m = self._representative_stage(gamma, lv)
        shifted = {l: l + m for l in lv}
        through = self._levelmap(finite(m), alpha, frozenset(shifted.values()))
        return {l: through[shifted[l]] for l in lv}

    @staticmethod
    def _representative_stage(gamma, lv) -> int:
        return max(1, 1 - min(lv, default=1))

    def _embed_finite(self, gamma, alpha, x):
        key = ("fin", gamma, alpha, x)
        if key in self._memo:
            return self._memo[key]
        if gamma == alpha:
            out = x
        elif alpha.is_limit:
            out = self.collapse(gamma, x)
        else:
            beta = alpha.pred()
            c = self.carrier
            if gamma == finite(0) and alpha == finite(1):
                out = self.ultrapower(alpha).class_of((x,) * c.index_size)
            elif gamma == finite(0):
                out = self._embed_finite(finite(1), alpha, self._embed_finite(gamma, finite(1), x))
            elif gamma.is_successor:
                delta = gamma.pred()
                rep = self.ultrapower(gamma).reps[x]
                out = self.ultrapower(alpha).class_of(tuple(self._embed_finite(delta, beta, r) for r in rep))
            else:
                h = self._embed_finite(finite(0), finite(1), x)
                if self._embed_finite(finite(1), gamma, h) != x:
                    raise NoRepresentative(f"no stage-1 representative for {x} at {gamma}")
                out = self._embed_finite(finite(1), alpha, h)
        self._memo[key] = out
        return out

    # limit representatives

    def representative(self, gamma: SmallOrdinal, g):
        """Least ``delta < gamma`` and ``h`` in the thread ``g`` at stage ``delta + 1``."""
        if not gamma.is_limit:
            raise MalformedInput(f"{gamma} is not a limit stage")
        if isinstance(self.carrier, FiniteCarrier):
            return finite(0), self._embed_finite(finite(0), finite(1), g)
        if self.variant == "diagonal":
            stage = max([finite(1)] + [_decode(l) for l in levels(g)])
            return stage.pred(), g
        m = self._representative_stage(gamma, levels(g))
        h = term_apply(Substitution(m), g)
        return finite(m - 1), h

    def lift_image(self, delta: SmallOrdinal, alpha: SmallOrdinal, h):
        """``e_{delta beta}^a(h)`` for ``h`` at stage ``delta + 1`` and ``alpha = beta + 1``."""
        return self.embed(delta.succ(), alpha, h)


def _compose(first: dict, then):
    second = then(frozenset(first.values()))
    return {l: second[v] for l, v in first.items()}


def _decode(level: int):
    c, j = divmod(level, LEVEL_BLOCK)
    return SmallOrdinal(c, j) if j >= 1 else None


def _show(x):
    return to_dsl(x) if isinstance(x, Term) else x


def build_skew_system(carrier, alpha, cap: SmallOrdinal = DEFAULT_CAP, variant: str = "skew") -> DirectSystem:
    if isinstance(alpha, str):
        alpha = parse_ordinal(alpha)
    return DirectSystem(carrier, alpha, cap, variant)


# sampling


def sample_payloads(system: DirectSystem, stage: SmallOrdinal, count: int, rng: random.Random, depth: int = 2):
    """Constants first, then simple variables, then random payloads valid at ``stage``."""
    if isinstance(system.carrier, FiniteCarrier):
        return list(range(system.structure(stage).size))
    out = [Const(c) for c in range(min(count, 10))]
    lo, hi = _level_range(system, stage)
    if hi >= lo:
        out += [Var(l) for l in range(max(lo, hi - 1), hi + 1)]
    while len(out) < count:
        out.append(random_term(rng, lo, hi, depth))
    return out[:max(count, 1)]


def _level_range(system, stage):
    if stage == finite(0):
        return 1, 0
    if system.variant == "diagonal":
        c, j = stage.omega_coeff, stage.finite_part
        if j == 0:
            c, j = c - 1, 4
        return c * LEVEL_BLOCK + max(1, j - 3), c * LEVEL_BLOCK + j
    if stage.omega_coeff == 0:
        return 1, stage.finite_part
    return stage.finite_part - 3, stage.finite_part


# audits


def check_coherence(system: DirectSystem, sample, triples) -> dict:
    """``e_{gamma delta}(e_{beta gamma}(x)) = e_{beta delta}(x)`` modulo the ultrafilter.

    ``sample`` maps each source stage to its payloads (or is one list used for every stage it fits).
    """
    failures = []
    checked = 0
    for beta, gamma, delta in triples:
        xs = sample(beta) if callable(sample) else [x for x in sample if system.is_valid(beta, x)]
        for x in xs:
            two_step = system.embed(gamma, delta, system.embed(beta, gamma, x))
            direct = system.embed(beta, delta, x)
            checked += 1
            if not system.equal(delta, two_step, direct):
                failures.append({"triple": [str(beta), str(gamma), str(delta)], "payload": _show(x),
                                 "composite": _show(two_step), "direct": _show(direct)})
    return {"check": "coherence", "status": "pass" if not failures else "fail", "checked": checked,
            "triples": len(triples), "failures": failures}


def representative_choices(system: DirectSystem, gamma: SmallOrdinal, g, count: int = 3):
    """Several (delta, h) with h in the thread g at stage delta + 1: shifts and patched variants."""
    delta, h = system.representative(gamma, g)
    choices = [(delta, h)]
    if isinstance(system.carrier, FiniteCarrier):
        for m in range(2, count + 1):
            choices.append((finite(m - 1), system.embed(finite(0), finite(m), g)))
        return choices[:count]
    if system.variant == "skew":
        m = delta.finite_part + 1
        j = 1
        while len(choices) < count:
            if gamma.omega_coeff >= 2 and j % 2 == 1:
                # a representative in the block just below gamma
                stage = SmallOrdinal(gamma.omega_coeff - 1, (j + 1) // 2)
                choices.append((stage.pred(), term_apply(Substitution(stage.finite_part), g)))
            else:
                m += 1
                choices.append((finite(m - 1), term_apply(Substitution(m), g)))
            j += 1
    else:
        extra = 1
        while len(choices) < count:
            choices.append((SmallOrdinal(delta.omega_coeff, delta.finite_part + extra), h))
            extra += 1
    if system.carrier.u.principal:
        return choices
    # a variant that differs from a chosen representative only at a single outermost index
    d0, h0 = choices[-1]
    top = system.top_level(d0.succ())
    choices.append((d0, Patch(top, ((0, Const(97)),), h0)))
    return choices


def check_welldef_limit(system: DirectSystem, gamma: SmallOrdinal, g, alpha: SmallOrdinal, choices) -> dict:
    """All images ``e_{delta beta}^a(h)`` agree modulo the ultrafilter."""
    if not gamma.is_limit or alpha != gamma.succ():
        raise MalformedInput(f"expected a limit stage and its successor, got {gamma}, {alpha}")
    system.require_valid(gamma, g)
    images = []
    for delta, h in choices:
        if not delta < gamma:
            raise InvalidRepresentative(f"stage {delta.succ()} is not below {gamma}", delta.succ(), _show(h))
        system.require_valid(delta.succ(), h)
        back = system.embed(delta.succ(), gamma, h)
        if not system.equal(gamma, back, g):
            raise InvalidRepresentative(f"{_show(h)} at stage {delta.succ()} is not in the thread of {_show(g)}",
                                        delta.succ(), _show(h))
        images.append((delta, h, system.lift_image(delta, alpha, h)))
    verdicts = []
    ok = True
    for (d1, _, x1), (d2, _, x2) in itertools.combinations(images, 2):
        v = system.compare(alpha, x1, x2)
        ok &= v is Ordering.EQUAL
        verdicts.append({"deltas": [str(d1), str(d2)], "verdict": str(v)})
    return {
        "check": "welldef-limit",
        "status": "pass" if ok else "fail",
        "stage": str(gamma),
        "thread": _show(g),
        "images": [{"delta": str(d), "representative": _show(h), "image": _show(x)} for d, h, x in images],
        "pairwise": verdicts,
    }


def _limit_crossing_triples(alpha: SmallOrdinal, rng: random.Random, count: int, finite_span: int = 3):
    """Up to ``count`` triples beta <= gamma <= delta, at least half crossing or reaching a limit when possible."""
    stages = ordinals_upto(alpha, finite_span)
    triples = list(itertools.combinations_with_replacement(stages, 3))
    if len(triples) <= count:
        return triples
    crossing = [t for t in triples if any(s.is_limit for s in t) or t[0].omega_coeff != t[2].omega_coeff]
    rest = [t for t in triples if t not in crossing]
    picked = rng.sample(crossing, min(len(crossing), count // 2))
    picked += rng.sample(rest, min(len(rest), count - len(picked)))
    if len(picked) < count:
        picked += rng.sample([t for t in crossing if t not in picked], count - len(picked))
    return sorted(picked)


def audit_system(u: RepUltrafilter | None = None, ranks=None, samples: int = 100, n_triples: int = 20,
                choices: int = 3, seed: int = 0, variant: str = "skew") -> dict:
    """Coherence of the system at several ranks plus the well-definedness audit at w and w*2."""
    u = u or profinite(0)
    ranks = ranks or [finite(2), finite(3), OMEGA, SmallOrdinal(1, 1), SmallOrdinal(1, 2)]
    rng = random.Random(seed)
    carrier = OmegaCarrier(u)
    coherence = []
    ok = True
    for alpha in ranks:
        system = build_skew_system(carrier, alpha, variant=variant)
        triples = _limit_crossing_triples(alpha, rng, n_triples)
        pools = {}

        def pool(stage, system=system):
            if stage not in pools:
                pools[stage] = sample_payloads(system, stage, samples, rng)
            return pools[stage]

        report = check_coherence(system, pool, triples)
        ok &= report["status"] == "pass"
        coherence.append({"rank": str(alpha), **{k: report[k] for k in ("status", "checked", "triples", "failures")}})
    welldef = []
    system = build_skew_system(carrier, SmallOrdinal(2, 1), variant=variant)
    for gamma in (OMEGA, SmallOrdinal(2, 0)):
        threads = sample_payloads(system, gamma, max(4, samples // 10), rng)
        for g in threads:
            report = check_welldef_limit(system, gamma, g, gamma.succ(), representative_choices(system, gamma, g, choices))
            ok &= report["status"] == "pass"
            welldef.append(report)
    return {
        "check": "verify-def1",
        "status": "pass" if ok else "fail",
        "ultrafilter": str(u),
        "variant": variant,
        "coherence": coherence,
        "welldef": [{"stage": r["stage"], "thread": r["thread"], "status": r["status"], "choices": len(r["images"])}
                    for r in welldef],
        "welldef_failures": [r for r in welldef if r["status"] != "pass"],
    }


# direct limits


@dataclass(frozen=True)
class Thread:
    stage: SmallOrdinal
    payload: object

    def __str__(self):
        return f"[{self.stage}: {_show(self.payload)}]"


class DirectLimit:
    """Threads of a limit stage; identifications are decided when asked for."""

    def __init__(self, system: DirectSystem, lam: SmallOrdinal):
        if not ord_is_limit(lam):
            raise MalformedInput(f"{lam} is not a limit ordinal")
        system._check_stage(lam)
        self.system = system
        self.lam = lam

    def thread(self, stage, payload) -> Thread:
        if not stage < self.lam:
            raise MalformedInput(f"stage {stage} is not below {self.lam}")
        self.system.require_valid(stage, payload)
        return Thread(stage, payload)

    def at_limit(self, t: Thread):
        return self.system.embed(t.stage, self.lam, t.payload)

    def equal(self, a: Thread, b: Thread) -> bool:
        return self.system.equal(self.lam, self.at_limit(a), self.at_limit(b))

    def compare(self, a: Thread, b: Thread) -> Ordering:
        return self.system.compare(self.lam, self.at_limit(a), self.at_limit(b))

    def normalize(self, t: Thread) -> Thread:
        """Move a thread to the least stage at which it visibly lives (best effort on the omega carrier)."""
        g = self.at_limit(t)
        if isinstance(self.system.carrier, FiniteCarrier):
            return Thread(finite(0), g)
        u = self.system.carrier.u
        if not u.principal:
            g = generic_reduct(g, u)
        g = normalize(g)
        lv = levels(g)
        if not lv:
            return Thread(finite(0), g)
        delta, h = self.system.representative(self.lam, g)
        return Thread(delta.succ(), h)


def direct_limit(system: DirectSystem, lam: SmallOrdinal) -> DirectLimit:
    return DirectLimit(system, lam)


# finite carrier: every stage collapses onto the base


def stage_isomorphism(system: DirectSystem, stage: SmallOrdinal):
    """The collapse map of ``stage`` onto the base, checked against every atomic formula."""
    base = system.carrier.structure
    m = system.structure(stage)
    iso = [system.collapse(stage, x) for x in range(m.size)]
    problems = []
    if sorted(iso) != list(range(base.size)):
        problems.append("collapse is not a bijection")
    for name, _ in base.signature.relations:
        image = frozenset(tuple(iso[x] for x in tup) for tup in m.rel(name))
        if image != base.rel(name):
            problems.append(f"relation {name} not preserved")
    for name, k in base.signature.functions:
        for args in itertools.product(range(m.size), repeat=k):
            if iso[m.fun(name, args)] != base.fun(name, [iso[a] for a in args]):
                problems.append(f"function {name} not preserved at {args}")
                break
    for name in base.signature.constants:
        if iso[m.const(name)] != base.const(name):
            problems.append(f"constant {name} not preserved")
    return iso, problems


def finite_collapse_audit(structures, ranks, index_sizes=(1, 2, 3)) -> dict:
    """Each stage isomorphic to M, and each e_{beta gamma} the identity through the collapses."""
    checked = 0
    failures = []
    for m in structures:
        for n in index_sizes:
            for a in range(n):
                system = build_skew_system(FiniteCarrier(m, n, a), max(ranks))
                for stage in ranks:
                    _, problems = stage_isomorphism(system, stage)
                    checked += 1
                    if problems:
                        failures.append({"structure": m.to_json(), "index": [n, a], "stage": str(stage),
                                         "problems": problems})
                for beta, gamma in _audit_pairs(sorted(ranks)):
                    for x in range(system.structure(beta).size):
                        if system.collapse(gamma, system.embed(beta, gamma, x)) != system.collapse(beta, x):
                            failures.append({"structure": m.to_json(), "index": [n, a],
                                             "embedding": [str(beta), str(gamma)], "element": x})
                    checked += 1
    return {"check": "finite-collapse", "status": "pass" if not failures else "fail", "checked": checked,
            "failures": failures[:20]}


def _audit_pairs(ranks):
    """Consecutive stages, every stage from 0, and every stage into a limit; coherence covers the rest."""
    pairs = set(zip(ranks, ranks[1:]))
    pairs |= {(ranks[0], g) for g in ranks[1:]}
    pairs |= {(b, g) for b, g in itertools.combinations(ranks, 2) if g.is_limit}
    return sorted(pairs)


# chains


@dataclass(frozen=True)
class LevelMap:
    """A payload map given by a level substitution; lifts by sending top level to top level."""

    sub: Substitution

    def __call__(self, x):
        return term_apply(self.sub, x)

    def lift(self, src_top: int, dst_top: int) -> "LevelMap":
        mapping = {l: self.sub(l) for l, _ in self.sub.remap}
        mapping[src_top] = dst_top
        return LevelMap(Substitution.explicit(mapping, self.sub.shift))


@dataclass(frozen=True)
class Swap:
    """``base`` followed by exchanging the classes of two constants."""

    base: object
    a: int
    b: int
    u: RepUltrafilter

    def __call__(self, x):
        y = self.base(x)
        k = max([0] + list(levels(y)))
        if term_compare(y, Const(self.a), self.u, k) is Ordering.EQUAL:
            return Const(self.b)
        if term_compare(y, Const(self.b), self.u, k) is Ordering.EQUAL:
            return Const(self.a)
        return y

    def lift(self, src_top, dst_top):
        # for a non-principal u a lifted map agrees with the map on diagonal classes,
        # and constants are the only classes the swap moves
        return Swap(self.base.lift(src_top, dst_top), self.a, self.b, self.u)


@dataclass(frozen=True)
class Composite:
    outer: object
    inner: object

    def __call__(self, x):
        return self.outer(self.inner(x))

    def lift(self, src_top, dst_top):
        return Composite(self.outer.lift(src_top, dst_top), self.inner.lift(src_top, dst_top))


IDENTITY_MAP = LevelMap(Substitution())


def _violation(diagram, witness):
    return DiagramViolation(diagram, witness)


def verify_chain_finite(models, inclusions, isos, index_size: int, point: int) -> dict:
    """Exhaustive check of the chain hypotheses and construction of the isomorphisms phi_beta."""
    k = len(models) - 1
    if len(inclusions) != k or len(isos) != k:
        raise MalformedInput(f"{len(models)} models need {k} inclusions and {k} isomorphisms")
    ups = [finite_ultrapower(m, index_size, point) for m in models]
    for beta, inc in enumerate(inclusions):
        src, dst = models[beta], models[beta + 1]
        if len(inc) != src.size or len(set(inc)) != src.size or any(not 0 <= v < dst.size for v in inc):
            raise _violation(f"inclusion[{beta}]", {"map": list(inc)})
        for name, arity in src.signature.relations:
            for tup in itertools.product(range(src.size), repeat=arity):
                if (tup in src.rel(name)) != (tuple(inc[x] for x in tup) in dst.rel(name)):
                    raise _violation(f"inclusion[{beta}]", {"relation": name, "tuple": list(tup)})
    for beta, iota in enumerate(isos):
        q, dst = ups[beta].structure, models[beta + 1]
        _check_iso(f"iso[{beta}]", iota, q, dst)
    for x in range(models[0].size):
        d = ups[0].class_of((x,) * index_size)
        if isos[0][d] != inclusions[0][x]:
            raise _violation("triangle", {"element": x, "via_iso": isos[0][d], "via_inclusion": inclusions[0][x]})
    for beta in range(k - 1):
        for c, rep in enumerate(ups[beta].reps):
            lifted = ups[beta + 1].class_of(tuple(inclusions[beta][r] for r in rep))
            left = isos[beta + 1][lifted]
            right = inclusions[beta + 1][isos[beta][c]]
            if left != right:
                raise _violation(f"square[{beta}]", {"class": c, "representative": list(rep), "left": left,
                                                     "right": right})
    system = build_skew_system(FiniteCarrier(models[0], index_size, point), finite(k))
    phis = [list(range(models[0].size))]
    for beta in range(k):
        skew_up = system.ultrapower(finite(beta + 1))
        phi = [isos[beta][ups[beta].class_of(tuple(phis[beta][r] for r in rep))] for rep in skew_up.reps]
        _check_iso(f"phi[{beta + 1}]", phi, skew_up.structure, models[beta + 1])
        phis.append(phi)
    return {"check": "verify-chain", "status": "pass", "carrier": "finite", "length": k,
            "isomorphisms": phis}


def _check_iso(diagram, f, src: FiniteStructure, dst: FiniteStructure):
    if len(f) != src.size or sorted(f) != list(range(dst.size)):
        raise _violation(diagram, {"map": list(f), "reason": "not a bijection"})
    for name, _ in src.signature.relations:
        image = frozenset(tuple(f[x] for x in tup) for tup in src.rel(name))
        if image != dst.rel(name):
            bad = sorted(image ^ dst.rel(name))[0]
            raise _violation(diagram, {"relation": name, "tuple": list(bad), "reason": "relation not preserved"})


def self_chain(u: RepUltrafilter, rank: int, perturb=None):
    """(system, inclusions, isos) of the chain M_beta := stage beta with iota_beta the identity."""
    system = build_skew_system(OmegaCarrier(u), finite(rank))
    inclusions = [LevelMap(Substitution(1)) for _ in range(rank)]
    isos = [IDENTITY_MAP for _ in range(rank)]
    if perturb is not None:
        beta, (a, b) = perturb
        if not 0 <= beta < rank:
            raise MalformedInput(f"no iota_{beta} in a chain of length {rank}")
        isos[beta] = Swap(IDENTITY_MAP, a, b, u)
    return system, inclusions, isos


def verify_chain_omega(u: RepUltrafilter, rank: int = 4, perturb=None, samples: int = 50, seed: int = 0) -> dict:
    """Sample-based chain check on the omega carrier; the chain is the system's own stages."""
    if u.principal:
        raise MalformedInput("the omega chain check needs a non-principal ultrafilter")
    system, inclusions, isos = self_chain(u, rank, perturb)
    rng = random.Random(seed)
    pools = [sample_payloads(system, finite(b), samples + 12, rng) for b in range(rank + 1)]

    def eq(stage, x, y):
        return system.equal(finite(stage), x, y)

    for beta in range(rank):
        for x in pools[beta]:
            want = system.embed(finite(beta), finite(beta + 1), x)
            if not eq(beta + 1, inclusions[beta](x), want):
                raise _violation(f"inclusion[{beta}]", {"element": _show(x)})
    for x in pools[0]:
        d = x  # the diagonal fixes term syntax
        left, right = isos[0](d), inclusions[0](x)
        if not eq(1, left, right):
            raise _violation("triangle", {"element": _show(x), "via_iso": _show(left), "via_inclusion": _show(right)})
    for beta in range(rank - 1):
        lifted_inc = inclusions[beta].lift(beta + 1, beta + 2)
        for x in pools[beta + 1]:
            left = isos[beta + 1](lifted_inc(x))
            right = inclusions[beta + 1](isos[beta](x))
            if not eq(beta + 2, left, right):
                raise _violation(f"square[{beta}]", {"element": _show(x), "left": _show(left), "right": _show(right)})
    phis = [IDENTITY_MAP]
    for beta in range(rank):
        phi = Composite(isos[beta], phis[beta].lift(beta + 1, beta + 1))
        pool = pools[beta + 1][:30]
        images = [phi(x) for x in pool]
        for (x, fx), (y, fy) in itertools.combinations(zip(pool, images), 2):
            if system.compare(finite(beta + 1), x, y) is not system.compare(finite(beta + 1), fx, fy):
                raise _violation(f"phi[{beta + 1}]", {"pair": [_show(x), _show(y)], "images": [_show(fx), _show(fy)]})
        phis.append(phi)
    identity_on_sample = all(
        system.equal(finite(b), phis[b](x), x) for b in range(rank + 1) for x in pools[b]
    )
    return {"check": "verify-chain", "status": "pass", "carrier": "omega", "length": rank,
            "ultrafilter": str(u), "phi_identity_on_sample": identity_on_sample,
            "sampled": sum(len(p) for p in pools)}


def verify_chain(spec: dict) -> dict:
    """Run a chain check described by a JSON document; raises DiagramViolation on failure."""
    carrier = spec.get("carrier")
    try:
        if carrier == "finite":
            models = [FiniteStructure.from_json(m) for m in spec["models"]]
            return verify_chain_finite(models, [list(map(int, e)) for e in spec["inclusions"]],
                                       [list(map(int, e)) for e in spec["isos"]],
                                       int(spec["index_size"]), int(spec["point"]))
        if carrier == "omega":
            u = Profinite(parse_point(str(spec.get("point", 0))))
            perturb = spec.get("perturb")
            if perturb is not None:
                perturb = (int(perturb["iso"]), tuple(int(v) for v in perturb.get("swap", (0, 1))))
            return verify_chain_omega(u, int(spec.get("rank", 4)), perturb, int(spec.get("samples", 50)),
                                      int(spec.get("seed", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(f"bad chain document: {exc!r}") from None
    raise MalformedInput(f"unknown chain carrier {carrier!r}")


def finite_self_chain(structure: FiniteStructure, index_size: int, point: int, length: int) -> dict:
    """Chain document whose models are the skew stages and whose isos are identities on classes."""
    system = build_skew_system(FiniteCarrier(structure, index_size, point), finite(length))
    models = [system.structure(finite(b)) for b in range(length + 1)]
    inclusions = [[system.embed(finite(b), finite(b + 1), x) for x in range(models[b].size)] for b in range(length)]
    isos = [list(range(models[b + 1].size)) for b in range(length)]
    return {"carrier": "finite", "index_size": index_size, "point": point,
            "models": [m.to_json() for m in models], "inclusions": inclusions, "isos": isos}


# the separating witness


def remark1_witness(u: RepUltrafilter | None = None, carrier=None) -> dict:
    """Compare the lifted diagonal d^a with the diagonal on the class of the identity map."""
    if isinstance(carrier, FiniteCarrier):
        system = build_skew_system(carrier, finite(2))
        size = system.structure(finite(1)).size
        lifted = [system.embed(finite(1), finite(2), x) for x in range(size)]
        up2 = system.ultrapower(finite(2))
        diagonal = [up2.class_of((x,) * carrier.index_size) for x in range(size)]
        separated = lifted != diagonal
        witness = next((x for x in range(size) if lifted[x] != diagonal[x]), None)
        return {"check": "witness-remark1", "status": "separated" if separated else "not_separated",
                "carrier": "finite", "lifted_diagonal": lifted, "diagonal": diagonal, "witness": witness}
    u = u or profinite(0)
    system = build_skew_system(OmegaCarrier(u), finite(2))
    g = Var(1)
    lifted = system.embed(finite(1), finite(2), g)
    diagonal = g  # the diagonal embedding fixes term syntax
    sets = verdict_sets(lifted, diagonal, u, 2)
    verdict = term_compare(lifted, diagonal, u, 2)
    equality = sets[Ordering.EQUAL]
    separated = verdict is not Ordering.EQUAL and equality == empty()
    return {
        "check": "witness-remark1",
        "status": "separated" if separated else "not_separated",
        "carrier": "omega",
        "ultrafilter": str(u),
        "element": to_dsl(g),
        "lifted_diagonal": to_dsl(lifted),
        "diagonal": to_dsl(diagonal),
        "verdict": str(verdict),
        "equality_set": set_dsl(equality),
    }
