"""Linear terms denoting elements of iterated ultrapowers of (omega, <=).

A term mentions variables ``v_l`` by *level*. In the k-fold ultrapower the
level-k coordinate is the outermost index and level 1 the innermost; the same
syntax denotes an element at every rank at or above its own, which is why the
diagonal embedding is the identity on terms. Levels at or below 0 occur only in
payloads of limit stages (see ``skewlimit``).

Order and equality modulo a non-principal ultrafilter are decided in closed
form: fixing every level to its u-generic cell (large, in the ultrafilter's
residue class) turns a term into an integer linear form, and the iterated
limit reads that form lexicographically from the innermost level outwards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import FormulaSyntaxError, MalformedInput, MissingLevel, RankTooHigh
from .ordinal import Ordering
from .periodic import check_period, empty, from_eventual, lcm, omega, ps_combine
from .ultrafilter import RepUltrafilter, residue_of, uf_member


class Term:
    __slots__ = ()

    def __add__(self, other):
        return Sum(self, _coerce(other))

    def __radd__(self, other):
        return Sum(_coerce(other), self)

    def __rmul__(self, factor):
        return Scale(factor, self)

    def __str__(self):
        return to_dsl(self)


def _coerce(x):
    return Const(x) if isinstance(x, int) else x


@dataclass(frozen=True)
class Const(Term):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise MalformedInput("constants are natural numbers")


@dataclass(frozen=True)
class Var(Term):
    level: int


@dataclass(frozen=True)
class Sum(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Scale(Term):
    factor: int
    term: Term

    def __post_init__(self):
        if self.factor < 0:
            raise MalformedInput("scale factors are natural numbers")


@dataclass(frozen=True)
class ResidueCase(Term):
    """``branches[v_level % modulus]``."""

    modulus: int
    level: int
    branches: tuple

    def __post_init__(self):
        if self.modulus < 1 or len(self.branches) != self.modulus:
            raise MalformedInput("a residue case needs exactly one branch per residue")


@dataclass(frozen=True)
class Patch(Term):
    """``entries[v_level]`` when listed, else ``default``."""

    level: int
    entries: tuple  # ((key, term), ...) sorted by key
    default: Term

    def __post_init__(self):
        keys = [k for k, _ in self.entries]
        if keys != sorted(set(keys)) or any(k < 0 for k in keys):
            raise MalformedInput("patch keys must be distinct naturals in increasing order")


def patch(level: int, entries: Mapping[int, Term], default: Term) -> Patch:
    return Patch(level, tuple(sorted(entries.items())), default)


# structural queries


def levels(t: Term) -> frozenset:
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, Var):
        return frozenset({t.level})
    if isinstance(t, Sum):
        return levels(t.left) | levels(t.right)
    if isinstance(t, Scale):
        return levels(t.term)
    if isinstance(t, ResidueCase):
        return frozenset({t.level}).union(*(levels(b) for b in t.branches))
    if isinstance(t, Patch):
        return frozenset({t.level}).union(levels(t.default), *(levels(e) for _, e in t.entries))
    raise TypeError(t)


def term_rank(t: Term) -> int:
    """Highest level mentioned; 0 for closed terms."""
    return max(levels(t), default=0)


def _fold(t, case_fn, patch_fn, acc):
    """Collect facts about case and patch nodes (any level)."""
    if isinstance(t, Sum):
        _fold(t.left, case_fn, patch_fn, acc)
        _fold(t.right, case_fn, patch_fn, acc)
    elif isinstance(t, Scale):
        _fold(t.term, case_fn, patch_fn, acc)
    elif isinstance(t, ResidueCase):
        case_fn(t, acc)
        for b in t.branches:
            _fold(b, case_fn, patch_fn, acc)
    elif isinstance(t, Patch):
        patch_fn(t, acc)
        _fold(t.default, case_fn, patch_fn, acc)
        for _, e in t.entries:
            _fold(e, case_fn, patch_fn, acc)
    return acc


def level_period(t: Term, level: int) -> int:
    """lcm of the moduli of residue cases that branch on ``level``."""
    acc = _fold(t, lambda c, a: a.append(c.modulus) if c.level == level else None, lambda p, a: None, [])
    return lcm(*acc)


def level_patch_bound(t: Term, level: int) -> int:
    """One past the largest patch key at ``level`` (0 when there is none)."""
    acc = _fold(
        t, lambda c, a: None, lambda p, a: a.extend(k + 1 for k, _ in p.entries) if p.level == level else None, []
    )
    return max(acc, default=0)


def const_bound(t: Term) -> int:
    """Upper bound on the constant part of ``t`` in any cell."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        return 0
    if isinstance(t, Sum):
        return const_bound(t.left) + const_bound(t.right)
    if isinstance(t, Scale):
        return t.factor * const_bound(t.term)
    if isinstance(t, ResidueCase):
        return max(const_bound(b) for b in t.branches)
    if isinstance(t, Patch):
        return max([const_bound(t.default)] + [const_bound(e) for _, e in t.entries])
    raise TypeError(t)


def coef_bound(t: Term) -> int:
    """Upper bound on the sum of variable coefficients of ``t`` in any cell."""
    if isinstance(t, Const):
        return 0
    if isinstance(t, Var):
        return 1
    if isinstance(t, Sum):
        return coef_bound(t.left) + coef_bound(t.right)
    if isinstance(t, Scale):
        return t.factor * coef_bound(t.term)
    if isinstance(t, ResidueCase):
        return max(coef_bound(b) for b in t.branches)
    if isinstance(t, Patch):
        return max([coef_bound(t.default)] + [coef_bound(e) for _, e in t.entries])
    raise TypeError(t)


# ground semantics


def term_eval(t: Term, env: Mapping[int, int]) -> int:
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        return _lookup(env, t.level)
    if isinstance(t, Sum):
        return term_eval(t.left, env) + term_eval(t.right, env)
    if isinstance(t, Scale):
        return t.factor * term_eval(t.term, env)
    if isinstance(t, ResidueCase):
        return term_eval(t.branches[_lookup(env, t.level) % t.modulus], env)
    if isinstance(t, Patch):
        return term_eval(dict(t.entries).get(_lookup(env, t.level), t.default), env)
    raise TypeError(t)


def _lookup(env, level):
    try:
        return env[level]
    except KeyError:
        raise MissingLevel(level) from None


def term_slice(t: Term, k: int, n: int) -> Term:
    """Substitute ``v_k := n`` and resolve every case and patch on level k."""
    if isinstance(t, Const):
        return t
    if isinstance(t, Var):
        return Const(n) if t.level == k else t
    if isinstance(t, Sum):
        return Sum(term_slice(t.left, k, n), term_slice(t.right, k, n))
    if isinstance(t, Scale):
        return Scale(t.factor, term_slice(t.term, k, n))
    if isinstance(t, ResidueCase):
        if t.level == k:
            return term_slice(t.branches[n % t.modulus], k, n)
        return ResidueCase(t.modulus, t.level, tuple(term_slice(b, k, n) for b in t.branches))
    if isinstance(t, Patch):
        if t.level == k:
            return term_slice(dict(t.entries).get(n, t.default), k, n)
        return Patch(t.level, tuple((key, term_slice(e, k, n)) for key, e in t.entries), term_slice(t.default, k, n))
    raise TypeError(t)


# normal form


def _linear_parts(t: Term, factor: int, acc: dict):
    """Accumulate ``factor * t`` into {atom: coefficient} with atom None for constants."""
    if isinstance(t, Const):
        acc[None] = acc.get(None, 0) + factor * t.value
    elif isinstance(t, Sum):
        _linear_parts(t.left, factor, acc)
        _linear_parts(t.right, factor, acc)
    elif isinstance(t, Scale):
        _linear_parts(t.term, factor * t.factor, acc)
    else:
        atom = _normal_atom(t)
        if isinstance(atom, (Var, ResidueCase, Patch)):
            acc[atom] = acc.get(atom, 0) + factor
        else:
            _linear_parts(atom, factor, acc)


def _normal_atom(t: Term) -> Term:
    if isinstance(t, Var):
        return t
    if isinstance(t, ResidueCase):
        branches = tuple(normalize(b) for b in t.branches)
        d = next(c for c in range(1, t.modulus + 1)
                 if t.modulus % c == 0 and all(branches[j] == branches[j % c] for j in range(t.modulus)))
        if d == 1:
            return branches[0]
        return ResidueCase(d, t.level, branches[:d])
    if isinstance(t, Patch):
        default = normalize(t.default)
        entries = tuple((k, normalize(e)) for k, e in t.entries)
        entries = tuple((k, e) for k, e in entries if e != default)
        if not entries:
            return default
        return Patch(t.level, entries, default)
    raise TypeError(t)


def _atom_key(atom):
    if isinstance(atom, Var):
        return (0, atom.level, "")
    return (1, atom.level, to_dsl(atom))


def normalize(t: Term) -> Term:
    """Sum of scaled atoms sorted by level, constant last; equal normal forms denote equal functions."""
    acc = {}
    _linear_parts(t, 1, acc)
    const = acc.pop(None, 0)
    parts = []
    for atom in sorted((a for a, c in acc.items() if c), key=_atom_key):
        c = acc[atom]
        parts.append(atom if c == 1 else Scale(c, atom))
    if const or not parts:
        parts.append(Const(const))
    out = parts[0]
    for p in parts[1:]:
        out = Sum(out, p)
    return out


# embeddings as level substitutions


@dataclass(frozen=True)
class Substitution:
    """Level map ``l -> remap.get(l, l + shift)``."""

    shift: int = 0
    remap: tuple = ()

    def __call__(self, level: int) -> int:
        for src, dst in self.remap:
            if src == level:
                return dst
        return level + self.shift

    @classmethod
    def explicit(cls, mapping: Mapping[int, int], shift: int = 0) -> "Substitution":
        return cls(shift, tuple(sorted((s, d) for s, d in mapping.items() if d != s + shift)))

    def then(self, after: "Substitution") -> "Substitution":
        """``after`` applied to the result of ``self``."""
        keys = {s for s, _ in self.remap} | {s - self.shift for s, _ in after.remap}
        return Substitution.explicit({k: after(self(k)) for k in keys}, self.shift + after.shift)

    def is_monotone_on(self, lvls) -> bool:
        lvls = sorted(lvls)
        return all(self(a) < self(b) for a, b in zip(lvls, lvls[1:]))


IDENTITY = Substitution()
SHIFT_ONE = Substitution(1)


def term_apply(sub: Substitution, t: Term) -> Term:
    if isinstance(t, Const):
        return t
    if isinstance(t, Var):
        return Var(sub(t.level))
    if isinstance(t, Sum):
        return Sum(term_apply(sub, t.left), term_apply(sub, t.right))
    if isinstance(t, Scale):
        return Scale(t.factor, term_apply(sub, t.term))
    if isinstance(t, ResidueCase):
        return ResidueCase(t.modulus, sub(t.level), tuple(term_apply(sub, b) for b in t.branches))
    if isinstance(t, Patch):
        return Patch(sub(t.level), tuple((k, term_apply(sub, e)) for k, e in t.entries), term_apply(sub, t.default))
    raise TypeError(t)


def _check_rank(t, k):
    if term_rank(t) > k:
        raise RankTooHigh(f"{to_dsl(t)} has rank {term_rank(t)} > {k}")


def embed_diagonal(t: Term, k: int) -> Term:
    """Diagonal embedding of rank k into rank k+1: syntactically the identity."""
    _check_rank(t, k)
    return t


def embed_skew(t: Term, k: int) -> Term:
    """Lift of the diagonal, rank k into rank k+1: every level moves up by one."""
    if k < 1:
        raise RankTooHigh("the skew embedding starts at rank 1")
    _check_rank(t, k)
    return term_apply(SHIFT_ONE, t)


# order modulo an ultrafilter


def generic_form(t: Term, u: RepUltrafilter):
    """Coefficients and constant of ``t`` on the u-generic cell of every level."""
    coeffs = {}
    const = 0
    stack = [(t, 1)]
    while stack:
        node, f = stack.pop()
        if isinstance(node, Const):
            const += f * node.value
        elif isinstance(node, Var):
            coeffs[node.level] = coeffs.get(node.level, 0) + f
        elif isinstance(node, Sum):
            stack.append((node.left, f))
            stack.append((node.right, f))
        elif isinstance(node, Scale):
            stack.append((node.term, f * node.factor))
        elif isinstance(node, ResidueCase):
            stack.append((node.branches[residue_of(u, node.modulus)], f))
        elif isinstance(node, Patch):
            stack.append((node.default, f))
        else:
            raise TypeError(node)
    return coeffs, const


def _closed_verdict(t: Term, s: Term, u: RepUltrafilter) -> Ordering:
    if u.principal:
        env = _ConstEnv(u.point)
        return Ordering.of_sign(term_eval(t, env) - term_eval(s, env))
    ct, kt = generic_form(t, u)
    cs, ks = generic_form(s, u)
    for level in sorted(set(ct) | set(cs)):
        d = ct.get(level, 0) - cs.get(level, 0)
        if d:
            return Ordering.of_sign(d)
    return Ordering.of_sign(kt - ks)


class _ConstEnv(dict):
    def __init__(self, value):
        super().__init__()
        self.value = value

    def __missing__(self, key):
        return self.value


def _stability_bound(t: Term, s: Term, u: RepUltrafilter, k: int):
    """(threshold, period) beyond which the level-k verdict is periodic."""
    p = check_period(lcm(level_period(t, k), level_period(s, k)))
    patch_end = max(level_patch_bound(t, k), level_patch_bound(s, k))
    c = const_bound(t) + const_bound(s)
    if u.principal:
        c += (coef_bound(t) + coef_bound(s)) * u.point
    return max(patch_end, c + 1), p


def verdict_sets(t: Term, s: Term, u: RepUltrafilter, k: int) -> dict:
    """The three sets {n : slices at v_k = n compare as Less / Equal / Greater}."""
    _check_rank(t, k)
    _check_rank(s, k)
    threshold, p = _stability_bound(t, s, u, k)
    cache = {}

    def inner(n):
        if n not in cache:
            cache[n] = _closed_verdict(term_slice(t, k, n), term_slice(s, k, n), u)
        return cache[n]

    sets = {v: from_eventual(threshold, p, lambda n, v=v: inner(n) is v) for v in Ordering}
    union = ps_combine("union", ps_combine("union", sets[Ordering.LESS], sets[Ordering.EQUAL]), sets[Ordering.GREATER])
    assert union == omega(), "verdict sets do not cover omega"
    for a, b in ((Ordering.LESS, Ordering.EQUAL), (Ordering.LESS, Ordering.GREATER), (Ordering.EQUAL, Ordering.GREATER)):
        assert ps_combine("intersection", sets[a], sets[b]) == empty(), "verdict sets overlap"
    return sets


def term_compare(t: Term, s: Term, u: RepUltrafilter, k: int) -> Ordering:
    """Order of the classes of ``t`` and ``s`` in the k-fold ultrapower of (omega, <=)."""
    _check_rank(t, k)
    _check_rank(s, k)
    if normalize(t) == normalize(s):
        return Ordering.EQUAL
    if not (levels(t) | levels(s)):
        return Ordering.of_sign(term_eval(t, {}) - term_eval(s, {}))
    sets = verdict_sets(t, s, u, k)
    chosen = [v for v, a in sets.items() if uf_member(u, a)]
    assert len(chosen) == 1, f"ultrafilter picks {len(chosen)} verdicts"
    return chosen[0]


def term_equal(t: Term, s: Term, u: RepUltrafilter, k: int | None = None) -> bool:
    if k is None:
        k = max(term_rank(t), term_rank(s))
    return term_compare(t, s, u, k) is Ordering.EQUAL


def compare_by_limits(t: Term, s: Term, u: RepUltrafilter) -> Ordering:
    """Independent route: peel the outermost level by substituting one u-typical large value."""
    lv = levels(t) | levels(s)
    if not lv:
        return Ordering.of_sign(term_eval(t, {}) - term_eval(s, {}))
    k = max(lv)
    if u.principal:
        n = u.point
    else:
        threshold, p = _stability_bound(t, s, u, k)
        start = 2 * threshold + 7
        n = start + (residue_of(u, p) - start) % p
    return compare_by_limits(term_slice(t, k, n), term_slice(s, k, n), u)


# text form: 5 | v1 | v(-2) | a + b | 3*a | case(p; b0 | b1 @ vL) | patch(vL; k->t, k->t; default)

_TOK_RE = re.compile(r"\s*(?:(\d+)|(case|patch)\b|(v\d+|v\(\s*-?\d+\s*\))|(->|[-+*();|@,]))")


def _var_text(level: int) -> str:
    return f"v{level}" if level >= 1 else f"v({level})"


def to_dsl(t: Term) -> str:
    if isinstance(t, Const):
        return str(t.value)
    if isinstance(t, Var):
        return _var_text(t.level)
    if isinstance(t, Sum):
        right = to_dsl(t.right)
        return f"{to_dsl(t.left)} + ({right})" if isinstance(t.right, Sum) else f"{to_dsl(t.left)} + {right}"
    if isinstance(t, Scale):
        inner = to_dsl(t.term)
        return f"{t.factor}*({inner})" if isinstance(t.term, Sum) else f"{t.factor}*{inner}"
    if isinstance(t, ResidueCase):
        return f"case({t.modulus}; {' | '.join(to_dsl(b) for b in t.branches)} @ {_var_text(t.level)})"
    if isinstance(t, Patch):
        entries = ", ".join(f"{k}->{to_dsl(e)}" for k, e in t.entries)
        return f"patch({_var_text(t.level)}; {entries}; {to_dsl(t.default)})"
    raise TypeError(t)


class _TermParser:
    def __init__(self, text):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOK_RE.match(text, pos)
            if not m:
                raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
            kind = next(i for i in range(1, 5) if m.group(i) is not None)
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.toks.append((0, "<eof>", len(text)))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        kind, tok, pos = self.toks[self.i]
        if value is not None and tok != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {tok!r}", pos)
        self.i += 1
        return kind, tok, pos

    def term(self):
        out = self.summand()
        while self.peek()[1] == "+":
            self.take()
            out = Sum(out, self.summand())
        return out

    def summand(self):
        kind, tok, pos = self.peek()
        if kind == 1 and self.toks[self.i + 1][1] == "*":
            self.take()
            self.take("*")
            return Scale(int(tok), self.summand())
        return self.atom()

    def level(self):
        kind, tok, pos = self.take()
        if kind != 3:
            raise FormulaSyntaxError(f"expected a variable, found {tok!r}", pos)
        return int(tok[1:].strip("()").strip())

    def atom(self):
        kind, tok, pos = self.peek()
        if kind == 1:
            self.take()
            return Const(int(tok))
        if kind == 3:
            return Var(self.level())
        if tok == "(":
            self.take()
            inner = self.term()
            self.take(")")
            return inner
        if tok == "case":
            self.take()
            self.take("(")
            _, p, ppos = self.take()
            if not p.isdigit():
                raise FormulaSyntaxError("expected a modulus", ppos)
            self.take(";")
            branches = [self.term()]
            while self.peek()[1] == "|":
                self.take()
                branches.append(self.term())
            self.take("@")
            lvl = self.level()
            self.take(")")
            if len(branches) != int(p):
                raise FormulaSyntaxError(f"case modulus {p} needs {p} branches, got {len(branches)}", ppos)
            return ResidueCase(int(p), lvl, tuple(branches))
        if tok == "patch":
            self.take()
            self.take("(")
            lvl = self.level()
            self.take(";")
            entries = {}
            while self.peek()[1] != ";":
                kk, key, kpos = self.take()
                if kk != 1:
                    raise FormulaSyntaxError("expected a patch key", kpos)
                self.take("->")
                if int(key) in entries:
                    raise FormulaSyntaxError(f"duplicate patch key {key}", kpos)
                entries[int(key)] = self.term()
                if self.peek()[1] == ",":
                    self.take()
            self.take(";")
            default = self.term()
            self.take(")")
            return patch(lvl, entries, default)
        raise FormulaSyntaxError(f"expected a term, found {tok!r}", pos)


def parse_term(text: str) -> Term:
    p = _TermParser(text)
    t = p.term()
    kind, tok, pos = p.peek()
    if kind != 0:
        raise FormulaSyntaxError(f"trailing input {tok!r}", pos)
    return t


def to_json(t: Term):
    if isinstance(t, Const):
        return {"const": t.value}
    if isinstance(t, Var):
        return {"var": t.level}
    if isinstance(t, Sum):
        return {"sum": [to_json(t.left), to_json(t.right)]}
    if isinstance(t, Scale):
        return {"scale": [t.factor, to_json(t.term)]}
    if isinstance(t, ResidueCase):
        return {"case": {"modulus": t.modulus, "level": t.level, "branches": [to_json(b) for b in t.branches]}}
    if isinstance(t, Patch):
        return {"patch": {"level": t.level, "entries": [[k, to_json(e)] for k, e in t.entries],
                          "default": to_json(t.default)}}
    raise TypeError(t)


def from_json(data) -> Term:
    try:
        (kind, body), = data.items()
        if kind == "const":
            return Const(int(body))
        if kind == "var":
            return Var(int(body))
        if kind == "sum":
            return Sum(from_json(body[0]), from_json(body[1]))
        if kind == "scale":
            return Scale(int(body[0]), from_json(body[1]))
        if kind == "case":
            return ResidueCase(int(body["modulus"]), int(body["level"]), tuple(from_json(b) for b in body["branches"]))
        if kind == "patch":
            return patch(int(body["level"]), {int(k): from_json(e) for k, e in body["entries"]}, from_json(body["default"]))
    except (ValueError, TypeError, KeyError, IndexError, AttributeError) as exc:
        raise MalformedInput(f"bad term JSON: {exc!r}") from None
    raise MalformedInput(f"unknown term node {kind!r}")


def shift_levels(t: Term, amount: int) -> Term:
    return term_apply(Substitution(amount), t) if amount else t


def generic_reduct(t: Term, u: RepUltrafilter) -> Term:
    """Resolve every case and patch on the u-generic cell; equal to ``t`` modulo a non-principal u."""
    if u.principal:
        raise ValueError("generic reduction needs a non-principal ultrafilter")
    if isinstance(t, (Const, Var)):
        return t
    if isinstance(t, Sum):
        return Sum(generic_reduct(t.left, u), generic_reduct(t.right, u))
    if isinstance(t, Scale):
        return Scale(t.factor, generic_reduct(t.term, u))
    if isinstance(t, ResidueCase):
        return generic_reduct(t.branches[residue_of(u, t.modulus)], u)
    if isinstance(t, Patch):
        return generic_reduct(t.default, u)
    raise TypeError(t)


def random_term(rng, lo: int, hi: int, depth: int = 2, max_const: int = 9) -> Term:
    """A random term whose levels lie in ``[lo, hi]`` (closed when hi < lo)."""
    has_levels = hi >= lo
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        if has_levels and rng.random() < 0.6:
            return Var(rng.randint(lo, hi))
        return Const(rng.randint(0, max_const))
    if roll < 0.55:
        return Sum(random_term(rng, lo, hi, depth - 1, max_const), random_term(rng, lo, hi, depth - 1, max_const))
    if roll < 0.7:
        return Scale(rng.randint(0, 3), random_term(rng, lo, hi, depth - 1, max_const))
    if not has_levels:
        return Const(rng.randint(0, max_const))
    level = rng.randint(lo, hi)
    if roll < 0.85:
        p = rng.randint(1, 4)
        return ResidueCase(p, level, tuple(random_term(rng, lo, hi, depth - 1, max_const) for _ in range(p)))
    keys = sorted(rng.sample(range(6), rng.randint(1, 2)))
    return patch(level, {k: random_term(rng, lo, hi, depth - 1, max_const) for k in keys},
                 random_term(rng, lo, hi, depth - 1, max_const))
