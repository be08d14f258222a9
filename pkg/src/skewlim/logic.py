"""Finite first-order structures, formulas, and ultrapowers over finite index sets.

On a finite index set every ultrafilter is principal, so ``finite_ultrapower``
always collapses onto the base structure; the point of this module is that the
collapse, Łoś equivalence and the functoriality of lifted maps can all be
checked by brute force.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from functools import lru_cache

from . import kernels
from ._speedups_py import (
    OP_AND, OP_EQ, OP_EXISTS, OP_FALSE, OP_FORALL, OP_IMPLIES, OP_NOT, OP_OR, OP_REL, OP_TRUE,
)
from .errors import ArityMismatch, FormulaSyntaxError, MalformedInput, UnboundVariable


# structures


@dataclass(frozen=True)
class Signature:
    relations: tuple = ()  # ((name, arity), ...)
    functions: tuple = ()
    constants: tuple = ()

    def __post_init__(self):
        names = [n for n, _ in self.relations] + [n for n, _ in self.functions] + list(self.constants)
        if len(names) != len(set(names)):
            raise MalformedInput(f"duplicate symbol in signature {names}")
        if any(k < 1 for _, k in self.relations + self.functions):
            raise MalformedInput("relation and function arities must be >= 1")


BINARY = Signature(relations=(("R", 2),))


@dataclass(frozen=True)
class FiniteStructure:
    size: int
    signature: Signature = BINARY
    relations: tuple = ()  # ((name, frozenset of tuples), ...)
    functions: tuple = ()  # ((name, tuple of values in lexicographic argument order), ...)
    constants: tuple = ()  # ((name, value), ...)

    def __post_init__(self):
        if self.size < 1:
            raise MalformedInput("universe must be nonempty")
        rels = dict(self.relations)
        for name, k in self.signature.relations:
            for t in rels.get(name, ()):
                if len(t) != k or any(not 0 <= x < self.size for x in t):
                    raise MalformedInput(f"bad tuple {t} for {name}")
        funs = dict(self.functions)
        for name, k in self.signature.functions:
            table = funs.get(name)
            if table is None or len(table) != self.size**k:
                raise MalformedInput(f"function {name} needs a total table")
            if any(not 0 <= v < self.size for v in table):
                raise MalformedInput(f"function {name} leaves the universe")
        consts = dict(self.constants)
        for name in self.signature.constants:
            if not 0 <= consts.get(name, -1) < self.size:
                raise MalformedInput(f"constant {name} missing or outside the universe")

    def rel(self, name):
        return dict(self.relations).get(name, frozenset())

    def fun(self, name, args):
        k = dict(self.signature.functions)[name]
        idx = 0
        for a in args:
            idx = idx * self.size + a
        del k
        return dict(self.functions)[name][idx]

    def const(self, name):
        return dict(self.constants)[name]

    @property
    def universe(self):
        return range(self.size)

    def to_json(self) -> dict:
        rel_arity = dict(self.signature.relations)
        fun_arity = dict(self.signature.functions)
        return {
            "size": self.size,
            "relations": {
                n: {"arity": rel_arity[n], "tuples": sorted(list(t) for t in self.rel(n))}
                for n in rel_arity
            },
            "functions": {n: {"arity": fun_arity[n], "table": list(dict(self.functions)[n])} for n in fun_arity},
            "constants": {n: self.const(n) for n in self.signature.constants},
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteStructure":
        try:
            size = int(data["size"])
            rels, rel_sig = [], []
            for name, spec in sorted(data.get("relations", {}).items()):
                if isinstance(spec, dict):
                    arity, tuples = int(spec["arity"]), spec["tuples"]
                else:
                    tuples = spec
                    arity = len(tuples[0]) if tuples else 2
                rel_sig.append((name, arity))
                rels.append((name, frozenset(tuple(int(x) for x in t) for t in tuples)))
            funs, fun_sig = [], []
            for name, spec in sorted(data.get("functions", {}).items()):
                fun_sig.append((name, int(spec["arity"])))
                funs.append((name, tuple(int(v) for v in spec["table"])))
            consts = sorted((n, int(v)) for n, v in data.get("constants", {}).items())
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise MalformedInput(f"bad structure JSON: {exc!r}") from None
        sig = Signature(tuple(rel_sig), tuple(fun_sig), tuple(n for n, _ in consts))
        return cls(size, sig, tuple(rels), tuple(funs), tuple(consts))


def binary_structure(size: int, pairs) -> FiniteStructure:
    return FiniteStructure(size, BINARY, (("R", frozenset(tuple(p) for p in pairs)),))


def linear_order(size: int, name: str = "<=") -> FiniteStructure:
    """``{0..size-1}`` ordered by its single binary relation (written infix as ``<=`` by default)."""
    pairs = frozenset((a, b) for a in range(size) for b in range(size) if a <= b)
    return FiniteStructure(size, Signature(relations=((name, 2),)), ((name, pairs),))


# formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    left: object
    right: object


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Implies:
    left: object
    right: object


@dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclass(frozen=True)
class Forall:
    var: str
    body: object


_BINOPS = {And: "&", Or: "|", Implies: "->"}
_INFIX_RELS = ("<=", "<")


def term_text(t) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    return f"{t.fn}({','.join(term_text(a) for a in t.args)})"


def formula_text(phi) -> str:
    """Print in the parser's grammar, fully parenthesized around binary connectives."""
    if isinstance(phi, Rel):
        if phi.name in _INFIX_RELS:
            return f"{term_text(phi.args[0])} {phi.name} {term_text(phi.args[1])}"
        return f"{phi.name}({','.join(term_text(a) for a in phi.args)})"
    if isinstance(phi, Eq):
        return f"{term_text(phi.left)} = {term_text(phi.right)}"
    if isinstance(phi, Truth):
        return "true" if phi.value else "false"
    if isinstance(phi, Not):
        return f"!{_wrap(phi.body)}"
    if type(phi) in _BINOPS:
        return f"({formula_text(phi.left)} {_BINOPS[type(phi)]} {formula_text(phi.right)})"
    if isinstance(phi, Exists):
        return f"exists {phi.var}. {formula_text(phi.body)}"
    if isinstance(phi, Forall):
        return f"forall {phi.var}. {formula_text(phi.body)}"
    raise TypeError(phi)


def _wrap(phi):
    text = formula_text(phi)
    if isinstance(phi, (Exists, Forall, Eq)) or (isinstance(phi, Rel) and phi.name in _INFIX_RELS):
        return f"({text})"
    return text


def free_vars(phi) -> frozenset:
    if isinstance(phi, Var):
        return frozenset({phi.name})
    if isinstance(phi, (Const, Truth)):
        return frozenset()
    if isinstance(phi, (App, Rel)):
        return frozenset().union(*(free_vars(a) for a in phi.args))
    if isinstance(phi, Eq):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or, Implies)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(phi)


def quantifier_depth(phi) -> int:
    if isinstance(phi, (Exists, Forall)):
        return 1 + quantifier_depth(phi.body)
    if isinstance(phi, Not):
        return quantifier_depth(phi.body)
    if isinstance(phi, (And, Or, Implies)):
        return max(quantifier_depth(phi.left), quantifier_depth(phi.right))
    return 0


def connective_count(phi) -> int:
    if isinstance(phi, (Exists, Forall)):
        return connective_count(phi.body)
    if isinstance(phi, Not):
        return 1 + connective_count(phi.body)
    if isinstance(phi, (And, Or, Implies)):
        return 1 + connective_count(phi.left) + connective_count(phi.right)
    return 0


# parser

_TOKEN_RE = re.compile(r"\s*(?:(->|<=|[()!&|=<,.])|([A-Za-z_][A-Za-z0-9_]*))")
_VAR_RE = re.compile(r"^x\d+$")
_KEYWORDS = {"forall", "exists", "true", "false"}


def _tokenize(text):
    pos = 0
    out = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(1) if m.group(1) else m.start(2)
        out.append((m.group(1) or m.group(2), start))
        pos = m.end()
    out.append(("<eof>", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)][0]

    def pos(self):
        return self.toks[self.i][1]

    def take(self, expected=None):
        tok, pos = self.toks[self.i]
        if expected is not None and tok != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, found {tok!r}", pos)
        self.i += 1
        return tok

    def formula(self):
        if self.peek() in ("forall", "exists"):
            return self.quantified()
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def quantified(self):
        kind = self.take()
        pos = self.pos()
        var = self.take()
        if not _VAR_RE.match(var):
            raise FormulaSyntaxError(f"expected a variable, found {var!r}", pos)
        self.take(".")
        body = self.formula()
        return Exists(var, body) if kind == "exists" else Forall(var, body)

    def disjunction(self):
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("forall", "exists"):
            return self.quantified()
        if tok == "(":
            self.take()
            body = self.formula()
            self.take(")")
            return body
        if tok in ("true", "false"):
            self.take()
            return Truth(tok == "true")
        if tok[:1].isupper() and self.peek(1) == "(":
            name = self.take()
            return Rel(name, self.arguments())
        left = self.term()
        op = self.peek()
        if op == "=":
            self.take()
            return Eq(left, self.term())
        if op in _INFIX_RELS:
            self.take()
            return Rel(op, (left, self.term()))
        raise FormulaSyntaxError(f"expected '=' or a relation, found {op!r}", self.pos())

    def arguments(self):
        self.take("(")
        args = [self.term()]
        while self.peek() == ",":
            self.take()
            args.append(self.term())
        self.take(")")
        return tuple(args)

    def term(self):
        pos = self.pos()
        tok = self.peek()
        if not re.match(r"^[A-Za-z_]", tok) or tok in _KEYWORDS:
            raise FormulaSyntaxError(f"expected a term, found {tok!r}", pos)
        self.take()
        if _VAR_RE.match(tok):
            return Var(tok)
        if self.peek() == "(":
            return App(tok, self.arguments())
        return Const(tok)


def parse_formula(text: str):
    p = _Parser(text)
    phi = p.formula()
    if p.peek() != "<eof>":
        raise FormulaSyntaxError(f"trailing input {p.peek()!r}", p.pos())
    return phi


# evaluation


def _eval_term(m: FiniteStructure, t, asg):
    if isinstance(t, Var):
        try:
            return asg[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    if isinstance(t, Const):
        return m.const(t.name)
    return m.fun(t.fn, [_eval_term(m, a, asg) for a in t.args])


def eval_formula(m: FiniteStructure, phi, asg=None) -> bool:
    """Tarskian satisfaction by exhaustive quantifier expansion."""
    asg = dict(asg or {})
    missing = free_vars(phi) - asg.keys()
    if missing:
        raise UnboundVariable(sorted(missing)[0])
    return _eval(m, phi, asg)


def _eval(m, phi, asg):
    if isinstance(phi, Rel):
        return tuple(_eval_term(m, a, asg) for a in phi.args) in m.rel(phi.name)
    if isinstance(phi, Eq):
        return _eval_term(m, phi.left, asg) == _eval_term(m, phi.right, asg)
    if isinstance(phi, Truth):
        return phi.value
    if isinstance(phi, Not):
        return not _eval(m, phi.body, asg)
    if isinstance(phi, And):
        return _eval(m, phi.left, asg) and _eval(m, phi.right, asg)
    if isinstance(phi, Or):
        return _eval(m, phi.left, asg) or _eval(m, phi.right, asg)
    if isinstance(phi, Implies):
        return (not _eval(m, phi.left, asg)) or _eval(m, phi.right, asg)
    if isinstance(phi, (Exists, Forall)):
        want = isinstance(phi, Exists)
        saved = asg.get(phi.var)
        result = not want
        for v in m.universe:
            asg[phi.var] = v
            if _eval(m, phi.body, asg) == want:
                result = want
                break
        if saved is None:
            asg.pop(phi.var, None)
        else:
            asg[phi.var] = saved
        return result
    raise TypeError(phi)


@dataclass(frozen=True)
class CompiledFormula:
    """A binary-relation formula lowered to a kernel program over variable slots."""

    program: object
    slots: tuple  # variable names, in slot order
    relation: str
    code: tuple = ()  # (ops, xs, ys, root), for rebuilding on another backend

    def __call__(self, m: FiniteStructure, asg) -> bool:
        env = [asg.get(name, 0) for name in self.slots]
        return self.program.run(relation_table(m, self.relation), m.size, env)


@lru_cache(maxsize=4096)
def relation_table(m: FiniteStructure, name: str) -> bytes:
    table = bytearray(m.size * m.size)
    for a, b in m.rel(name):
        table[a * m.size + b] = 1
    return bytes(table)


def compile_formula(phi):
    """Lower ``phi`` to a kernel program; None when it uses more than one binary relation or non-variable terms."""
    ops, xs, ys = [], [], []
    slots = {}
    rel_names = set()

    def slot(name):
        return slots.setdefault(name, len(slots))

    def emit(op, x=0, y=0):
        ops.append(op)
        xs.append(x)
        ys.append(y)
        return len(ops) - 1

    def var_slot(t):
        if not isinstance(t, Var):
            raise _Unsupported
        return slot(t.name)

    def go(f):
        if isinstance(f, Rel):
            if len(f.args) != 2:
                raise _Unsupported
            rel_names.add(f.name)
            return emit(OP_REL, var_slot(f.args[0]), var_slot(f.args[1]))
        if isinstance(f, Eq):
            return emit(OP_EQ, var_slot(f.left), var_slot(f.right))
        if isinstance(f, Truth):
            return emit(OP_TRUE if f.value else OP_FALSE)
        if isinstance(f, Not):
            return emit(OP_NOT, go(f.body))
        if isinstance(f, (And, Or, Implies)):
            op = {And: OP_AND, Or: OP_OR, Implies: OP_IMPLIES}[type(f)]
            left = go(f.left)
            return emit(op, left, go(f.right))
        if isinstance(f, (Exists, Forall)):
            s = slot(f.var)
            return emit(OP_EXISTS if isinstance(f, Exists) else OP_FORALL, s, go(f.body))
        raise _Unsupported

    try:
        root = go(phi)
    except _Unsupported:
        return None
    if len(rel_names) > 1 or len(slots) > 64:
        return None
    names = tuple(sorted(slots, key=slots.get))
    code = (tuple(ops), tuple(xs), tuple(ys), root)
    return CompiledFormula(kernels.Program(*code), names, next(iter(rel_names), "R"), code)


class _Unsupported(Exception):
    pass


def evaluator(phi):
    """A callable ``(structure, assignment) -> bool`` using the kernel when possible."""
    compiled = compile_formula(phi)
    fv = free_vars(phi)

    def run(m, asg):
        missing = fv - asg.keys()
        if missing:
            raise UnboundVariable(sorted(missing)[0])
        if compiled is not None:
            return compiled(m, asg)
        return _eval(m, phi, dict(asg))

    return run


# ultrapowers over a finite index set


@dataclass(frozen=True)
class PrincipalIndex:
    """The principal ultrafilter at ``point`` on ``{0, ..., size-1}``."""

    size: int
    point: int

    def __post_init__(self):
        if not 0 <= self.point < self.size:
            raise MalformedInput(f"point {self.point} outside index set of size {self.size}")

    def contains(self, subset) -> bool:
        return self.point in subset


@dataclass
class Ultrapower:
    base: FiniteStructure
    index: PrincipalIndex
    structure: FiniteStructure
    reps: list  # class -> lexicographically least member
    members: list  # class -> all functions in it
    _class: dict = field(repr=False, default_factory=dict)

    def class_of(self, g) -> int:
        return self._class[tuple(g)]

    @property
    def collapse(self) -> list:
        """Class -> value at the point; an isomorphism onto the base structure."""
        return [rep[self.index.point] for rep in self.reps]


@lru_cache(maxsize=1024)
def finite_ultrapower(m: FiniteStructure, index_size: int, point: int) -> Ultrapower:
    """Quotient of ``m ** I`` by equality on a set in the principal ultrafilter."""
    a = PrincipalIndex(index_size, point)
    ix = range(index_size)
    classes = []
    class_of = {}
    for g in itertools.product(m.universe, repeat=index_size):
        for k, cls in enumerate(classes):
            h = cls[0]
            if a.contains({j for j in ix if g[j] == h[j]}):
                cls.append(g)
                class_of[g] = k
                break
        else:
            class_of[g] = len(classes)
            classes.append([g])
    order = sorted(range(len(classes)), key=lambda k: min(classes[k]))
    renumber = {old: new for new, old in enumerate(order)}
    members = [classes[k] for k in order]
    class_of = {g: renumber[k] for g, k in class_of.items()}
    reps = [min(c) for c in members]

    rels = []
    for name, k in m.signature.relations:
        table = m.rel(name)
        holds = set()
        for combo in itertools.product(range(len(reps)), repeat=k):
            where = {j for j in ix if tuple(reps[c][j] for c in combo) in table}
            if a.contains(where):
                holds.add(combo)
        rels.append((name, frozenset(holds)))
    funs = []
    for name, k in m.signature.functions:
        values = []
        for combo in itertools.product(range(len(reps)), repeat=k):
            values.append(class_of[tuple(m.fun(name, [reps[c][j] for c in combo]) for j in ix)])
        funs.append((name, tuple(values)))
    consts = tuple((name, class_of[(m.const(name),) * index_size]) for name in m.signature.constants)
    quotient = FiniteStructure(len(reps), m.signature, tuple(rels), tuple(funs), consts)
    return Ultrapower(m, a, quotient, reps, members, class_of)


def los_check(m: FiniteStructure, index_size: int, point: int, phi, gs: dict, ev=None) -> bool:
    """Compare truth in the ultrapower with truth on a set of indices in the ultrafilter."""
    fv = free_vars(phi)
    if not fv <= gs.keys():
        raise ArityMismatch(f"no function supplied for {sorted(fv - gs.keys())}")
    if any(len(g) != index_size for g in gs.values()):
        raise ArityMismatch(f"functions must have length {index_size}")
    ev = ev or evaluator(phi)
    up = finite_ultrapower(m, index_size, point)
    in_power = ev(up.structure, {x: up.class_of(g) for x, g in gs.items()})
    where = {j for j in range(index_size) if ev(m, {x: g[j] for x, g in gs.items()})}
    return in_power == up.index.contains(where)


def bare_set(size: int) -> FiniteStructure:
    return FiniteStructure(size, Signature(), (), (), ())


def lift_map(e, a_size: int, b_size: int, index_size: int, point: int, check=True) -> list:
    """Lift ``e: A -> B`` to the ultrapowers: class of g goes to class of ``e . g``."""
    if len(e) != a_size or any(not 0 <= v < b_size for v in e):
        raise MalformedInput("map must be total from A into B")
    up_a = finite_ultrapower(bare_set(a_size), index_size, point)
    up_b = finite_ultrapower(bare_set(b_size), index_size, point)
    out = []
    for k, rep in enumerate(up_a.reps):
        image = up_b.class_of(tuple(e[x] for x in rep))
        if check:
            for g in up_a.members[k]:
                if up_b.class_of(tuple(e[x] for x in g)) != image:
                    raise AssertionError(f"lift of {e} depends on the representative of class {k}")
        out.append(image)
    return out


# sweeps


def all_binary_structures(size: int):
    pairs = [(a, b) for a in range(size) for b in range(size)]
    for bits in range(2 ** len(pairs)):
        yield binary_structure(size, [p for i, p in enumerate(pairs) if bits >> i & 1])


def sample_structures(rng: random.Random, count: int, max_size: int = 3):
    """Every binary structure of size < max_size, then random ones of size max_size up to ``count``."""
    out = [s for n in range(1, max_size) for s in all_binary_structures(n)]
    pool = list(all_binary_structures(max_size))
    rng.shuffle(pool)
    out.extend(pool[: max(0, count - len(out))])
    return out


_ATOMS = [
    Rel("R", (Var("x0"), Var("x1"))),
    Rel("R", (Var("x1"), Var("x0"))),
    Rel("R", (Var("x0"), Var("x0"))),
    Rel("R", (Var("x1"), Var("x1"))),
    Eq(Var("x0"), Var("x1")),
    Eq(Var("x0"), Var("x0")),
]


def generate_formulas(rng: random.Random, count: int, max_depth: int = 2, max_connectives: int = 3):
    """Distinct random formulas within the depth and connective budget, covering every clause shape."""

    def build(conn, depth):
        choices = ["atom"]
        if conn >= 1:
            choices += ["not", "bin"]
        if depth >= 1:
            choices += ["quant"]
        kind = rng.choice(choices)
        if kind == "atom":
            return rng.choice(_ATOMS)
        if kind == "not":
            return Not(build(conn - 1, depth))
        if kind == "quant":
            q = rng.choice([Exists, Forall])
            return q(rng.choice(["x0", "x1"]), build(conn, depth - 1))
        left_budget = rng.randint(0, conn - 1)
        op = rng.choice([And, Or, Implies])
        return op(build(left_budget, depth), build(conn - 1 - left_budget, depth))

    seeds = [
        parse_formula("x0 = x0"),
        parse_formula("forall x0. exists x1. R(x0,x1)"),
        parse_formula("exists x0. !R(x0,x0) & R(x0,x1)"),
        parse_formula("forall x1. (R(x0,x1) -> R(x1,x0)) | x0 = x1"),
        parse_formula("!exists x1. forall x0. R(x0,x1)"),
    ]
    out = list(dict.fromkeys(seeds))
    seen = set(out)
    tries = 0
    while len(out) < count and tries < 100 * count:
        tries += 1
        phi = build(max_connectives, max_depth)
        if phi not in seen and quantifier_depth(phi) <= max_depth and connective_count(phi) <= max_connectives:
            seen.add(phi)
            out.append(phi)
    return out[:count]


def los_sweep(seed: int = 0, n_structures: int = 200, n_formulas: int = 48, assignments: int = 2,
              max_size: int = 3, max_index: int = 3, formulas=None) -> dict:
    """Run ``los_check`` over structures x index sets x points x formulas x sampled assignments."""
    rng = random.Random(seed)
    structures = sample_structures(rng, n_structures, max_size)
    if formulas is None:
        formulas = generate_formulas(rng, n_formulas)
    compiled = [(phi, sorted(free_vars(phi)), evaluator(phi)) for phi in formulas]
    checks = 0
    failures = []
    for m in structures:
        for index_size in range(1, max_index + 1):
            for point in range(index_size):
                for phi, fv, ev in compiled:
                    for _ in range(assignments if fv else 1):
                        gs = {x: tuple(rng.randrange(m.size) for _ in range(index_size)) for x in fv}
                        checks += 1
                        if not los_check(m, index_size, point, phi, gs, ev):
                            failures.append({
                                "structure": m.to_json(), "index_size": index_size, "point": point,
                                "formula": formula_text(phi), "functions": gs,
                            })
    return {
        "check": "los-sweep",
        "status": "pass" if not failures else "fail",
        "structures": len(structures),
        "formulas": len(formulas),
        "checks": checks,
        "failures": failures[:10],
    }


def _random_map(rng, a, b, kind):
    if kind == "injective" and a <= b:
        return tuple(rng.sample(range(b), a))
    if kind == "surjective" and a >= b:
        e = list(range(b)) + [rng.randrange(b) for _ in range(a - b)]
        rng.shuffle(e)
        return tuple(e)
    return tuple(rng.randrange(b) for _ in range(a))


def is_injective(e) -> bool:
    return len(set(e)) == len(e)


def is_surjective(e, b_size) -> bool:
    return set(e) == set(range(b_size))


def is_homomorphism(e, src: FiniteStructure, dst: FiniteStructure, name="R") -> bool:
    target = dst.rel(name)
    return all(tuple(e[x] for x in t) in target for t in src.rel(name))


def lift_laws(seed: int = 0, trials: int = 1000, max_size: int = 4, max_index: int = 3) -> dict:
    """Randomized audit of identity, composition, injectivity, surjectivity and homomorphism preservation."""
    rng = random.Random(seed)
    violations = []
    counts = dict.fromkeys(["identity", "composition", "injective", "surjective", "homomorphism"], 0)
    for trial in range(trials):
        na, nb, nc = (rng.randint(1, max_size) for _ in range(3))
        index_size = rng.randint(1, max_index)
        point = rng.randrange(index_size)
        kind = rng.choice(["any", "injective", "surjective"])
        e0 = _random_map(rng, na, nb, kind)
        e1 = _random_map(rng, nb, nc, rng.choice(["any", "injective", "surjective"]))
        l0 = lift_map(e0, na, nb, index_size, point)
        l1 = lift_map(e1, nb, nc, index_size, point)
        l01 = lift_map(tuple(e1[x] for x in e0), na, nc, index_size, point)
        ident = lift_map(tuple(range(na)), na, na, index_size, point)

        def bad(law, **info):
            violations.append({"trial": trial, "law": law, "e0": e0, "e1": e1, **info})

        counts["identity"] += 1
        if ident != list(range(len(ident))):
            bad("identity")
        counts["composition"] += 1
        if [l1[c] for c in l0] != l01:
            bad("composition")
        up_b = finite_ultrapower(bare_set(nb), index_size, point)
        if is_injective(e0):
            counts["injective"] += 1
            if not is_injective(l0):
                bad("injective")
        if is_surjective(e0, nb):
            counts["surjective"] += 1
            if not is_surjective(l0, up_b.structure.size):
                bad("surjective")
        src = binary_structure(na, [(x, y) for x in range(na) for y in range(na) if rng.random() < 0.4])
        image = {(e0[x], e0[y]) for x, y in src.rel("R")}
        extra = {(x, y) for x in range(nb) for y in range(nb) if rng.random() < 0.2}
        dst = binary_structure(nb, image | extra)
        if is_homomorphism(e0, src, dst):
            counts["homomorphism"] += 1
            q_src = finite_ultrapower(src, index_size, point).structure
            q_dst = finite_ultrapower(dst, index_size, point).structure
            if not is_homomorphism(l0, q_src, q_dst):
                bad("homomorphism")
    return {
        "check": "lift-laws",
        "status": "pass" if not violations else "fail",
        "trials": trials,
        "exercised": counts,
        "violations": violations[:10],
    }
