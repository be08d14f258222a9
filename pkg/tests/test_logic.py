import itertools
import random

import pytest
from hypothesis import given, strategies as st

from skewlim.errors import ArityMismatch, FormulaSyntaxError, MalformedInput, UnboundVariable
from skewlim.logic import (
    Exists, FiniteStructure, Forall, Rel, Var, all_binary_structures, binary_structure, connective_count,
    eval_formula, evaluator, finite_ultrapower, formula_text, free_vars, generate_formulas, lift_laws, lift_map,
    linear_order, los_check, los_sweep, parse_formula, quantifier_depth,
)

x0, x1 = Var("x0"), Var("x1")


def test_parse_examples():
    assert parse_formula("forall x0. exists x1. R(x0,x1)") == Forall("x0", Exists("x1", Rel("R", (x0, x1))))
    eq = parse_formula("x0 = x0")
    assert formula_text(eq) == "x0 = x0" and free_vars(eq) == {"x0"}
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("forall x0. (")
    assert info.value.position == len("forall x0. (")


@pytest.mark.parametrize("text", ["R(x0", "x0 &", "forall y. R(y,y)", "exists x0 R(x0,x0)", "x0 == x1", ")"])
def test_parse_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


def test_precedence_and_round_trip():
    phi = parse_formula("!R(x0,x1) & R(x1,x0) | x0 = x1 -> R(x0,x0)")
    assert parse_formula(formula_text(phi)) == phi
    assert connective_count(phi) == 4 and quantifier_depth(phi) == 0


def test_eval_examples():
    m = binary_structure(3, [])
    assert eval_formula(m, parse_formula("x0 = x0"), {"x0": 0})
    assert not eval_formula(m, parse_formula("exists x0. R(x0,x0)"))
    assert eval_formula(linear_order(2), parse_formula("forall x0. exists x1. x0 <= x1"))
    assert not eval_formula(linear_order(2), parse_formula("forall x0. exists x1. x1 < x0 | x1 = x0 & !(x0 = x1)"))
    with pytest.raises(UnboundVariable):
        eval_formula(m, parse_formula("R(x0,x1)"), {"x0": 0})


def test_ultrapower_examples():
    m = binary_structure(2, [(0, 1)])
    up = finite_ultrapower(m, 1, 0)
    assert up.structure == m and up.collapse == [0, 1]
    up = finite_ultrapower(m, 2, 1)
    # oracle: enumerate all 4 functions and quotient by the value at index 1
    classes = {}
    for g in itertools.product(range(2), repeat=2):
        classes.setdefault(g[1], []).append(g)
    assert sorted(map(sorted, up.members)) == sorted(map(sorted, classes.values()))
    assert up.reps == [min(c) for c in up.members]
    assert up.structure.size == 2
    assert finite_ultrapower(linear_order(3), 3, 0).structure.size == 3


def brute_collapse_ok(m, n, i):
    """Independent check that g -> g(i) is an isomorphism from the quotient onto m."""
    up = finite_ultrapower(m, n, i)
    image = up.collapse
    if sorted(image) != list(m.universe):
        return False
    for name, k in m.signature.relations:
        for combo in itertools.product(range(up.structure.size), repeat=k):
            if (combo in up.structure.rel(name)) != (tuple(image[c] for c in combo) in m.rel(name)):
                return False
    return all(up.class_of(g) == image.index(g[i]) for g in itertools.product(m.universe, repeat=n))


def test_collapse_exhaustive_small():
    for size in (1, 2):
        for m in all_binary_structures(size):
            for n in (1, 2, 3):
                for i in range(n):
                    assert brute_collapse_ok(m, n, i)


def test_los_check_examples():
    m = binary_structure(2, [(0, 1)])
    assert los_check(m, 2, 0, parse_formula("x0 = x0"), {"x0": (0, 1)})
    phi = parse_formula("R(x0,x1)")
    assert los_check(m, 3, 2, phi, {"x0": (1, 1, 0), "x1": (0, 0, 1)})
    with pytest.raises(ArityMismatch):
        los_check(m, 2, 0, phi, {"x0": (0, 1)})
    with pytest.raises(ArityMismatch):
        los_check(m, 2, 0, phi, {"x0": (0, 1), "x1": (0,)})


def test_lift_map_examples():
    assert lift_map((0, 1, 2), 3, 3, 2, 1) == [0, 1, 2]
    e0, e1 = (1, 0), (2, 0)
    assert [lift_map(e1, 2, 3, 3, 0)[c] for c in lift_map(e0, 2, 2, 3, 0)] == lift_map((0, 2), 2, 3, 3, 0)
    lifted = lift_map((0, 2), 2, 3, 2, 1)
    assert len(set(lifted)) == 2
    with pytest.raises(MalformedInput):
        lift_map((0, 3), 2, 3, 2, 1)


def test_structure_json_round_trip():
    for m in [linear_order(3), binary_structure(2, [(1, 0)])]:
        assert FiniteStructure.from_json(m.to_json()) == m
    with pytest.raises(MalformedInput):
        FiniteStructure.from_json({"relations": {}})


def test_generated_formulas_respect_bounds():
    fs = generate_formulas(random.Random(1), 48)
    assert len(fs) == 48 and len(set(fs)) == 48
    assert all(quantifier_depth(f) <= 2 and connective_count(f) <= 3 for f in fs)


@given(st.integers(0, 2**9 - 1), st.integers(0, 10**6))
def test_compiled_evaluator_matches_tree_walk(bits, seed):
    pairs = [(a, b) for a in range(3) for b in range(3)]
    m = binary_structure(3, [p for i, p in enumerate(pairs) if bits >> i & 1])
    rng = random.Random(seed)
    for phi in generate_formulas(rng, 6):
        asg = {x: rng.randrange(3) for x in free_vars(phi)}
        assert evaluator(phi)(m, asg) == eval_formula(m, phi, asg)


def test_los_sweep_small():
    doc = los_sweep(seed=3, n_structures=30, n_formulas=12)
    assert doc["status"] == "pass" and doc["checks"] > 0


def test_los_sweep_with_given_formula():
    doc = los_sweep(n_structures=20, formulas=[parse_formula("forall x0. exists x1. R(x0,x1) & !(x0 = x1)")])
    assert doc["status"] == "pass" and doc["formulas"] == 1


def test_lift_laws_small():
    doc = lift_laws(seed=5, trials=100)
    assert doc["status"] == "pass"
