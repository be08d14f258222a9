import pytest
from hypothesis import given, strategies as st

from _strategies import ep_functions, periodic_sets
from skewlim import epfunc
from skewlim.epfunc import (
    affine, constant, ef_canonicalize, ef_compare_set, ef_compose, ef_eval, ef_is_injective, ef_left_inverse,
    ef_preimage, find_collision, identity, parse_function, to_dsl,
)
from skewlim.errors import MalformedInput, NotInjective
from skewlim.periodic import empty, omega, ps_combine, ps_member, residue_class

DOUBLE = affine(2)
SUCC = affine(1, 1)
N = 10**4


def test_eval_examples():
    assert ef_eval(identity(), 17) == 17
    assert ef_eval(DOUBLE, 5) == 10
    assert ef_eval(constant(3), 999) == 3


def test_compose_examples():
    assert ef_compose(DOUBLE, identity()) == DOUBLE
    assert ef_compose(DOUBLE, DOUBLE) == affine(4)
    h = ef_compose(SUCC, DOUBLE)
    assert to_dsl(h) == "0:1:[(2,1)]:"
    assert all(ef_eval(h, n) == 2 * n + 1 for n in range(N))


def test_compare_set_examples():
    assert ef_compare_set("=", DOUBLE, DOUBLE) == omega()
    gt5 = ef_compare_set("<", constant(5), identity())
    assert [ps_member(gt5, n) for n in range(N)] == [n > 5 for n in range(N)]
    le = ef_compare_set("<=", SUCC, DOUBLE)
    assert [ps_member(le, n) for n in range(N)] == [n >= 1 for n in range(N)]


def test_preimage_examples():
    a = residue_class(1, 3)
    assert ef_preimage(identity(), a) == a
    evens = ef_preimage(DOUBLE, residue_class(0, 4))
    assert evens == residue_class(0, 2)
    assert [ps_member(evens, n) for n in range(N)] == [(2 * n) % 4 == 0 for n in range(N)]
    assert ef_preimage(constant(3), residue_class(0, 3)) == omega()
    assert ef_preimage(constant(3), a) == empty()


def test_left_inverse_examples():
    assert ef_left_inverse(identity()) == identity()
    half = ef_left_inverse(DOUBLE)
    assert to_dsl(half) == "0:2:[(1/2,0),(0,0)]:"
    assert all(ef_eval(half, ef_eval(DOUBLE, n)) == n for n in range(N))
    assert all(ef_eval(half, 2 * n + 1) == 0 for n in range(100))
    back = ef_left_inverse(affine(1, 3))
    assert to_dsl(back) == "3:1:[(1,-3)]:0,0,0"
    assert all(ef_eval(back, n + 3) == n for n in range(N))


def test_left_inverse_rejects_collisions():
    f = ef_canonicalize(0, 2, [(1, 0), (1, -1)])  # 2k and 2k+1 both go to 2k
    assert find_collision(f) is not None
    with pytest.raises(NotInjective):
        ef_left_inverse(f)
    with pytest.raises(NotInjective):
        ef_left_inverse(constant(0))


def test_canonical_forms():
    assert ef_canonicalize(2, 2, [(2, 0), (2, 0)], [0, 2]) == DOUBLE
    assert ef_canonicalize(0, 1, [(0, 7)]) == constant(7)
    with pytest.raises(MalformedInput):
        ef_canonicalize(0, 1, [(1, -1)])  # 0 would map to -1
    with pytest.raises(MalformedInput):
        ef_canonicalize(0, 1, [(-1, 5)])


def test_dsl_errors():
    for bad in ["", "0:1:[]:", "0:1:[(2,0)]:1", "0:2:[(2,0)]:", "x"]:
        with pytest.raises(MalformedInput):
            parse_function(bad)


@given(ep_functions())
def test_dsl_and_json_round_trip(f):
    assert parse_function(to_dsl(f)) == f
    assert epfunc.from_json(f.to_json()) == f


@given(ep_functions(), ep_functions(), ep_functions())
def test_compose_pointwise_and_associative(f, g, h):
    fg = ef_compose(f, g)
    assert all(ef_eval(fg, n) == ef_eval(f, ef_eval(g, n)) for n in range(1000))
    assert ef_compose(fg, h) == ef_compose(f, ef_compose(g, h))


@given(ep_functions(), ep_functions(), st.sampled_from(["<", "<=", "="]))
def test_compare_set_pointwise(f, g, rel):
    s = ef_compare_set(rel, f, g)
    op = {"<": int.__lt__, "<=": int.__le__, "=": int.__eq__}[rel]
    assert all(ps_member(s, n) == op(ef_eval(f, n), ef_eval(g, n)) for n in range(1000))


@given(ep_functions(), ep_functions())
def test_equal_everywhere_iff_same_form(f, g):
    assert (ef_compare_set("=", f, g) == omega()) == (f == g)


@given(ep_functions(), periodic_sets(), periodic_sets())
def test_preimage_pointwise_and_boolean(f, a, b):
    pa = ef_preimage(f, a)
    assert all(ps_member(pa, n) == ps_member(a, ef_eval(f, n)) for n in range(1000))
    for op in ("intersection", "union", "difference"):
        assert ef_preimage(f, ps_combine(op, a, b)) == ps_combine(op, pa, ef_preimage(f, b))


@given(ep_functions())
def test_injectivity_decision_matches_brute_force(f):
    values = [ef_eval(f, n) for n in range(300)]
    if ef_is_injective(f):
        assert len(set(values)) == len(values)
        g = ef_left_inverse(f)
        assert all(ef_eval(g, v) == n for n, v in enumerate(values))
    else:
        n, m = find_collision(f)
        assert n != m and ef_eval(f, n) == ef_eval(f, m)
