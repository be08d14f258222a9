import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from _strategies import term_strategy
from skewlim.errors import DiagramViolation, InvalidRepresentative, MalformedInput, StageCapExceeded
from skewlim.logic import all_binary_structures, binary_structure, linear_order
from skewlim.ordinal import OMEGA, Ordering, SmallOrdinal, finite, ordinals_upto
from skewlim.skewlimit import (
    DEFAULT_CAP, FiniteCarrier, OmegaCarrier, Thread, build_skew_system, check_coherence, check_welldef_limit,
    closed_form_shift, direct_limit, finite_collapse_audit, finite_self_chain, remark1_witness,
    representative_choices, sample_payloads, stage_isomorphism, verify_chain, verify_chain_omega, audit_system,
    _limit_crossing_triples,
)
from skewlim.terms import Const, Patch, Substitution, Var, parse_term, term_apply, term_compare
from skewlim.ultrafilter import profinite

U0 = profinite(0)
W = SmallOrdinal
OMEGA_SYS = build_skew_system(OmegaCarrier(U0), W(2, 3))


def test_rank_zero_system():
    system = build_skew_system(OmegaCarrier(U0), finite(0))
    assert system.stages() == [finite(0)]
    assert system.embed(finite(0), finite(0), Const(4)) == Const(4)
    with pytest.raises(StageCapExceeded):
        system.embed(finite(0), finite(1), Const(4))


def test_cap():
    with pytest.raises(StageCapExceeded):
        build_skew_system(OmegaCarrier(U0), W(2, 9))
    assert build_skew_system(OmegaCarrier(U0), "w*2+8").alpha == DEFAULT_CAP


def test_small_stage_examples():
    s = OMEGA_SYS
    assert s.embed(finite(0), finite(2), Const(7)) == Const(7)
    assert s.embed(finite(1), finite(2), Var(1)) == Var(2)
    assert s.embed(finite(0), finite(3), Const(7)) == Const(7)
    assert s.embed(finite(1), finite(3), Var(1)) == Var(3)
    x = parse_term("v1 + 2*v2")
    assert s.embed(finite(2), finite(2), x) == x
    with pytest.raises(InvalidRepresentative):
        s.embed(finite(1), finite(2), Var(2))
    with pytest.raises(MalformedInput):
        s.embed(finite(2), finite(1), Var(1))


def test_recursion_agrees_with_closed_form():
    # the stage-by-stage recursion against the one-line rule "shift by the change in finite part"
    stages = ordinals_upto(W(2, 3), 3)
    rng = random.Random(4)
    for beta, gamma in itertools.combinations_with_replacement(stages, 2):
        if beta == finite(0):
            continue
        for x in sample_payloads(OMEGA_SYS, beta, 12, rng):
            want = term_apply(Substitution(closed_form_shift(beta, gamma)), x)
            assert OMEGA_SYS.embed(beta, gamma, x) == want, (beta, gamma, x)


def test_coherence_examples():
    s = OMEGA_SYS
    assert check_coherence(s, [Const(5)], [(finite(0), finite(1), finite(2))])["status"] == "pass"
    r = check_coherence(s, [Var(1)], [(finite(1), finite(2), finite(3))])
    assert r["status"] == "pass" and r["checked"] == 1
    r = check_coherence(s, [Const(2)], [(finite(0), OMEGA, W(1, 1))])
    assert r["status"] == "pass"
    assert s.embed(OMEGA, W(1, 1), Const(2)) == Const(2)


def test_welldef_examples():
    s = OMEGA_SYS
    choices = [(finite(d), Const(4)) for d in range(3)]
    r = check_welldef_limit(s, OMEGA, Const(4), W(1, 1), choices)
    assert r["status"] == "pass" and {i["image"] for i in r["images"]} == {"4"}
    # the thread of v1 at stage 1 lives at stage w as v0; representatives v(k+1) at stage k+1
    g = s.embed(finite(1), OMEGA, Var(1))
    assert g == Var(0)
    choices = [(finite(k), Var(k + 1)) for k in range(3)]
    r = check_welldef_limit(s, OMEGA, g, W(1, 1), choices)
    assert r["status"] == "pass" and {i["image"] for i in r["images"]} == {"v1"}
    with pytest.raises(InvalidRepresentative):
        check_welldef_limit(s, OMEGA, g, W(1, 1), [(finite(1), Var(1))])
    with pytest.raises(InvalidRepresentative):
        check_welldef_limit(s, OMEGA, g, W(1, 1), [(OMEGA, Var(1))])


def test_representative_choices_are_distinct_members():
    s = OMEGA_SYS
    for gamma in (OMEGA, W(2, 0)):
        g = parse_term("v(-1) + 3*v0 + case(2; 1 | 0 @ v0)")
        cs = representative_choices(s, gamma, g, 3)
        assert len({(d, h) for d, h in cs}) == len(cs) >= 3
        assert check_welldef_limit(s, gamma, g, gamma.succ(), cs)["status"] == "pass"


def test_patched_representative_is_same_class():
    s = OMEGA_SYS
    cs = representative_choices(s, OMEGA, Var(0), 3)
    assert isinstance(cs[-1][1], Patch)


def test_audit_system_small():
    doc = audit_system(samples=20, n_triples=6, seed=2)
    assert doc["status"] == "pass"
    assert all(c["failures"] == [] for c in doc["coherence"])


def test_limit_crossing_triples():
    rng = random.Random(0)
    assert len(_limit_crossing_triples(finite(2), rng, 20)) == 10
    ts = _limit_crossing_triples(W(1, 2), rng, 20)
    assert len(ts) == 20 and sum(any(x.is_limit for x in t) or t[0].omega_coeff != t[2].omega_coeff for t in ts) >= 10


def test_direct_limit_examples():
    lim = direct_limit(OMEGA_SYS, OMEGA)
    consts = [lim.thread(finite(1), Const(m)) for m in range(6)]
    assert all(not lim.equal(a, b) for a, b in itertools.combinations(consts, 2))
    assert lim.equal(lim.thread(finite(1), Var(1)), lim.thread(finite(2), Var(2)))
    assert not lim.equal(lim.thread(finite(1), Var(1)), lim.thread(finite(2), Var(1)))
    assert lim.compare(lim.thread(finite(2), Var(1)), lim.thread(finite(1), Var(1))) is Ordering.GREATER
    t = lim.normalize(lim.thread(finite(3), parse_term("case(2; v3 | 0 @ v1) + 1")))
    assert t == Thread(finite(1), parse_term("v1 + 1"))
    with pytest.raises(MalformedInput):
        direct_limit(OMEGA_SYS, finite(3))


@settings(max_examples=40)
@given(term_strategy(1, 3), st.integers(0, 3))
def test_normalized_thread_is_the_same_thread(x, extra):
    lim = direct_limit(OMEGA_SYS, OMEGA)
    t = lim.thread(finite(3 + extra), term_apply(Substitution(extra), x))
    assert lim.equal(t, lim.normalize(t))


def test_diagonal_variant():
    diag = build_skew_system(OmegaCarrier(U0), W(1, 2), variant="diagonal")
    skew = build_skew_system(OmegaCarrier(U0), W(1, 2))
    rng = random.Random(1)
    triples = _limit_crossing_triples(W(1, 2), rng, 20)
    r = check_coherence(diag, lambda st_: sample_payloads(diag, st_, 30, rng), triples)
    assert r["status"] == "pass" and r["checked"] >= 600
    # the two systems part ways exactly at the image of the generator
    assert diag.embed(finite(1), finite(2), Var(1)) == Var(1)
    assert skew.embed(finite(1), finite(2), Var(1)) == Var(2)
    assert term_compare(Var(2), Var(1), U0, 2) is not Ordering.EQUAL
    assert diag.embed(finite(0), finite(2), Const(3)) == skew.embed(finite(0), finite(2), Const(3))


def test_finite_carrier_examples():
    m = binary_structure(2, [(0, 1)])
    s = build_skew_system(FiniteCarrier(m, 2, 1), W(1, 2))
    for stage in s.stages():
        iso, problems = stage_isomorphism(s, stage)
        assert not problems
        assert s.structure(stage).size == 2
    for beta, gamma in itertools.combinations(s.stages(), 2):
        for x in range(2):
            assert s.collapse(gamma, s.embed(beta, gamma, x)) == s.collapse(beta, x)


def test_finite_coherence():
    s = build_skew_system(FiniteCarrier(linear_order(3), 2, 0), W(1, 2))
    triples = list(itertools.combinations_with_replacement(s.stages(), 3))
    r = check_coherence(s, lambda stage: sample_payloads(s, stage, 0, random.Random(0)), triples)
    assert r["status"] == "pass"


def test_finite_collapse_small():
    structures = list(all_binary_structures(1)) + list(all_binary_structures(2))[:6]
    doc = finite_collapse_audit(structures, [finite(0), finite(1), finite(2), OMEGA, W(1, 1)], (1, 2))
    assert doc["status"] == "pass"


def test_chain_omega_passes_and_detects_perturbation():
    doc = verify_chain_omega(U0, rank=3, samples=20)
    assert doc["status"] == "pass" and doc["phi_identity_on_sample"]
    for beta in range(3):
        with pytest.raises(DiagramViolation) as info:
            verify_chain_omega(U0, rank=3, perturb=(beta, (0, 1)), samples=20)
        assert info.value.witness


def test_chain_finite_document():
    doc = finite_self_chain(linear_order(2), 2, 0, 3)
    assert verify_chain(doc)["status"] == "pass"
    doc["isos"][1] = doc["isos"][1][::-1]
    with pytest.raises(DiagramViolation) as info:
        verify_chain(doc)
    assert info.value.witness
    with pytest.raises(MalformedInput):
        verify_chain({"carrier": "finite"})


def test_separating_witness_examples():
    for x in (0, 1):
        doc = remark1_witness(profinite(x))
        assert doc["status"] == "separated"
        assert doc["equality_set"] == "0:1:{}:"
    doc = remark1_witness(carrier=FiniteCarrier(linear_order(2), 2, 0))
    assert doc["status"] == "not_separated"
