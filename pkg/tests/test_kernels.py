import random

import pytest
from hypothesis import given, strategies as st

from skewlim import kernels
from skewlim.logic import binary_structure, compile_formula, eval_formula, free_vars, generate_formulas, relation_table

BACKENDS = kernels.available_backends()


def test_python_backend_always_present():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def as_bytes(bits):
    return bytes(int(b) for b in bits)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_minimal_period_examples(name):
    k = BACKENDS[name]
    assert k.minimal_period(as_bytes("1010")) == 2
    assert k.minimal_period(as_bytes("100100")) == 3
    assert k.minimal_period(as_bytes("1101")) == 4
    assert k.minimal_period(as_bytes("1")) == 1


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_trim_threshold_examples(name):
    k = BACKENDS[name]
    assert k.trim_threshold(as_bytes("0010"), as_bytes("10")) == 1
    assert k.trim_threshold(as_bytes("0110"), as_bytes("10")) == 2
    assert k.trim_threshold(as_bytes("1010"), as_bytes("10")) == 0
    assert k.trim_threshold(as_bytes(""), as_bytes("1")) == 0


@given(st.lists(st.booleans(), min_size=1, max_size=40))
def test_minimal_period_parity(bits):
    b = as_bytes(bits)
    results = {name: k.minimal_period(b) for name, k in BACKENDS.items()}
    assert len(set(results.values())) == 1


@given(st.lists(st.booleans(), max_size=20), st.lists(st.booleans(), min_size=1, max_size=6))
def test_trim_threshold_parity(prefix, rule):
    results = {name: k.trim_threshold(as_bytes(prefix), as_bytes(rule)) for name, k in BACKENDS.items()}
    assert len(set(results.values())) == 1


@given(st.integers(0, 2**9 - 1), st.integers(0, 10**6))
def test_program_parity(bits, seed):
    pairs = [(a, b) for a in range(3) for b in range(3)]
    m = binary_structure(3, [p for i, p in enumerate(pairs) if bits >> i & 1])
    rng = random.Random(seed)
    table = relation_table(m, "R")
    for phi in generate_formulas(rng, 5):
        c = compile_formula(phi)
        env = [rng.randrange(3) for _ in c.slots]
        want = eval_formula(m, phi, {x: env[c.slots.index(x)] for x in free_vars(phi)})
        for k in BACKENDS.values():
            assert k.Program(*c.code).run(table, 3, env) == want


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SKEWLIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import skewlim.kernels as k; print(k.BACKEND)"], env=env,
                         capture_output=True, text=True, check=True).stdout
    assert out.strip() == "python"
