"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import timeit

from skewlim import kernels
from skewlim.logic import all_binary_structures, compile_formula, generate_formulas, relation_table


def workloads(rng):
    rules = [bytes(rng.randint(0, 1) for _ in range(p)) for p in range(1, 61)]
    rules = [r * k for r in rules for k in (1, 2, 6)]
    prefixes = [(bytes(rng.randint(0, 1) for _ in range(40)) + r[:8] * 4, r[:8]) for r in rules if len(r) >= 8]
    structures = list(all_binary_structures(3))[::16]
    programs = [c for c in map(compile_formula, generate_formulas(rng, 48)) if c is not None]
    tables = [relation_table(m, "R") for m in structures]
    return rules, prefixes, tables, programs


def bench(impl, data, repeat):
    rules, prefixes, tables, programs = data
    progs = [(impl.Program(*c.code), len(c.slots)) for c in programs]

    def periods():
        for r in rules:
            impl.minimal_period(r)

    def trims():
        for p, r in prefixes:
            impl.trim_threshold(p, r)

    def formulas():
        for t in tables:
            for prog, n in progs:
                prog.run(t, 3, [1] * n)

    return {name: min(timeit.repeat(fn, number=1, repeat=repeat))
            for name, fn in [("minimal_period", periods), ("trim_threshold", trims), ("formula_eval", formulas)]}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    data = workloads(random.Random(args.seed))
    backends = kernels.available_backends()
    results = {name: bench(impl, data, args.repeat) for name, impl in sorted(backends.items())}
    print(f"{'kernel':<16}" + "".join(f"{n:>12}" for n in results) + ("     speedup" if len(results) > 1 else ""))
    for k in results["python"]:
        row = f"{k:<16}" + "".join(f"{results[n][k] * 1e3:>10.2f}ms" for n in results)
        if "cython" in results:
            row += f"{results['python'][k] / results['cython'][k]:>11.1f}x"
        print(row)
    if "cython" not in results:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
