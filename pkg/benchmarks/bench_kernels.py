"""Compare the compiled and numpy statevector kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 4 8 12 16] [--repeat 5]

Each kernel is timed on a random normalized state; the table reports the best
per-call time for both backends and their ratio. A second table times a full
QAOA energy evaluation in fresh interpreters, one per backend, because the
backend is fixed when the package is imported.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from vqoc._backend import get_kernels

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

END_TO_END = """
import time
import numpy as np
from vqoc._backend import BACKEND
from vqoc.circuit import build_qaoa, evaluate_circuit, ring_hamiltonian
from vqoc.state import StateVector, expectation
n = {n}
h = ring_hamiltonian(n)
c = build_qaoa(h, p=2)
x = np.linspace(0.1, 0.4, 4)
psi0 = StateVector.plus(n)
best = float("inf")
for _ in range({repeat}):
    t = time.perf_counter()
    expectation(evaluate_circuit(c, x, psi0), h)
    best = min(best, time.perf_counter() - t)
print(BACKEND, best)
"""


def kernel_cases(n, rng):
    psi = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    psi /= np.linalg.norm(psi)
    full = (1 << n) - 1
    xm, zm = 0b1010 & full, 0b0110 & full
    ny = bin(xm & zm).count("1")
    return {
        "apply_pauli": lambda k: k.apply_pauli(psi, xm, zm, ny),
        "expect_pauli": lambda k: k.expect_pauli(psi, xm, zm, ny),
        "pauli_rotation": lambda k: k.pauli_rotation(psi, xm, zm, ny, 0.37),
        "apply_1q": lambda k: k.apply_1q(psi, n, n // 2, H),
        "apply_cz": lambda k: k.apply_cz(psi, n, 0, n - 1),
    }


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1 << 20:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def run_end_to_end(n, repeat, pure):
    env = dict(os.environ)
    env.pop("VQOC_PURE_PYTHON", None)
    if pure:
        env["VQOC_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n, repeat=repeat)],
                         env=env, capture_output=True, text=True, check=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 12, 16])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    try:
        compiled = get_kernels("cython")
    except ImportError:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
        return 1
    fallback = get_kernels("python")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<16}{'n':>4}{'cython (us)':>14}{'python (us)':>14}{'speedup':>10}")
    for n in args.sizes:
        for name, call in kernel_cases(n, rng).items():
            a = np.asarray(call(compiled))
            b = np.asarray(call(fallback))
            if not np.allclose(a, b, atol=1e-12):
                raise SystemExit(f"backends disagree on {name} at n={n}")
            tc = best_time(lambda: call(compiled), args.repeat)
            tp = best_time(lambda: call(fallback), args.repeat)
            print(f"{name:<16}{n:>4}{tc * 1e6:>14.2f}{tp * 1e6:>14.2f}{tp / tc:>10.2f}")

    print()
    print(f"{'QAOA p=2 energy':<16}{'n':>4}{'cython (ms)':>14}{'python (ms)':>14}{'speedup':>10}")
    for n in args.sizes:
        _, tc = run_end_to_end(n, args.repeat, pure=False)
        _, tp = run_end_to_end(n, args.repeat, pure=True)
        print(f"{'':<16}{n:>4}{tc * 1e3:>14.3f}{tp * 1e3:>14.3f}{tp / tc:>10.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
