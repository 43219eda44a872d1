"""Time the cross-section kernel on both backends and one full drift sweep.

    python3 benchmarks/bench_kernels.py [--nodes 16000] [--repeat 5]
"""
from __future__ import annotations

import argparse
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from hypersqg import kernels
from hypersqg.biot_savart import PROFILE_CODES
from hypersqg.quadrature import QuadratureRule


def kernel_args(n: int):
    rng = np.random.default_rng(0)
    y = np.sort(rng.uniform(-30.0, math.log(3.0), n))
    shift = np.linspace(3.0, 0.0, n)
    r = QuadratureRule()
    return (y, shift, 1.0, 2.0, 1.0, 1.0, PROFILE_CODES["plateau"], 0.5, r.reference_nodes, r.reference_weights,
            float(r.panels_per_unit))


def best_of(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def sweep_time(pure: bool, repeat: int) -> float:
    # the backend is fixed at import, so the sweep runs in a child process
    code = (
        "import timeit, math;"
        "from hypersqg.biot_savart import omega_tilde_grid;"
        "from hypersqg.initial_data import BumpSpec;"
        "from hypersqg.profile import DisplacementProfile, Z1Grid;"
        "from hypersqg.quadrature import QuadratureRule;"
        "d = DisplacementProfile.zero(Z1Grid(-30.0, math.log(3.0) + 1.0, 1024));"
        "f = lambda: omega_tilde_grid(d, BumpSpec(), 0.5, QuadratureRule());"
        f"print(min(timeit.repeat(f, number=1, repeat={repeat})))"
    )
    env = dict(os.environ, HYPERSQG_PURE="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=16000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    a = kernel_args(args.nodes)
    py = best_of(lambda: kernels.python_section_integrals(*a), args.repeat)
    print(f"section_integrals, {args.nodes} outer nodes")
    print(f"  python    {py * 1e3:9.2f} ms")
    if kernels.compiled_available():
        from hypersqg import _kernels

        ext = best_of(lambda: _kernels.section_integrals(*a), args.repeat)
        diff = np.max(np.abs(_kernels.section_integrals(*a) - kernels.python_section_integrals(*a)))
        print(f"  compiled  {ext * 1e3:9.2f} ms   speedup {py / ext:5.2f}x   max |diff| {diff:.1e}")
    else:
        print("  compiled  (extension not built)")

    print("omega_tilde_grid, 1024-node grid")
    print(f"  python    {sweep_time(True, args.repeat) * 1e3:9.2f} ms")
    if kernels.compiled_available():
        print(f"  compiled  {sweep_time(False, args.repeat) * 1e3:9.2f} ms")


if __name__ == "__main__":
    main()
