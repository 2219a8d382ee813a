"""Time the compiled and pure-numpy kernel backends on the same workloads.

    python3 benchmarks/bench_backends.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from nuggetgp import _backend
from nuggetgp.likelihood import fit_mle
from nuggetgp.models import builtin_dataset
from nuggetgp.simulation import SimConfig, run_study


def workloads():
    d20 = builtin_dataset("sin", 20)
    psis = np.logspace(-3, 4, 400)
    return {
        "profile_grid n=20 x 400 psi": lambda: _backend.kernels().profile_grid(d20.points, d20.y, 1, 0.01, psis),
        "fit_mle sin n=6..20 gaussian nu=0.02": lambda: [
            fit_mle(builtin_dataset("sin", n), "gaussian", 0.02) for n in range(6, 21)
        ],
        "fit_mle linear n=12..40 exponential": lambda: [
            fit_mle(builtin_dataset("linear", n), "exponential", 0.0) for n in range(12, 41)
        ],
        "simulation study, 50 replicates": lambda: run_study(SimConfig(replicates=50)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = _backend.available()
    if "compiled" not in backends:
        print("compiled backend not built; only the numpy fallback is timed")
    previous = _backend.get_backend()
    times = {}
    try:
        for name in backends:
            _backend.set_backend(name)
            for label, fn in workloads().items():
                times[label, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    finally:
        _backend.set_backend(previous)

    print(f"{'workload':40s} " + " ".join(f"{b:>12s}" for b in backends) + "     speedup")
    for label in workloads():
        row = [times[label, b] for b in backends]
        speedup = times[label, "python"] / times[label, "compiled"] if len(backends) == 2 else float("nan")
        print(f"{label:40s} " + " ".join(f"{t * 1e3:10.1f}ms" for t in row) + f"  {speedup:9.1f}x")


if __name__ == "__main__":
    main()
