"""Time the numba kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Each backend is timed in
the same process; numba functions are compiled before timing starts. The
full noise point is timed in a subprocess per setting of the backend flag.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from oposim import _kernels


def _cases(backend, samples):
    traj = backend.rk4_trajectory(np.array([0.3, 0.05, 0.05]), 3, 3.0 / (samples - 1),
                                  samples - 1, 2)
    h = 3.0 / (samples - 1)
    A = np.random.default_rng(0).normal(size=(6, 6))
    return {
        "rk4 trajectory": lambda: backend.rk4_trajectory(np.array([0.3, 0.05, 0.05]), 3, h,
                                                         samples - 1, 2),
        "magnus4 propagator": lambda: backend.magnus4_propagator(traj, h, 3, 1.0),
        "trapezoid generator": lambda: backend.trapezoid_generator(traj, h, 3, 1.0),
        "expm 6x6": lambda: backend.expm(A),
    }


_NOISE_SNIPPET = """
import timeit
from oposim.cavity import oscillator_noise
from oposim.medium import GainMedium
from oposim.steadystate import CavityConfig, solve_dropo, threshold_power
med = GainMedium(3, 3.0)
cav = CavityConfig(R1=0.85)
st = solve_dropo(3 * threshold_power(med, cav), med, cav)
oscillator_noise(st, med, cav, 0.075)
print(min(timeit.repeat(lambda: oscillator_noise(st, med, cav, 0.075), number=20, repeat=5)) / 20)
"""


def _noise_point(backend_name):
    """Solve plus full noise pipeline, backend chosen by the environment flag."""
    env = dict(os.environ)
    env[_kernels.ENV_FLAG] = "1" if backend_name == "numpy" else "0"
    out = subprocess.run([sys.executable, "-c", _NOISE_SNIPPET], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--samples", type=int, default=400)
    ap.add_argument("--number", type=int, default=50)
    args = ap.parse_args(argv)

    backends = ["numpy"]
    try:
        _kernels.get_backend("numba")
        backends.insert(0, "numba")
    except ImportError:
        print("numba not importable, timing numpy only")

    results = {}
    for name in backends:
        b = _kernels.get_backend(name)
        for label, fn in _cases(b, args.samples).items():
            fn()
            t = min(timeit.repeat(fn, number=args.number, repeat=5)) / args.number
            results[label, name] = t
        results["noise point", name] = _noise_point(name)

    labels = list(dict.fromkeys(k[0] for k in results))
    print(f"{'kernel':<22}" + "".join(f"{n:>14}" for n in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    for lab in labels:
        row = f"{lab:<22}" + "".join(f"{results[lab, n] * 1e3:>11.3f} ms" for n in backends)
        if len(backends) == 2:
            row += f"{results[lab, 'numpy'] / results[lab, 'numba']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
