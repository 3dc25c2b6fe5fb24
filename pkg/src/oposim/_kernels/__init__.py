"""Hot-loop kernels with a numba backend and a pure-numpy fallback.

The numba backend is used when numba imports cleanly and the environment
variable ``OPOSIM_DISABLE_NUMBA`` is unset or ``0``. Both backends expose
the same functions:

``amplitude_rhs(a, m)``
    Derivative of the real mean-field amplitudes.
``rk4_trajectory(a_init, m, h, n_steps, substeps)``
    Fixed-step RK4, ``substeps`` internal steps per recorded step.
``coupling_ladder(a, m, eps)``
    6x6 fluctuation coupling in the (a, a^dagger) basis.
``magnus4_propagator(amps, h, m, eps)``
    Ordered exponential over a sampled trajectory.
``trapezoid_generator(amps, h, m, eps)``
    Trapezoidal integral of the coupling matrix.
``expm(A)``
    Pade scaling-and-squaring matrix exponential.
"""

import os

from . import _numpy

ENV_FLAG = "OPOSIM_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:
    from . import _numba
except ImportError:  # pragma: no cover - numba missing
    _numba = None


def get_backend(name: str | None = None):
    """Return a kernel backend module by name (``"numba"`` or ``"numpy"``).

    ``None`` returns the active backend.
    """
    if name is None:
        return active
    if name == "numpy":
        return _numpy
    if name == "numba":
        if _numba is None:
            raise ImportError("numba backend unavailable")
        return _numba
    raise ValueError(f"unknown backend {name!r}")


active = _numba if (_numba is not None and _numba_requested()) else _numpy
BACKEND = active.name

amplitude_rhs = active.amplitude_rhs
rk4_trajectory = active.rk4_trajectory
coupling_ladder = active.coupling_ladder
magnus4_propagator = active.magnus4_propagator
trapezoid_generator = active.trapezoid_generator
expm = active.expm
