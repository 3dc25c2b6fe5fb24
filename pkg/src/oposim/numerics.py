"""Generic numerical building blocks.

Root bracketing goes through :func:`scipy.optimize.brentq`, Hermitian
spectra through :func:`numpy.linalg.eigvalsh`. The matrix exponential and
the fixed-grid RK4 live in :mod:`oposim._kernels` so that they can be
compiled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import BracketError, ConvergenceError, DomainError


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances used across the package.

    Attributes
    ----------
    ode_rtol : float
        Relative endpoint tolerance of the halving error estimate in
        :func:`integrate_ode`.
    ode_max_samples : int
        Hard cap on internal RK4 steps per integration.
    root_xtol : float
        Absolute bracket width at which root finding stops.
    root_rtol : float
        Relative bracket width at which root finding stops.
    root_maxiter : int
        Iteration cap for root finding.
    symmetry_tol : float
        Allowed asymmetry ``max|S - S^H|`` in :func:`symmetric_eigenvalues`.
    symplectic_tol : float
        Allowed commutator defect of propagators and transfer matrices.
    physicality_tol : float
        Allowed negative eigenvalue of ``V + i Omega``.
    """

    ode_rtol: float = 1e-10
    ode_max_samples: int = 1 << 16
    root_xtol: float = 1e-300
    root_rtol: float = 4 * np.finfo(float).eps
    root_maxiter: int = 500
    symmetry_tol: float = 1e-10
    symplectic_tol: float = 1e-8
    physicality_tol: float = 1e-8


DEFAULT_TOLERANCES = ToleranceConfig()


def integrate_ode(rhs: Callable[[np.ndarray, float], np.ndarray],
                  y0, grid, tol: float | None = None,
                  max_samples: int | None = None) -> np.ndarray:
    """Fixed-grid RK4 with an automatic step-halving error estimate.

    Each grid interval is split into ``n`` equal RK4 substeps. ``n`` is
    doubled until the solutions at the final grid point obtained with ``n``
    and ``2n`` substeps agree to ``tol`` (relative to the state norm).

    Parameters
    ----------
    rhs : callable
        ``rhs(y, t) -> dy/dt``.
    y0 : array_like
        Initial state.
    grid : array_like
        Strictly monotone output grid, ``grid[0]`` is the initial time.
    tol : float, optional
        Relative endpoint tolerance, default ``ToleranceConfig.ode_rtol``.
    max_samples : int, optional
        Maximum total number of internal steps.

    Returns
    -------
    numpy.ndarray
        Solution, shape ``(len(grid),) + y0.shape``.

    Raises
    ------
    ConvergenceError
        If the tolerance is not reached within ``max_samples`` steps.
    """
    tol = DEFAULT_TOLERANCES.ode_rtol if tol is None else tol
    max_samples = DEFAULT_TOLERANCES.ode_max_samples if max_samples is None else max_samples
    grid = np.asarray(grid, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("grid must be 1-D with at least two points")
    steps = np.diff(grid)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise DomainError("grid must be strictly monotone")

    def sweep(n):
        out = np.empty((grid.size,) + y0.shape)
        y = y0.copy()
        out[0] = y
        for i, (t0, h) in enumerate(zip(grid[:-1], steps)):
            dt = h / n
            for j in range(n):
                t = t0 + j * dt
                k1 = rhs(y, t)
                k2 = rhs(y + 0.5 * dt * k1, t + 0.5 * dt)
                k3 = rhs(y + 0.5 * dt * k2, t + 0.5 * dt)
                k4 = rhs(y + dt * k3, t + dt)
                y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            out[i + 1] = y
        return out

    n = 1
    coarse = sweep(n)
    while True:
        if 2 * n * steps.size > max_samples:
            raise ConvergenceError(
                "ODE tolerance not reachable within sample budget",
                {"substeps": n, "max_samples": max_samples, "tol": tol})
        fine = sweep(2 * n)
        scale = max(np.max(np.abs(fine[-1])), np.finfo(float).tiny)
        err = np.max(np.abs(fine[-1] - coarse[-1])) / scale
        if err <= tol:
            return fine
        n *= 2
        coarse = fine


def find_root(f: Callable[[float], float], a: float, b: float,
              xtol: float | None = None, rtol: float | None = None,
              maxiter: int | None = None) -> float:
    """Root of a scalar function on a sign-changing bracket.

    Brent's method; if it reports non-convergence the bracket is finished
    by plain bisection.

    Parameters
    ----------
    f : callable
        Continuous scalar function.
    a, b : float
        Bracket ends with ``f(a) * f(b) <= 0``.

    Returns
    -------
    float

    Raises
    ------
    BracketError
        If ``f(a)`` and ``f(b)`` have the same strict sign or are not finite.
    ConvergenceError
        If neither Brent nor bisection converges.
    """
    tol = DEFAULT_TOLERANCES
    xtol = tol.root_xtol if xtol is None else xtol
    rtol = tol.root_rtol if rtol is None else rtol
    maxiter = tol.root_maxiter if maxiter is None else maxiter
    fa, fb = f(a), f(b)
    if not (np.isfinite(fa) and np.isfinite(fb)):
        raise BracketError("non-finite function value at bracket end",
                           {"a": a, "b": b, "fa": fa, "fb": fb})
    if fa == 0.0:
        return float(a)
    if fb == 0.0:
        return float(b)
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise BracketError("interval does not bracket a root",
                           {"a": a, "b": b, "fa": fa, "fb": fb})
    try:
        root, info = brentq(f, a, b, xtol=max(xtol, 1e-300), rtol=rtol,
                            maxiter=maxiter, full_output=True, disp=False)
        if info.converged:
            return float(root)
    except (RuntimeError, ValueError):
        pass
    lo, hi, flo = a, b, fa
    for _ in range(4 * maxiter):
        mid = 0.5 * (lo + hi)
        if abs(hi - lo) <= xtol + rtol * abs(mid):
            return float(mid)
        fm = f(mid)
        if fm == 0.0:
            return float(mid)
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    raise ConvergenceError("root finding did not converge",
                           {"a": lo, "b": hi, "maxiter": maxiter})


def matrix_exponential(A) -> np.ndarray:
    """Matrix exponential by Pade scaling and squaring.

    Real input gives real output; complex input is supported.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("matrix_exponential needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("non-finite matrix entries")
    if not np.iscomplexobj(A):
        A = A.astype(float)
    with np.errstate(over="ignore", invalid="ignore"):
        E = _kernels.expm(np.ascontiguousarray(A))
    if not np.all(np.isfinite(E)):
        raise ConvergenceError("matrix exponential overflowed",
                               {"norm1": float(np.abs(A).sum(axis=0).max())})
    return E


def symmetric_eigenvalues(S, tol: float | None = None) -> np.ndarray:
    """Ascending spectrum of a real symmetric (or complex Hermitian) matrix.

    Raises
    ------
    DomainError
        If ``S`` is not square or deviates from symmetry by more than
        ``tol`` (absolute, scaled by ``max(1, max|S|)``).
    """
    tol = DEFAULT_TOLERANCES.symmetry_tol if tol is None else tol
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError("symmetric_eigenvalues needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if np.max(np.abs(S - S.conj().T), initial=0.0) > tol * scale:
        raise DomainError("matrix is not symmetric within tolerance")
    return np.linalg.eigvalsh(S)
