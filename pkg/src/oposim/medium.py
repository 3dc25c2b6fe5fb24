"""Single pass of the pump, signal and idler mean fields through the crystal.

Powers are in units where the scaled interaction length ``kappa`` (the
coupling times the crystal length) is the only medium parameter.
``order=2`` is the three-wave (chi2) interaction, ``order=3`` is the
four-wave (chi3) interaction in which two pump photons are annihilated per
signal/idler pair.

Amplitudes are kept real. A mean field whose phase is ``pi`` is stored
with a negative amplitude; this happens for the chi2 pump after full
depletion, when the energy flows back from signal and idler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DomainError
from .numerics import DEFAULT_TOLERANCES

DEFAULT_SAMPLES = 400


@dataclass(frozen=True)
class GainMedium:
    """Nonlinear crystal.

    Parameters
    ----------
    order : {2, 3}
        Nonlinear order of the interaction.
    kappa : float
        Scaled interaction length, nonnegative (0 is an empty crystal).
    """

    order: int
    kappa: float

    def __post_init__(self):
        if self.order not in (2, 3):
            raise DomainError(f"order must be 2 or 3, got {self.order!r}")
        if not (np.isfinite(self.kappa) and self.kappa >= 0):
            raise DomainError(f"kappa must be finite and nonnegative, got {self.kappa!r}")

    @property
    def m(self) -> int:
        """Pump photons consumed per signal/idler pair, plus one."""
        return self.order


def _is_real_phase(theta: float) -> bool:
    return abs(abs(np.cos(theta)) - 1.0) <= 1e-12


@dataclass(frozen=True)
class MeanFieldState:
    """Powers and phases of the three mean fields at one point in the crystal."""

    P0: float
    P1: float
    P2: float
    theta0: float = 0.0
    theta1: float = 0.0
    theta2: float = 0.0

    def __post_init__(self):
        for name in ("P0", "P1", "P2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and nonnegative, got {v!r}")

    @classmethod
    def from_amplitudes(cls, a0: float, a1: float, a2: float) -> "MeanFieldState":
        """Build a state from signed real amplitudes."""
        ph = [0.0 if a >= 0 else np.pi for a in (a0, a1, a2)]
        return cls(float(a0) ** 2, float(a1) ** 2, float(a2) ** 2, *ph)

    def global_phase(self, order: int) -> float:
        return self.theta1 + self.theta2 - (order - 1) * self.theta0

    @property
    def powers(self) -> np.ndarray:
        return np.array([self.P0, self.P1, self.P2])

    @property
    def amplitudes(self) -> np.ndarray:
        """Signed real amplitudes.

        Raises
        ------
        DomainError
            If a phase is not a multiple of pi.
        """
        out = np.empty(3)
        for i, (P, th) in enumerate(zip(self.powers, (self.theta0, self.theta1, self.theta2))):
            if not _is_real_phase(th):
                raise DomainError("only phase-matched real mean fields are supported")
            out[i] = np.sqrt(P) * np.sign(np.cos(th))
        return out


@dataclass(frozen=True)
class MeanFieldTrajectory:
    """Mean fields sampled on a uniform grid over the crystal.

    Attributes
    ----------
    grid : numpy.ndarray
        Scaled position ``xi`` from 0 to ``kappa``.
    amplitudes : numpy.ndarray
        Signed real amplitudes, shape ``(len(grid), 3)``.
    order : int
    """

    grid: np.ndarray
    amplitudes: np.ndarray
    order: int
    substeps: int = field(default=1)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def powers(self) -> np.ndarray:
        return self.amplitudes**2

    @property
    def conserved(self) -> np.ndarray:
        """``P0 + (m - 1) P1`` along the crystal."""
        P = self.powers
        return P[:, 0] + (self.order - 1) * P[:, 1]

    def state(self, i: int) -> MeanFieldState:
        return MeanFieldState.from_amplitudes(*self.amplitudes[i])

    @property
    def entrance(self) -> MeanFieldState:
        return self.state(0)

    @property
    def exit(self) -> MeanFieldState:
        return self.state(-1)


def mean_field_rhs(state: MeanFieldState, medium: GainMedium) -> np.ndarray:
    """Derivatives ``dP_n/dxi`` of the three powers.

    Parameters
    ----------
    state : MeanFieldState
    medium : GainMedium

    Returns
    -------
    numpy.ndarray
        ``(dP0, dP1, dP2)``. Satisfies ``dP0 + (m-1) dP1 = 0`` and
        ``dP1 = dP2``.
    """
    m = medium.order
    drive = 2.0 * state.P0 ** ((m - 1) / 2) * np.sqrt(state.P1 * state.P2) \
        * np.cos(state.global_phase(m))
    return np.array([-(m - 1) * drive, drive, drive])


def propagate_mean_fields(state: MeanFieldState, medium: GainMedium,
                          samples: int = DEFAULT_SAMPLES,
                          tol: float | None = None) -> MeanFieldTrajectory:
    """Integrate the mean fields from ``xi = 0`` to ``xi = kappa``.

    The RK4 step between output samples is halved until the endpoint
    changes by less than ``tol`` (relative).

    Parameters
    ----------
    state : MeanFieldState
        Fields at the crystal entrance.
    medium : GainMedium
    samples : int
        Number of output grid points (>= 2).
    tol : float, optional
        Endpoint tolerance, default 1e-10.

    Raises
    ------
    DomainError
        For negative powers or non-real phases.
    ConvergenceError
        If the tolerance needs more than ``ToleranceConfig.ode_max_samples``
        internal steps.
    """
    if samples < 2:
        raise DomainError("samples must be at least 2")
    tol = DEFAULT_TOLERANCES.ode_rtol if tol is None else tol
    a = np.ascontiguousarray(state.amplitudes)
    m = medium.order
    n = samples - 1
    h = medium.kappa / n
    sub = 1
    coarse = _kernels.rk4_trajectory(a, m, h, n, sub)
    while True:
        if 2 * sub * n > DEFAULT_TOLERANCES.ode_max_samples:
            raise ConvergenceError("mean-field integration did not reach tolerance",
                                   {"samples": samples, "substeps": sub, "tol": tol})
        fine = _kernels.rk4_trajectory(a, m, h, n, 2 * sub)
        scale = max(np.max(np.abs(fine[-1])), np.finfo(float).tiny)
        if np.max(np.abs(fine[-1] - coarse[-1])) <= tol * scale:
            break
        sub *= 2
        coarse = fine
    grid = np.linspace(0.0, medium.kappa, samples)
    return MeanFieldTrajectory(grid, fine, m, 2 * sub)


# closed forms --------------------------------------------------------------

def _one_minus_tanh(x):
    e = np.exp(-2.0 * x)
    return 2.0 * e / (1.0 + e)


def _chi2_parts(P0, P1, kappa):
    S = P0 + P1
    with np.errstate(invalid="ignore", divide="ignore"):
        T = np.sqrt(np.where(S > 0, P0 / np.where(S > 0, S, 1.0), 1.0))
        x = kappa * np.sqrt(S)
        th = np.tanh(x)
        one_m_T = np.where(S > 0, (P1 / np.where(S > 0, S, 1.0)) / (1.0 + T), 0.0)
        den = one_m_T + T * _one_minus_tanh(x)
    return S, T, th, one_m_T, den


def relative_gain(P0_in, P1_in, medium: GainMedium):
    """Single-pass relative signal gain ``(P1(kappa) - P1(0)) / P1(0)``.

    Finite at ``P1_in = 0`` where it reduces to the small-signal gain.
    Vectorised over array inputs.
    """
    P0 = np.asarray(P0_in, dtype=float)
    P1 = np.asarray(P1_in, dtype=float)
    if np.any(P0 < 0) or np.any(P1 < 0):
        raise DomainError("powers must be nonnegative")
    if medium.order == 3:
        return _chi3_gain(P0, P1, medium.kappa)
    S, T, th, one_m_T, den = _chi2_parts(P0, P1, medium.kappa)
    with np.errstate(invalid="ignore", divide="ignore"):
        num = th * (_one_minus_tanh(medium.kappa * np.sqrt(S)) * (1.0 + T * T) - one_m_T**2)
        G = np.where(S > 0, num / np.where(den > 0, den, 1.0) ** 2, 0.0)
    return G[()] if G.ndim == 0 else G


def relative_gain_chi3(P0_in, P1_in, kappa3: float):
    """Closed-form chi3 single-pass relative gain ``Delta P1 / P1_in``.

    ``(e^{x} - 1) / (1 + 2 e^{x} P1/P0)`` with ``x = 2 kappa3 (P0 + 2 P1)``,
    written so that it never overflows. Tends to ``e^{2 kappa3 P0} - 1``
    for a vanishing seed.

    Raises
    ------
    DomainError
        For negative powers or ``P1_in = 0``, where the ratio is undefined
        (use :func:`small_signal_gain`).
    """
    P0 = np.asarray(P0_in, dtype=float)
    P1 = np.asarray(P1_in, dtype=float)
    if np.any(P0 < 0) or np.any(P1 < 0):
        raise DomainError("powers must be nonnegative")
    if np.any(P1 == 0):
        raise DomainError("relative gain undefined for a zero seed")
    return _chi3_gain(P0, P1, kappa3)


def _chi3_gain(P0, P1, kappa3):
    x = 2.0 * kappa3 * (P0 + 2.0 * P1)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(P0 > 0, P1 / np.where(P0 > 0, P0, 1.0), 0.0)
        G = np.where(P0 > 0, -np.expm1(-x) / (np.exp(-x) + 2.0 * ratio), 0.0)
    return G[()] if G.ndim == 0 else G


def small_signal_gain(P0_in, medium: GainMedium):
    """Relative gain in the limit of a vanishing seed."""
    P0 = np.asarray(P0_in, dtype=float)
    if medium.order == 2:
        return np.expm1(2.0 * medium.kappa * np.sqrt(P0))
    return np.expm1(2.0 * medium.kappa * P0)


def single_pass_gain(P0_in, P1_in, medium: GainMedium):
    """Signal power added in one pass, ``Delta P1 = P1(kappa) - P1(0)``.

    Parameters
    ----------
    P0_in, P1_in : float or array_like
        Pump and signal (= idler) powers at the entrance.
    medium : GainMedium

    Returns
    -------
    float or numpy.ndarray
        Bounded by ``P0_in / (m - 1)``. Negative only for chi2 past full
        depletion, ``kappa sqrt(P0+P1) > 2 artanh sqrt(P0/(P0+P1))``.
    """
    return np.asarray(P1_in, dtype=float) * relative_gain(P0_in, P1_in, medium)


def pump_exit_amplitude(P0_in, P1_in, medium: GainMedium):
    """Signed pump amplitude at the crystal exit for a positive entrance pump."""
    P0 = np.asarray(P0_in, dtype=float)
    P1 = np.asarray(P1_in, dtype=float)
    if medium.order == 3:
        dP = single_pass_gain(P0, P1, medium)
        return np.sqrt(np.maximum(P0 - 2.0 * dP, 0.0))
    S, T, th, _, den = _chi2_parts(P0, P1, medium.kappa)
    with np.errstate(invalid="ignore", divide="ignore"):
        y = np.where(den > 0, np.sqrt(S) * (T - th) / np.where(den > 0, den, 1.0), 0.0)
    return y[()] if y.ndim == 0 else y
