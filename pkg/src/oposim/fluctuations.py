"""Linearised quantum fluctuations in one crystal pass.

Operators are ordered ``(a0, a0^dag, a1, a1^dag, a2, a2^dag)``. The
sideband modes at ``+Omega`` and ``-Omega`` are combined into a symmetric
(``parity=+1``) and an antisymmetric (``parity=-1``) mode, each of which
evolves independently with its own 6x6 coupling matrix.

Quadratures are ``p = a + a^dag`` and ``q = -i (a - a^dag)`` so that the
vacuum covariance is the identity and ``[p, q] = 2i``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _kernels
from .errors import DomainError, NonSymplecticError
from .medium import GainMedium, MeanFieldState, MeanFieldTrajectory
from .numerics import DEFAULT_TOLERANCES, matrix_exponential

PropagatorMode = Literal["ordered_product", "literal_exponential"]
PROPAGATOR_MODES = ("ordered_product", "literal_exponential")

_W1 = np.array([[1.0, 1.0], [-1j, 1j]])
_W1_INV = np.linalg.inv(_W1)


def parity_sign(parity) -> float:
    """Map ``"symmetric"``/``"antisymmetric"`` (or +-1) to +-1.0."""
    if parity in ("symmetric", "s", 1, 1.0):
        return 1.0
    if parity in ("antisymmetric", "a", -1, -1.0):
        return -1.0
    raise DomainError(f"unknown parity {parity!r}")


def ladder_to_quadrature(n_modes: int) -> np.ndarray:
    """Matrix ``W`` with ``(p, q, ...) = W (a, a^dag, ...)``."""
    return np.kron(np.eye(n_modes), _W1)


def to_quadrature(M) -> np.ndarray:
    """Similarity transform of a ladder-basis matrix to quadratures.

    Real up to rounding when ``M`` maps annihilators to the conjugates of
    what it maps creators to; the result is returned complex and the caller
    decides whether to take the real part.
    """
    M = np.asarray(M)
    n = M.shape[0] // 2
    W = ladder_to_quadrature(n)
    Winv = np.kron(np.eye(n), _W1_INV)
    return W @ M @ Winv


def symplectic_form(n_modes: int) -> np.ndarray:
    """``Omega = diag([[0, 1], [-1, 0]], ...)`` in the (p, q) ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def coupling_matrix(state: MeanFieldState, medium: GainMedium, parity) -> np.ndarray:
    """6x6 coupling ``M`` with ``dA/dxi = M A`` for one parity.

    Parameters
    ----------
    state : MeanFieldState
        Local mean fields (real amplitudes).
    medium : GainMedium
    parity : {"symmetric", "antisymmetric"} or {+1, -1}

    Returns
    -------
    numpy.ndarray
        Real 6x6 matrix; the coefficients are real because the mean fields
        are.
    """
    eps = parity_sign(parity)
    a = np.ascontiguousarray(state.amplitudes)
    return np.array(_kernels.coupling_ladder(a, medium.order, eps))


@dataclass(frozen=True)
class PropagatorMatrix:
    """Linear map of the fluctuations across the crystal.

    Attributes
    ----------
    matrix : numpy.ndarray
        6x6, ladder basis.
    parity : float
        +1 symmetric, -1 antisymmetric.
    mode : str
    samples : int
    trajectory_hash : str
        Short digest of the mean-field trajectory used.
    """

    matrix: np.ndarray
    parity: float
    mode: str
    samples: int
    trajectory_hash: str

    @property
    def quadrature(self) -> np.ndarray:
        """Real 6x6 matrix acting on ``(p0, q0, p1, q1, p2, q2)``."""
        return np.real(to_quadrature(self.matrix))


def _trajectory_hash(traj: MeanFieldTrajectory) -> str:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(traj.grid).tobytes())
    h.update(np.ascontiguousarray(traj.amplitudes).tobytes())
    h.update(str(traj.order).encode())
    return h.hexdigest()[:16]


def medium_propagator(trajectory: MeanFieldTrajectory, medium: GainMedium, parity,
                      mode: PropagatorMode = "ordered_product") -> PropagatorMatrix:
    """Propagator of the fluctuations over a mean-field trajectory.

    Parameters
    ----------
    trajectory : MeanFieldTrajectory
    medium : GainMedium
        Must have the trajectory's order.
    parity : {"symmetric", "antisymmetric"} or {+1, -1}
    mode : {"ordered_product", "literal_exponential"}
        ``ordered_product`` is the position-ordered exponential, evaluated
        with a fourth-order Magnus step per grid interval.
        ``literal_exponential`` is ``expm`` of the trapezoidal integral of
        the coupling matrix, which ignores ordering.

    Returns
    -------
    PropagatorMatrix
    """
    if trajectory.order != medium.order:
        raise DomainError("trajectory and medium have different orders")
    if mode not in PROPAGATOR_MODES:
        raise DomainError(f"mode must be one of {PROPAGATOR_MODES}, got {mode!r}")
    eps = parity_sign(parity)
    amps = np.ascontiguousarray(trajectory.amplitudes, dtype=float)
    h = trajectory.step
    if mode == "ordered_product":
        G = _kernels.magnus4_propagator(amps, h, medium.order, eps)
    else:
        G = matrix_exponential(_kernels.trapezoid_generator(amps, h, medium.order, eps))
    prop = PropagatorMatrix(np.array(G), eps, mode, int(amps.shape[0]),
                            _trajectory_hash(trajectory))
    scale = max(1.0, float(np.max(np.abs(G))) ** 2)
    defect = symplectic_defect(prop)
    if not defect <= DEFAULT_TOLERANCES.symplectic_tol * scale:
        raise NonSymplecticError(
            f"propagator violates the commutators by {defect:.2e}; refine the grid")
    return prop


def symplectic_defect(G) -> float:
    """``max |G~ Omega G~^T - Omega|`` for the quadrature form ``G~`` of ``G``.

    Accepts a :class:`PropagatorMatrix` or any ladder-basis ``2n x 2n``
    array. Zero for an exact canonical transformation.
    """
    M = G.matrix if isinstance(G, PropagatorMatrix) else np.asarray(G)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise DomainError("expected a square matrix of even dimension")
    Q = to_quadrature(M)
    J = symplectic_form(M.shape[0] // 2)
    return float(np.max(np.abs(Q @ J @ Q.T - J)))
