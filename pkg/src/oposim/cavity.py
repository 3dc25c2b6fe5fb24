"""Cavity input-output relations for the sideband fluctuations.

Twelve-component vectors stack the ``+Omega`` sideband (three modes,
annihilator and creator each) on top of the ``-Omega`` sideband. The
symmetric/antisymmetric basis stacks the three symmetric modes on top of
the three antisymmetric ones.

Cavity models
-------------
``ring``
    One crystal pass per round trip: the field reflected by the loss
    mirror comes back to the coupler without crossing the crystal again.
``double_pass``
    The crystal gain is applied on both arms of the round trip.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (DomainError, NonSymplecticError, SelfOscillationError,
                     UnphysicalCovarianceError)
from .fluctuations import (PropagatorMatrix, medium_propagator, symplectic_defect,
                           symplectic_form, to_quadrature)
from .medium import DEFAULT_SAMPLES, GainMedium, MeanFieldState, propagate_mean_fields
from .numerics import DEFAULT_TOLERANCES
from .steadystate import CavityConfig, SteadyState

CavityModel = Literal["ring", "double_pass"]
CAVITY_MODELS = ("ring", "double_pass")
BASES = ("sideband", "symmetric")

MODE_LABELS = ("s0", "s1", "s2", "a0", "a1", "a2")
SIDEBAND_LABELS = ("+0", "+1", "+2", "-0", "-1", "-2")

_COND_LIMIT = 1e12

# x_sym = O x_sideband, O orthogonal and involutive
_O6 = np.kron(np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0), np.eye(6))


def phase_matrix(omega: float, cavity: CavityConfig) -> np.ndarray:
    """Diagonal propagation phases of one cavity arm for sideband ``omega``.

    Each arm adds ``phi = omega tau / 2``: ``e^{-i phi}`` on ``a(+Omega)``,
    ``e^{+i phi}`` on its creator and the opposite on the ``-Omega`` side.

    Returns
    -------
    numpy.ndarray
        12x12 complex diagonal matrix, sideband ladder basis.
    """
    phi = 0.5 * omega * cavity.roundtrip_time
    block_plus = np.tile([phi, -phi], 3)
    signs = np.concatenate([block_plus, -block_plus])
    return np.diag(np.exp(-1j * signs))


def _mirror(values) -> np.ndarray:
    v = np.repeat(np.asarray(values, dtype=float), 2)
    return np.diag(np.concatenate([v, v]))


def sideband_gain(G_s, G_a) -> np.ndarray:
    """12x12 sideband-basis crystal map from the two parity propagators."""
    Gs = G_s.matrix if isinstance(G_s, PropagatorMatrix) else np.asarray(G_s)
    Ga = G_a.matrix if isinstance(G_a, PropagatorMatrix) else np.asarray(G_a)
    blk = np.zeros((12, 12), dtype=complex)
    blk[:6, :6] = Gs
    blk[6:, 6:] = Ga
    return _O6 @ blk @ _O6


@dataclass(frozen=True)
class TransferMatrices:
    """Reflection and transmission of the cavity, sideband ladder basis.

    ``A_out = reflection @ A_in + transmission @ A_loss``.
    """

    reflection: np.ndarray
    transmission: np.ndarray
    model: str = "ring"

    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Real quadrature forms ``(R~, T~)``.

        Raises
        ------
        NonSymplecticError
            If the imaginary residue exceeds 1e-9 of the matrix scale.
        """
        out = []
        for M in (self.reflection, self.transmission):
            Q = to_quadrature(M)
            scale = max(1.0, float(np.max(np.abs(Q))))
            if np.max(np.abs(Q.imag)) > 1e-9 * scale:
                raise NonSymplecticError("transfer matrix is not a real quadrature map")
            out.append(np.ascontiguousarray(Q.real))
        return out[0], out[1]

    def commutator_defect(self) -> float:
        """``max |R~ J R~^T + T~ J T~^T - J|``."""
        R, T = self.quadrature()
        J = symplectic_form(6)
        return float(np.max(np.abs(R @ J @ R.T + T @ J @ T.T - J)))


def cavity_transfer(G_s, G_a, phases: np.ndarray, cavity: CavityConfig,
                    model: CavityModel = "ring") -> TransferMatrices:
    """Input-output map of the oscillator for the fluctuations.

    Parameters
    ----------
    G_s, G_a : PropagatorMatrix or array_like
        Crystal propagators of the symmetric and antisymmetric modes.
    phases : numpy.ndarray
        One-arm phase matrix from :func:`phase_matrix`.
    cavity : CavityConfig
        Use ``cavity.for_topology("dropo")`` for the doubly resonant case.
    model : {"ring", "double_pass"}

    Returns
    -------
    TransferMatrices

    Raises
    ------
    SelfOscillationError
        If the round-trip operator is singular (condition > 1e12).
    """
    if model not in CAVITY_MODELS:
        raise DomainError(f"model must be one of {CAVITY_MODELS}, got {model!r}")
    G = sideband_gain(G_s, G_a)
    P = np.asarray(phases)
    R = _mirror([np.sqrt(cavity.R0), np.sqrt(cavity.R1), np.sqrt(cavity.R2)])
    T = _mirror([np.sqrt(1 - cavity.R0), np.sqrt(1 - cavity.R1), np.sqrt(1 - cavity.R2)])
    Rp = _mirror([np.sqrt(cavity.Rp0), np.sqrt(cavity.Rp1), np.sqrt(cavity.Rp2)])
    Tp = _mirror([np.sqrt(1 - cavity.Rp0), np.sqrt(1 - cavity.Rp1), np.sqrt(1 - cavity.Rp2)])
    back = P if model == "ring" else P @ G
    I = np.eye(12)
    loop = I - R @ back @ Rp @ P @ G
    cond = np.linalg.cond(loop)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SelfOscillationError("cavity round-trip operator is singular",
                                   {"condition": float(cond)})
    D = np.linalg.inv(loop)
    refl = R - T @ back @ Rp @ P @ G @ D @ T
    trans = T @ back @ (I + Rp @ P @ G @ D @ R @ back) @ Tp
    return TransferMatrices(refl, trans, model)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Quadrature covariance ``<{dx, dx^T}>/2``-type matrix, vacuum = identity.

    Attributes
    ----------
    matrix : numpy.ndarray
        12x12 real symmetric, ordered ``(p, q)`` per mode.
    basis : {"sideband", "symmetric"}
    """

    matrix: np.ndarray
    basis: str = "symmetric"

    @property
    def labels(self) -> tuple[str, ...]:
        return MODE_LABELS if self.basis == "symmetric" else SIDEBAND_LABELS

    def block(self, modes) -> np.ndarray:
        """Sub-covariance of the listed mode labels (or indices)."""
        idx = mode_indices(modes, self.labels)
        q = np.ravel([[2 * i, 2 * i + 1] for i in idx])
        return self.matrix[np.ix_(q, q)]


def mode_indices(modes, labels=MODE_LABELS) -> list[int]:
    out = []
    for m in modes:
        if isinstance(m, (int, np.integer)):
            if not 0 <= m < len(labels):
                raise DomainError(f"mode index {m} out of range")
            out.append(int(m))
        elif m in labels:
            out.append(labels.index(m))
        else:
            raise DomainError(f"unknown mode label {m!r}")
    return out


def change_basis(obj, to: str = "symmetric", frm: str | None = None):
    """Switch between the sideband and symmetric/antisymmetric bases.

    Parameters
    ----------
    obj : CovarianceMatrix, numpy.ndarray
        A covariance (or any 12x12 quadrature-basis matrix, transformed by
        congruence) or a 12-vector.
    to : {"sideband", "symmetric"}
    frm : str, optional
        Basis of a bare array input; defaults to the other basis.
    """
    if to not in BASES:
        raise DomainError(f"basis must be one of {BASES}, got {to!r}")
    if isinstance(obj, CovarianceMatrix):
        if obj.basis == to:
            return obj
        return CovarianceMatrix(_O6 @ obj.matrix @ _O6, to)
    a = np.asarray(obj)
    frm = frm if frm is not None else ("sideband" if to == "symmetric" else "symmetric")
    if frm not in BASES:
        raise DomainError(f"basis must be one of {BASES}, got {frm!r}")
    if frm == to:
        return a
    if a.shape == (12,):
        return _O6 @ a
    if a.shape == (12, 12):
        return _O6 @ a @ _O6
    raise DomainError("expected a 12-vector or a 12x12 matrix")


def output_covariance(transfer: TransferMatrices, V_in=None, V_loss=None) -> CovarianceMatrix:
    """Covariance of the output fluctuations, sideband basis.

    ``V_out = R~ V_in R~^T + T~ V_loss T~^T`` with vacuum inputs by default.
    """
    R, T = transfer.quadrature()
    V_in = np.eye(12) if V_in is None else np.asarray(V_in, dtype=float)
    V_loss = np.eye(12) if V_loss is None else np.asarray(V_loss, dtype=float)
    V = R @ V_in @ R.T + T @ V_loss @ T.T
    V = 0.5 * (V + V.T)
    lam = np.linalg.eigvalsh(V + 1j * symplectic_form(6))[0]
    if lam < -DEFAULT_TOLERANCES.physicality_tol * max(1.0, float(np.max(np.abs(V)))):
        raise UnphysicalCovarianceError(
            f"output covariance violates the uncertainty principle ({lam:.2e})")
    return CovarianceMatrix(V, "sideband")


def carrier_signs(state: SteadyState, trajectory, cavity: CavityConfig) -> np.ndarray:
    """Signs of the three output mean fields in the internal convention."""
    cav = cavity.for_topology(state.topology)
    y = trajectory.amplitudes[-1]
    s = np.sqrt(state.P0in)
    out0 = np.sqrt(cav.R0) * s - np.sqrt(1 - cav.R0) * np.sqrt(cav.Rp0) * y[0]
    out1 = -np.sqrt(1 - cav.R1) * np.sqrt(cav.Rp1) * y[1]
    out2 = -np.sqrt(1 - cav.R2) * np.sqrt(cav.Rp2) * y[2]
    scale = max(abs(s), 1e-300)
    return np.array([1.0 if abs(o) <= 1e-12 * scale or o > 0 else -1.0
                     for o in (out0, out1, out2)])


def align_carriers(V: CovarianceMatrix, signs) -> CovarianceMatrix:
    """Rotate each output mode by pi where its mean field is negative."""
    V = change_basis(V, "symmetric")
    d = np.repeat(np.tile(np.asarray(signs, dtype=float), 2), 2)
    return CovarianceMatrix(V.matrix * np.outer(d, d), "symmetric")


@dataclass(frozen=True)
class NoisePoint:
    """Output covariance of one operating point with its diagnostics."""

    state: SteadyState
    covariance: CovarianceMatrix
    omega: float
    propagator_defect: float
    transfer_defect: float


def oscillator_noise(state: SteadyState, medium: GainMedium, cavity: CavityConfig,
                     omega: float, mode: str = "ordered_product",
                     model: CavityModel = "ring", samples: int = DEFAULT_SAMPLES,
                     carrier_frame: bool = True) -> NoisePoint:
    """Full fluctuation pipeline for a solved steady state.

    Parameters
    ----------
    state : SteadyState
    medium : GainMedium
    cavity : CavityConfig
    omega : float
        Analysis frequency (same time units as ``roundtrip_time``).
    mode : {"ordered_product", "literal_exponential"}
    model : {"ring", "double_pass"}
    samples : int
        Crystal grid size.
    carrier_frame : bool
        Express quadratures relative to each output carrier.

    Returns
    -------
    NoisePoint
        Covariance in the symmetric/antisymmetric basis.
    """
    cav = cavity.for_topology(state.topology)
    entrance = MeanFieldState(state.P0_intra, state.P1_intra, state.P1_intra)
    traj = propagate_mean_fields(entrance, medium, samples)
    Gs = medium_propagator(traj, medium, +1, mode)
    Ga = medium_propagator(traj, medium, -1, mode)
    pdef = max(symplectic_defect(Gs), symplectic_defect(Ga))
    tm = cavity_transfer(Gs, Ga, phase_matrix(omega, cav), cav, model)
    V = change_basis(output_covariance(tm), "symmetric")
    if carrier_frame:
        V = align_carriers(V, carrier_signs(state, traj, cav))
    return NoisePoint(state, V, float(omega), pdef, tm.commutator_defect())
