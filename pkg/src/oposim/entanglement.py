"""Squeezing and entanglement witnesses on output covariance matrices.

Mode labels are ``s0, s1, s2`` (symmetric pump, signal, idler) and
``a0, a1, a2`` (antisymmetric). Bare arrays of size 6x6 are read as the
three symmetric modes, 12x12 as all six, other even sizes by index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .cavity import MODE_LABELS, CovarianceMatrix, change_basis, mode_indices
from .errors import DomainError, UnphysicalCovarianceError
from .fluctuations import symplectic_form
from .numerics import DEFAULT_TOLERANCES, symmetric_eigenvalues


def _as_matrix(V):
    """Return ``(matrix, labels)`` for a covariance-like input."""
    if isinstance(V, CovarianceMatrix):
        V = change_basis(V, "symmetric")
        return V.matrix, MODE_LABELS
    M = np.asarray(V, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise DomainError("covariance must be square with even dimension")
    n = M.shape[0] // 2
    if n == 3:
        labels = MODE_LABELS[:3]
    elif n == 6:
        labels = MODE_LABELS
    else:
        labels = tuple(str(i) for i in range(n))
    return M, labels


def _lookup(modes, labels):
    return mode_indices(list(modes), labels)


def check_physical(V, tol: float | None = None) -> float:
    """Smallest eigenvalue of ``V + i Omega``.

    Raises
    ------
    UnphysicalCovarianceError
        If it is below ``-tol`` (scaled by ``max(1, |V|)``).
    """
    tol = DEFAULT_TOLERANCES.physicality_tol if tol is None else tol
    M, _ = _as_matrix(V)
    J = symplectic_form(M.shape[0] // 2)
    lam = float(symmetric_eigenvalues(M + 1j * J, tol=1e-8)[0])
    if lam < -tol * max(1.0, float(np.max(np.abs(M)))):
        raise UnphysicalCovarianceError(
            f"covariance violates the uncertainty principle (min eigenvalue {lam:.3e})")
    return lam


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic spectrum of a positive definite covariance, ascending.

    Uses the Hermitian matrix ``i V^{1/2} Omega V^{1/2}`` whose eigenvalues
    are ``+-nu_k``; no non-symmetric eigensolver is involved.
    """
    M, _ = _as_matrix(V)
    w, U = np.linalg.eigh(0.5 * (M + M.T))
    if w[0] <= 0:
        raise UnphysicalCovarianceError("covariance is not positive definite")
    S = (U * np.sqrt(w)) @ U.T
    J = symplectic_form(M.shape[0] // 2)
    e = symmetric_eigenvalues(1j * S @ J @ S, tol=1e-8)
    return np.sort(e[M.shape[0] // 2:])


def partial_transpose(V, mask) -> np.ndarray:
    """Flip the sign of ``q`` on the masked modes (rows and columns)."""
    M, labels = _as_matrix(V)
    idx = _lookup(mask, labels)
    d = np.ones(M.shape[0])
    for i in idx:
        d[2 * i + 1] = -1.0
    return M * np.outer(d, d)


def ppt_min_symplectic(V, mask, subsystem=None) -> float:
    """Smallest symplectic eigenvalue after partial transposition.

    Values below 1 certify entanglement across the bipartition ``mask`` vs
    the rest of ``subsystem``.

    Parameters
    ----------
    V : CovarianceMatrix or array_like
    mask : sequence of mode labels or indices
        Nonempty proper subset of ``subsystem``.
    subsystem : sequence, optional
        Modes kept (the others are traced out). Defaults to all modes.
    """
    M, labels = _as_matrix(V)
    check_physical(M)
    if subsystem is not None:
        keep = _lookup(subsystem, labels)
        q = np.ravel([[2 * i, 2 * i + 1] for i in keep])
        M = M[np.ix_(q, q)]
        labels = tuple(labels[i] for i in keep)
    idx = set(_lookup(mask, labels))
    if not idx or len(idx) == len(labels):
        raise DomainError("mask must be a nonempty proper subset of the modes")
    return float(symplectic_eigenvalues(partial_transpose(M, sorted(idx)))[0])


def variance_of_combination(V, coeffs) -> float:
    """Variance ``c^T V c`` of a linear combination of quadratures.

    ``coeffs`` must have the dimension of ``V``.
    """
    M, _ = _as_matrix(V)
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (M.shape[0],):
        raise DomainError(f"coefficient vector must have length {M.shape[0]}")
    return float(c @ M @ c)


def _quad(labels, mode, quad):
    i = labels.index(mode) if isinstance(mode, str) else int(mode)
    return 2 * i + (0 if quad == "p" else 1)


def _epr_variances(M, i, j):
    """``Var((p_i - p_j)/sqrt 2)``, ``Var((q_i + q_j)/sqrt 2)``, ``Var((q_i - q_j)/sqrt 2)``."""
    pp = M[2 * i, 2 * i] + M[2 * j, 2 * j]
    qq = M[2 * i + 1, 2 * i + 1] + M[2 * j + 1, 2 * j + 1]
    return (0.5 * (pp - 2 * M[2 * i, 2 * j]), 0.5 * (qq + 2 * M[2 * i + 1, 2 * j + 1]),
            0.5 * (qq - 2 * M[2 * i + 1, 2 * j + 1]))


def dgcz_value(V, modes=("s1", "s2")) -> float:
    """``Var((p_i - p_j)/sqrt 2) + Var((q_i + q_j)/sqrt 2)``; below 2 is entangled."""
    M, labels = _as_matrix(V)
    i, j = _lookup(modes, labels)
    p_minus, q_plus, _ = _epr_variances(M, i, j)
    return float(p_minus + q_plus)


@dataclass(frozen=True)
class EntanglementReport:
    """Witnesses of one output covariance.

    Tripartite quantities use the symmetric modes. ``nu["0"]``/``nu["1"]``
    are the pump/signal against the other two beams; ``nu["01"]``,
    ``nu["12"]`` are the two-beam subsystems obtained by tracing out the
    third beam. ``nu_sa`` does the same with each beam carrying both its
    symmetric and antisymmetric mode, and ``nu_sa["sa"]`` is the symmetric
    against the antisymmetric modes.
    """

    variances: dict
    var_p_minus: float
    var_q_plus: float
    var_q_minus: float
    dgcz: float
    nu: dict
    nu_sa: dict
    correlations: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = dict(self.variances)
        row.update(var_p_minus=self.var_p_minus, var_q_plus=self.var_q_plus,
                   var_q_minus=self.var_q_minus, dgcz=self.dgcz)
        row.update({f"nu_{k}": v for k, v in self.nu.items()})
        row.update({f"nu_sa{k}" if k != "sa" else "nu_sa": v for k, v in self.nu_sa.items()})
        row.update(self.correlations)
        return row


def correlation_elements(V) -> dict:
    """Named off-diagonal covariance elements ``C_<x>_<mode>_<y>_<mode>``."""
    M, labels = _as_matrix(V)
    out = {}
    for i in range(len(labels)):
        out[f"C_p_{labels[i]}_q_{labels[i]}"] = float(M[2 * i, 2 * i + 1])
    for i, j in combinations(range(len(labels)), 2):
        for x in "pq":
            for y in "pq":
                out[f"C_{x}_{labels[i]}_{y}_{labels[j]}"] = float(
                    M[_quad(labels, i, x), _quad(labels, j, y)])
    return out


def entanglement_report(V) -> EntanglementReport:
    """Variances, DGCZ value, PPT symplectic eigenvalues and correlations.

    Parameters
    ----------
    V : CovarianceMatrix
        Twelve-mode covariance (converted to the symmetric basis if needed).
    """
    M, labels = _as_matrix(V)
    if M.shape != (12, 12):
        raise DomainError("entanglement_report needs the 12x12 covariance")
    check_physical(M)
    Vs = M[:6, :6]
    variances = {}
    for i in range(3):
        variances[f"var_p_s{i}"] = float(Vs[2 * i, 2 * i])
    for i in range(3):
        variances[f"var_q_s{i}"] = float(Vs[2 * i + 1, 2 * i + 1])
    var_p_minus, var_q_plus, var_q_minus = (float(v) for v in _epr_variances(Vs, 1, 2))
    nu = {
        "0": ppt_min_symplectic(Vs, ["s0"]),
        "1": ppt_min_symplectic(Vs, ["s1"]),
        "2": ppt_min_symplectic(Vs, ["s2"]),
        "01": ppt_min_symplectic(Vs, ["s1"], subsystem=["s0", "s1"]),
        "02": ppt_min_symplectic(Vs, ["s2"], subsystem=["s0", "s2"]),
        "12": ppt_min_symplectic(Vs, ["s2"], subsystem=["s1", "s2"]),
    }
    nu_sa = {
        "0": ppt_min_symplectic(M, ["s0", "a0"]),
        "1": ppt_min_symplectic(M, ["s1", "a1"]),
        "01": ppt_min_symplectic(M, ["s1", "a1"], subsystem=["s0", "a0", "s1", "a1"]),
        "12": ppt_min_symplectic(M, ["s2", "a2"], subsystem=["s1", "a1", "s2", "a2"]),
        "sa": ppt_min_symplectic(M, ["a0", "a1", "a2"]),
    }
    return EntanglementReport(variances, var_p_minus, var_q_plus, var_q_minus,
                              dgcz_value(Vs), nu, nu_sa,
                              correlation_elements(M))
