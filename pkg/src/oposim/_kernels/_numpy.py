"""Vectorised numpy implementations of the hot kernels.

Everything that can be batched over the xi grid is batched; only the RK4
recursion stays a Python loop.
"""

import numpy as np

from ._coeffs import B3, B5, B7, B9, B13, GAUSS_HI, GAUSS_LO, MAGNUS_COMM, THETA

name = "numpy"


def amplitude_rhs(a, m):
    """d(alpha)/d(xi) for real amplitudes; ``a`` has shape (..., 3)."""
    a = np.asarray(a, dtype=float)
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    p = a0 if m == 3 else np.ones_like(a0)
    out = np.empty_like(a)
    out[..., 0] = -(m - 1) * p * a1 * a2
    out[..., 1] = p * a0 * a2
    out[..., 2] = p * a0 * a1
    return out


def rk4_trajectory(a_init, m, h, n_steps, substeps):
    a = np.array(a_init, dtype=float)
    out = np.empty((n_steps + 1, 3))
    out[0] = a
    dt = h / substeps
    for k in range(n_steps):
        for _ in range(substeps):
            k1 = amplitude_rhs(a, m)
            k2 = amplitude_rhs(a + 0.5 * dt * k1, m)
            k3 = amplitude_rhs(a + 0.5 * dt * k2, m)
            k4 = amplitude_rhs(a + dt * k3, m)
            a = a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = a
    return out


def coupling_ladder(a, m, eps):
    """Fluctuation coupling matrices, batched over leading axes of ``a``."""
    a = np.asarray(a, dtype=float)
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    c = a0 if m == 3 else np.ones_like(a0)
    pump = a0 * a0 if m == 3 else a0
    M = np.zeros(a.shape[:-1] + (6, 6))
    self_pump = -eps * (m - 1) * (m - 2) * a1 * a2
    M[..., 0, 1] = self_pump
    M[..., 1, 0] = self_pump
    M[..., 0, 2] = M[..., 1, 3] = -(m - 1) * c * a2
    M[..., 0, 4] = M[..., 1, 5] = -(m - 1) * c * a1
    M[..., 2, 0] = M[..., 3, 1] = (m - 1) * c * a2
    M[..., 4, 0] = M[..., 5, 1] = (m - 1) * c * a1
    M[..., 2, 5] = M[..., 3, 4] = M[..., 4, 3] = M[..., 5, 2] = eps * pump
    return M


def _onenorm(A):
    return np.abs(A).sum(axis=-2).max(axis=-1)


def expm(A):
    """Scaling-and-squaring Pade exponential of a (batched) square matrix."""
    A = np.asarray(A)
    n = A.shape[-1]
    eye = np.broadcast_to(np.eye(n, dtype=A.dtype), A.shape)
    norm = float(np.max(_onenorm(A))) if A.size else 0.0
    s = 0
    for deg, b in ((3, B3), (5, B5), (7, B7), (9, B9)):
        if norm <= THETA[deg]:
            A2 = A @ A
            U = b[1] * eye
            V = b[0] * eye
            P = eye
            for k in range(1, deg // 2 + 1):
                P = P @ A2
                U = U + b[2 * k + 1] * P
                V = V + b[2 * k] * P
            U = A @ U
            break
    else:
        if norm > THETA[13]:
            s = int(np.ceil(np.log2(norm / THETA[13])))
            A = A / 2.0**s
        b = B13
        A2 = A @ A
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def _chain_product(E):
    """E[-1] @ ... @ E[1] @ E[0] by pairwise (tree) reduction."""
    while E.shape[0] > 1:
        if E.shape[0] % 2:
            tail = E[-1:]
            E = E[:-1]
        else:
            tail = None
        E = E[1::2] @ E[0::2]
        if tail is not None:
            E = np.concatenate([E, tail])
    return E[0]


def _hermite(amps, h, m, t):
    y0, y1 = amps[:-1], amps[1:]
    f0 = amplitude_rhs(y0, m)
    f1 = amplitude_rhs(y1, m)
    t2, t3 = t * t, t * t * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * f0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1)


def magnus4_propagator(amps, h, m, eps):
    amps = np.asarray(amps, dtype=float)
    A1 = coupling_ladder(_hermite(amps, h, m, GAUSS_LO), m, eps)
    A2 = coupling_ladder(_hermite(amps, h, m, GAUSS_HI), m, eps)
    Om = 0.5 * h * (A1 + A2) + MAGNUS_COMM * h * h * (A2 @ A1 - A1 @ A2)
    return _chain_product(expm(Om))


def trapezoid_generator(amps, h, m, eps):
    M = coupling_ladder(np.asarray(amps, dtype=float), m, eps)
    return h * (M.sum(axis=0) - 0.5 * (M[0] + M[-1]))
