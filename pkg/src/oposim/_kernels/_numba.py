"""numba-compiled loop implementations of the hot kernels."""

import numpy as np
from numba import njit

from ._coeffs import B3, B5, B7, B9, B13, GAUSS_HI, GAUSS_LO, MAGNUS_COMM, THETA

name = "numba"

_TH3, _TH5, _TH7, _TH9, _TH13 = THETA[3], THETA[5], THETA[7], THETA[9], THETA[13]


@njit(cache=True, nogil=True)
def _rhs(a0, a1, a2, m, out):
    p = a0 if m == 3 else 1.0
    out[0] = -(m - 1) * p * a1 * a2
    out[1] = p * a0 * a2
    out[2] = p * a0 * a1


@njit(cache=True, nogil=True)
def amplitude_rhs(a, m):
    out = np.empty(3)
    _rhs(a[0], a[1], a[2], m, out)
    return out


@njit(cache=True, nogil=True)
def rk4_trajectory(a_init, m, h, n_steps, substeps):
    out = np.empty((n_steps + 1, 3))
    a = a_init.copy()
    out[0] = a
    dt = h / substeps
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    for k in range(n_steps):
        for _ in range(substeps):
            _rhs(a[0], a[1], a[2], m, k1)
            _rhs(a[0] + 0.5 * dt * k1[0], a[1] + 0.5 * dt * k1[1],
                 a[2] + 0.5 * dt * k1[2], m, k2)
            _rhs(a[0] + 0.5 * dt * k2[0], a[1] + 0.5 * dt * k2[1],
                 a[2] + 0.5 * dt * k2[2], m, k3)
            _rhs(a[0] + dt * k3[0], a[1] + dt * k3[1], a[2] + dt * k3[2], m, k4)
            for i in range(3):
                a[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        out[k + 1] = a
    return out


@njit(cache=True, nogil=True)
def _fill_coupling(a0, a1, a2, m, eps, M):
    c = a0 if m == 3 else 1.0
    pump = a0 * a0 if m == 3 else a0
    M[:, :] = 0.0
    sp = -eps * (m - 1) * (m - 2) * a1 * a2
    M[0, 1] = sp
    M[1, 0] = sp
    M[0, 2] = -(m - 1) * c * a2
    M[1, 3] = M[0, 2]
    M[0, 4] = -(m - 1) * c * a1
    M[1, 5] = M[0, 4]
    M[2, 0] = (m - 1) * c * a2
    M[3, 1] = M[2, 0]
    M[4, 0] = (m - 1) * c * a1
    M[5, 1] = M[4, 0]
    M[2, 5] = eps * pump
    M[3, 4] = M[2, 5]
    M[4, 3] = M[2, 5]
    M[5, 2] = M[2, 5]


@njit(cache=True, nogil=True)
def coupling_ladder(a, m, eps):
    M = np.empty((6, 6))
    _fill_coupling(a[0], a[1], a[2], m, eps, M)
    return M


@njit(cache=True, nogil=True)
def _onenorm(A):
    n = A.shape[0]
    best = 0.0
    for j in range(n):
        s = 0.0
        for i in range(n):
            s += abs(A[i, j])
        if s > best:
            best = s
    return best


@njit(cache=True, nogil=True)
def _pade_low(A, b, half):
    n = A.shape[0]
    eye = np.zeros_like(A)
    for i in range(n):
        eye[i, i] = 1.0
    A2 = A @ A
    U = b[1] * eye
    V = b[0] * eye
    P = eye.copy()
    for k in range(1, half + 1):
        P = P @ A2
        U = U + b[2 * k + 1] * P
        V = V + b[2 * k] * P
    U = A @ U
    return U, V


@njit(cache=True, nogil=True)
def expm(A):
    n = A.shape[0]
    norm = _onenorm(A)
    s = 0
    if norm <= _TH3:
        U, V = _pade_low(A, B3, 1)
    elif norm <= _TH5:
        U, V = _pade_low(A, B5, 2)
    elif norm <= _TH7:
        U, V = _pade_low(A, B7, 3)
    elif norm <= _TH9:
        U, V = _pade_low(A, B9, 4)
    else:
        if norm > _TH13:
            s = int(np.ceil(np.log2(norm / _TH13)))
            A = A / 2.0**s
        b = B13
        eye = np.zeros_like(A)
        for i in range(n):
            eye[i, i] = 1.0
        A2 = A @ A
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye)
    R = np.ascontiguousarray(np.linalg.solve(V - U, V + U))
    for _ in range(s):
        R = R @ R
    return R


@njit(cache=True, nogil=True)
def _matmul(A, B, out):
    n = A.shape[0]
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += A[i, k] * B[k, j]
            out[i, j] = acc


@njit(cache=True, nogil=True)
def _solve_inplace(A, B):
    # Gaussian elimination with partial pivoting; B is overwritten by A^-1 B.
    n = A.shape[0]
    for c in range(n):
        p = c
        best = abs(A[c, c])
        for r in range(c + 1, n):
            if abs(A[r, c]) > best:
                best = abs(A[r, c])
                p = r
        if p != c:
            for j in range(n):
                A[c, j], A[p, j] = A[p, j], A[c, j]
                B[c, j], B[p, j] = B[p, j], B[c, j]
        inv = 1.0 / A[c, c]
        for r in range(c + 1, n):
            f = A[r, c] * inv
            if f != 0.0:
                for j in range(c, n):
                    A[r, j] -= f * A[c, j]
                for j in range(n):
                    B[r, j] -= f * B[c, j]
    for c in range(n - 1, -1, -1):
        inv = 1.0 / A[c, c]
        for j in range(n):
            acc = B[c, j]
            for k in range(c + 1, n):
                acc -= A[c, k] * B[k, j]
            B[c, j] = acc * inv


@njit(cache=True, nogil=True)
def _expm_small(A, out, w1, w2, w3, w4):
    # Allocation-free real expm for the short Magnus steps; falls back to
    # the general routine when the step is not small.
    n = A.shape[0]
    norm = _onenorm(A)
    if norm > _TH9:
        out[:, :] = expm(A)
        return
    if norm <= _TH3:
        b = B3
        half = 1
    elif norm <= _TH5:
        b = B5
        half = 2
    elif norm <= _TH7:
        b = B7
        half = 3
    else:
        b = B9
        half = 4
    # w1 = A^2, w2 = running power, w3 = U accumulator (before A), w4 = V
    _matmul(A, A, w1)
    for i in range(n):
        for j in range(n):
            d = 1.0 if i == j else 0.0
            w2[i, j] = d
            w3[i, j] = b[1] * d
            w4[i, j] = b[0] * d
    for k in range(1, half + 1):
        _matmul(w2, w1, out)
        w2[:, :] = out
        for i in range(n):
            for j in range(n):
                w3[i, j] += b[2 * k + 1] * w2[i, j]
                w4[i, j] += b[2 * k] * w2[i, j]
    _matmul(A, w3, w1)
    # num = V + U into out, den = V - U into w2
    for i in range(n):
        for j in range(n):
            out[i, j] = w4[i, j] + w1[i, j]
            w2[i, j] = w4[i, j] - w1[i, j]
    _solve_inplace(w2, out)


@njit(cache=True, nogil=True)
def _hermite_point(y0, y1, f0, f1, h, t, out):
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = (t3 - 2 * t2 + t) * h
    h01 = -2 * t3 + 3 * t2
    h11 = (t3 - t2) * h
    for i in range(3):
        out[i] = h00 * y0[i] + h10 * f0[i] + h01 * y1[i] + h11 * f1[i]


@njit(cache=True, nogil=True)
def magnus4_propagator(amps, h, m, eps):
    n = amps.shape[0]
    G = np.zeros((6, 6))
    for i in range(6):
        G[i, i] = 1.0
    A1 = np.empty((6, 6))
    A2 = np.empty((6, 6))
    Om = np.empty((6, 6))
    E = np.empty((6, 6))
    C1 = np.empty((6, 6))
    C2 = np.empty((6, 6))
    w1 = np.empty((6, 6))
    w2 = np.empty((6, 6))
    w3 = np.empty((6, 6))
    w4 = np.empty((6, 6))
    Gn = np.empty((6, 6))
    f0 = np.empty(3)
    f1 = np.empty(3)
    y = np.empty(3)
    _rhs(amps[0, 0], amps[0, 1], amps[0, 2], m, f0)
    for k in range(n - 1):
        _rhs(amps[k + 1, 0], amps[k + 1, 1], amps[k + 1, 2], m, f1)
        _hermite_point(amps[k], amps[k + 1], f0, f1, h, GAUSS_LO, y)
        _fill_coupling(y[0], y[1], y[2], m, eps, A1)
        _hermite_point(amps[k], amps[k + 1], f0, f1, h, GAUSS_HI, y)
        _fill_coupling(y[0], y[1], y[2], m, eps, A2)
        _matmul(A2, A1, C1)
        _matmul(A1, A2, C2)
        for i in range(6):
            for j in range(6):
                Om[i, j] = (0.5 * h * (A1[i, j] + A2[i, j])
                            + MAGNUS_COMM * h * h * (C1[i, j] - C2[i, j]))
        _expm_small(Om, E, w1, w2, w3, w4)
        _matmul(E, G, Gn)
        G[:, :] = Gn
        f0[:] = f1
    return G


@njit(cache=True, nogil=True)
def trapezoid_generator(amps, h, m, eps):
    n = amps.shape[0]
    S = np.zeros((6, 6))
    M = np.empty((6, 6))
    for k in range(n):
        _fill_coupling(amps[k, 0], amps[k, 1], amps[k, 2], m, eps, M)
        w = 0.5 if (k == 0 or k == n - 1) else 1.0
        S += w * M
    return h * S
