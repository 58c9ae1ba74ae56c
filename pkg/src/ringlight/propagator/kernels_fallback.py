"""Pure-NumPy implementations of the propagation hot kernels.

Same operator definitions as the compiled extension (ringlight._core):
fourth-order centered stencils, Cayley sweeps with a precomputed banded
LU, and the small-angle phase rotation.  The compiled core is selected
at import when available; this module keeps the package fully
functional without it (and is what most unit tests run on).
"""

import numpy as np

# FD-4 stencil coefficients: first derivative (antisymmetric) and the
# Cayley sweeps use the symmetric second-derivative bands built in factor.
D1_C1 = 8.0 / 12.0
D1_C2 = -1.0 / 12.0

BACKEND_NAME = "python"


def gradient_1d(a, axis, h):
    """FD-4 central first derivative with Dirichlet (zero) exterior."""
    out = np.zeros_like(a)
    s_p1 = [slice(None)] * a.ndim
    # shifted views; exterior points are implicit zeros
    def shifted(k):
        pad = np.zeros_like(a)
        src = [slice(None)] * a.ndim
        dst = [slice(None)] * a.ndim
        if k > 0:
            src[axis] = slice(k, None)
            dst[axis] = slice(None, -k)
        else:
            src[axis] = slice(None, k)
            dst[axis] = slice(-k, None)
        pad[tuple(dst)] = a[tuple(src)]
        return pad

    out = (D1_C1 * (shifted(1) - shifted(-1))
           + D1_C2 * (shifted(2) - shifted(-2))) / h
    del s_p1
    return out


def coupling_apply(v, px, py, hx, hy, coef):
    """W v = coef * (P.(Dv) + D.(Pv)) with antisymmetric FD-4 D.

    ``px``, ``py`` are the real canonical-momentum fields e*A (internal
    units), ``coef`` = -i hbar/(2 m*).  Exactly Hermitian by construction.
    """
    out = px * gradient_1d(v, 1, hx) + py * gradient_1d(v, 0, hy)
    out += gradient_1d(px * v, 1, hx) + gradient_1d(py * v, 0, hy)
    return coef * out


def coupling_apply_out(out, v, px, py, hx, hy, coef):
    out[:] = coupling_apply(v, px, py, hx, hy, coef)
    return out


def coupling_apply_dot(out, v, px, py, hx, hy, coef):
    """coupling_apply into ``out`` plus the Rayleigh quotient Re<v|out>."""
    coupling_apply_out(out, v, px, py, hx, hy, coef)
    return float(np.vdot(v, out).real)


def vdot(a, b):
    return complex(np.vdot(a, b))


def lanczos_update(w, alpha, vk, beta, vk1):
    """w -= alpha*vk + beta*vk1 (vk1 may be None); returns ||w||^2."""
    w -= alpha * vk
    if vk1 is not None:
        w -= beta * vk1
    return float(np.vdot(w, w).real)


def scale_copy(dst, src, s):
    np.multiply(src, s, out=dst)
    return dst


def recombine(psi, coefs, basis):
    psi[:] = np.tensordot(coefs, basis, axes=1)
    return psi


def scale_inplace(psi, mask):
    psi *= mask
    return psi


def phase_apply(psi, phase_static, px, py, coef, exact=False):
    """psi *= phase_static * exp(-i coef (px^2 + py^2)), in place.

    The dynamic factor uses a 4th/5th-order polynomial cis for small
    arguments (norm error O(theta^6)); callers pass exact=True when the
    per-step bound exceeds the small-angle budget.
    """
    if phase_static is not None:
        psi *= phase_static
    if px is None:
        return psi
    theta = coef * (px * px + py * py)
    if exact:
        psi *= np.exp(-1j * theta)
        return psi
    t2 = theta * theta
    c = 1.0 - t2 * (0.5 - t2 / 24.0)
    s = theta * (1.0 - t2 * (1.0 / 6.0 - t2 / 120.0))
    psi *= c - 1j * s
    return psi


def factor_penta(d0, d1, d2, n):
    """LU factors (no pivoting) of the pentadiagonal Toeplitz-with-
    truncated-corners matrix with diagonal d0 and symmetric off-diagonal
    scalars d1 (first) and d2 (second).

    Returns (l1, l2, u0, u1, u2) band arrays.  The matrix is strongly
    diagonally dominant for the Cayley kinetic factors, so pivot-free LU
    is stable.
    """
    l1 = np.zeros(n, dtype=complex)
    l2 = np.zeros(n, dtype=complex)
    u0 = np.zeros(n, dtype=complex)
    u1 = np.zeros(n, dtype=complex)
    u2 = np.zeros(n, dtype=complex)
    for i in range(n):
        e = d2 if i >= 2 else 0.0
        c = d1 if i >= 1 else 0.0
        if i >= 2:
            l2[i] = e / u0[i - 2]
            c = c - l2[i] * u1[i - 2]
        if i >= 1:
            l1[i] = c / u0[i - 1]
        u0[i] = d0
        if i >= 2:
            u0[i] = u0[i] - l2[i] * u2[i - 2]
        if i >= 1:
            u0[i] = u0[i] - l1[i] * u1[i - 1]
        u1[i] = d1 - (l1[i] * u2[i - 1] if i >= 1 else 0.0)
        u2[i] = d2
    return l1, l2, u0, u1, u2


class CayleyFactor:
    """(I + i g T)^-1 (I - i g T) along one axis, T the FD-4 kinetic."""

    def __init__(self, n, h, gamma, kinetic_scale):
        # kinetic_scale = hbar^2/(2 m*); T = -kinetic_scale * D2(FD-4)
        k = kinetic_scale / (12.0 * h * h)
        t0, t1, t2 = 30.0 * k, -16.0 * k, 1.0 * k
        self.mv = (1.0 - 1j * gamma * t0,
                   -1j * gamma * t1,
                   -1j * gamma * t2)
        self.lu = factor_penta(1.0 + 1j * gamma * t0,
                               1j * gamma * t1,
                               1j * gamma * t2, n)
        self.n = n

    def sweep(self, a):
        """Apply along axis 0 of (n, k) array ``a``, in place."""
        d0, d1, d2 = self.mv
        n = self.n
        rhs = d0 * a
        rhs[1:] += d1 * a[:-1]
        rhs[:-1] += d1 * a[1:]
        rhs[2:] += d2 * a[:-2]
        rhs[:-2] += d2 * a[2:]
        l1, l2, u0, u1, u2 = self.lu
        # forward substitution
        for i in range(1, n):
            rhs[i] -= l1[i] * rhs[i - 1]
            if i >= 2:
                rhs[i] -= l2[i] * rhs[i - 2]
        # back substitution
        rhs[n - 1] /= u0[n - 1]
        rhs[n - 2] = (rhs[n - 2] - u1[n - 2] * rhs[n - 1]) / u0[n - 2]
        for i in range(n - 3, -1, -1):
            rhs[i] = (rhs[i] - u1[i] * rhs[i + 1] - u2[i] * rhs[i + 2]) / u0[i]
        a[:] = rhs
        return a


def kinetic_apply_x(psi, factor):
    """Cayley kinetic along the x (last) axis."""
    at = np.ascontiguousarray(psi.T)
    factor.sweep(at)
    psi[:] = at.T
    return psi


def kinetic_apply_y(psi, factor):
    """Cayley kinetic along the y (first) axis."""
    factor.sweep(psi)
    return psi
