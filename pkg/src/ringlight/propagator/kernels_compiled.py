"""Thin wrappers presenting the compiled core under the kernel API."""

import numpy as np

from .. import _core
from .kernels_fallback import factor_penta

BACKEND_NAME = "compiled"


def gradient_1d(a, axis, h):
    # only used by tests/diagnostics; same definition as the fallback
    from . import kernels_fallback
    return kernels_fallback.gradient_1d(a, axis, h)


def coupling_apply(v, px, py, hx, hy, coef):
    out = np.empty_like(v)
    coupling_apply_out(out, v, px, py, hx, hy, coef)
    return out


def coupling_apply_out(out, v, px, py, hx, hy, coef):
    if coef.real != 0.0:
        raise ValueError("coupling coefficient must be purely imaginary")
    _core.coupling_apply(out, v, px, py, hx, hy, coef.imag)
    return out


def coupling_apply_dot(out, v, px, py, hx, hy, coef):
    if coef.real != 0.0:
        raise ValueError("coupling coefficient must be purely imaginary")
    return _core.coupling_apply_dot(out, v, px, py, hx, hy, coef.imag)


def phase_apply(psi, phase_static, px, py, coef, exact=False):
    _core.phase_apply(psi, phase_static, px, py, coef, exact)
    return psi


def vdot(a, b):
    return _core.vdot_c(a, b)


def lanczos_update(w, alpha, vk, beta, vk1):
    return _core.lanczos_update(w, float(alpha), vk, float(beta), vk1)


def scale_copy(dst, src, s):
    _core.scale_copy(dst, src, float(s))
    return dst


def recombine(psi, coefs, basis):
    _core.recombine(psi, np.ascontiguousarray(coefs, dtype=np.complex128),
                    basis)
    return psi


def scale_inplace(psi, mask):
    _core.scale_inplace(psi, mask)
    return psi


class CayleyFactor:
    """Banded Cayley factor with compiled in-place sweeps."""

    def __init__(self, n, h, gamma, kinetic_scale):
        k = kinetic_scale / (12.0 * h * h)
        t0, t1, t2 = 30.0 * k, -16.0 * k, 1.0 * k
        self.mv = (1.0 - 1j * gamma * t0,
                   -1j * gamma * t1,
                   -1j * gamma * t2)
        l1, l2, u0, u1, u2 = factor_penta(1.0 + 1j * gamma * t0,
                                          1j * gamma * t1,
                                          1j * gamma * t2, n)
        self.l1, self.l2 = l1, l2
        self.u0inv = 1.0 / u0
        self.u1, self.u2 = u1, u2
        self.n = n
        self._work = {}

    def _workspace(self, shape):
        w = self._work.get(shape)
        if w is None:
            w = np.empty(shape, dtype=np.complex128)
            self._work[shape] = w
        return w


def kinetic_apply_x(psi, factor):
    d0, d1, d2 = factor.mv
    _core.cayley_sweep_x(psi, d0, d1, d2, factor.l1, factor.l2,
                         factor.u0inv, factor.u1, factor.u2,
                         factor._workspace(psi.shape))
    return psi


def kinetic_apply_y(psi, factor):
    d0, d1, d2 = factor.mv
    _core.cayley_sweep_y(psi, d0, d1, d2, factor.l1, factor.l2,
                         factor.u0inv, factor.u1, factor.u2,
                         factor._workspace(psi.shape))
    return psi
