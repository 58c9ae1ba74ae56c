# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
# cython: initializedcheck=False
"""Compiled propagation kernels: fused phase rotation, banded Cayley
sweeps and the FD-4 gradient coupling.  Operator definitions mirror
ringlight.propagator.kernels_fallback exactly; complex arrays are
processed as interleaved doubles so the compiler can vectorize."""

from libc.math cimport cos, sin

import numpy as np

ctypedef double complex cplx

DEF D1C1 = 0.6666666666666666      # 8/12
DEF D1C2 = -0.08333333333333333    # -1/12


def phase_apply(cplx[:, ::1] psi_c, cplx[:, ::1] phase_static_c,
                double[:, ::1] px, double[:, ::1] py, double coef,
                bint exact=False):
    """psi *= phase_static * exp(-i coef (px^2+py^2)), in place."""
    cdef double[:, ::1] psi = bytearray_view(psi_c)
    cdef double[:, ::1] ps
    cdef Py_ssize_t n0 = psi_c.shape[0], n1 = psi_c.shape[1], i, j
    cdef double th, t2, c, s, ar, ai, br, bi
    cdef bint have_static = phase_static_c is not None
    cdef bint have_dyn = px is not None
    if have_static:
        ps = bytearray_view(phase_static_c)
    if have_static and not have_dyn:
        for i in range(n0):
            for j in range(n1):
                ar = psi[i, 2 * j]
                ai = psi[i, 2 * j + 1]
                br = ps[i, 2 * j]
                bi = ps[i, 2 * j + 1]
                psi[i, 2 * j] = ar * br - ai * bi
                psi[i, 2 * j + 1] = ar * bi + ai * br
        return None
    if have_static and have_dyn and not exact:
        for i in range(n0):
            for j in range(n1):
                ar = psi[i, 2 * j]
                ai = psi[i, 2 * j + 1]
                br = ps[i, 2 * j]
                bi = ps[i, 2 * j + 1]
                th = ar * br - ai * bi
                ai = ar * bi + ai * br
                ar = th
                th = coef * (px[i, j] * px[i, j] + py[i, j] * py[i, j])
                t2 = th * th
                c = 1.0 - t2 * (0.5 - t2 / 24.0)
                s = th * (1.0 - t2 * (1.0 / 6.0 - t2 / 120.0))
                psi[i, 2 * j] = ar * c + ai * s
                psi[i, 2 * j + 1] = ai * c - ar * s
        return None
    for i in range(n0):
        for j in range(n1):
            ar = psi[i, 2 * j]
            ai = psi[i, 2 * j + 1]
            if have_static:
                br = ps[i, 2 * j]
                bi = ps[i, 2 * j + 1]
                th = ar * br - ai * bi
                ai = ar * bi + ai * br
                ar = th
            if have_dyn:
                th = coef * (px[i, j] * px[i, j] + py[i, j] * py[i, j])
                if exact:
                    c = cos(th)
                    s = sin(th)
                else:
                    t2 = th * th
                    c = 1.0 - t2 * (0.5 - t2 / 24.0)
                    s = th * (1.0 - t2 * (1.0 / 6.0 - t2 / 120.0))
                # multiply by (c - i s)
                th = ar * c + ai * s
                ai = ai * c - ar * s
                ar = th
            psi[i, 2 * j] = ar
            psi[i, 2 * j + 1] = ai
    return None


cdef double[:, ::1] bytearray_view(cplx[:, ::1] a):
    """Reinterpret a C-contiguous complex128 2D view as (n0, 2*n1) doubles."""
    cdef cplx[:, ::1] src = a
    return (<double[:src.shape[0], :2 * src.shape[1]:1]>
            (<double*> &src[0, 0]))


def vdot_c(cplx[:, ::1] a_c, cplx[:, ::1] b_c):
    """sum(conj(a) * b) over 2D complex arrays."""
    cdef double[:, ::1] a = bytearray_view(a_c)
    cdef double[:, ::1] b = bytearray_view(b_c)
    cdef Py_ssize_t n0 = a_c.shape[0], n1 = a_c.shape[1], i, j
    cdef double sr = 0.0, si = 0.0
    cdef double ar, ai, br, bi
    for i in range(n0):
        for j in range(n1):
            ar = a[i, 2 * j]
            ai = a[i, 2 * j + 1]
            br = b[i, 2 * j]
            bi = b[i, 2 * j + 1]
            sr += ar * br + ai * bi
            si += ar * bi - ai * br
    return complex(sr, si)


def lanczos_update(cplx[:, ::1] w_c, double alpha, cplx[:, ::1] vk_c,
                   double beta, vk1_c):
    """w -= alpha*vk + beta*vk1 (vk1 may be None); returns ||w||^2.

    Coefficients are real (Lanczos on a Hermitian operator).
    """
    cdef double[:, ::1] w = bytearray_view(w_c)
    cdef double[:, ::1] vk = bytearray_view(vk_c)
    cdef cplx[:, ::1] v1c
    cdef double[:, ::1] vk1
    cdef Py_ssize_t n0 = w_c.shape[0], n1 = 2 * w_c.shape[1], i, j
    cdef double acc = 0.0, x
    if vk1_c is not None:
        v1c = vk1_c
        vk1 = bytearray_view(v1c)
        for i in range(n0):
            for j in range(n1):
                x = w[i, j] - alpha * vk[i, j] - beta * vk1[i, j]
                w[i, j] = x
                acc += x * x
    else:
        for i in range(n0):
            for j in range(n1):
                x = w[i, j] - alpha * vk[i, j]
                w[i, j] = x
                acc += x * x
    return acc


def scale_copy(cplx[:, ::1] dst_c, cplx[:, ::1] src_c, double s):
    """dst = s * src."""
    cdef double[:, ::1] dst = bytearray_view(dst_c)
    cdef double[:, ::1] src = bytearray_view(src_c)
    cdef Py_ssize_t n0 = dst_c.shape[0], n1 = 2 * dst_c.shape[1], i, j
    for i in range(n0):
        for j in range(n1):
            dst[i, j] = s * src[i, j]
    return None


def recombine(cplx[:, ::1] psi_c, cplx[::1] coefs, basis):
    """psi = sum_k coefs[k] * basis[k] over the Krylov basis stack."""
    cdef double[:, ::1] psi = bytearray_view(psi_c)
    cdef cplx[:, :, ::1] vs = basis
    cdef Py_ssize_t m = coefs.shape[0], n0 = psi_c.shape[0], n1 = psi_c.shape[1]
    cdef Py_ssize_t k, i, j
    cdef double cr, ci, vr, vi
    cdef double[:, :, ::1] vd = (<double[:vs.shape[0], :vs.shape[1], :2 * vs.shape[2]:1]>
                                 (<double*> &vs[0, 0, 0]))
    for i in range(n0):
        for j in range(2 * n1):
            psi[i, j] = 0.0
    for k in range(m):
        cr = coefs[k].real
        ci = coefs[k].imag
        for i in range(n0):
            for j in range(n1):
                vr = vd[k, i, 2 * j]
                vi = vd[k, i, 2 * j + 1]
                psi[i, 2 * j] += cr * vr - ci * vi
                psi[i, 2 * j + 1] += cr * vi + ci * vr
    return None


def cayley_sweep_y(cplx[:, ::1] a_c, cplx d0, cplx d1, cplx d2,
                   cplx[::1] l1, cplx[::1] l2, cplx[::1] u0inv,
                   cplx[::1] u1, cplx[::1] u2, cplx[:, ::1] work_c):
    """Along axis 0 (rows), vectorized over the contiguous axis 1."""
    cdef double[:, ::1] a = bytearray_view(a_c)
    cdef double[:, ::1] w = bytearray_view(work_c)
    cdef Py_ssize_t n0 = a_c.shape[0], n1 = 2 * a_c.shape[1], i, j
    cdef double d0r = d0.real, d0i = d0.imag
    cdef double d1r = d1.real, d1i = d1.imag
    cdef double d2r = d2.real, d2i = d2.imag
    cdef double mr, mi, xr, xi
    # rhs = (I - igT) a, row-fused; interleaved complex mult by scalar:
    # (zr + i zi)(vr + i vi): handle pairs with stride-2 indexing
    for i in range(n0):
        for j in range(0, n1, 2):
            xr = a[i, j]
            xi = a[i, j + 1]
            w[i, j] = d0r * xr - d0i * xi
            w[i, j + 1] = d0r * xi + d0i * xr
        if i >= 1:
            for j in range(0, n1, 2):
                xr = a[i - 1, j]
                xi = a[i - 1, j + 1]
                w[i, j] += d1r * xr - d1i * xi
                w[i, j + 1] += d1r * xi + d1i * xr
        if i + 1 < n0:
            for j in range(0, n1, 2):
                xr = a[i + 1, j]
                xi = a[i + 1, j + 1]
                w[i, j] += d1r * xr - d1i * xi
                w[i, j + 1] += d1r * xi + d1i * xr
        if i >= 2:
            for j in range(0, n1, 2):
                xr = a[i - 2, j]
                xi = a[i - 2, j + 1]
                w[i, j] += d2r * xr - d2i * xi
                w[i, j + 1] += d2r * xi + d2i * xr
        if i + 2 < n0:
            for j in range(0, n1, 2):
                xr = a[i + 2, j]
                xi = a[i + 2, j + 1]
                w[i, j] += d2r * xr - d2i * xi
                w[i, j + 1] += d2r * xi + d2i * xr
    # forward substitution
    for i in range(1, n0):
        mr = l1[i].real
        mi = l1[i].imag
        if i >= 2:
            d0r = l2[i].real
            d0i = l2[i].imag
            for j in range(0, n1, 2):
                xr = w[i - 1, j]
                xi = w[i - 1, j + 1]
                w[i, j] -= mr * xr - mi * xi + d0r * w[i - 2, j] - d0i * w[i - 2, j + 1]
                w[i, j + 1] -= mr * xi + mi * xr + d0r * w[i - 2, j + 1] + d0i * w[i - 2, j]
        else:
            for j in range(0, n1, 2):
                xr = w[i - 1, j]
                xi = w[i - 1, j + 1]
                w[i, j] -= mr * xr - mi * xi
                w[i, j + 1] -= mr * xi + mi * xr
    # back substitution into a
    i = n0 - 1
    mr = u0inv[i].real
    mi = u0inv[i].imag
    for j in range(0, n1, 2):
        xr = w[i, j]
        xi = w[i, j + 1]
        a[i, j] = mr * xr - mi * xi
        a[i, j + 1] = mr * xi + mi * xr
    i = n0 - 2
    mr = u1[i].real
    mi = u1[i].imag
    d0r = u0inv[i].real
    d0i = u0inv[i].imag
    for j in range(0, n1, 2):
        xr = w[i, j] - (mr * a[i + 1, j] - mi * a[i + 1, j + 1])
        xi = w[i, j + 1] - (mr * a[i + 1, j + 1] + mi * a[i + 1, j])
        a[i, j] = d0r * xr - d0i * xi
        a[i, j + 1] = d0r * xi + d0i * xr
    for i in range(n0 - 3, -1, -1):
        mr = u1[i].real
        mi = u1[i].imag
        d1r = u2[i].real
        d1i = u2[i].imag
        d0r = u0inv[i].real
        d0i = u0inv[i].imag
        for j in range(0, n1, 2):
            xr = w[i, j] - (mr * a[i + 1, j] - mi * a[i + 1, j + 1]) \
                - (d1r * a[i + 2, j] - d1i * a[i + 2, j + 1])
            xi = w[i, j + 1] - (mr * a[i + 1, j + 1] + mi * a[i + 1, j]) \
                - (d1r * a[i + 2, j + 1] + d1i * a[i + 2, j])
            a[i, j] = d0r * xr - d0i * xi
            a[i, j + 1] = d0r * xi + d0i * xr
    return None


def cayley_sweep_x(cplx[:, ::1] a_c, cplx d0, cplx d1, cplx d2,
                   cplx[::1] l1c, cplx[::1] l2c, cplx[::1] u0invc,
                   cplx[::1] u1c, cplx[::1] u2c, cplx[:, ::1] work_c):
    """Along the contiguous axis 1: per-row banded mv + LU substitution."""
    cdef double[:, ::1] a = bytearray_view(a_c)
    cdef double[:, ::1] w = bytearray_view(work_c)
    cdef Py_ssize_t n0 = a_c.shape[0], n = a_c.shape[1], i, j
    cdef double d0r = d0.real, d0i = d0.imag
    cdef double d1r = d1.real, d1i = d1.imag
    cdef double d2r = d2.real, d2i = d2.imag
    cdef double xr, xi, yr, yi, mr, mi, pr, pi
    for i in range(n0):
        # rhs along the row (vectorizable: independent j)
        for j in range(2, n - 2):
            xr = a[i, 2 * j]
            xi = a[i, 2 * j + 1]
            yr = a[i, 2 * j - 2] + a[i, 2 * j + 2]
            yi = a[i, 2 * j - 1] + a[i, 2 * j + 3]
            pr = a[i, 2 * j - 4] + a[i, 2 * j + 4]
            pi = a[i, 2 * j - 3] + a[i, 2 * j + 5]
            w[i, 2 * j] = (d0r * xr - d0i * xi + d1r * yr - d1i * yi
                           + d2r * pr - d2i * pi)
            w[i, 2 * j + 1] = (d0r * xi + d0i * xr + d1r * yi + d1i * yr
                               + d2r * pi + d2i * pr)
        # edges j = 0, 1, n-2, n-1
        w[i, 0] = d0r * a[i, 0] - d0i * a[i, 1] + d1r * a[i, 2] - d1i * a[i, 3] \
            + d2r * a[i, 4] - d2i * a[i, 5]
        w[i, 1] = d0r * a[i, 1] + d0i * a[i, 0] + d1r * a[i, 3] + d1i * a[i, 2] \
            + d2r * a[i, 5] + d2i * a[i, 4]
        yr = a[i, 0] + a[i, 4]
        yi = a[i, 1] + a[i, 5]
        w[i, 2] = d0r * a[i, 2] - d0i * a[i, 3] + d1r * yr - d1i * yi \
            + d2r * a[i, 6] - d2i * a[i, 7]
        w[i, 3] = d0r * a[i, 3] + d0i * a[i, 2] + d1r * yi + d1i * yr \
            + d2r * a[i, 7] + d2i * a[i, 6]
        yr = a[i, 2 * n - 6] + a[i, 2 * n - 2]
        yi = a[i, 2 * n - 5] + a[i, 2 * n - 1]
        w[i, 2 * n - 4] = d0r * a[i, 2 * n - 4] - d0i * a[i, 2 * n - 3] \
            + d1r * yr - d1i * yi + d2r * a[i, 2 * n - 8] - d2i * a[i, 2 * n - 7]
        w[i, 2 * n - 3] = d0r * a[i, 2 * n - 3] + d0i * a[i, 2 * n - 4] \
            + d1r * yi + d1i * yr + d2r * a[i, 2 * n - 7] + d2i * a[i, 2 * n - 8]
        w[i, 2 * n - 2] = d0r * a[i, 2 * n - 2] - d0i * a[i, 2 * n - 1] \
            + d1r * a[i, 2 * n - 4] - d1i * a[i, 2 * n - 3] \
            + d2r * a[i, 2 * n - 6] - d2i * a[i, 2 * n - 5]
        w[i, 2 * n - 1] = d0r * a[i, 2 * n - 1] + d0i * a[i, 2 * n - 2] \
            + d1r * a[i, 2 * n - 3] + d1i * a[i, 2 * n - 4] \
            + d2r * a[i, 2 * n - 5] + d2i * a[i, 2 * n - 6]
        # forward substitution (serial along the row)
        for j in range(1, n):
            mr = l1c[j].real
            mi = l1c[j].imag
            xr = w[i, 2 * j - 2]
            xi = w[i, 2 * j - 1]
            yr = mr * xr - mi * xi
            yi = mr * xi + mi * xr
            if j >= 2:
                pr = l2c[j].real
                pi = l2c[j].imag
                xr = w[i, 2 * j - 4]
                xi = w[i, 2 * j - 3]
                yr += pr * xr - pi * xi
                yi += pr * xi + pi * xr
            w[i, 2 * j] -= yr
            w[i, 2 * j + 1] -= yi
        # back substitution
        j = n - 1
        mr = u0invc[j].real
        mi = u0invc[j].imag
        xr = w[i, 2 * j]
        xi = w[i, 2 * j + 1]
        a[i, 2 * j] = mr * xr - mi * xi
        a[i, 2 * j + 1] = mr * xi + mi * xr
        j = n - 2
        mr = u1c[j].real
        mi = u1c[j].imag
        xr = w[i, 2 * j] - (mr * a[i, 2 * j + 2] - mi * a[i, 2 * j + 3])
        xi = w[i, 2 * j + 1] - (mr * a[i, 2 * j + 3] + mi * a[i, 2 * j + 2])
        mr = u0invc[j].real
        mi = u0invc[j].imag
        a[i, 2 * j] = mr * xr - mi * xi
        a[i, 2 * j + 1] = mr * xi + mi * xr
        for j in range(n - 3, -1, -1):
            mr = u1c[j].real
            mi = u1c[j].imag
            xr = w[i, 2 * j] - (mr * a[i, 2 * j + 2] - mi * a[i, 2 * j + 3])
            xi = w[i, 2 * j + 1] - (mr * a[i, 2 * j + 3] + mi * a[i, 2 * j + 2])
            mr = u2c[j].real
            mi = u2c[j].imag
            xr -= mr * a[i, 2 * j + 4] - mi * a[i, 2 * j + 5]
            xi -= mr * a[i, 2 * j + 5] + mi * a[i, 2 * j + 4]
            mr = u0invc[j].real
            mi = u0invc[j].imag
            a[i, 2 * j] = mr * xr - mi * xi
            a[i, 2 * j + 1] = mr * xi + mi * xr
    return None


def coupling_apply(cplx[:, ::1] out_c, cplx[:, ::1] v_c,
                   double[:, ::1] px, double[:, ::1] py,
                   double hx, double hy, double coef_imag):
    """out = (i*coef_imag)*(P.(Dv) + D.(Pv)), antisymmetric FD-4 D.

    ``coef_imag`` is the imaginary part of the coupling coefficient
    (-hbar/(2 m*)); the result is (0 + i c)*real-combination.
    """
    cdef double[:, ::1] out = bytearray_view(out_c)
    cdef double[:, ::1] v = bytearray_view(v_c)
    cdef Py_ssize_t ny = v_c.shape[0], nx = v_c.shape[1], i, j
    cdef double cx1 = D1C1 / hx, cx2 = D1C2 / hx
    cdef double cy1 = D1C1 / hy, cy2 = D1C2 / hy
    cdef double gr, gi, p0
    cdef Py_ssize_t jm1, jm2, jp1, jp2
    for i in range(ny):
        for j in range(nx):
            gr = 0.0
            gi = 0.0
            p0 = px[i, j]
            if j >= 1:
                gr -= cx1 * ((p0 + px[i, j - 1]) * v[i, 2 * j - 2])
                gi -= cx1 * ((p0 + px[i, j - 1]) * v[i, 2 * j - 1])
            if j >= 2:
                gr -= cx2 * ((p0 + px[i, j - 2]) * v[i, 2 * j - 4])
                gi -= cx2 * ((p0 + px[i, j - 2]) * v[i, 2 * j - 3])
            if j + 1 < nx:
                gr += cx1 * ((p0 + px[i, j + 1]) * v[i, 2 * j + 2])
                gi += cx1 * ((p0 + px[i, j + 1]) * v[i, 2 * j + 3])
            if j + 2 < nx:
                gr += cx2 * ((p0 + px[i, j + 2]) * v[i, 2 * j + 4])
                gi += cx2 * ((p0 + px[i, j + 2]) * v[i, 2 * j + 5])
            p0 = py[i, j]
            if i >= 1:
                gr -= cy1 * ((p0 + py[i - 1, j]) * v[i - 1, 2 * j])
                gi -= cy1 * ((p0 + py[i - 1, j]) * v[i - 1, 2 * j + 1])
            if i >= 2:
                gr -= cy2 * ((p0 + py[i - 2, j]) * v[i - 2, 2 * j])
                gi -= cy2 * ((p0 + py[i - 2, j]) * v[i - 2, 2 * j + 1])
            if i + 1 < ny:
                gr += cy1 * ((p0 + py[i + 1, j]) * v[i + 1, 2 * j])
                gi += cy1 * ((p0 + py[i + 1, j]) * v[i + 1, 2 * j + 1])
            if i + 2 < ny:
                gr += cy2 * ((p0 + py[i + 2, j]) * v[i + 2, 2 * j])
                gi += cy2 * ((p0 + py[i + 2, j]) * v[i + 2, 2 * j + 1])
            # multiply by i*coef_imag
            out[i, 2 * j] = -coef_imag * gi
            out[i, 2 * j + 1] = coef_imag * gr
    return None


def coupling_apply_dot(cplx[:, ::1] out_c, cplx[:, ::1] v_c,
                       double[:, ::1] px, double[:, ::1] py,
                       double hx, double hy, double coef_imag):
    """coupling_apply fused with the Rayleigh quotient Re<v|out>."""
    cdef double[:, ::1] out = bytearray_view(out_c)
    cdef double[:, ::1] v = bytearray_view(v_c)
    cdef Py_ssize_t ny = v_c.shape[0], nx = v_c.shape[1], i, j
    cdef double cx1 = D1C1 / hx, cx2 = D1C2 / hx
    cdef double cy1 = D1C1 / hy, cy2 = D1C2 / hy
    cdef double gr, gi, p0, wr, wi, acc = 0.0
    for i in range(ny):
        for j in range(nx):
            gr = 0.0
            gi = 0.0
            p0 = px[i, j]
            if j >= 1:
                gr -= cx1 * ((p0 + px[i, j - 1]) * v[i, 2 * j - 2])
                gi -= cx1 * ((p0 + px[i, j - 1]) * v[i, 2 * j - 1])
            if j >= 2:
                gr -= cx2 * ((p0 + px[i, j - 2]) * v[i, 2 * j - 4])
                gi -= cx2 * ((p0 + px[i, j - 2]) * v[i, 2 * j - 3])
            if j + 1 < nx:
                gr += cx1 * ((p0 + px[i, j + 1]) * v[i, 2 * j + 2])
                gi += cx1 * ((p0 + px[i, j + 1]) * v[i, 2 * j + 3])
            if j + 2 < nx:
                gr += cx2 * ((p0 + px[i, j + 2]) * v[i, 2 * j + 4])
                gi += cx2 * ((p0 + px[i, j + 2]) * v[i, 2 * j + 5])
            p0 = py[i, j]
            if i >= 1:
                gr -= cy1 * ((p0 + py[i - 1, j]) * v[i - 1, 2 * j])
                gi -= cy1 * ((p0 + py[i - 1, j]) * v[i - 1, 2 * j + 1])
            if i >= 2:
                gr -= cy2 * ((p0 + py[i - 2, j]) * v[i - 2, 2 * j])
                gi -= cy2 * ((p0 + py[i - 2, j]) * v[i - 2, 2 * j + 1])
            if i + 1 < ny:
                gr += cy1 * ((p0 + py[i + 1, j]) * v[i + 1, 2 * j])
                gi += cy1 * ((p0 + py[i + 1, j]) * v[i + 1, 2 * j + 1])
            if i + 2 < ny:
                gr += cy2 * ((p0 + py[i + 2, j]) * v[i + 2, 2 * j])
                gi += cy2 * ((p0 + py[i + 2, j]) * v[i + 2, 2 * j + 1])
            wr = -coef_imag * gi
            wi = coef_imag * gr
            out[i, 2 * j] = wr
            out[i, 2 * j + 1] = wi
            acc += v[i, 2 * j] * wr + v[i, 2 * j + 1] * wi
    return acc


def scale_inplace(cplx[:, ::1] psi_c, double[:, ::1] mask):
    """psi *= mask (real), in place."""
    cdef double[:, ::1] psi = bytearray_view(psi_c)
    cdef Py_ssize_t n0 = psi_c.shape[0], n1 = psi_c.shape[1], i, j
    cdef double m
    for i in range(n0):
        for j in range(n1):
            m = mask[i, j]
            psi[i, 2 * j] *= m
            psi[i, 2 * j + 1] *= m
    return None
