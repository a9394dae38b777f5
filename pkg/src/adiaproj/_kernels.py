"""Numba RK4 kernels for d psi / dt = -i (A + f(t) B) psi.

The generator is split into a static diagonal A (model H0 plus any
constant offset) and a switched part B given either in symmetric-banded
form or dense.  States travel as separate real/imag float64 arrays so
the hot loop never touches complex arithmetic; multiplying by -i swaps
components as (re, im) -> (im, -re).

``fgrid`` holds f sampled on the half-step grid t_k = k * dt / 2, so
step s reads its three stage values at indices 2s, 2s+1, 2s+2.  Kernels
advance ``n_steps`` classic fixed-step RK4 steps in place starting from
global step ``step0`` and never renormalize; norm drift is the caller's
accuracy diagnostic.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _hmul_banded(a_diag, b_diag, offs, bvals, f, xr, xi, wr, wi):
    # w = (A + f B) x with B symmetric banded: diagonal b_diag plus
    # superdiagonals bvals[j] at offsets offs[j] (mirrored by symmetry).
    dim = a_diag.shape[0]
    for i in range(dim):
        d = a_diag[i] + f * b_diag[i]
        wr[i] = d * xr[i]
        wi[i] = d * xi[i]
    for j in range(offs.shape[0]):
        k = offs[j]
        for i in range(dim - k):
            v = f * bvals[j, i]
            wr[i] += v * xr[i + k]
            wi[i] += v * xi[i + k]
            wr[i + k] += v * xr[i]
            wi[i + k] += v * xi[i]


@njit(cache=True, inline="always")
def _hmul_rank1(a_diag, b_diag, c, f, xr, xi, wr, wi):
    # w = (A + f B) x with B = c * (all-ones matrix) + diag(b_diag),
    # so B x = c * sum(x) + b_diag * x in O(dim).
    dim = a_diag.shape[0]
    sr = 0.0
    si = 0.0
    for i in range(dim):
        sr += xr[i]
        si += xi[i]
    fc = f * c
    for i in range(dim):
        d = a_diag[i] + f * b_diag[i]
        wr[i] = d * xr[i] + fc * sr
        wi[i] = d * xi[i] + fc * si


@njit(cache=True, inline="always")
def _hmul_dense(a_diag, bmat, f, xr, xi, wr, wi):
    dim = a_diag.shape[0]
    for i in range(dim):
        sr = 0.0
        si = 0.0
        for j in range(dim):
            v = bmat[i, j]
            sr += v * xr[j]
            si += v * xi[j]
        wr[i] = a_diag[i] * xr[i] + f * sr
        wi[i] = a_diag[i] * xi[i] + f * si


@njit(cache=True)
def rk4_banded(a_diag, b_diag, offs, bvals, fgrid, step0, n_steps, dt, xr, xi):
    dim = a_diag.shape[0]
    w1r = np.empty(dim); w1i = np.empty(dim)
    w2r = np.empty(dim); w2i = np.empty(dim)
    w3r = np.empty(dim); w3i = np.empty(dim)
    w4r = np.empty(dim); w4i = np.empty(dim)
    tr = np.empty(dim); ti = np.empty(dim)
    h = 0.5 * dt
    c = dt / 6.0
    for s in range(n_steps):
        j = 2 * (step0 + s)
        f0 = fgrid[j]
        fh = fgrid[j + 1]
        f2 = fgrid[j + 2]
        _hmul_banded(a_diag, b_diag, offs, bvals, f0, xr, xi, w1r, w1i)
        for i in range(dim):
            tr[i] = xr[i] + h * w1i[i]
            ti[i] = xi[i] - h * w1r[i]
        _hmul_banded(a_diag, b_diag, offs, bvals, fh, tr, ti, w2r, w2i)
        for i in range(dim):
            tr[i] = xr[i] + h * w2i[i]
            ti[i] = xi[i] - h * w2r[i]
        _hmul_banded(a_diag, b_diag, offs, bvals, fh, tr, ti, w3r, w3i)
        for i in range(dim):
            tr[i] = xr[i] + dt * w3i[i]
            ti[i] = xi[i] - dt * w3r[i]
        _hmul_banded(a_diag, b_diag, offs, bvals, f2, tr, ti, w4r, w4i)
        for i in range(dim):
            xr[i] += c * (w1i[i] + 2.0 * (w2i[i] + w3i[i]) + w4i[i])
            xi[i] -= c * (w1r[i] + 2.0 * (w2r[i] + w3r[i]) + w4r[i])


@njit(cache=True)
def rk4_rank1(a_diag, b_diag, c, fgrid, step0, n_steps, dt, xr, xi):
    dim = a_diag.shape[0]
    w1r = np.empty(dim); w1i = np.empty(dim)
    w2r = np.empty(dim); w2i = np.empty(dim)
    w3r = np.empty(dim); w3i = np.empty(dim)
    w4r = np.empty(dim); w4i = np.empty(dim)
    tr = np.empty(dim); ti = np.empty(dim)
    h = 0.5 * dt
    cc = dt / 6.0
    for s in range(n_steps):
        j = 2 * (step0 + s)
        f0 = fgrid[j]
        fh = fgrid[j + 1]
        f2 = fgrid[j + 2]
        _hmul_rank1(a_diag, b_diag, c, f0, xr, xi, w1r, w1i)
        for i in range(dim):
            tr[i] = xr[i] + h * w1i[i]
            ti[i] = xi[i] - h * w1r[i]
        _hmul_rank1(a_diag, b_diag, c, fh, tr, ti, w2r, w2i)
        for i in range(dim):
            tr[i] = xr[i] + h * w2i[i]
            ti[i] = xi[i] - h * w2r[i]
        _hmul_rank1(a_diag, b_diag, c, fh, tr, ti, w3r, w3i)
        for i in range(dim):
            tr[i] = xr[i] + dt * w3i[i]
            ti[i] = xi[i] - dt * w3r[i]
        _hmul_rank1(a_diag, b_diag, c, f2, tr, ti, w4r, w4i)
        for i in range(dim):
            xr[i] += cc * (w1i[i] + 2.0 * (w2i[i] + w3i[i]) + w4i[i])
            xi[i] -= cc * (w1r[i] + 2.0 * (w2r[i] + w3r[i]) + w4r[i])


@njit(cache=True)
def rk4_dense(a_diag, bmat, fgrid, step0, n_steps, dt, xr, xi):
    dim = a_diag.shape[0]
    w1r = np.empty(dim); w1i = np.empty(dim)
    w2r = np.empty(dim); w2i = np.empty(dim)
    w3r = np.empty(dim); w3i = np.empty(dim)
    w4r = np.empty(dim); w4i = np.empty(dim)
    tr = np.empty(dim); ti = np.empty(dim)
    h = 0.5 * dt
    c = dt / 6.0
    for s in range(n_steps):
        j = 2 * (step0 + s)
        f0 = fgrid[j]
        fh = fgrid[j + 1]
        f2 = fgrid[j + 2]
        _hmul_dense(a_diag, bmat, f0, xr, xi, w1r, w1i)
        for i in range(dim):
            tr[i] = xr[i] + h * w1i[i]
            ti[i] = xi[i] - h * w1r[i]
        _hmul_dense(a_diag, bmat, fh, tr, ti, w2r, w2i)
        for i in range(dim):
            tr[i] = xr[i] + h * w2i[i]
            ti[i] = xi[i] - h * w2r[i]
        _hmul_dense(a_diag, bmat, fh, tr, ti, w3r, w3i)
        for i in range(dim):
            tr[i] = xr[i] + dt * w3i[i]
            ti[i] = xi[i] - dt * w3r[i]
        _hmul_dense(a_diag, bmat, f2, tr, ti, w4r, w4i)
        for i in range(dim):
            xr[i] += c * (w1i[i] + 2.0 * (w2i[i] + w3i[i]) + w4i[i])
            xi[i] -= c * (w1r[i] + 2.0 * (w2r[i] + w3r[i]) + w4r[i])
