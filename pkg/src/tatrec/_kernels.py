"""Numba stencil kernels for the leapfrog scheme.

All kernels use zero-Dirichlet ghost values outside the array and the
undivided five-point stencil; grid-step scaling is folded into ``q``.
"""

import numba
import numpy as np


@numba.njit(cache=True, inline="always")
def _at(a, i, j, nx, ny):
    if i < 0 or j < 0 or i >= nx or j >= ny:
        return 0.0
    return a[i, j]


@numba.njit(cache=True, inline="always")
def _edge_cell(u, up, q, a, gamma, i, j, nx, ny):
    s = (
        a * (_at(u, i + 1, j, nx, ny) + _at(u, i - 1, j, nx, ny) + _at(u, i, j + 1, nx, ny) + _at(u, i, j - 1, nx, ny))
        - gamma * (_at(up, i + 1, j, nx, ny) + _at(up, i - 1, j, nx, ny) + _at(up, i, j + 1, nx, ny) + _at(up, i, j - 1, nx, ny))
        - 4.0 * (a * u[i, j] - gamma * up[i, j])
    )
    return 2.0 * u[i, j] - up[i, j] + q[i, j] * s


@numba.njit(cache=True)
def lap5_undivided(f, out):
    nx, ny = f.shape
    for i in range(nx):
        for j in range(ny):
            out[i, j] = (
                _at(f, i + 1, j, nx, ny)
                + _at(f, i - 1, j, nx, ny)
                + _at(f, i, j + 1, nx, ny)
                + _at(f, i, j - 1, nx, ny)
                - 4.0 * f[i, j]
            )
    return out


@numba.njit(cache=True)
def leapfrog(u, up, q, gamma, out):
    """out = 2u - up + q * L0((1+gamma) u - gamma up).

    Returns False if a non-finite value was produced.
    """
    nx, ny = u.shape
    a = 1.0 + gamma
    ok = True
    if gamma == 0.0:
        for i in range(1, nx - 1):
            for j in range(1, ny - 1):
                lap = u[i + 1, j] + u[i - 1, j] + u[i, j + 1] + u[i, j - 1] - 4.0 * u[i, j]
                v = 2.0 * u[i, j] - up[i, j] + q[i, j] * lap
                out[i, j] = v
                if v - v != 0.0:
                    ok = False
    else:
        for i in range(1, nx - 1):
            for j in range(1, ny - 1):
                wc = a * u[i, j] - gamma * up[i, j]
                lap = (
                    a * (u[i + 1, j] + u[i - 1, j] + u[i, j + 1] + u[i, j - 1])
                    - gamma * (up[i + 1, j] + up[i - 1, j] + up[i, j + 1] + up[i, j - 1])
                    - 4.0 * wc
                )
                v = 2.0 * u[i, j] - up[i, j] + q[i, j] * lap
                out[i, j] = v
                if v - v != 0.0:
                    ok = False
    for i in (0, nx - 1):
        for j in range(ny):
            v = _edge_cell(u, up, q, a, gamma, i, j, nx, ny)
            out[i, j] = v
            if v - v != 0.0:
                ok = False
    for j in (0, ny - 1):
        for i in range(1, nx - 1):
            v = _edge_cell(u, up, q, a, gamma, i, j, nx, ny)
            out[i, j] = v
            if v - v != 0.0:
                ok = False
    return ok


@numba.njit(cache=True, inline="always")
def _qw(lam, lamp, q, a, gamma, i, j, nx, ny):
    if i < 0 or j < 0 or i >= nx or j >= ny:
        return 0.0
    return q[i, j] * (a * lam[i, j] - gamma * lamp[i, j])


@numba.njit(cache=True)
def leapfrog_transpose(lam, lamp, q, gamma, out):
    """Transposed step: out = 2 lam - lamp + L0(q ((1+gamma) lam - gamma lamp))."""
    nx, ny = lam.shape
    a = 1.0 + gamma
    ok = True
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            s = (
                q[i + 1, j] * (a * lam[i + 1, j] - gamma * lamp[i + 1, j])
                + q[i - 1, j] * (a * lam[i - 1, j] - gamma * lamp[i - 1, j])
                + q[i, j + 1] * (a * lam[i, j + 1] - gamma * lamp[i, j + 1])
                + q[i, j - 1] * (a * lam[i, j - 1] - gamma * lamp[i, j - 1])
                - 4.0 * q[i, j] * (a * lam[i, j] - gamma * lamp[i, j])
            )
            v = 2.0 * lam[i, j] - lamp[i, j] + s
            out[i, j] = v
            if v - v != 0.0:
                ok = False
    for i in (0, nx - 1):
        for j in range(ny):
            v = _transpose_edge(lam, lamp, q, a, gamma, i, j, nx, ny)
            out[i, j] = v
            if v - v != 0.0:
                ok = False
    for j in (0, ny - 1):
        for i in range(1, nx - 1):
            v = _transpose_edge(lam, lamp, q, a, gamma, i, j, nx, ny)
            out[i, j] = v
            if v - v != 0.0:
                ok = False
    return ok


@numba.njit(cache=True, inline="always")
def _transpose_edge(lam, lamp, q, a, gamma, i, j, nx, ny):
    s = (
        _qw(lam, lamp, q, a, gamma, i + 1, j, nx, ny)
        + _qw(lam, lamp, q, a, gamma, i - 1, j, nx, ny)
        + _qw(lam, lamp, q, a, gamma, i, j + 1, nx, ny)
        + _qw(lam, lamp, q, a, gamma, i, j - 1, nx, ny)
        - 4.0 * _qw(lam, lamp, q, a, gamma, i, j, nx, ny)
    )
    return 2.0 * lam[i, j] - lamp[i, j] + s
