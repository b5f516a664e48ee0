"""Hot RK4 loops.

Every kernel consumes curve data pre-evaluated on the half-step grid
``t0 + k*h/2`` (``2*steps + 1`` rows) so the loops never call back into Python.
``geom`` selects the ambient metric: 0 flat, 1 Poincare half-space.
"""

import numpy as np

from ._backend import jit


@jit
def conformal(geom, p):
    if geom == 1:
        return 1.0 / (p[2] * p[2])
    return 1.0


@jit
def christoffel(geom, p, u, v):
    out = np.zeros_like(u)
    if geom == 1:
        z = p[2]
        for k in range(u.shape[0]):
            out[k] = -(u[k] * v[2] + v[k] * u[2]) / z
        out[2] += np.dot(u, v) / z
    return out


@jit
def _transport_rhs(geom, p, v, a, n):
    c = conformal(geom, p)
    speed = np.sqrt(c * np.dot(v, v))
    t = v / speed
    acc = a + christoffel(geom, p, v, v)
    dt = (acc - c * np.dot(acc, t) * t) / speed
    return -christoffel(geom, p, v, n) - c * np.dot(n, dt) * t


@jit
def transport(pos, vel, acc, n0, h, geom, stabilize):
    """Normal-connection transport of ``n0``; returns samples at full steps."""
    steps = (pos.shape[0] - 1) // 2
    dim = n0.shape[0]
    out = np.empty((steps + 1, dim))
    n = n0.copy()
    out[0] = n
    for i in range(steps):
        j = 2 * i
        k1 = _transport_rhs(geom, pos[j], vel[j], acc[j], n)
        k2 = _transport_rhs(geom, pos[j + 1], vel[j + 1], acc[j + 1], n + 0.5 * h * k1)
        k3 = _transport_rhs(geom, pos[j + 1], vel[j + 1], acc[j + 1], n + 0.5 * h * k2)
        k4 = _transport_rhs(geom, pos[j + 2], vel[j + 2], acc[j + 2], n + h * k3)
        n = n + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if stabilize:
            p = pos[j + 2]
            c = conformal(geom, p)
            t = vel[j + 2]
            n = n - (np.dot(n, t) / np.dot(t, t)) * t
            n = n / np.sqrt(c * np.dot(n, n))
        if not np.all(np.isfinite(n)):
            raise FloatingPointError("non-finite state in transport")
        out[i + 1] = n
    return out


@jit
def _geodesic_rhs(y):
    p = y[:3]
    v = y[3:]
    out = np.empty(6)
    out[:3] = v
    out[3:] = -christoffel(1, p, v, v)
    return out


@jit
def geodesic_halfspace(p0, v0, h, steps):
    """Integrate ``x'' = -Gamma(x', x')`` in the half-space model."""
    y = np.empty(6)
    y[:3] = p0
    y[3:] = v0
    out = np.empty((steps + 1, 6))
    out[0] = y
    for i in range(steps):
        k1 = _geodesic_rhs(y)
        k2 = _geodesic_rhs(y + 0.5 * h * k1)
        k3 = _geodesic_rhs(y + 0.5 * h * k2)
        k4 = _geodesic_rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or y[2] <= 0.0:
            raise FloatingPointError("geodesic left the half-space")
        out[i + 1] = y
    return out


@jit
def _apply_j(v):
    n = v.shape[0] // 2
    out = np.empty_like(v)
    out[:n] = -v[n:]
    out[n:] = v[:n]
    return out


@jit
def _magnetic_rhs(kappa, y, dim):
    out = np.empty(2 * dim)
    out[:dim] = y[dim:]
    out[dim:] = kappa * _apply_j(y[dim:])
    return out


@jit
def magnetic(kvals, p0, v0, h):
    """``gamma'' = kappa(t) J gamma'`` with ``kvals`` on the half-step grid."""
    steps = (kvals.shape[0] - 1) // 2
    dim = p0.shape[0]
    y = np.empty(2 * dim)
    y[:dim] = p0
    y[dim:] = v0
    out = np.empty((steps + 1, 2 * dim))
    out[0] = y
    for i in range(steps):
        j = 2 * i
        k1 = _magnetic_rhs(kvals[j], y, dim)
        k2 = _magnetic_rhs(kvals[j + 1], y + 0.5 * h * k1, dim)
        k3 = _magnetic_rhs(kvals[j + 1], y + 0.5 * h * k2, dim)
        k4 = _magnetic_rhs(kvals[j + 2], y + h * k3, dim)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError("non-finite state in magnetic trajectory")
        out[i + 1] = y
    return out


@jit
def ruling(p, v, a, lam):
    """Point ``F``, ruling tangent ``G`` and ``dF/ds`` for the tangent geodesic.

    ``F(s, lam) = exp_{alpha(s)}(lam * unit(alpha'(s)))`` in the half-space;
    ``p, v, a`` are ``alpha, alpha', alpha''`` at ``s``.
    """
    z0 = p[2]
    nv = np.sqrt(np.dot(v, v))
    vh = v / nv
    nu = z0 * vh
    nu_s = v[2] * vh + z0 * (a - np.dot(a, vh) * vh) / nv
    sg = nu[2] / z0
    sg_s = nu_s[2] / z0 - nu[2] * v[2] / (z0 * z0)
    ch = np.cosh(lam)
    sh = np.sinh(lam)
    d = ch - sg * sh
    d_s = -sg_s * sh
    f = np.empty(3)
    g = np.empty(3)
    fs = np.empty(3)
    for k in range(2):
        f[k] = p[k] + nu[k] * sh / d
        g[k] = nu[k] / (d * d)
        fs[k] = v[k] + nu_s[k] * sh / d - nu[k] * sh * d_s / (d * d)
    f[2] = z0 / d
    g[2] = z0 * (sg * ch - sh) / (d * d)
    fs[2] = v[2] / d - z0 * d_s / (d * d)
    return f, g, fs


@jit
def _lambda_rhs(p, v, a, lam):
    f, g, fs = ruling(p, v, a, lam)
    return -np.dot(fs, g) / np.dot(g, g)


@jit
def involute_lambda(pos, vel, acc, lam0, h):
    """Ruling parameter ``lam(s)`` making the involute meet rulings orthogonally."""
    steps = (pos.shape[0] - 1) // 2
    out = np.empty(steps + 1)
    lam = lam0
    out[0] = lam
    for i in range(steps):
        j = 2 * i
        k1 = _lambda_rhs(pos[j], vel[j], acc[j], lam)
        k2 = _lambda_rhs(pos[j + 1], vel[j + 1], acc[j + 1], lam + 0.5 * h * k1)
        k3 = _lambda_rhs(pos[j + 1], vel[j + 1], acc[j + 1], lam + 0.5 * h * k2)
        k4 = _lambda_rhs(pos[j + 2], vel[j + 2], acc[j + 2], lam + h * k3)
        lam = lam + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(lam):
            raise FloatingPointError("non-finite ruling parameter")
        out[i + 1] = lam
    return out
