"""Shared numerical kernels: fixed-step RK4, finite differences, Gram matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DependentInput, InputError, NonFiniteState, TooFewSamples

__all__ = [
    "OdeSystem",
    "ResidualReport",
    "rk4",
    "finite_diff",
    "fornberg_weights",
    "gram_matrix",
    "gram_det",
    "orthonormalize",
]


@dataclass(frozen=True)
class OdeSystem:
    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    rms: float
    ts: np.ndarray
    values: np.ndarray

    @classmethod
    def from_values(cls, ts, values) -> "ResidualReport":
        ts = np.asarray(ts, dtype=float)
        values = np.abs(np.asarray(values, dtype=float))
        if values.size == 0:
            return cls(0.0, 0.0, ts, values)
        return cls(float(values.max()), float(np.sqrt(np.mean(values**2))), ts, values)

    def passes(self, tol: float) -> bool:
        return self.max_abs < tol

    def to_dict(self, per_sample: bool = False) -> dict:
        out = {"max_abs": self.max_abs, "rms": self.rms}
        if per_sample:
            out["per_sample"] = [[float(t), float(v)] for t, v in zip(self.ts, self.values)]
        return out


def rk4(system, y0, t0: float, t1: float, steps: int):
    """Classical fixed-step RK4.

    ``system`` is an :class:`OdeSystem` or a bare ``rhs(t, y)`` callable.
    Returns ``(ts, ys)`` with ``steps + 1`` rows, both endpoints included.
    """
    rhs = system.rhs if isinstance(system, OdeSystem) else system
    if steps < 1:
        raise InputError("steps must be >= 1")
    if not t1 > t0:
        raise InputError("rk4 requires t1 > t0")
    y = np.array(y0, dtype=float, ndmin=1)
    h = (t1 - t0) / steps
    ts = t0 + h * np.arange(steps + 1)
    ts[-1] = t1
    ys = np.empty((steps + 1,) + y.shape)
    ys[0] = y
    for i in range(steps):
        t = ts[i]
        k1 = np.asarray(rhs(t, y), dtype=float)
        k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(rhs(t + h, y + h * k3), dtype=float)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"non-finite state at t={t + h!r}")
        ys[i + 1] = y
    return ts, ys


def fornberg_weights(z: float, x, m: int) -> np.ndarray:
    """Finite-difference weights at ``z`` for nodes ``x`` (Fornberg 1988).

    Returns an array ``c`` of shape ``(m + 1, len(x))``; ``c[k]`` holds the
    weights of the k-th derivative.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _is_uniform(ts: np.ndarray) -> bool:
    d = np.diff(ts)
    return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))


def finite_diff(ts, values, order: int = 1) -> np.ndarray:
    """Differentiate samples on a strictly increasing grid.

    Uniform grids use five-point stencils (centred in the interior, shifted
    at the ends); other grids use three-point stencils. ``values`` may be
    1-D or have trailing vector axes. Returns an array shaped like ``values``.
    """
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=float)
    n = len(ts)
    if order not in (1, 2):
        raise InputError("order must be 1 or 2")
    if vals.shape[0] != n:
        raise InputError("values and ts have different lengths")
    need = 5 if order == 2 else 3
    if n < need:
        raise TooFewSamples(f"order {order} needs at least {need} samples, got {n}")
    if np.any(np.diff(ts) <= 0):
        raise InputError("ts must be strictly increasing")

    uniform = _is_uniform(ts)
    width = 5 if (uniform and n >= 5) else 3
    half = width // 2
    out = np.empty_like(vals)

    if uniform:
        h = ts[1] - ts[0]
        nodes = np.arange(width, dtype=float)
        # weights for the evaluation point sitting at each stencil position
        w = np.array([fornberg_weights(float(p), nodes, order)[order] for p in range(width)])
        w /= h**order
        # interior
        stack = np.stack([vals[k : n - width + 1 + k] for k in range(width)], axis=0)
        out[half : n - half] = np.tensordot(w[half], stack, axes=(0, 0))
        for p in range(half):
            out[p] = np.tensordot(w[p], vals[:width], axes=(0, 0))
            out[n - half + p] = np.tensordot(w[half + 1 + p], vals[n - width :], axes=(0, 0))
        return out

    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        idx = slice(lo, lo + width)
        w = fornberg_weights(ts[i], ts[idx], order)[order]
        out[i] = np.tensordot(w, vals[idx], axes=(0, 0))
    return out


def _metric_matrix(metric, dim: int) -> np.ndarray:
    if metric is None:
        return np.eye(dim)
    m = np.asarray(metric, dtype=float)
    if m.ndim == 0:
        return float(m) * np.eye(dim)
    return m


def gram_matrix(metric, vectors) -> np.ndarray:
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    m = _metric_matrix(metric, v.shape[1])
    return v @ m @ v.T


def gram_det(metric, vectors) -> float:
    """Determinant of ``G_ij = g(v_i, v_j)``; zero iff the vectors are dependent.

    ``metric`` is an ``(n, n)`` matrix, a scalar multiple of the identity, or
    ``None`` for the Euclidean inner product.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    if not 1 <= v.shape[0] <= v.shape[1]:
        raise InputError("gram_det needs between 1 and n vectors")
    return float(np.linalg.det(gram_matrix(metric, v)))


def orthonormalize(metric, vectors, eps: float = 1e-12) -> np.ndarray:
    """Modified Gram-Schmidt under ``metric`` with one re-orthogonalization pass."""
    v = np.atleast_2d(np.array(vectors, dtype=float))
    m = _metric_matrix(metric, v.shape[1])
    scale = max(1.0, float(np.max(np.abs(v))))
    out = []
    for u in v:
        w = u.copy()
        for _ in range(2):
            for e in out:
                w = w - (e @ m @ w) * e
        norm = np.sqrt(max(float(w @ m @ w), 0.0))
        if norm <= eps * scale:
            raise DependentInput("vectors are linearly dependent under the metric")
        out.append(w / norm)
    return np.array(out)
