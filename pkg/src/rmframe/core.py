"""Domain types, ambient manifolds and curve evaluation.

Curves are dual-mode: *analytic* curves come from a registry of closed-form
families whose derivatives are exact, *sampled* curves carry points on a
strictly increasing parameter grid and are differentiated numerically.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.special import fresnel

from .errors import (
    DegenerateCurve,
    DimensionMismatch,
    InputError,
    NotInHalfSpace,
    OutOfRange,
)
from .numerics import finite_diff

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "Manifold",
    "EUCLID3",
    "HYP3",
    "complex_space",
    "CurveSpec",
    "Frame",
    "NormalField",
    "NaturalCurvatures",
    "SurfaceMesh",
    "FAMILIES",
    "evaluate",
    "resample",
    "arclength_reparametrize",
    "curve_from_json",
    "curve_to_json",
    "perpendicular",
]


@dataclass(frozen=True)
class Tolerances:
    tol_orth: float = 1e-8
    eps_reg: float = 1e-9
    residual: float = 1e-6

    @classmethod
    def from_env(cls) -> "Tolerances":
        raw = os.environ.get("RMFRAME_TOL")
        if not raw:
            return cls()
        try:
            val = float(raw)
        except ValueError:
            val = float("nan")
        if not (math.isfinite(val) and val > 0):
            raise OutOfRange(f"RMFRAME_TOL must be a positive number, got {raw!r}")
        return cls(residual=val)


try:
    DEFAULT_TOL = Tolerances.from_env()
except OutOfRange:
    DEFAULT_TOL = Tolerances()


# ---------------------------------------------------------------------------
# ambient manifolds


@dataclass(frozen=True)
class Manifold:
    """One of the three supported ambients.

    All three metrics are conformally flat, ``g = c(p) * <., .>``, with
    ``c = 1`` except in the half-space model where ``c = 1 / z**2``.
    """

    name: str
    complex_dim: int = 0

    def __post_init__(self):
        if self.name not in ("euclid3", "hyp3", "complex"):
            raise InputError(f"unknown ambient {self.name!r}")
        if self.name == "complex" and self.complex_dim < 1:
            raise InputError("complex ambient needs complex_dim >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.complex_dim if self.name == "complex" else 3

    @property
    def kernel_code(self) -> int:
        return 1 if self.name == "hyp3" else 0

    def check_points(self, p) -> None:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.dim:
            raise DimensionMismatch(f"{self.name} points have {self.dim} coordinates, got {p.shape[-1]}")
        if self.name == "hyp3" and np.any(p[..., 2] <= 0):
            raise NotInHalfSpace("half-space points need z > 0")

    def conformal(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.name == "hyp3":
            return 1.0 / p[..., 2] ** 2
        return np.ones(p.shape[:-1])

    def metric(self, p) -> np.ndarray:
        """Metric matrix at a single point."""
        return float(self.conformal(p)) * np.eye(self.dim)

    def inner(self, p, u, v) -> np.ndarray:
        return self.conformal(p) * np.sum(np.asarray(u) * np.asarray(v), axis=-1)

    def norm(self, p, u) -> np.ndarray:
        return np.sqrt(self.inner(p, u, u))

    def christoffel(self, p, u, v) -> np.ndarray:
        """Contracted symbols ``Gamma(u, v)^k = Gamma^k_ij u^i v^j``."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.name != "hyp3":
            return np.zeros(np.broadcast_shapes(u.shape, v.shape))
        z = np.asarray(p, dtype=float)[..., 2:3]
        out = -(u * v[..., 2:3] + v * u[..., 2:3]) / z
        out[..., 2] += np.sum(u * v, axis=-1) / z[..., 0]
        return out

    def covariant(self, p, vel, field, field_dot) -> np.ndarray:
        """``nabla_vel field`` given the coordinate derivative ``field_dot``."""
        return np.asarray(field_dot) + self.christoffel(p, vel, field)

    def to_json(self) -> dict:
        out = {"ambient": self.name}
        if self.name == "complex":
            out["complex_dim"] = self.complex_dim
        return out


EUCLID3 = Manifold("euclid3")
HYP3 = Manifold("hyp3")


def complex_space(n: int) -> Manifold:
    return Manifold("complex", n)


def perpendicular(v, manifold: Manifold = EUCLID3, p=None) -> np.ndarray:
    """Some unit (in ``g``) vector orthogonal to ``v``; deterministic."""
    v = np.asarray(v, dtype=float)
    e = np.zeros_like(v)
    e[int(np.argmin(np.abs(v)))] = 1.0
    w = e - (e @ v) / (v @ v) * v
    w /= np.linalg.norm(w)
    if p is not None:
        w = w / float(manifold.norm(p, w))
    return w


# ---------------------------------------------------------------------------
# analytic families
#
# Each family maps (t array, params, order) -> (len(t), dim) array for
# order 0..3. Planar rotations are written with complex arithmetic.


def _c2(zc: np.ndarray) -> np.ndarray:
    return np.stack([zc.real, zc.imag], axis=-1)


def _vec(params, key, default=None) -> np.ndarray:
    val = params.get(key, default)
    if val is None:
        raise InputError(f"missing parameter {key!r}")
    return np.asarray(val, dtype=float)


def _line(t, params, order):
    p = _vec(params, "point")
    d = _vec(params, "direction")
    if order == 0:
        return p + t[:, None] * d
    if order == 1:
        return np.broadcast_to(d, (len(t), len(d))).copy()
    return np.zeros((len(t), len(d)))


def _circle(t, params, order):
    c = _vec(params, "center")
    r = float(params.get("radius", 1.0))
    w = float(params.get("omega", 1.0))
    dim = len(c)
    e1 = np.asarray(params.get("e1", np.eye(dim)[0]), dtype=float)
    e2 = np.asarray(params.get("e2", np.eye(dim)[1]), dtype=float)
    z = r * (1j * w) ** order * np.exp(1j * w * t)
    out = z.real[:, None] * e1 + z.imag[:, None] * e2
    return out + c if order == 0 else out


def _ellipse(t, params, order):
    a = float(params.get("a", 2.0))
    b = float(params.get("b", 1.0))
    c = _vec(params, "center", [0.0, 0.0, 0.0])
    z = (1j) ** order * np.exp(1j * t)
    out = np.zeros((len(t), len(c)))
    out[:, 0] = a * z.real
    out[:, 1] = b * z.imag
    return out + c if order == 0 else out


def _helix(t, params, order):
    a = float(params.get("a", 1.0))
    b = float(params.get("b", 1.0))
    z = a * (1j) ** order * np.exp(1j * t)
    if order == 0:
        h = b * t
    elif order == 1:
        h = np.full_like(t, b)
    else:
        h = np.zeros_like(t)
    return np.column_stack([z.real, z.imag, h])


def _spherical_helix(t, params, order):
    # R * (sin(ct) e^{it}, cos(ct)): a Clelia-type curve on the radius-R sphere
    R = float(params.get("R", 1.0))
    c = float(params.get("c", 0.5))
    xy = np.zeros(len(t), dtype=complex)
    for j in range(order + 1):
        s_j = c**j * np.sin(c * t + j * math.pi / 2)
        xy += math.comb(order, j) * s_j * (1j) ** (order - j)
    xy *= R * np.exp(1j * t)
    zc = R * c**order * np.cos(c * t + order * math.pi / 2)
    return np.column_stack([xy.real, xy.imag, zc])


def _log_spiral(t, params, order):
    if params.get("natural", True):
        # u^{1+i} with u = 1 + s/sqrt(2)
        u = 1.0 + t / math.sqrt(2.0)
        if np.any(u <= 0):
            raise OutOfRange("natural log spiral needs s > -sqrt(2)")
        coeff = 1.0 + 0j
        for k in range(order):
            coeff *= (1.0 + 1j - k) / math.sqrt(2.0)
        return _c2(coeff * u ** (1.0 + 1j - order))
    return _c2((1.0 + 1j) ** order * np.exp((1.0 + 1j) * t))


def _clothoid(t, params, order):
    a = float(params.get("a", 1.0))
    x = t / a
    if order == 0:
        S, C = fresnel(x)
        return a * np.column_stack([C, S])
    th = 0.5 * math.pi * x**2
    e = np.exp(1j * th)
    if order == 1:
        return _c2(e)
    if order == 2:
        return _c2(1j * math.pi * x * e / a)
    return _c2((1j * math.pi - (math.pi * x) ** 2) * e / a**2)


def _vertical_ray(t, params, order):
    b = _vec(params, "base", [0.0, 0.0, 1.0])
    out = np.zeros((len(t), 3))
    out[:, 2] = b[2] * np.exp(t)
    if order == 0:
        out[:, 0] = b[0]
        out[:, 1] = b[1]
    return out


def _semicircle(t, params, order):
    c = _vec(params, "center", [0.0, 0.0])
    r = float(params.get("radius", 1.0))
    u = _vec(params, "direction", [1.0, 0.0])
    u = u / np.linalg.norm(u)
    th = np.tanh(t)
    sh = 1.0 / np.cosh(t)
    if order == 0:
        w, z = th, sh
    elif order == 1:
        w, z = sh**2, -sh * th
    elif order == 2:
        w, z = -2 * sh**2 * th, sh * th**2 - sh**3
    else:
        w, z = 4 * sh**2 * th**2 - 2 * sh**4, -sh * th**3 + 5 * sh**3 * th
    out = np.zeros((len(t), 3))
    out[:, :2] = r * w[:, None] * u
    out[:, 2] = r * z
    if order == 0:
        out[:, :2] += c
    return out


@dataclass(frozen=True)
class _Family:
    func: Callable
    dim: Callable[[Mapping], int]


FAMILIES: dict[str, _Family] = {
    "line": _Family(_line, lambda p: len(p["point"])),
    "circle": _Family(_circle, lambda p: len(p["center"])),
    "ellipse": _Family(_ellipse, lambda p: len(p.get("center", [0, 0, 0]))),
    "helix": _Family(_helix, lambda p: 3),
    "spherical_helix": _Family(_spherical_helix, lambda p: 3),
    "log_spiral": _Family(_log_spiral, lambda p: 2),
    "clothoid": _Family(_clothoid, lambda p: 2),
    "vertical_ray": _Family(_vertical_ray, lambda p: 3),
    "semicircle": _Family(_semicircle, lambda p: 3),
}


# ---------------------------------------------------------------------------
# curves


def _freeze(params: Mapping) -> dict:
    out = {}
    for k, v in params.items():
        out[k] = tuple(float(x) for x in v) if isinstance(v, (list, tuple, np.ndarray)) else v
    return out


@dataclass(frozen=True, eq=False)
class CurveSpec:
    ambient: Manifold
    kind: str
    family: str | None = None
    params: Mapping = field(default_factory=dict)
    t_range: tuple = (0.0, 1.0)
    points: np.ndarray | None = None
    ts: np.ndarray | None = None
    velocities: np.ndarray | None = None
    flags: frozenset = frozenset()

    def __post_init__(self):
        if self.kind == "analytic":
            if self.family not in FAMILIES:
                raise InputError(f"unknown curve family {self.family!r}")
            object.__setattr__(self, "params", _freeze(self.params))
            t0, t1 = (float(x) for x in self.t_range)
            if not t1 > t0:
                raise InputError("param_range must satisfy t_min < t_max")
            object.__setattr__(self, "t_range", (t0, t1))
            dim = FAMILIES[self.family].dim(self.params)
            if dim != self.ambient.dim:
                raise DimensionMismatch(
                    f"family {self.family!r} has dimension {dim}, ambient {self.ambient.name} has {self.ambient.dim}"
                )
            probe = np.linspace(t0, t1, 33)
            try:
                pts = FAMILIES[self.family].func(probe, self.params, 0)
            except (IndexError, ValueError, TypeError) as exc:
                raise InputError(f"bad parameters for family {self.family!r}: {exc}") from exc
            if pts.shape != (len(probe), dim):
                raise DimensionMismatch(f"parameters of {self.family!r} do not describe a curve in dimension {dim}")
            self.ambient.check_points(pts)
        elif self.kind == "sampled":
            pts = np.array(self.points, dtype=float)
            ts = np.array(self.ts, dtype=float)
            if pts.ndim != 2 or len(pts) != len(ts):
                raise InputError("samples and ts must have matching lengths")
            if len(ts) < 4:
                raise InputError("sampled curves need at least 4 samples")
            if np.any(np.diff(ts) <= 0):
                raise InputError("sample parameters must be strictly increasing")
            self.ambient.check_points(pts)
            pts.setflags(write=False)
            ts.setflags(write=False)
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "ts", ts)
            object.__setattr__(self, "t_range", (float(ts[0]), float(ts[-1])))
            if self.velocities is not None:
                vel = np.array(self.velocities, dtype=float)
                if vel.shape != pts.shape:
                    raise InputError("velocities must match samples")
                vel.setflags(write=False)
                object.__setattr__(self, "velocities", vel)
        else:
            raise InputError(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "flags", frozenset(self.flags))

    @classmethod
    def analytic(cls, family: str, ambient: Manifold = EUCLID3, t_range=(0.0, 1.0), **params) -> "CurveSpec":
        return cls(ambient, "analytic", family=family, params=params, t_range=tuple(t_range))

    @classmethod
    def sampled(cls, points, ts, ambient: Manifold = EUCLID3, velocities=None, flags=()) -> "CurveSpec":
        return cls(ambient, "sampled", points=points, ts=ts, velocities=velocities, flags=frozenset(flags))

    @property
    def dim(self) -> int:
        return self.ambient.dim

    def grid(self, count: int) -> np.ndarray:
        return np.linspace(self.t_range[0], self.t_range[1], count)

    # nodal derivative samples of a sampled curve
    @cached_property
    def _nodal(self) -> list:
        d1 = self.velocities if self.velocities is not None else finite_diff(self.ts, self.points, 1)
        if self.velocities is not None or len(self.ts) < 5:
            d2 = finite_diff(self.ts, d1, 1)
        else:
            d2 = finite_diff(self.ts, self.points, 2)
        d3 = finite_diff(self.ts, d2, 1)
        return [self.points, d1, d2, d3]

    @cached_property
    def _splines(self) -> list:
        return [CubicSpline(self.ts, arr, axis=0) for arr in self._nodal]


def evaluate(curve: CurveSpec, t, order: int = 0, eps_reg: float | None = None) -> np.ndarray:
    """Evaluate ``curve`` (or a derivative up to order 3) at ``t``.

    ``t`` may be a scalar or an array; the result has a trailing axis of
    length ``curve.dim``. Regularity (``|gamma'| > eps_reg``) is enforced for
    ``order == 1``.
    """
    if order not in (0, 1, 2, 3):
        raise InputError("order must be 0, 1, 2 or 3")
    eps_reg = DEFAULT_TOL.eps_reg if eps_reg is None else eps_reg
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    t0, t1 = curve.t_range
    slack = 1e-12 * max(1.0, abs(t0), abs(t1))
    if np.any(tt < t0 - slack) or np.any(tt > t1 + slack):
        raise OutOfRange(f"parameter outside [{t0}, {t1}]")
    tt = np.clip(tt, t0, t1)

    if curve.kind == "analytic":
        out = np.asarray(FAMILIES[curve.family].func(tt, curve.params, order), dtype=float)
    else:
        out = np.empty((len(tt), curve.dim))
        idx = np.searchsorted(curve.ts, tt)
        idx = np.clip(idx, 0, len(curve.ts) - 1)
        on_node = np.isclose(curve.ts[idx], tt, rtol=0.0, atol=slack)
        out[on_node] = curve._nodal[order][idx[on_node]]
        if not np.all(on_node):
            out[~on_node] = curve._splines[order](tt[~on_node])

    if order == 1:
        speed = np.linalg.norm(out, axis=-1)
        if np.any(speed <= eps_reg):
            bad = tt[speed <= eps_reg][0]
            raise DegenerateCurve(f"|gamma'| <= {eps_reg:g} at t={bad!r}")
    return out[0] if scalar else out


def resample(curve: CurveSpec, count: int) -> CurveSpec:
    """Sampled copy of ``curve`` on a uniform grid of ``count`` parameters."""
    if count < 4:
        raise InputError("resample needs count >= 4")
    if curve.kind == "sampled" and count == len(curve.ts):
        return curve
    ts = curve.grid(count)
    pts = evaluate(curve, ts, 0)
    vel = evaluate(curve, ts, 1) if curve.kind == "analytic" else None
    return CurveSpec.sampled(pts, ts, curve.ambient, velocities=vel, flags=curve.flags)


def _gauss_legendre_lengths(curve: CurveSpec, a, b, nodes: int = 16) -> np.ndarray:
    x, w = np.polynomial.legendre.leggauss(nodes)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    tq = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    flat = tq.ravel()
    vel = evaluate(curve, flat, 1)
    speed = curve.ambient.norm(evaluate(curve, flat, 0), vel).reshape(tq.shape)
    return half * (speed @ w)


def arclength_reparametrize(curve: CurveSpec, count: int = 1001, panels: int = 512) -> CurveSpec:
    """Sampled unit-speed (in the ambient metric) version of ``curve``.

    Cumulative length comes from composite Gauss-Legendre quadrature; the
    inverse ``t(s)`` is seeded by monotone (PCHIP) interpolation and polished
    by Newton steps on the exact length function.
    """
    t0, t1 = curve.t_range
    tn = np.linspace(t0, t1, panels + 1)
    cum = np.concatenate([[0.0], np.cumsum(_gauss_legendre_lengths(curve, tn[:-1], tn[1:]))])
    total = cum[-1]
    s = np.linspace(0.0, total, count)
    t = PchipInterpolator(cum, tn)(s)
    t[0], t[-1] = t0, t1
    for _ in range(3):
        k = np.clip(np.searchsorted(tn, t, side="right") - 1, 0, panels - 1)
        length = cum[k] + _gauss_legendre_lengths(curve, tn[k], t)
        speed = curve.ambient.norm(evaluate(curve, t, 0), evaluate(curve, t, 1))
        t = np.clip(t - (length - s) / speed, t0, t1)
    pts = evaluate(curve, t, 0)
    vel = evaluate(curve, t, 1)
    vel = vel / curve.ambient.norm(pts, vel)[:, None]
    return CurveSpec.sampled(pts, s, curve.ambient, velocities=vel, flags=curve.flags)


# ---------------------------------------------------------------------------
# frames, fields, meshes


@dataclass(frozen=True, eq=False)
class Frame:
    """A point and an ordered tuple of vectors (tangent first)."""

    point: np.ndarray
    vectors: np.ndarray
    ambient: Manifold = EUCLID3

    def gram(self) -> np.ndarray:
        v = np.asarray(self.vectors)
        return float(self.ambient.conformal(self.point)) * (v @ v.T)

    def orthonormality_error(self) -> float:
        g = self.gram()
        return float(np.max(np.abs(g - np.eye(len(g)))))


@dataclass(frozen=True, eq=False)
class NormalField:
    """Unit normal vectors sampled along ``curve`` at parameters ``ts``."""

    curve: CurveSpec
    ts: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        vec = np.asarray(self.vectors, dtype=float)
        if vec.shape != (len(ts), self.curve.dim):
            raise DimensionMismatch("field vectors must be (len(ts), dim)")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "vectors", vec)

    @property
    def base_points(self) -> np.ndarray:
        return evaluate(self.curve, self.ts, 0)

    def invariant_errors(self) -> tuple[float, float]:
        """(max |g(N, T)|, max |g(N, N) - 1|) with T the unit tangent."""
        m = self.curve.ambient
        p = self.base_points
        v = evaluate(self.curve, self.ts, 1)
        T = v / m.norm(p, v)[:, None]
        return (
            float(np.max(np.abs(m.inner(p, self.vectors, T)))),
            float(np.max(np.abs(m.inner(p, self.vectors, self.vectors) - 1.0))),
        )


@dataclass(frozen=True, eq=False)
class NaturalCurvatures:
    ts: np.ndarray
    kappas: np.ndarray  # (samples, n - 1)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.kappas[:, i]


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    points: np.ndarray  # (rows, cols, 3)
    s: np.ndarray
    lam: np.ndarray
    flags: frozenset = frozenset()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 3 or pts.shape[0] < 2 or pts.shape[1] < 2:
            raise InputError("surface grid must be at least 2x2")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def shape(self) -> tuple[int, int]:
        return self.points.shape[:2]

    @property
    def quads(self) -> np.ndarray:
        """0-based vertex indices, counter-clockwise in (s, lambda)."""
        rows, cols = self.shape
        r, c = np.meshgrid(np.arange(rows - 1), np.arange(cols - 1), indexing="ij")
        a = (r * cols + c).ravel()
        return np.column_stack([a, a + cols, a + cols + 1, a + 1])


# ---------------------------------------------------------------------------
# JSON schema


def _ambient_from_json(data: Mapping) -> Manifold:
    name = data.get("ambient", "euclid3")
    if name == "complex":
        return complex_space(int(data.get("complex_dim", 1)))
    return Manifold(name)


def curve_from_json(data: Mapping) -> CurveSpec:
    if not isinstance(data, Mapping):
        raise InputError("curve spec must be a JSON object")
    ambient = _ambient_from_json(data)
    kind = data.get("kind", "analytic")
    if kind == "analytic":
        if "family" not in data:
            raise InputError("analytic curve spec needs 'family'")
        rng = data.get("range", [0.0, 1.0])
        return CurveSpec.analytic(data["family"], ambient, tuple(rng), **dict(data.get("params", {})))
    if kind == "sampled":
        if "samples" not in data or "ts" not in data:
            raise InputError("sampled curve spec needs 'samples' and 'ts'")
        return CurveSpec.sampled(data["samples"], data["ts"], ambient, velocities=data.get("velocities"))
    raise InputError(f"unknown curve kind {kind!r}")


def curve_to_json(curve: CurveSpec) -> dict:
    out = curve.ambient.to_json()
    out["kind"] = curve.kind
    out["range"] = list(curve.t_range)
    if curve.kind == "analytic":
        out["family"] = curve.family
        out["params"] = {k: list(v) if isinstance(v, tuple) else v for k, v in curve.params.items()}
    else:
        out["samples"] = curve.points.tolist()
        out["ts"] = curve.ts.tolist()
        if curve.velocities is not None:
            out["velocities"] = curve.velocities.tolist()
    return out
