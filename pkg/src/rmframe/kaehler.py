"""Flat Kaehler C^n: complex structure, RM test for J(gamma'), magnetic curves.

Coordinates are block-ordered, ``(x_1..x_n, y_1..y_n)`` with
``z_k = x_k + i y_k``, so that

    J(x, y) = (-y, x)

For n = 1 this is ``J(a, b) = (-b, a)``; for n = 2 it is
``J(x1, x2, x3, x4) = (-x3, -x4, x1, x2)``, which makes ``gamma'' = k J gamma'``
read ``x3'' = k x1'``, ``x4'' = k x2'``, ``x1'' = -k x3'``, ``x2'' = -k x4'``.
Interleaved ``(x1, y1, x2, y2)`` layouts are *not* what this module expects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .core import DEFAULT_TOL, CurveSpec, complex_space, evaluate
from .errors import DegenerateFit, DimensionMismatch, InputError, NonFiniteState
from .numerics import ResidualReport

__all__ = [
    "ComplexStructure",
    "MagneticField",
    "apply_J",
    "kaehler_form",
    "rm_J_test",
    "constant_speed_check",
    "magnetic_integrate",
    "circle_params",
    "analytic_planar_test",
]


def apply_J(n: int, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 2 * n:
        raise DimensionMismatch(f"expected vectors of length {2 * n}, got {v.shape[-1]}")
    return np.concatenate([-v[..., n:], v[..., :n]], axis=-1)


def kaehler_form(n: int, u, v) -> np.ndarray:
    """``Omega(u, v) = g(J u, v)``."""
    return np.sum(apply_J(n, u) * np.asarray(v, dtype=float), axis=-1)


@dataclass(frozen=True)
class ComplexStructure:
    n: int

    def __call__(self, v) -> np.ndarray:
        return apply_J(self.n, v)

    @property
    def matrix(self) -> np.ndarray:
        return apply_J(self.n, np.eye(2 * self.n)).T


@dataclass(frozen=True)
class MagneticField:
    """The 2-form ``kappa1 * Omega``; ``kappa1`` constant or a function of t."""

    kappa1: float | Callable

    def strength(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if callable(self.kappa1):
            out = np.broadcast_to(np.asarray(self.kappa1(t), dtype=float), t.shape).copy()
        else:
            out = np.full(t.shape, float(self.kappa1))
        if not np.all(np.isfinite(out)):
            raise NonFiniteState("magnetic strength is not finite on the window")
        return out


def _complex_dim(curve: CurveSpec) -> int:
    if curve.ambient.name != "complex":
        raise InputError(f"expected a curve in C^n, got {curve.ambient.name}")
    return curve.ambient.complex_dim


def _derivs(curve: CurveSpec, count: int):
    ts = curve.ts if curve.kind == "sampled" else curve.grid(count)
    return ts, evaluate(curve, ts, 1), evaluate(curve, ts, 2)


@dataclass(frozen=True, eq=False)
class RMJReport:
    is_rm: bool
    ts: np.ndarray
    kappa1: np.ndarray
    residual: ResidualReport

    def to_dict(self, per_sample: bool = True) -> dict:
        out = {"is_rm": self.is_rm, "residual": self.residual.to_dict()}
        if per_sample:
            out["kappa1"] = [[float(t), float(k)] for t, k in zip(self.ts, self.kappa1)]
        return out


def rm_J_test(curve: CurveSpec, count: int = 2001, tol: float = 1e-5) -> RMJReport:
    """Is ``J(gamma')`` an RM field, i.e. ``gamma'' = kappa1 J(gamma')``?

    ``kappa1 = g(gamma'', J gamma') / g(gamma', gamma')``; the residual is
    ``|gamma'' - kappa1 J gamma'| / (|gamma''| + |gamma'|^2)``.
    """
    n = _complex_dim(curve)
    ts, d1, d2 = _derivs(curve, count)
    jd1 = apply_J(n, d1)
    sq = np.sum(d1 * d1, axis=1)
    k1 = np.sum(d2 * jd1, axis=1) / sq
    rest = d2 - k1[:, None] * jd1
    res = np.linalg.norm(rest, axis=1) / (np.linalg.norm(d2, axis=1) + sq)
    report = ResidualReport.from_values(ts, res)
    return RMJReport(report.max_abs < tol, ts, k1, report)


def constant_speed_check(curve: CurveSpec, count: int = 2001, tol: float | None = None) -> dict:
    """Relative variation ``(max - min) / mean`` of ``|gamma'|``."""
    tol = DEFAULT_TOL.residual if tol is None else tol
    ts = curve.ts if curve.kind == "sampled" else curve.grid(count)
    speed = curve.ambient.norm(evaluate(curve, ts, 0), evaluate(curve, ts, 1))
    var = float((speed.max() - speed.min()) / speed.mean())
    return {"is_constant": var < tol, "max_relative_variation": var}


def magnetic_integrate(n: int, p0, v0, kappa1, t_range=(0.0, 1.0), steps: int = 2000) -> CurveSpec:
    """RK4 trajectory of ``gamma'' = kappa1(t) J(gamma')`` as a sampled curve
    (velocities included)."""
    if steps < 1:
        raise InputError("steps must be >= 1")
    p0 = np.asarray(p0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if p0.shape != (2 * n,) or v0.shape != (2 * n,):
        raise DimensionMismatch(f"p0 and v0 must have {2 * n} components")
    t0, t1 = (float(x) for x in t_range)
    if not t1 > t0:
        raise InputError("t_range must be increasing")
    field = kappa1 if isinstance(kappa1, MagneticField) else MagneticField(kappa1)
    half = np.linspace(t0, t1, 2 * steps + 1)
    try:
        y = _kernels.magnetic(field.strength(half), p0, v0, (t1 - t0) / steps)
    except FloatingPointError as exc:
        raise NonFiniteState(str(exc)) from exc
    return CurveSpec.sampled(y[:, : 2 * n], half[::2], complex_space(n), velocities=y[:, 2 * n :])


def _plane_coords(pts: np.ndarray):
    """Project points onto their best-fit 2-plane; return coords, origin, basis."""
    if pts.shape[1] == 2:
        return pts, np.zeros(2), np.eye(2)
    origin = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - origin, full_matrices=False)
    basis = vt[:2]
    return (pts - origin) @ basis.T, origin, basis


def circle_params(curve_or_points) -> dict:
    """Algebraic least-squares circle fit.

    Solves ``x^2 + y^2 + D x + E y + F = 0``; for ambient dimension above two the
    samples are first projected onto their best-fit plane. ``fit_residual`` is
    ``max | |p - c| - r |`` over the (unprojected) samples; ``orientation`` is
    +1 for counter-clockwise travel in the plane coordinates.
    """
    pts = curve_or_points.points if isinstance(curve_or_points, CurveSpec) else np.asarray(curve_or_points, float)
    xy, origin, basis = _plane_coords(pts)
    a = np.column_stack([xy[:, 0], xy[:, 1], np.ones(len(xy))])
    b = -(xy**2).sum(axis=1)
    sol, _, rank, sv = np.linalg.lstsq(a, b, rcond=None)
    if rank < 3 or sv[-1] <= 1e-10 * sv[0]:
        raise DegenerateFit("samples are (nearly) collinear")
    c2 = -0.5 * sol[:2]
    r2 = c2 @ c2 - sol[2]
    if r2 <= 0:
        raise DegenerateFit("no real circle fits the samples")
    radius = float(np.sqrt(r2))
    center = origin + c2 @ basis
    resid = float(np.max(np.abs(np.linalg.norm(pts - center, axis=1) - radius)))
    rel = xy - c2
    area = np.sum(rel[:-1, 0] * rel[1:, 1] - rel[1:, 0] * rel[:-1, 1])
    return {"center": center, "radius": radius, "fit_residual": resid, "orientation": int(np.sign(area))}


@dataclass(frozen=True, eq=False)
class PlanarReport:
    is_planar: bool
    ts: np.ndarray
    a: np.ndarray
    b: np.ndarray
    residual: ResidualReport


def analytic_planar_test(curve: CurveSpec, count: int = 2001, tol: float = 1e-5) -> PlanarReport:
    """Decompose ``gamma'' = a gamma' + b J gamma' + rest`` sample by sample.

    ``gamma'`` and ``J gamma'`` are orthogonal with equal norms, so the least
    squares coefficients are plain projections. The residual is
    ``|rest| / (|gamma''| + |gamma'|^2)``.
    """
    n = _complex_dim(curve)
    ts, d1, d2 = _derivs(curve, count)
    jd1 = apply_J(n, d1)
    sq = np.sum(d1 * d1, axis=1)
    a = np.sum(d2 * d1, axis=1) / sq
    b = np.sum(d2 * jd1, axis=1) / sq
    rest = d2 - a[:, None] * d1 - b[:, None] * jd1
    report = ResidualReport.from_values(ts, np.linalg.norm(rest, axis=1) / (np.linalg.norm(d2, axis=1) + sq))
    return PlanarReport(report.max_abs < tol, ts, a, b, report)
