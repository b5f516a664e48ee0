"""Hyperbolic 3-space in the Poincare upper half-space model.

Closed-form geodesics are the primary path. Writing ``nu`` for the g-unit
initial direction at ``p`` and ``s = nu_z / z0``, the unit-speed geodesic is

    x(lam) = p_xy + nu_xy * sinh(lam) / D,   z(lam) = z0 / D,
    D      = cosh(lam) - s * sinh(lam),

which covers vertical rays (``s = +-1``) and semicircles alike without
cancellation. Integrating the geodesic equation with the Christoffel symbols
is kept as an independent cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    DEFAULT_TOL,
    HYP3,
    CurveSpec,
    NaturalCurvatures,
    NormalField,
    SurfaceMesh,
    evaluate,
    perpendicular,
)
from .errors import (
    CuspOnWindow,
    DegenerateWarning,
    GridMismatch,
    InputError,
    NonFiniteState,
    NotInHalfSpace,
)
from .euclid3 import floored
from .numerics import ResidualReport, finite_diff
from .transport import RMFrame, covariant_tangent, transport_frame

__all__ = [
    "GeodesicRay",
    "HypInvolute",
    "hyp_metric",
    "hyp_christoffel",
    "hyp_distance",
    "geodesic",
    "geodesic_ray",
    "geodesic_ode",
    "exp_map",
    "covariant_along",
    "rm_residual_hyp",
    "rm_frame_hyp",
    "rm_transport_hyp",
    "ruled_surface_hyp",
    "developability_residual_hyp",
    "tangential_surface_hyp",
    "ruling_plane_residual",
    "involute_hyp",
    "evolute_rm_field_hyp",
]


def _point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 3:
        raise InputError("half-space points have 3 coordinates")
    if np.any(p[..., 2] <= 0):
        raise NotInHalfSpace("z must be positive")
    return p


def _require_hyp(curve: CurveSpec) -> None:
    if curve.ambient != HYP3:
        raise InputError(f"expected a curve in hyp3, got {curve.ambient.name}")


def hyp_metric(p, u, v):
    p = _point(p)
    return np.sum(np.asarray(u) * np.asarray(v), axis=-1) / p[..., 2] ** 2


def hyp_christoffel(p) -> np.ndarray:
    """``Gamma[k, i, j]`` of ``(dx^2 + dy^2 + dz^2) / z^2`` at one point."""
    z = float(_point(p)[2])
    g = np.zeros((3, 3, 3))
    for k in range(3):
        g[k, k, 2] -= 1.0 / z
        g[k, 2, k] -= 1.0 / z
    for i in range(3):
        g[2, i, i] += 1.0 / z
    return g


def hyp_distance(p, q):
    p, q = _point(p), _point(q)
    d2 = np.sum((p - q) ** 2, axis=-1)
    return np.arccosh(1.0 + d2 / (2.0 * p[..., 2] * q[..., 2]))


def _unit(p, v):
    nv = np.sqrt(hyp_metric(p, v, v))
    if np.any(nv == 0):
        raise InputError("geodesic direction must be nonzero")
    return v / np.asarray(nv)[..., None]


def geodesic(p, v, lam):
    """``(point, tangent)`` of the unit-speed geodesic through ``p`` along ``v``.

    ``v`` is normalized in ``g``; all arguments broadcast.
    """
    p = _point(p)
    nu = _unit(p, np.asarray(v, dtype=float))
    lam = np.asarray(lam, dtype=float)
    z0 = p[..., 2]
    s = nu[..., 2] / z0
    ch, sh = np.cosh(lam), np.sinh(lam)
    d = ch - s * sh
    pt = np.empty(np.broadcast_shapes(p.shape, nu.shape, lam.shape + (3,)))
    tg = np.empty_like(pt)
    pt[..., :2] = p[..., :2] + nu[..., :2] * (sh / d)[..., None]
    pt[..., 2] = z0 / d
    tg[..., :2] = nu[..., :2] / (d**2)[..., None]
    tg[..., 2] = z0 * (s * ch - sh) / d**2
    return pt, tg


@dataclass(frozen=True)
class GeodesicRay:
    base: tuple
    dir: tuple  # g-unit
    kind: str  # "vertical" | "semicircle"
    center: tuple | None = None  # on the plane z = 0
    axis: tuple | None = None  # horizontal unit direction of travel
    radius: float | None = None

    def __call__(self, lam):
        return geodesic(self.base, self.dir, lam)


def geodesic_ray(p, v, eps: float = 1e-14) -> GeodesicRay:
    p = _point(p)
    nu = _unit(p, np.asarray(v, dtype=float))
    z0 = float(p[2])
    h = float(np.hypot(nu[0], nu[1]))
    if h <= eps * z0:
        return GeodesicRay(tuple(p), tuple(nu), "vertical")
    cos_phi = h / z0
    s = nu[2] / z0
    axis = nu[:2] / h
    center = p[:2] + z0 * (s / cos_phi) * axis
    return GeodesicRay(tuple(p), tuple(nu), "semicircle", tuple(center), tuple(axis), z0 / cos_phi)


def geodesic_ode(p, v, lam: float, steps: int = 4000):
    """Geodesic by RK4 on ``x'' = -Gamma(x', x')``; returns ``(point, tangent)``."""
    p = _point(p)
    nu = _unit(p, np.asarray(v, dtype=float))
    if lam == 0:
        return p.copy(), nu
    sign = 1.0 if lam > 0 else -1.0
    try:
        y = _kernels.geodesic_halfspace(p, sign * nu, abs(lam) / steps, steps)[-1]
    except FloatingPointError as exc:
        raise NonFiniteState(str(exc)) from exc
    return y[:3], sign * y[3:]


def exp_map(p, v):
    p = _point(p)
    v = np.asarray(v, dtype=float)
    nv = float(np.sqrt(hyp_metric(p, v, v)))
    if nv == 0.0:
        return p.copy()
    return geodesic(p, v, nv)[0]


# ---------------------------------------------------------------------------
# covariant derivatives and RM tests


def _check_grid(curve: CurveSpec, field: NormalField, tol: float = 1e-9) -> None:
    t0, t1 = curve.t_range
    if field.ts[0] < t0 - tol or field.ts[-1] > t1 + tol:
        raise GridMismatch("field samples fall outside the curve's parameter range")
    if field.curve is not curve:
        here = evaluate(curve, field.ts, 0)
        if np.max(np.abs(here - field.base_points)) > tol * max(1.0, float(np.max(np.abs(here)))):
            raise GridMismatch("field was sampled along a different curve")


def covariant_along(curve: CurveSpec, field: NormalField, t=None):
    """``nabla_{a'} N = N' + Gamma(a', N)`` on the field's grid (``N'`` by
    finite differences). With ``t`` given, the sample at that parameter."""
    _require_hyp(curve)
    _check_grid(curve, field)
    p = evaluate(curve, field.ts, 0)
    v = evaluate(curve, field.ts, 1)
    dn = finite_diff(field.ts, field.vectors, 1)
    cov = HYP3.covariant(p, v, field.vectors, dn)
    if t is None:
        return cov
    i = int(np.argmin(np.abs(field.ts - t)))
    if not np.isclose(field.ts[i], t, rtol=0, atol=1e-9 * max(1.0, abs(t))):
        raise GridMismatch(f"t={t} is not a field sample")
    return cov[i]


def _frame_data(curve, field):
    p = evaluate(curve, field.ts, 0)
    v = evaluate(curve, field.ts, 1)
    speed = HYP3.norm(p, v)
    return p, v, speed, v / speed[:, None]


def rm_residual_hyp(curve: CurveSpec, field: NormalField) -> ResidualReport:
    """g-norm of the part of ``nabla_{a'} N`` orthogonal to ``a'``, per unit length."""
    cov = covariant_along(curve, field)
    p, _, speed, T = _frame_data(curve, field)
    perp = cov - HYP3.inner(p, cov, T)[:, None] * T
    return ResidualReport.from_values(field.ts, HYP3.norm(p, perp) / speed)


def developability_residual_hyp(curve: CurveSpec, field: NormalField) -> ResidualReport:
    """``sqrt(gram_det{a', N, nabla N})`` over the product of g-norms.

    Zero iff the three vectors are dependent; ``|nabla N|`` is floored as in
    the Euclidean residual.
    """
    cov = covariant_along(curve, field)
    p, v, speed, _ = _frame_data(curve, field)
    # sqrt of the g-Gram determinant of three vectors in 3-space, taken as
    # conformal^(3/2) |det| to avoid the square root of a cancelled difference
    vol = HYP3.conformal(p) ** 1.5 * np.abs(np.einsum("ij,ij->i", v, np.cross(field.vectors, cov)))
    covn = HYP3.norm(p, cov)
    scale = speed * HYP3.norm(p, field.vectors) * floored(covn)
    # a field with vanishing derivative is parallel: nothing to test
    res = np.where(covn <= DEFAULT_TOL.eps_reg * speed, 0.0, vol / (scale + 1e-300))
    return ResidualReport.from_values(field.ts, res)


def rm_frame_hyp(curve: CurveSpec, n0=None, steps: int = 2000, stabilize: bool = True) -> RMFrame:
    _require_hyp(curve)
    if n0 is None:
        p0 = evaluate(curve, curve.t_range[0], 0)
        n0 = perpendicular(evaluate(curve, curve.t_range[0], 1), HYP3, p0)
    return transport_frame(curve, n0, steps, stabilize)


def rm_transport_hyp(curve: CurveSpec, n0=None, steps: int = 2000, stabilize: bool = True):
    """RM field along a half-space curve and its natural curvatures.

    The second normal is ``(T x N1) / z``, the g-unit completion of the
    frame. Returns ``(NormalField, NaturalCurvatures)``.
    """
    fr = rm_frame_hyp(curve, n0, steps, stabilize)
    return NormalField(curve, fr.ts, fr.normals[:, 0]), NaturalCurvatures(fr.ts, fr.kappas)


# ---------------------------------------------------------------------------
# ruled and tangential surfaces


def ruled_surface_hyp(curve: CurveSpec, field: NormalField, lam_range=(0.0, 1.0), cols: int = 11) -> SurfaceMesh:
    """Mesh of ``geodesic(alpha(s), N(s), lam)`` in model coordinates."""
    _require_hyp(curve)
    _check_grid(curve, field)
    lam = np.linspace(lam_range[0], lam_range[1], cols)
    base = evaluate(curve, field.ts, 0)
    pts, _ = geodesic(base[:, None, :], field.vectors[:, None, :], lam[None, :])
    return SurfaceMesh(pts, field.ts, lam)


def tangential_surface_hyp(
    curve: CurveSpec, lam_range=(0.0, 1.0), rows: int = 201, cols: int = 11, tol: float | None = None
) -> SurfaceMesh:
    """Surface swept by the tangent geodesics of ``curve``.

    Over a geodesic every ruling is the curve itself; the mesh is still
    returned, flagged ``"degenerate"``, with a :class:`DegenerateWarning`.
    """
    _require_hyp(curve)
    tol = DEFAULT_TOL.residual if tol is None else tol
    ts = curve.grid(rows)
    p = evaluate(curve, ts, 0)
    v = evaluate(curve, ts, 1)
    a = evaluate(curve, ts, 2)
    T, DT, speed = covariant_tangent(curve, p, v, a)
    field = NormalField(curve, ts, T)
    mesh = ruled_surface_hyp(curve, field, lam_range, cols)
    geo_curv = HYP3.norm(p, DT) / speed
    if np.max(geo_curv) <= tol:
        warnings.warn("directrix is a geodesic; tangential surface degenerates", DegenerateWarning, stacklevel=2)
        return SurfaceMesh(mesh.points, mesh.s, mesh.lam, {"degenerate"})
    return mesh


def ruling_plane_residual(mesh: SurfaceMesh, min_abs_lam: float = 1e-6) -> ResidualReport:
    """Check that the tangent plane is constant along each ruling.

    For every row, the tangent plane at the column with the largest ``|lam|``
    determines a hyperbolic plane (a hemisphere centred on ``z = 0`` or a
    vertical plane). The residual at another vertex of the row is the sine
    of the angle between the surface normal ``f_s x f_lam`` and that plane's
    Euclidean normal there (the model is conformal, so angles agree).
    Partial derivatives come from finite differences on the mesh itself.
    """
    pts = mesh.points
    fs = finite_diff(mesh.s, pts, 1)
    fl = np.swapaxes(finite_diff(mesh.lam, np.swapaxes(pts, 0, 1), 1), 0, 1)
    cols = np.flatnonzero(np.abs(mesh.lam) > min_abs_lam)
    ref = cols[np.argmax(np.abs(mesh.lam[cols]))]
    worst = np.zeros(len(mesh.s))
    for r in range(len(mesh.s)):
        q = pts[r, ref]
        m = np.cross(fs[r, ref], fl[r, ref])
        if abs(m[2]) > 1e-12 * np.linalg.norm(m):
            center = q - (q[2] / m[2]) * m
            normals = pts[r, cols] - center
        else:
            normals = np.broadcast_to(m, (len(cols), 3))
        surf = np.cross(fs[r, cols], fl[r, cols])
        sin = np.linalg.norm(np.cross(surf, normals), axis=1)
        scale = np.linalg.norm(surf, axis=1) * np.linalg.norm(normals, axis=1)
        worst[r] = np.max(sin / (scale + 1e-300))
    return ResidualReport.from_values(mesh.s, worst)


# ---------------------------------------------------------------------------
# involutes and evolutes


@dataclass(frozen=True, eq=False)
class HypInvolute:
    curve: CurveSpec  # beta, sampled
    ts: np.ndarray
    lam: np.ndarray  # ruling parameter lam(s)
    orthogonality: ResidualReport  # |cos angle(beta', ruling)|


def involute_hyp(
    curve: CurveSpec, c: float, steps: int = 2000, speed_tol: float = 1e-6, eps_reg: float | None = None
) -> HypInvolute:
    """Involute ``beta(s) = gamma_{a'(s)}(lam(s))`` of a g-unit-speed curve.

    ``lam(s)`` solves the orthogonality condition ``g(beta', ruling') = 0``
    as an ODE, ``lam' = -g(dF/ds, G) / g(G, G)``, from ``lam(s0) = c - s0``.
    """
    _require_hyp(curve)
    eps_reg = DEFAULT_TOL.eps_reg if eps_reg is None else eps_reg
    s0, s1 = curve.t_range
    if s0 <= c <= s1:
        raise CuspOnWindow(f"c={c} lies in [{s0}, {s1}]; the involute has a cusp at s=c")
    h = (s1 - s0) / steps
    half = np.linspace(s0, s1, 2 * steps + 1)
    pos = evaluate(curve, half, 0)
    vel = evaluate(curve, half, 1)
    if np.max(np.abs(HYP3.norm(pos, vel) - 1.0)) > speed_tol:
        raise InputError("involute_hyp needs a g-unit-speed curve; see arclength_reparametrize")
    acc = evaluate(curve, half, 2)
    try:
        lam = _kernels.involute_lambda(pos, vel, acc, c - s0, h)
    except FloatingPointError as exc:
        raise NonFiniteState(str(exc)) from exc

    ts = half[::2]
    pts, g = geodesic(pos[::2], vel[::2], lam)
    dbeta = finite_diff(ts, pts, 1)
    bnorm = HYP3.norm(pts, dbeta)
    flags = ()
    if np.max(bnorm) <= eps_reg:
        warnings.warn("involute of a geodesic collapses to a point", DegenerateWarning, stacklevel=2)
        flags = ("degenerate",)
        ortho = ResidualReport.from_values(ts, np.zeros_like(ts))
    elif np.min(bnorm) <= eps_reg:
        raise CuspOnWindow("involute speed vanishes on the window")
    else:
        cosang = HYP3.inner(pts, dbeta, g) / (bnorm * HYP3.norm(pts, g))
        ortho = ResidualReport.from_values(ts, cosang)
    beta = CurveSpec.sampled(pts, ts, HYP3, flags=flags)
    return HypInvolute(beta, ts, lam, ortho)


def evolute_rm_field_hyp(alpha: CurveSpec, beta: CurveSpec, lam):
    """Field ``N(s) = gamma'_{a'(s)}(lam(s))`` along ``beta`` and its RM residual."""
    _require_hyp(alpha)
    _require_hyp(beta)
    if beta.kind != "sampled":
        raise InputError("beta must be the sampled output of involute_hyp")
    ts = beta.ts
    lam = np.asarray(lam, dtype=float)
    if lam.shape != ts.shape:
        raise GridMismatch("lam samples must match beta's grid")
    if ts[0] < alpha.t_range[0] - 1e-12 or ts[-1] > alpha.t_range[1] + 1e-12:
        raise GridMismatch("alpha and beta do not share a parameter window")
    pts, g = geodesic(evaluate(alpha, ts, 0), evaluate(alpha, ts, 1), lam)
    if np.max(np.abs(pts - beta.points)) > 1e-9 * max(1.0, float(np.max(np.abs(pts)))):
        raise GridMismatch("beta is not gamma_{alpha'}(lam) for the given lam")
    field = NormalField(beta, ts, g)
    return field, rm_residual_hyp(beta, field)
