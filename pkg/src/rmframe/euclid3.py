"""RM frames and their applications in Euclidean 3-space."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .core import (
    DEFAULT_TOL,
    EUCLID3,
    CurveSpec,
    NaturalCurvatures,
    NormalField,
    SurfaceMesh,
    evaluate,
    perpendicular,
)
from .errors import (
    CoincidentCurves,
    CuspOnWindow,
    DegenerateCurve,
    DegenerateDevelopment,
    DegenerateWarning,
    FrenetUndefined,
    GridMismatch,
    InputError,
)
from .numerics import ResidualReport, finite_diff
from .transport import RMFrame, transport_frame

__all__ = [
    "FrenetApparatus",
    "NormalDevelopment",
    "SphericalReport",
    "frenet",
    "rmf_transport",
    "rm_frame",
    "natural_from_frenet",
    "frenet_from_natural",
    "ruled_surface",
    "developability_residual",
    "rm_residual",
    "involute",
    "evolute_normal_field",
    "spherical_test",
]


def _require_euclid(curve: CurveSpec) -> None:
    if curve.ambient != EUCLID3:
        raise InputError(f"expected a curve in euclid3, got {curve.ambient.name}")


@dataclass(frozen=True, eq=False)
class FrenetApparatus:
    ts: np.ndarray
    T: np.ndarray
    N: np.ndarray  # nan where undefined
    B: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray  # nan where undefined
    speed: np.ndarray
    defined: np.ndarray  # bool mask, False where kappa <= eps_reg


@dataclass(frozen=True, eq=False)
class NormalDevelopment:
    """The plane curve ``t -> (kappa1(t), kappa2(t))``."""

    ts: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    speed: np.ndarray  # |alpha'|, to turn t-derivatives into arc-length ones

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.k1, self.k2])


def frenet(curve: CurveSpec, count: int = 2001, eps_reg: float | None = None) -> FrenetApparatus:
    """Frenet apparatus on a uniform grid; samples with ``kappa <= eps_reg`` are
    flagged undefined (N, B, tau set to nan)."""
    _require_euclid(curve)
    eps_reg = DEFAULT_TOL.eps_reg if eps_reg is None else eps_reg
    ts = curve.grid(count)
    d1 = evaluate(curve, ts, 1)
    d2 = evaluate(curve, ts, 2)
    d3 = evaluate(curve, ts, 3)
    speed = np.linalg.norm(d1, axis=1)
    cr = np.cross(d1, d2)
    crn = np.linalg.norm(cr, axis=1)
    kappa = crn / speed**3
    defined = kappa > eps_reg
    T = d1 / speed[:, None]
    B = np.full_like(T, np.nan)
    N = np.full_like(T, np.nan)
    tau = np.full_like(kappa, np.nan)
    B[defined] = cr[defined] / crn[defined, None]
    N[defined] = np.cross(B[defined], T[defined])
    tau[defined] = np.einsum("ij,ij->i", cr[defined], d3[defined]) / crn[defined] ** 2
    return FrenetApparatus(ts, T, N, B, kappa, tau, speed, defined)


def rm_frame(curve: CurveSpec, n0=None, steps: int = 2000, stabilize: bool = True) -> RMFrame:
    _require_euclid(curve)
    if n0 is None:
        n0 = perpendicular(evaluate(curve, curve.t_range[0], 1))
    return transport_frame(curve, n0, steps, stabilize)


def rmf_transport(curve: CurveSpec, n0=None, steps: int = 2000, stabilize: bool = True):
    """RM field from ``n0`` and the natural curvatures ``(kappa1, kappa2)``.

    Returns ``(NormalField, NaturalCurvatures)``; N2 = T x N1 is available
    through :func:`rm_frame`.
    """
    fr = rm_frame(curve, n0, steps, stabilize)
    return NormalField(curve, fr.ts, fr.normals[:, 0]), NaturalCurvatures(fr.ts, fr.kappas)


def natural_from_frenet(app: FrenetApparatus, theta0: float = 0.0) -> NormalDevelopment:
    if not np.all(app.defined):
        raise FrenetUndefined("curvature vanishes on the window")
    ds = app.speed * app.tau
    theta = theta0 + cumulative_simpson(ds, x=app.ts, initial=0.0)
    return NormalDevelopment(app.ts, app.kappa * np.cos(theta), app.kappa * np.sin(theta), app.speed)


def frenet_from_natural(dev: NormalDevelopment, eps_reg: float | None = None):
    """``(ts, kappa, tau)`` from a normal development; tau is nan where
    ``kappa1**2 + kappa2**2 <= eps_reg**2``."""
    eps_reg = DEFAULT_TOL.eps_reg if eps_reg is None else eps_reg
    k1, k2 = dev.k1, dev.k2
    r2 = k1**2 + k2**2
    ok = r2 > eps_reg**2
    if not np.any(ok):
        raise FrenetUndefined("normal development sits at the origin")
    d1 = finite_diff(dev.ts, k1, 1)
    d2 = finite_diff(dev.ts, k2, 1)
    tau = np.full_like(k1, np.nan)
    tau[ok] = (k1[ok] * d2[ok] - d1[ok] * k2[ok]) / r2[ok] / dev.speed[ok]
    return dev.ts, np.sqrt(r2), tau


def _check_grid(curve: CurveSpec, field: NormalField, tol: float = 1e-9) -> None:
    t0, t1 = curve.t_range
    if field.ts[0] < t0 - tol or field.ts[-1] > t1 + tol:
        raise GridMismatch("field samples fall outside the curve's parameter range")
    if field.curve is not curve:
        here = evaluate(curve, field.ts, 0)
        there = field.base_points
        if np.max(np.linalg.norm(here - there, axis=1)) > tol * max(1.0, float(np.max(np.abs(here)))):
            raise GridMismatch("field was sampled along a different curve")


def ruled_surface(curve: CurveSpec, field: NormalField, lam_range=(0.0, 1.0), cols: int = 11) -> SurfaceMesh:
    """Mesh of ``alpha(s) + lam * N(s)`` with one row per field sample."""
    _require_euclid(curve)
    _check_grid(curve, field)
    lam = np.linspace(lam_range[0], lam_range[1], cols)
    base = evaluate(curve, field.ts, 0)
    pts = base[:, None, :] + lam[None, :, None] * field.vectors[:, None, :]
    return SurfaceMesh(pts, field.ts, lam)


def floored(norms: np.ndarray, rel: float = 1e-2) -> np.ndarray:
    """``norms`` floored at ``rel`` times their maximum.

    Keeps normalized residuals bounded where ``N'`` passes through zero
    (a natural curvature changing sign) instead of amplifying noise.
    """
    return np.maximum(norms, rel * float(np.max(norms, initial=0.0)))


def developability_residual(curve: CurveSpec, field: NormalField, eps: float = 1e-300) -> ResidualReport:
    """Scale-free triple product ``|[a', N, N']| / (|a'| |N| |N'|)``, with
    ``|N'|`` floored (see :func:`floored`)."""
    _require_euclid(curve)
    _check_grid(curve, field)
    d1 = evaluate(curve, field.ts, 1)
    n = field.vectors
    dn = finite_diff(field.ts, n, 1)
    det = np.abs(np.einsum("ij,ij->i", d1, np.cross(n, dn)))
    speed = np.linalg.norm(d1, axis=1)
    dnn = np.linalg.norm(dn, axis=1)
    scale = speed * np.linalg.norm(n, axis=1) * floored(dnn)
    res = np.where(dnn <= DEFAULT_TOL.eps_reg * speed, 0.0, det / (scale + eps))
    return ResidualReport.from_values(field.ts, res)


def rm_residual(curve: CurveSpec, field: NormalField) -> ResidualReport:
    """Normal component of ``N'`` per unit arc length; zero iff N is RM."""
    _require_euclid(curve)
    _check_grid(curve, field)
    d1 = evaluate(curve, field.ts, 1)
    return _normal_part(field.ts, field.vectors, d1)


def _normal_part(ts, n, d1) -> ResidualReport:
    speed = np.linalg.norm(d1, axis=1)
    T = d1 / speed[:, None]
    dn = finite_diff(ts, n, 1)
    perp = dn - np.einsum("ij,ij->i", dn, T)[:, None] * T
    return ResidualReport.from_values(ts, np.linalg.norm(perp, axis=1) / speed)


def involute(curve: CurveSpec, c: float, count: int = 1001, speed_tol: float = 1e-6) -> CurveSpec:
    """Involute ``beta(s) = alpha(s) + (c - s) alpha'(s)`` of a unit-speed curve.

    Raises :class:`CuspOnWindow` when ``c`` lies in the window. A curve whose
    involute collapses to a point (a straight line) is returned with the
    ``"degenerate"`` flag and a :class:`DegenerateWarning`.
    """
    _require_euclid(curve)
    s0, s1 = curve.t_range
    if s0 <= c <= s1:
        raise CuspOnWindow(f"c={c} lies in [{s0}, {s1}]; the involute has a cusp at s=c")
    s = curve.grid(count)
    d1 = evaluate(curve, s, 1)
    if np.max(np.abs(np.linalg.norm(d1, axis=1) - 1.0)) > speed_tol:
        raise InputError("involute needs a unit-speed curve; see arclength_reparametrize")
    d2 = evaluate(curve, s, 2)
    beta = evaluate(curve, s, 0) + (c - s)[:, None] * d1
    # beta' = (c - s) alpha''
    dbeta = (c - s)[:, None] * d2
    flags = ()
    if np.max(np.linalg.norm(dbeta, axis=1)) <= DEFAULT_TOL.eps_reg:
        warnings.warn("involute of a straight line collapses to a point", DegenerateWarning, stacklevel=2)
        flags = ("degenerate",)
        dbeta = None
    return CurveSpec.sampled(beta, s, EUCLID3, velocities=dbeta, flags=flags)


def evolute_normal_field(alpha: CurveSpec, beta: CurveSpec, count: int = 2001):
    """Unit field ``(beta - alpha) / |beta - alpha|`` regarded along ``beta``.

    The curves are matched parameter by parameter (on ``beta``'s sample grid
    when it is sampled). Returns ``(NormalField, ResidualReport)`` where the
    report is the RM residual of the field along ``beta``.
    """
    _require_euclid(alpha)
    _require_euclid(beta)
    ts = beta.ts if beta.kind == "sampled" else beta.grid(count)
    if ts[0] < alpha.t_range[0] - 1e-12 or ts[-1] > alpha.t_range[1] + 1e-12:
        raise GridMismatch("alpha and beta do not share a parameter window")
    diff = evaluate(beta, ts, 0) - evaluate(alpha, ts, 0)
    dist = np.linalg.norm(diff, axis=1)
    if np.min(dist) <= DEFAULT_TOL.eps_reg:
        raise CoincidentCurves("alpha and beta meet on the window")
    n = diff / dist[:, None]
    field = NormalField(beta, ts, n)
    return field, _normal_part(ts, n, evaluate(beta, ts, 1))


@dataclass(frozen=True)
class SphericalReport:
    normal: tuple  # unit normal of the fitted line
    offset: float  # distance d of the line from the origin
    max_deviation: float
    radius_estimate: float
    verdict: str  # "spherical" | "not spherical (plane curve)" | "not spherical"

    def to_dict(self) -> dict:
        return {
            "line_fit": {"normal": list(self.normal), "offset": self.offset},
            "max_deviation": self.max_deviation,
            "radius_estimate": self.radius_estimate,
            "verdict": self.verdict,
        }


def fit_line_tls(points) -> tuple[np.ndarray, float, float]:
    """Total-least-squares line ``n . x = d`` (``d >= 0``); returns
    ``(n, d, max |n . x - d|)``.

    A cluster with no spread fixes ``n`` along the centroid, which makes ``d``
    the centroid's distance from the origin.
    """
    pts = np.asarray(points, dtype=float)
    m = pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(pts - m, full_matrices=False)
    scale = max(float(np.max(np.linalg.norm(pts, axis=1))), 1e-300)
    if sv[0] <= 1e-9 * scale * np.sqrt(len(pts)):
        n = m / np.linalg.norm(m)
    else:
        n = vt[-1]
    d = float(n @ m)
    if d < 0:
        n, d = -n, -d
    return n, d, float(np.max(np.abs(pts @ n - d)))


def spherical_test(curve: CurveSpec, steps: int = 2000, tol: float | None = None) -> SphericalReport:
    """Fit a line to the normal development and read off the sphere radius."""
    tol = DEFAULT_TOL.residual if tol is None else tol
    _, kap = rmf_transport(curve, steps=steps)
    pts = kap.kappas[:, :2]
    scale = float(np.max(np.linalg.norm(pts, axis=1)))
    if scale <= DEFAULT_TOL.eps_reg:
        raise DegenerateDevelopment("normal development collapses to the origin (straight line)")
    n, d, dev = fit_line_tls(pts)
    rel = tol * scale
    if dev >= rel:
        verdict = "not spherical"
    elif d <= max(10.0 * dev, rel):
        verdict = "not spherical (plane curve)"
    else:
        verdict = "spherical"
    return SphericalReport(tuple(float(x) for x in n), d, dev, 1.0 / d if d > 0 else float("inf"), verdict)
