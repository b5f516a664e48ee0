"""Rotation-minimizing transport along a curve, geometry-agnostic.

The RM condition ``nabla_{a'} N  parallel to  a'`` together with
``g(N, T) = 0`` gives ``nabla_{a'} N = -g(N, nabla_{a'} T) T``; this is the ODE
integrated here. Natural curvatures are read off afterwards as
``kappa_i = g(nabla_T T, N_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import DEFAULT_TOL, CurveSpec, Frame, evaluate
from .errors import InputError, NonFiniteState

__all__ = ["RMFrame", "transport_frame", "covariant_tangent"]


@dataclass(frozen=True, eq=False)
class RMFrame:
    """RM frame samples on the full-step grid of a transport run."""

    curve: CurveSpec
    ts: np.ndarray
    points: np.ndarray
    tangent: np.ndarray  # unit in g
    normals: np.ndarray  # (samples, k, dim): N1 and, in 3-D, N2
    kappas: np.ndarray  # (samples, k)
    speed: np.ndarray  # |alpha'|_g

    def frame(self, i: int) -> Frame:
        return Frame(self.points[i], np.vstack([self.tangent[i], self.normals[i]]), self.curve.ambient)

    def max_orthonormality_error(self) -> float:
        m = self.curve.ambient
        vecs = np.concatenate([self.tangent[:, None, :], self.normals], axis=1)
        gram = m.conformal(self.points)[:, None, None] * np.einsum("sid,sjd->sij", vecs, vecs)
        return float(np.max(np.abs(gram - np.eye(vecs.shape[1]))))


def covariant_tangent(curve: CurveSpec, pos, vel, acc):
    """``(T, nabla_{a'} T, |a'|_g)`` from position, velocity, acceleration."""
    m = curve.ambient
    speed = m.norm(pos, vel)
    T = vel / speed[:, None]
    A = acc + m.christoffel(pos, vel, vel)
    DT = (A - m.inner(pos, A, T)[:, None] * T) / speed[:, None]
    return T, DT, speed


def transport_frame(curve: CurveSpec, n0, steps: int = 2000, stabilize: bool = True) -> RMFrame:
    """Transport ``n0`` (projected onto the normal space at ``t_min``) along ``curve``.

    With ``stabilize`` the field is re-projected and re-normalized after every
    RK4 step; ``stabilize=False`` integrates the raw ODE.
    """
    if steps < 1:
        raise InputError("steps must be >= 1")
    m = curve.ambient
    t0, t1 = curve.t_range
    h = (t1 - t0) / steps
    half = np.linspace(t0, t1, 2 * steps + 1)
    pos = evaluate(curve, half, 0)
    vel = evaluate(curve, half, 1, eps_reg=DEFAULT_TOL.eps_reg)
    acc = evaluate(curve, half, 2)

    n0 = np.asarray(n0, dtype=float)
    if n0.shape != (m.dim,):
        raise InputError(f"initial normal must have {m.dim} components")
    v0 = vel[0]
    n0 = n0 - (n0 @ v0) / (v0 @ v0) * v0
    norm0 = float(m.norm(pos[0], n0))
    if norm0 <= DEFAULT_TOL.eps_reg * max(1.0, float(np.linalg.norm(n0))) or not np.isfinite(norm0):
        raise InputError("initial normal is (nearly) tangent to the curve")
    n0 = n0 / norm0

    try:
        n1 = _kernels.transport(pos, vel, acc, n0, h, m.kernel_code, stabilize)
    except FloatingPointError as exc:
        raise NonFiniteState(str(exc)) from exc

    ts = half[::2]
    p, v, a = pos[::2], vel[::2], acc[::2]
    T, DT, speed = covariant_tangent(curve, p, v, a)
    normals = [n1]
    if m.dim == 3:
        normals.append(np.cross(T, n1) * np.sqrt(m.conformal(p))[:, None])
    normals = np.stack(normals, axis=1)
    kappas = m.conformal(p)[:, None] * np.einsum("sd,skd->sk", DT, normals) / speed[:, None]
    return RMFrame(curve, ts, p, T, normals, kappas, speed)
