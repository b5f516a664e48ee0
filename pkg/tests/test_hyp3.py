import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from rmframe import hyp3 as h3
from rmframe.core import HYP3, CurveSpec, NormalField, arclength_reparametrize, evaluate
from rmframe.errors import CuspOnWindow, DegenerateWarning, InputError, NotInHalfSpace

CIRCLE = CurveSpec.analytic("circle", HYP3, (0.0, 6.0), center=[0, 0, 1.0], radius=1.0)
VERTICAL = CurveSpec.analytic("vertical_ray", HYP3, (0.0, 2.0), base=[0, 0, 1.0])
HELIX = CurveSpec.analytic("helix", HYP3, (1.0, 4.0), a=1.0, b=1.0)


def _rotating(curve, n0=None, rate=1.0, steps=2000):
    fr = h3.rm_frame_hyp(curve, n0, steps)
    th = rate * (fr.ts - fr.ts[0])
    vec = np.cos(th)[:, None] * fr.normals[:, 0] + np.sin(th)[:, None] * fr.normals[:, 1]
    return NormalField(curve, fr.ts, vec)


# metric and Christoffel symbols ---------------------------------------------------


def test_metric_examples():
    assert h3.hyp_metric([0, 0, 1], [1, 0, 0], [1, 0, 0]) == 1.0
    assert h3.hyp_metric([0, 0, 2], [1, 0, 0], [1, 0, 0]) == 0.25
    assert h3.hyp_metric([5, 3, 1], [1, 0, 0], [0, 1, 0]) == 0.0
    with pytest.raises(NotInHalfSpace):
        h3.hyp_metric([0, 0, -1], [1, 0, 0], [1, 0, 0])


def _christoffel_oracle(p, h=1e-5):
    def g(q):
        return np.eye(3) / q[2] ** 2

    dg = np.zeros((3, 3, 3))  # dg[l, i, j] = d_l g_ij
    for l in range(3):
        e = np.zeros(3)
        e[l] = h
        dg[l] = (g(p + e) - g(p - e)) / (2 * h)
    ginv = np.linalg.inv(g(p))
    out = np.zeros((3, 3, 3))
    for k in range(3):
        for i in range(3):
            for j in range(3):
                out[k, i, j] = 0.5 * sum(ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j]) for l in range(3))
    return out


@pytest.mark.parametrize("p", [[0, 0, 1.0], [1.5, -2.0, 0.3], [0.0, 4.0, 7.0]])
def test_christoffel_matches_finite_difference_oracle(p):
    p = np.array(p)
    assert np.max(np.abs(h3.hyp_christoffel(p) - _christoffel_oracle(p))) < 1e-6 / p[2]


def test_christoffel_examples():
    g = h3.hyp_christoffel([0, 0, 1.0])
    assert g[0, 0, 2] == -1.0
    assert g[2, 0, 0] == 1.0
    assert g[0, 1, 2] == 0.0 and g[1, 0, 2] == 0.0 and g[2, 0, 1] == 0.0


def test_manifold_christoffel_agrees_with_array():
    rng = np.random.default_rng(0)
    p = np.array([0.2, 0.1, 0.7])
    u, v = rng.normal(size=3), rng.normal(size=3)
    assert np.allclose(HYP3.christoffel(p, u, v), np.einsum("kij,i,j->k", h3.hyp_christoffel(p), u, v))


# geodesics ---------------------------------------------------------------------


def test_geodesic_examples():
    pt, _ = h3.geodesic([0, 0, 1.0], [0, 0, 1.0], 1.0)
    assert np.allclose(pt, [0, 0, np.e])
    for lam in (-30.0, 30.0):
        pt, _ = h3.geodesic([0, 0, 1.0], [1, 0, 0], lam)
        assert abs(abs(pt[0]) - 1) < 1e-12 and pt[2] < 1e-12
    lam = np.linspace(-2, 2, 9)
    pt, _ = h3.geodesic([0, 0, 1.0], [1, 0, 0], lam)
    assert np.allclose(pt[:, 0], np.tanh(lam)) and np.allclose(pt[:, 2], 1 / np.cosh(lam))
    p, v = np.array([1.0, 2.0, 0.5]), np.array([0.3, -0.1, 0.2])
    pt, tg = h3.geodesic(p, v, 0.0)
    assert np.allclose(pt, p) and np.allclose(tg, v / np.sqrt(h3.hyp_metric(p, v, v)))


def test_geodesic_closed_form_against_ode(rng):
    worst = 0.0
    for _ in range(20):
        p = np.array([*rng.uniform(-2, 2, 2), rng.uniform(0.3, 3)])
        v = rng.normal(size=3)
        for lam in np.linspace(-3, 3, 7):
            a, ta = h3.geodesic(p, v, lam)
            b, tb = h3.geodesic_ode(p, v, lam)
            worst = max(worst, np.max(np.abs(a - b) / max(1.0, np.max(np.abs(a)))))
            assert abs(h3.hyp_metric(a, ta, ta) - 1) < 1e-10
            assert abs(h3.hyp_metric(b, tb, tb) - 1) < 1e-7
    assert worst < 1e-8


def test_geodesic_ray_shapes():
    ray = h3.geodesic_ray([0, 0, 2.0], [0, 0, 1.0])
    assert ray.kind == "vertical"
    ray = h3.geodesic_ray([1.0, 0, 1.0], [0, 1.0, 0])
    assert ray.kind == "semicircle" and ray.radius == pytest.approx(1.0)
    assert np.allclose(ray.center, [1.0, 0.0])
    pts, _ = ray(np.linspace(-3, 3, 13))
    assert np.allclose(np.linalg.norm(pts - [1.0, 0.0, 0.0], axis=1), 1.0)


def test_exp_map_examples():
    assert np.allclose(h3.exp_map([0, 0, 1.0], [0, 0, 0]), [0, 0, 1.0])
    assert np.allclose(h3.exp_map([0, 0, 1.0], [0, 0, 1.0]), [0, 0, np.e])


@given(
    st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.2, 3)),
    st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)),
)
def test_exp_map_distance_by_quadrature(p, v):
    p, v = np.array(p), np.array(v)
    length = float(np.sqrt(h3.hyp_metric(p, v, v)))
    if length < 1e-3:
        return
    q = h3.exp_map(p, v)
    assert abs(h3.hyp_distance(p, q) - length) < 1e-8

    def speed(lam):
        pt, tg = h3.geodesic(p, v, lam)
        return np.sqrt(h3.hyp_metric(pt, tg, tg))

    arc, _ = quad(speed, 0.0, length, epsabs=1e-12)
    assert abs(arc - length) < 1e-8


def test_geodesic_rejects_zero_direction():
    with pytest.raises(InputError):
        h3.geodesic([0, 0, 1.0], [0, 0, 0], 1.0)


# covariant derivative and RM residual ---------------------------------------------


def test_covariant_along_examples():
    ts = VERTICAL.grid(101)
    const = NormalField(VERTICAL, ts, np.tile([0.0, 0.0, 3.0], (101, 1)))
    cov = h3.covariant_along(VERTICAL, const)
    tangent = evaluate(VERTICAL, ts, 1)
    assert np.max(np.abs(np.cross(cov, tangent))) < 1e-10
    assert np.allclose(h3.covariant_along(VERTICAL, const, ts[10]), cov[10])

    field, _ = h3.rm_transport_hyp(HELIX)
    assert h3.rm_residual_hyp(HELIX, field).max_abs < 1e-7

    ts = HELIX.grid(201)
    flat = NormalField(HELIX, ts, np.tile([1.0, 0.0, 0.0], (201, 1)))
    cov = h3.covariant_along(HELIX, flat)
    p, v = evaluate(HELIX, ts, 0), evaluate(HELIX, ts, 1)
    T = v / HYP3.norm(p, v)[:, None]
    perp = cov - HYP3.inner(p, cov, T)[:, None] * T
    assert np.max(HYP3.norm(p, perp)) > 0.1


def test_rm_residual_examples():
    field, _ = h3.rm_transport_hyp(CIRCLE, [0, 0, 1.0])
    assert h3.rm_residual_hyp(CIRCLE, field).max_abs < 1e-6
    witness = _rotating(CIRCLE, [0, 0, 1.0])
    rep = h3.rm_residual_hyp(CIRCLE, witness)
    # g-speed of the circle is 1, so the rotation rate per unit length is 1
    assert abs(np.median(rep.values) - 1.0) < 1e-4
    semi = CurveSpec.analytic("semicircle", HYP3, (-1.0, 1.0), center=[0, 0], radius=1.0, direction=[1, 0])
    par, _ = h3.rm_transport_hyp(semi, [0, 1.0, 0])
    assert h3.rm_residual_hyp(semi, par).max_abs < 1e-9


def test_transport_along_geodesic_is_flat():
    semi = CurveSpec.analytic("semicircle", HYP3, (-1.5, 1.5), center=[0, 0], radius=2.0, direction=[1, 1])
    _, kap = h3.rm_transport_hyp(semi, [1.0, -1.0, 0.0])
    assert np.max(np.abs(kap.kappas)) < 1e-12


def test_transport_horizontal_circle():
    fr = h3.rm_frame_hyp(CIRCLE, [0, 0, 1.0])
    assert fr.max_orthonormality_error() < 1e-7
    p, v, a = fr.points, evaluate(CIRCLE, fr.ts, 1), evaluate(CIRCLE, fr.ts, 2)
    # brute-force nabla_{a'} T with the Christoffel array
    speed = HYP3.norm(p, v)
    acc = a + np.stack([np.einsum("kij,i,j->k", h3.hyp_christoffel(q), u, u) for q, u in zip(p, v)])
    T = v / speed[:, None]
    DT = (acc - HYP3.inner(p, acc, T)[:, None] * T) / speed[:, None]
    assert np.max(np.abs(np.sum(fr.kappas**2, axis=1) - HYP3.inner(p, DT, DT) / speed**2)) < 1e-6
    assert np.allclose(fr.kappas, [1.0, -1.0], atol=1e-10)


@pytest.mark.parametrize("phi", [np.pi / 6, np.pi / 3, np.pi / 2])
def test_rm_fields_keep_their_angle(phi):
    fr = h3.rm_frame_hyp(HELIX, steps=1500)
    n1, n2 = fr.normals[0]
    other = h3.rm_frame_hyp(HELIX, np.cos(phi) * n1 + np.sin(phi) * n2, steps=1500)
    cosang = HYP3.inner(fr.points, fr.normals[:, 0], other.normals[:, 0])
    assert np.max(np.abs(cosang - np.cos(phi))) < 1e-7


# developability ------------------------------------------------------------------


def test_developability_matches_rm_on_corpus():
    curves = [CIRCLE, HELIX, CurveSpec.analytic("ellipse", HYP3, (0.0, 6.0), a=2.0, b=1.0, center=[0, 0, 3.0])]
    for curve in curves:
        rm_field, _ = h3.rm_transport_hyp(curve)
        assert h3.developability_residual_hyp(curve, rm_field).max_abs < 1e-6
        assert h3.rm_residual_hyp(curve, rm_field).max_abs < 1e-6
        witness = _rotating(curve)
        assert h3.developability_residual_hyp(curve, witness).max_abs > 0.05
        assert h3.rm_residual_hyp(curve, witness).max_abs > 1e-6


def test_parallel_field_along_geodesic_is_developable():
    field, _ = h3.rm_transport_hyp(VERTICAL, [1.0, 0, 0])
    assert h3.developability_residual_hyp(VERTICAL, field).max_abs < 1e-6
    mesh = h3.ruled_surface_hyp(VERTICAL, field, (0.0, 1.0), 9)
    # rulings are semicircles centred on the vertical axis: the sheet is a hemisphere family
    r = np.linalg.norm(mesh.points, axis=2)
    assert np.allclose(r, r[:, :1])


def test_isometry_invariance_of_residual_reports():
    scale = 2.5
    moved = CurveSpec.analytic("circle", HYP3, (0.0, 6.0), center=[0, 0, scale], radius=scale)
    reports = []
    for curve in (CIRCLE, moved):
        rm_field, _ = h3.rm_transport_hyp(curve, [0.0, 0.0, 1.0])
        witness = _rotating(curve, [0.0, 0.0, 1.0])
        reports.append(
            [
                h3.rm_residual_hyp(curve, rm_field).max_abs,
                h3.developability_residual_hyp(curve, rm_field).max_abs,
                h3.rm_residual_hyp(curve, witness).max_abs,
                h3.developability_residual_hyp(curve, witness).max_abs,
            ]
        )
    assert np.max(np.abs(np.subtract(*reports))) < 1e-9


# surfaces ------------------------------------------------------------------------


def test_ruled_surface_zero_width_is_the_curve():
    field, _ = h3.rm_transport_hyp(CIRCLE, steps=100)
    mesh = h3.ruled_surface_hyp(CIRCLE, field, (0.0, 0.0), 3)
    assert np.allclose(mesh.points, evaluate(CIRCLE, field.ts, 0)[:, None, :])
    tang = h3.tangential_surface_hyp(CIRCLE, (0.0, 0.0), 21, 2)
    assert np.allclose(tang.points[:, 0], evaluate(CIRCLE, tang.s, 0))


def test_tangential_surface_of_circle_is_developable():
    mesh = h3.tangential_surface_hyp(CIRCLE, (0.1, 1.0), rows=201, cols=81)
    assert "degenerate" not in mesh.flags
    assert h3.ruling_plane_residual(mesh).max_abs < 1e-5


def test_ruling_plane_residual_sees_a_twisted_sheet():
    mesh = h3.ruled_surface_hyp(CIRCLE, _rotating(CIRCLE, [0, 0, 1.0], steps=200), (0.1, 1.0), 41)
    assert h3.ruling_plane_residual(mesh).max_abs > 0.05


def test_tangential_surface_over_geodesic_is_flagged():
    with pytest.warns(DegenerateWarning):
        mesh = h3.tangential_surface_hyp(VERTICAL, (0.1, 1.0), 11, 5)
    assert "degenerate" in mesh.flags
    assert np.allclose(mesh.points[..., :2], 0.0)


# involutes and evolutes ------------------------------------------------------------


def test_involute_of_horizontal_circle():
    inv = h3.involute_hyp(CIRCLE, 10.0)
    assert inv.orthogonality.max_abs < 1e-6
    assert np.max(np.abs(inv.lam - (10.0 - inv.ts))) < 1e-6
    field, rep = h3.evolute_rm_field_hyp(CIRCLE, inv.curve, inv.lam)
    assert rep.max_abs < 1e-5
    p = inv.curve.points
    assert np.max(np.abs(HYP3.norm(p, field.vectors) - 1)) < 1e-8
    db = evaluate(inv.curve, inv.ts, 1)
    assert np.max(np.abs(HYP3.inner(p, field.vectors, db) / HYP3.norm(p, db))) < 1e-6


def test_involute_of_reparametrized_curve():
    curve = arclength_reparametrize(CurveSpec.analytic("ellipse", HYP3, (0.0, 3.0), a=1.5, b=1.0, center=[0, 0, 2.0]), 2001)
    inv = h3.involute_hyp(curve, curve.t_range[1] + 2.0)
    assert inv.orthogonality.max_abs < 1e-6
    assert np.max(np.abs(inv.lam - (curve.t_range[1] + 2.0 - inv.ts))) < 1e-6


def test_involute_of_geodesic_degenerates():
    with pytest.warns(DegenerateWarning):
        inv = h3.involute_hyp(VERTICAL, 5.0, 200)
    assert "degenerate" in inv.curve.flags
    assert np.allclose(inv.curve.points, [0, 0, np.exp(5.0)])


def test_involute_checks():
    with pytest.raises(CuspOnWindow):
        h3.involute_hyp(CIRCLE, 3.0)
    with pytest.raises(InputError):
        h3.involute_hyp(CurveSpec.analytic("circle", HYP3, (0.0, 6.0), center=[0, 0, 2.0], radius=1.0), 10.0)
