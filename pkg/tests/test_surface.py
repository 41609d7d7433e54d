from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afk.gauss_equation import DiskGrid
from afk.moebius import INF, HalfSpacePoint, is_inf, spherical_distance
from afk.quad_diff import PreconditionError
from afk.surface import (
    BoundaryField,
    FramePoint,
    MetricTensorField,
    beltrami_estimate,
    degeneracy_scan,
    dilatation,
    dump_patch,
    equidistant_metric,
    flat_plane_positions,
    gauss_map_array,
    gauss_map_patch,
    gauss_map_point,
    jacobian_estimate,
    load_patch_columns,
)

unit_dirs = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: 1e-3 < np.linalg.norm(v))


# frames


def test_normalized_frame_is_orthonormal():
    F = FramePoint.normalized()
    F.validate()
    assert F.gram_defect() == 0
    G = FramePoint.from_matrix(F.to_matrix())
    assert G.position.t == pytest.approx(1) and abs(G.position.z) < 1e-15
    assert np.allclose(G.normal, F.normal) and np.allclose(G.tangent1, F.tangent1)


def test_frame_validation_rejects_skew():
    F = FramePoint(HalfSpacePoint(0j, 1.0), np.array([0, 0, -1.0]), np.array([1, 0.1, 0]), np.array([0, 1.0, 0]))
    with pytest.raises(PreconditionError):
        F.validate()


# Gauss map of a single point


def test_gauss_map_point_examples():
    p = HalfSpacePoint(0j, 1.0)
    assert gauss_map_point(p, [0, 0, -1]) == 0
    assert is_inf(gauss_map_point(p, [0, 0, 1]))
    assert gauss_map_point(p, [1, 0, 0]) == pytest.approx(1)
    assert is_inf(gauss_map_point(p, [0, 0, -1], sign=-1))


def test_gauss_map_point_requires_unit():
    with pytest.raises(PreconditionError):
        gauss_map_point(HalfSpacePoint(0j, 2.0), [0, 0, 1])
    with pytest.raises(ValueError):
        gauss_map_point(HalfSpacePoint(0j, 1.0), [0, 0, 1], sign=2)


@settings(max_examples=100, deadline=None)
@given(unit_dirs, st.floats(0.1, 5), st.builds(complex, st.floats(-3, 3), st.floats(-3, 3)))
def test_gauss_map_endpoint_lies_on_geodesic(v, t, z):
    # geodesics are vertical lines or semicircles orthogonal to the boundary
    v = t * np.asarray(v) / np.linalg.norm(v)
    q = gauss_map_point(HalfSpacePoint(z, t), v)
    w = complex(v[0], v[1])
    if is_inf(q):
        assert abs(w) < 1e-9 * t and v[2] > 0
        return
    if abs(w) < 1e-12 * t:
        # the ray points straight down
        assert abs(q - z) <= abs(w)
        return
    # the semicircle through (z, t) centred on the boundary at c with tangent v
    s = abs(w)
    c = z + (w / s) * t * v[2] / s
    assert abs(q - c) == pytest.approx(math.hypot(abs(z - c), t), rel=1e-9, abs=1e-12)
    assert gauss_map_array(z, t, v[None])[0] == pytest.approx(q, rel=1e-12, abs=1e-12)


# Beltrami and Jacobian estimates


def _field(fn, n=65):
    g = DiskGrid(0.85, n)
    return g, BoundaryField.from_function(g, fn)


def test_beltrami_identity():
    g, m = _field(lambda z: z)
    rep = beltrami_estimate(m)
    assert rep.mu_max < 1e-12 and rep.K == pytest.approx(1)


def test_beltrami_affine_example():
    g, m = _field(lambda z: z + 0.2 * np.conj(z))
    rep = beltrami_estimate(m)
    assert rep.mu_max == pytest.approx(0.2, abs=1e-12)
    assert rep.K == pytest.approx(1.5, abs=1e-12)


def test_beltrami_holomorphic_is_conformal():
    g, m = _field(lambda z: z + 0.3 * z ** 2)
    assert beltrami_estimate(m).mu_max < 1e-3


def test_jacobian_examples():
    g, m = _field(lambda z: 2 * z)
    J = jacobian_estimate(m)
    assert np.nanmax(np.abs(J - 4)) < 1e-12
    g, m = _field(lambda z: z + 0.2 * np.conj(z))
    assert np.nanmax(np.abs(jacobian_estimate(m) - 0.96)) < 1e-12


def test_estimates_skip_points_near_infinity():
    with np.errstate(divide="ignore", invalid="ignore"):
        g, m = _field(lambda z: 1 / z)
    assert beltrami_estimate(m).near_infinity > 0
    far = np.abs(g.z_full) > 0.3
    assert beltrami_estimate(m, region=far).mu_max < 1e-2


def test_dilatation_formula():
    assert dilatation(0) == 1
    assert dilatation(0.5) == 3
    assert dilatation(1) == math.inf


# equidistant foliation


def test_equidistant_totally_geodesic():
    g = MetricTensorField(np.eye(2))
    res = equidistant_metric(g, np.zeros((2, 2)), 0.7)
    assert np.allclose(res.metric.tensors[0], math.cosh(0.7) ** 2 * np.eye(2))


@pytest.mark.parametrize("lam,root", [(0.9, None), (1.1, math.atanh(1 / 1.1))])
def test_equidistant_degeneracy(lam, root):
    g = MetricTensorField(np.eye(2))
    S = np.diag([lam, -lam])
    t = degeneracy_scan(g, S)
    if root is None:
        assert t is None
        for s in np.linspace(-10, 10, 41):
            assert equidistant_metric(g, S, s).metric.is_positive_definite()
    else:
        assert abs(t) == pytest.approx(root, abs=1e-10)
        assert abs(t) == pytest.approx(1.522, abs=5e-4)
        assert equidistant_metric(g, S, t).min_eigenvalue == pytest.approx(0, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.99), st.floats(-5, 5))
def test_equidistant_positive_below_one(lam, t):
    S = np.diag([lam, -lam])
    assert equidistant_metric(MetricTensorField(np.eye(2)), S, t).metric.is_positive_definite()


def test_patch_equidistant_foliation(bent):
    _, _, patch = bent
    S = patch.shape_operator()
    assert np.max(np.abs(np.linalg.eigvalsh(S))) < 1
    assert degeneracy_scan(patch.metric_field(), S, t_max=4, samples=401) is None


# integrated patches


def test_flat_patch_is_plane(baseline):
    _, _, patch = baseline
    z, t = patch.positions()
    zf, tf = flat_plane_positions(patch.grid.z_full)
    m = patch.mask
    assert np.max(np.abs(z[m] - zf[m])) < 1e-6 and np.max(np.abs(t[m] - tf[m])) < 1e-6
    assert patch.valid and patch.gram_defect < 1e-8


def test_flat_patch_gauss_maps(baseline):
    _, _, patch = baseline
    c = patch.center
    plus = gauss_map_patch(patch, 1)
    minus = gauss_map_patch(patch, -1)
    assert abs(plus.values[c]) < 1e-12
    assert is_inf(minus.values[c])
    # G+ of the totally geodesic plane is the identity on the disk
    m = plus.mask
    assert np.max(np.abs(plus.values[m] - patch.grid.z_full[m])) < 1e-6


def test_orientation_constant(bent):
    _, _, patch = bent
    dets = np.linalg.det(patch.frames[patch.mask])
    assert np.all(np.sign(dets) == patch.orientation)


def test_principal_curvatures_match_induced_norm(bent):
    _, _, patch = bent
    ev = np.linalg.eigvalsh(patch.shape_operator())
    n = patch.induced_norm()[patch.mask]
    assert np.allclose(ev[:, 1], n, atol=1e-12) and np.allclose(ev[:, 0], -n, atol=1e-12)


def test_gauss_map_jacobian_positive(bent):
    _, _, patch = bent
    J = jacobian_estimate(gauss_map_patch(patch, 1))
    assert np.nanmin(J) > 0


def test_gauss_maps_disjoint_for_bent_patch(bent):
    _, _, patch = bent
    plus = gauss_map_patch(patch, 1).values[patch.mask]
    minus = gauss_map_patch(patch, -1).values[patch.mask]
    assert np.all(np.abs(plus) < 1)
    assert np.all(is_inf(minus) | (np.abs(minus) > 1))


def test_dump_round_trip(bent, tmp_path):
    _, _, patch = bent
    jp, bp = dump_patch(patch, tmp_path / "patch", header={"config_sha256": "x"})
    meta, data = load_patch_columns(tmp_path / "patch")
    assert meta["nodes"] == int(patch.mask.sum()) == len(data)
    assert meta["config_sha256"] == "x"
    z, t = patch.positions()
    assert np.array_equal(data[:, 2], t[patch.mask])
    assert bp.stat().st_size == 8 * 6 * meta["nodes"]


def test_center_images_are_far_apart(baseline):
    _, _, patch = baseline
    c = patch.center
    d = spherical_distance(gauss_map_patch(patch, 1).values[c], gauss_map_patch(patch, -1).values[c])
    assert d == pytest.approx(math.pi / 2)
    assert gauss_map_patch(patch, -1).values[c] == INF
