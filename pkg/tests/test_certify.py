from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afk.certify import (
    C_EPSTEIN_DEFAULT,
    CONSTANTS_NOTE,
    CertificateConfig,
    ExperimentConfig,
    NecessaryVerdict,
    Verdict,
    assemble_certificate,
    astala_gehring_a,
    barrier_experiment,
    calibrate_c_epstein,
    certified_radius,
    circle_empty_radius,
    flats_certificate,
    injectivity_check,
    koebe_bounds_check,
    necessary_condition_check,
)
from afk.gauss_equation import DiskGrid
from afk.kleinian import GroupPresentation, LimitSetSample, build_octagon_group, fibonacci_sphere, limit_set_sample
from afk.moebius import INF, HalfSpacePoint, MoebiusTransform, apply_boundary, from_sphere
from afk.quad_diff import PreconditionError
from afk.surface import BoundaryField, FramePoint, integrate_immersion

# certified radius


def test_certified_radius_example():
    R = certified_radius(0.3, 0.1, 1, 4)
    assert R == pytest.approx(0.3 * math.sqrt(2 * 0.99) / 4, abs=1e-15)
    assert R == pytest.approx(0.10553, abs=5e-6)


def test_certified_radius_limits():
    assert certified_radius(0.3, 1 - 1e-12, 1, 4) < 1e-6
    with pytest.raises(ValueError):
        certified_radius(0.3, 1.0)
    with pytest.raises(ValueError):
        certified_radius(0, 0.1)
    with pytest.raises(ValueError):
        certified_radius(0.3, -0.1)


@given(st.floats(1e-3, 10), st.floats(0, 0.99), st.floats(1e-3, 1), st.floats(1, 8))
def test_certified_radius_scaling(r1, eps, ce, ck):
    R = certified_radius(r1, eps, ce, ck)
    assert certified_radius(2 * r1, eps, ce, ck) == pytest.approx(2 * R, rel=1e-14)
    assert certified_radius(r1, min(eps + 0.005, 0.995), ce, ck) <= R


# a_f and the Koebe check


@pytest.mark.parametrize("J,a", [(1.0, 1.0), (4.0, 2.0)])
def test_a_constant_jacobian(J, a):
    g = DiskGrid(0.85, 65)
    JJ = np.where(g.inside, J, np.nan)
    assert astala_gehring_a(JJ, g.center, g, 0.6) == pytest.approx(a, rel=1e-12)


def test_a_outside_domain():
    g = DiskGrid(0.85, 33)
    with pytest.raises(ValueError):
        astala_gehring_a(np.ones((33, 33)), 0.7 + 0j, g, 0.6)


def test_koebe_identity():
    g = DiskGrid(0.85, 65)
    rep = koebe_bounds_check(BoundaryField.from_function(g, lambda z: z))
    assert rep.a_value == pytest.approx(1, abs=1e-10)
    assert rep.ratio == pytest.approx(1, abs=1e-10)
    assert rep.K == pytest.approx(1) and rep.passed


def test_koebe_rejects_non_injective():
    g = DiskGrid(0.85, 33)
    m = BoundaryField.from_function(g, lambda z: np.round(z, 1))
    assert not injectivity_check(m)
    with pytest.raises(PreconditionError):
        koebe_bounds_check(m)


# certificate


def test_certificate_without_sample(baseline):
    _, _, patch = baseline
    c = assemble_certificate(patch)
    assert c.verdict is Verdict.INCONCLUSIVE and c.empirical_empty_radius is None
    assert c.eps == 0 and c.harnack_saturated
    assert c.R == pytest.approx(certified_radius(c.r1, 0.0), rel=1e-14)
    assert c.R_spherical == pytest.approx(math.atan(c.R))
    assert CONSTANTS_NOTE in c.notes


def test_certificate_verdicts(baseline, octagon_sample):
    _, _, patch = baseline
    ok = assemble_certificate(patch, octagon_sample)
    assert ok.verdict is Verdict.CONSISTENT
    assert ok.empirical_empty_radius == pytest.approx(math.pi / 4, abs=1e-9)
    bad = assemble_certificate(patch, octagon_sample.union([0j]))
    assert bad.verdict is Verdict.VIOLATED
    js = ok.to_json()
    assert js["verdict"] == "CONSISTENT" and isinstance(js["notes"], list)


@given(st.floats(0.01, 0.7))
def test_certificate_monotone_in_distance(baseline, d):
    # moving an injected point outward can only improve the verdict
    _, _, patch = baseline
    near = assemble_certificate(patch, LimitSetSample.from_points([d]))
    far = assemble_certificate(patch, LimitSetSample.from_points([d + 0.2]))
    order = {Verdict.VIOLATED: 0, Verdict.CONSISTENT: 1}
    assert order[far.verdict] >= order[near.verdict]


def test_certificate_requires_normalized_patch(bent):
    u, alpha, _ = bent
    F = FramePoint.normalized()
    moved = FramePoint(HalfSpacePoint(0.5j, 1.0), F.normal, F.tangent1, F.tangent2)
    with pytest.raises(PreconditionError):
        assemble_certificate(integrate_immersion(u, alpha, anchor=moved))


def test_certificate_config_constants(baseline):
    _, _, patch = baseline
    c = assemble_certificate(patch, config=CertificateConfig(C_epstein=2 * C_EPSTEIN_DEFAULT))
    base = assemble_certificate(patch)
    assert c.R == pytest.approx(math.sqrt(2) * base.R, rel=1e-14)


def test_calibrated_constant(baseline):
    _, _, patch = baseline
    r1 = assemble_certificate(patch).r1
    c = calibrate_c_epstein(patch, r1)
    assert c == pytest.approx(C_EPSTEIN_DEFAULT, abs=1e-5)
    # close to the Jacobian of the uniformization on the Fuchsian plane
    assert c == pytest.approx((1 - r1 ** 2) ** 2 / 4, rel=1e-2)


# necessary condition


def test_necessary_condition_examples():
    hp = limit_set_sample(build_octagon_group("halfplane"), 5)
    assert necessary_condition_check(hp, 0.1).verdict is NecessaryVerdict.PASSES
    dense = LimitSetSample.from_points(from_sphere(fibonacci_sphere(64 * 64)))
    assert necessary_condition_check(dense, 0.2).verdict is NecessaryVerdict.FAILS_NECESSARY_CONDITION
    two = LimitSetSample.from_points([0j, INF])
    rep = necessary_condition_check(two, math.pi / 4)
    assert rep.verdict is NecessaryVerdict.PASSES
    assert rep.empty_radius == pytest.approx(math.pi / 4, abs=1e-9)


# flats


def test_flats_certificate_at_center(baseline, octagon_sample):
    _, _, patch = baseline
    fc = flats_certificate(patch, [patch.center], 0.5, octagon_sample)
    imgs = {b.sign: b.image for b in fc.balls}
    assert abs(imgs[1]) < 1e-12 and imgs[-1] == INF
    assert fc.passed
    assert not flats_certificate(patch, [patch.center], 1.0, octagon_sample).passed


def test_flats_rejects_nonzero(bent, octagon_sample):
    _, _, patch = bent
    node = (patch.center[0] + 5, patch.center[1])
    with pytest.raises(PreconditionError):
        flats_certificate(patch, [node], 0.1, octagon_sample)


# barrier experiment


def test_experiment_constant_family():
    G = build_octagon_group()
    rows = barrier_experiment([G, G], ExperimentConfig(depth=4))
    assert rows[0].hausdorff_step is None
    assert rows[1].hausdorff_step == 0
    assert rows[0].empty_radius == pytest.approx(math.pi / 4, abs=0.05)


def test_experiment_dilation_family():
    G = build_octagon_group()
    gs = [G.conjugate_by(MoebiusTransform.dilation(2.0 ** k)) for k in range(3)]
    rows = barrier_experiment(gs, ExperimentConfig(depth=4))
    for k, row in enumerate(rows):
        # the conjugated limit set is the circle through the image of 1
        R = abs(apply_boundary(MoebiusTransform.dilation(2.0 ** k), 1))
        assert row.empty_radius == pytest.approx(circle_empty_radius(R), abs=0.05)
        assert row.error is None
    assert all(r.hausdorff_step > 0 for r in rows[1:])


def test_experiment_records_failures():
    bad = GroupPresentation((MoebiusTransform(1, 1, 0, 1),), "parabolic")
    rows = barrier_experiment([build_octagon_group(), bad], ExperimentConfig(depth=3))
    assert len(rows) == 2


def test_experiment_needs_two_groups():
    with pytest.raises(ValueError):
        barrier_experiment([build_octagon_group()])


def test_circle_empty_radius():
    assert circle_empty_radius(1) == pytest.approx(math.pi / 4)
    assert circle_empty_radius(1e6) == pytest.approx(math.pi / 2, abs=1e-5)
