from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afk.kleinian import (
    DEDUP_DEFAULT,
    OCTAGON_RELATOR,
    GroupPresentation,
    LimitSetSample,
    ResourceLimitError,
    build_octagon_group,
    collect_words,
    dedup_points,
    directed_hausdorff,
    distance_to_sample,
    enumerate_reduced_words,
    fibonacci_sphere,
    hausdorff_distance,
    jorgensen_warnings,
    largest_empty_ball,
    limit_set_sample,
    reduce_word,
    sphere_grid_spacing,
    word_count,
    word_transform,
)
from afk.moebius import INF, Kind, MoebiusTransform, apply_boundary, classify, from_sphere, spherical_distance

cyclic = GroupPresentation((MoebiusTransform(2, 0, 0, 0.5),), "z->4z")


# word enumeration


def test_cyclic_words_length_two():
    words = list(enumerate_reduced_words(cyclic, 2, with_letters=True))
    assert sorted(w for w, _ in words) == [(0,), (0, 0), (1,), (1, 1)]
    images = sorted(apply_boundary(T, 1).real for _, T in words)
    assert images == pytest.approx([1 / 16, 1 / 4, 4, 16])


def test_word_counts():
    G = GroupPresentation((MoebiusTransform(2, 0, 0, 0.5), MoebiusTransform(1, 1, 1, 2)))
    assert len(list(enumerate_reduced_words(G, 1))) == 4
    assert len(list(enumerate_reduced_words(G, 3))) == 4 + 12 + 36 == word_count(2, 3)
    assert word_count(4, 8) == 7_686_400


def test_enumeration_yields_reduced_distinct_words(octagon):
    words = [w for w, _ in enumerate_reduced_words(octagon, 3, with_letters=True)]
    assert len(words) == len(set(words)) == word_count(4, 3)
    assert all(reduce_word(w, 4) == w for w in words)


def test_enumeration_transforms_match_products(octagon):
    for w, T in enumerate_reduced_words(octagon, 3, with_letters=True):
        W = word_transform(octagon, w)
        assert np.allclose(T.matrix, W.matrix, atol=1e-10) or np.allclose(T.matrix, -W.matrix, atol=1e-10)


def test_collect_words_budget(octagon):
    with pytest.raises(ResourceLimitError):
        collect_words(octagon, 8, budget=1000)
    assert len(collect_words(octagon, 2)) == word_count(4, 2)


@given(st.lists(st.integers(0, 5), max_size=30))
def test_reduce_word_idempotent(letters):
    r = reduce_word(letters, 3)
    assert reduce_word(r, 3) == r
    assert all(r[k + 1] != (r[k] + 3) % 6 for k in range(len(r) - 1))


# octagon group


def test_octagon_generators_loxodromic(octagon):
    for g in octagon.generators:
        c = classify(g)
        assert c.kind is Kind.LOXODROMIC
        assert c.translation_length == pytest.approx(2 * math.acosh(1 + math.sqrt(2)))


@pytest.mark.parametrize("model", ["disk", "halfplane"])
def test_octagon_relator(model):
    G = build_octagon_group(model)
    assert word_transform(G, OCTAGON_RELATOR).is_identity(tol=1e-8)


def test_octagon_halfplane_real_entries():
    G = build_octagon_group("halfplane")
    for g in G.generators:
        assert np.max(np.abs(g.matrix.imag)) == 0


def test_unknown_model():
    with pytest.raises(ValueError):
        build_octagon_group("sphere")


def test_group_json_round_trip(octagon):
    G = GroupPresentation.from_json(octagon.to_json())
    for g, h in zip(G.generators, octagon.generators):
        assert np.allclose(g.matrix, h.matrix, atol=1e-15)


def test_identity_generator_rejected():
    with pytest.raises(ValueError):
        GroupPresentation((MoebiusTransform.identity(),))


# limit sets


def test_cyclic_limit_set():
    S = limit_set_sample(cyclic, 6)
    assert len(S) == 2
    assert {p for p in S.points} == {0j, INF}
    assert any("elementary" in w for w in S.warnings)


def test_octagon_sample_on_circle(octagon_sample):
    assert len(octagon_sample) > 10_000
    assert np.max(np.abs(np.abs(octagon_sample.points) - 1)) <= 1e-9
    assert octagon_sample.metadata()["max_word_length"] == 6


def test_halfplane_sample_on_real_line():
    S = limit_set_sample(build_octagon_group("halfplane"), 5)
    finite = S.points[np.isfinite(S.points)]
    assert np.max(np.abs(finite.imag) / (1 + np.abs(finite) ** 2)) <= 1e-9


def test_bent_group_leaves_circle(octagon):
    gens = list(octagon.generators)
    gens[0] = gens[0].conjugate_by(MoebiusTransform.translation(0.01j))
    S = limit_set_sample(GroupPresentation(tuple(gens)), 5)
    assert np.max(np.abs(np.abs(S.points) - 1)) > 1e-6


def test_equivariance_under_generators(octagon):
    S = limit_set_sample(octagon, 5)
    T = limit_set_sample(octagon, 7)
    for g in octagon.letters():
        d = distance_to_sample(apply_boundary(g, S.points), T)
        assert np.max(d) <= DEDUP_DEFAULT


def test_thread_count_does_not_change_output(octagon):
    a = limit_set_sample(octagon, 5, threads=1)
    b = limit_set_sample(octagon, 5, threads=3)
    assert a.points.tobytes() == b.points.tobytes()
    assert a.words == b.words == word_count(4, 5)


def test_short_words_rejected(octagon):
    with pytest.raises(ValueError):
        limit_set_sample(octagon, 1)


def test_jorgensen_flags_nondiscrete_pair():
    G = GroupPresentation((MoebiusTransform(1, 1, 0, 1), MoebiusTransform(1, 0, 0.5, 1)))
    assert jorgensen_warnings(G)
    assert limit_set_sample(G, 3).warnings


def test_jorgensen_quiet_for_octagon(octagon):
    assert jorgensen_warnings(octagon) == []


def test_dedup_idempotent():
    rng = np.random.default_rng(0)
    p = rng.normal(size=500) + 1j * rng.normal(size=500)
    p = np.concatenate([p, p + 1e-9, [INF, INF]])
    once = dedup_points(p)
    assert len(once) == 501
    assert np.array_equal(dedup_points(once), once)


def test_union_adds_points(octagon_sample):
    U = octagon_sample.union([0j])
    assert len(U) == len(octagon_sample) + 1
    assert distance_to_sample(0j, U) == 0


# Hausdorff distance

finite = st.builds(complex, st.floats(-20, 20), st.floats(-20, 20))
samples = st.lists(finite, min_size=1, max_size=30).map(lambda v: np.array(v, dtype=complex))


def test_hausdorff_examples():
    A = np.array([0, 1, 1j, INF])
    assert hausdorff_distance(A, A) == 0
    assert hausdorff_distance([0j], [INF]) == pytest.approx(math.pi / 2)


def test_hausdorff_empty_rejected():
    with pytest.raises(ValueError):
        hausdorff_distance(np.array([], dtype=complex), [0j])


@settings(max_examples=100, deadline=None)
@given(samples, samples)
def test_hausdorff_symmetric_and_brute(A, B):
    D = spherical_distance(A[:, None], B[None, :])
    assert directed_hausdorff(A, B) == D.min(axis=1).max()
    assert hausdorff_distance(A, B) == hausdorff_distance(B, A)


@settings(max_examples=100, deadline=None)
@given(samples, samples, samples)
def test_hausdorff_triangle(A, B, C):
    assert hausdorff_distance(A, C) <= hausdorff_distance(A, B) + hausdorff_distance(B, C) + 1e-12


# largest empty ball


def test_empty_ball_two_points():
    c, r = largest_empty_ball(np.array([0j, INF]), 64)
    assert r == pytest.approx(math.pi / 4, abs=1e-9)
    assert abs(c) == pytest.approx(1, abs=1e-4)


def test_empty_ball_real_line_center():
    S = limit_set_sample(build_octagon_group("halfplane"), 5)
    c, r = largest_empty_ball(S, 64)
    assert abs(r - math.pi / 4) <= 2 * sphere_grid_spacing(64)
    assert min(abs(c - 1j), abs(c + 1j)) < 0.05


def test_empty_ball_dense_grid():
    pts = from_sphere(fibonacci_sphere(64 * 64))
    _, r = largest_empty_ball(pts, 64)
    assert r <= sphere_grid_spacing(64)


def test_empty_ball_large_sample_exact_radius():
    th = np.linspace(0, 2 * np.pi, 200_000, endpoint=False)
    _, r = largest_empty_ball(np.exp(1j * th), 64)
    assert r == pytest.approx(math.pi / 4, abs=1e-9)


def test_empty_ball_radius_attained():
    rng = np.random.default_rng(4)
    pts = rng.normal(size=300) + 1j * rng.normal(size=300)
    c, r = largest_empty_ball(pts, 32)
    assert r == pytest.approx(np.min(spherical_distance(c, pts)), abs=1e-15)


def test_sample_from_points_canonicalizes():
    S = LimitSetSample.from_points([1e15, 2])
    assert S.points[0] == INF
