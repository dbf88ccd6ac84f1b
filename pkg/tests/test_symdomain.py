from itertools import combinations

import numpy as np
import pytest

from gamma_models.errors import NonFiniteInput, SampleBudgetExceeded
from gamma_models.symdomain import (
    membership,
    point_from_json,
    point_to_json,
    preimage,
    sample_boundary,
    sample_polydisc,
    symmetrize,
    symmetrize_many,
)


def esf_oracle(z):
    """Elementary symmetric functions by summing products over index subsets."""
    n = len(z)
    return np.array([sum(np.prod([z[j] for j in c]) for c in combinations(range(n), k)) for k in range(1, n + 1)])


def test_symmetrize_trivial():
    assert np.allclose(symmetrize(np.zeros(4)), 0)
    assert np.allclose(symmetrize([1, 1]), [2, 1])


def test_symmetrize_three_points_matches_expansion():
    z = np.array([0.5, 0.5j, -0.5])
    # (t - 0.5)(t - 0.5i)(t + 0.5) = t^3 - s1 t^2 + s2 t - s3
    coeffs = np.poly(z)
    expected = np.array([-coeffs[1], coeffs[2], -coeffs[3]])
    assert np.allclose(symmetrize(z), expected, atol=1e-15)
    assert np.allclose(symmetrize(z), esf_oracle(z), atol=1e-15)


def test_symmetrize_many_rowwise(rng):
    z = rng.standard_normal((7, 4)) + 1j * rng.standard_normal((7, 4))
    out = symmetrize_many(z)
    for row, s in zip(z, out):
        assert np.allclose(s, esf_oracle(row), atol=1e-12)


def test_symmetrize_rejects_nan():
    with pytest.raises(NonFiniteInput):
        symmetrize([np.nan, 0.1])


def test_membership_examples():
    assert membership(np.zeros(3), "Gamma_n")
    assert membership([2, 1], "bGamma_n")
    w = 0.9 * np.exp(1j * np.pi * np.arange(3) / 3)
    assert membership(symmetrize(w), "G_n")
    assert not membership(symmetrize(w), "bGamma_n")
    assert not membership([3, 1], "Gamma_n")


def test_membership_double_root_on_circle():
    # the cluster mean keeps a double unimodular root on the circle
    s = symmetrize([np.exp(0.4j), np.exp(0.4j), 0.3])
    assert membership(s, "Gamma_n", 1e-10)


def test_preimage_roundtrip(rng):
    z = 0.9 * np.exp(2j * np.pi * rng.uniform(size=4)) * rng.uniform(size=4)
    assert np.allclose(symmetrize(preimage(symmetrize(z))), symmetrize(z), atol=1e-12)


def test_sample_boundary_examples(rng):
    one = sample_boundary(2, 1, "grid")
    assert one.points.shape == (1, 2) and np.allclose(one.points[0], [2, 1])
    g = sample_boundary(2, 4, "grid")
    assert g.points.shape == (16, 2)
    assert all(membership(s, "bGamma_n") for s in g.points)
    r = sample_boundary(3, 100, "random", rng)
    assert r.points.shape == (100, 3) and r.source == "torus-random"
    assert all(membership(s, "bGamma_n") for s in r.points)


def test_sample_boundary_budget():
    with pytest.raises(SampleBudgetExceeded):
        sample_boundary(5, 48, "grid")


def test_polydisc_sample_inside(rng):
    s = sample_polydisc(3, 50, rng, radius=0.99)
    assert all(membership(p, "G_n") for p in s.points)


def test_point_json_roundtrip():
    s = np.array([1 + 2j, -0.5j])
    assert np.array_equal(point_from_json(point_to_json(s)), s)
