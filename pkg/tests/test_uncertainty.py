import numpy as np
import pytest

from clustersweep.methods.kmeans import fit_kmeans
from clustersweep.methods.nmf import fit_nmf
from clustersweep.uncertainty import (
    UncertaintyRecord,
    membership_nmf,
    membership_silhouette,
    outlier_distance_ratio,
    outlier_entropy,
    silhouette_values,
    uncertainty_for,
)

from .oracles import brute_silhouette


def test_silhouette_matches_oracle():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 3))
    labels = rng.integers(0, 3, size=30)
    ours = silhouette_values(X, labels)
    theirs = brute_silhouette(X, labels)
    assert np.allclose(ours, theirs, atol=1e-10)


def test_silhouette_skips_noise_and_handles_singletons():
    X = np.array([[0.0], [0.1], [5.0], [5.1], [99.0], [42.0]])
    labels = np.array([0, 0, 1, 1, 2, -1])
    s = silhouette_values(X, labels)
    assert np.isnan(s[5])
    assert s[4] == 0.0  # singleton convention
    assert s[0] > 0.9


def test_membership_mapping_and_noise():
    X = np.array([[0.0], [0.1], [5.0], [5.1], [2.5]])
    labels = np.array([0, 0, 1, 1, -1])
    m = membership_silhouette(X, labels)
    assert m[4] == 0.0
    s = silhouette_values(X, labels)
    assert np.allclose(m[:4], (s[:4] + 1) / 2)
    # mapping endpoints: s ∈ {-1, 0, 1} → {0, 0.5, 1}
    assert np.allclose(((np.array([-1.0, 0.0, 1.0]) + 1) / 2), [0.0, 0.5, 1.0])


def test_membership_single_group_warns_half():
    X = np.random.default_rng(0).normal(size=(10, 2))
    with pytest.warns(UserWarning):
        m = membership_silhouette(X, np.zeros(10, dtype=int))
    assert np.all(m == 0.5)


def test_membership_nmf_rules():
    assert membership_nmf(np.array([3.0, 1.0])) == pytest.approx(0.75)
    assert membership_nmf(np.array([0.0, 0.0, 5.0])) == pytest.approx(1.0)
    with pytest.warns(UserWarning):
        assert membership_nmf(np.zeros(4)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        membership_nmf(np.array([-1.0, 2.0]))


def test_outlier_distance_ratio():
    distances = np.array([0.0, 1.0, 2.0, 3.0, 0.5])
    labels = np.array([0, 0, 0, 1, 1])
    out = outlier_distance_ratio(distances, labels)
    assert np.allclose(out[:3], [0.0, 0.5, 1.0])
    assert np.allclose(out[3:], [1.0, 0.5 / 3.0])
    # singleton group stays 0
    assert outlier_distance_ratio(np.array([7.0]), np.array([0]))[0] == 0.0


def test_outlier_entropy_endpoints():
    assert outlier_entropy(np.array([1.0, 0.0, 0.0])) == pytest.approx(0.0)
    assert outlier_entropy(np.ones(5)) == pytest.approx(1.0)
    assert outlier_entropy(np.array([3.0])) == 0.0  # k < 2
    with pytest.warns(UserWarning):
        assert outlier_entropy(np.zeros(3)) == 1.0
    with pytest.raises(ValueError):
        outlier_entropy(np.array([-0.5, 1.0]))


def test_record_bounds_enforced():
    UncertaintyRecord(0, 0.0, 1.0)
    with pytest.raises(ValueError):
        UncertaintyRecord(0, 1.5, 0.0)
    with pytest.raises(ValueError):
        UncertaintyRecord(0, 0.5, -0.1)


def test_dispatch_kmeans_and_nmf():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(size=(20, 2)), rng.normal(size=(20, 2)) + 6.0])
    km = fit_kmeans(X, K=2, seed=0)
    records = uncertainty_for("kmeans", km, X)
    assert len(records) == 40
    assert all(0 <= r.membership <= 1 and 0 <= r.outlier <= 1 for r in records)

    V = rng.random((30, 12))
    nm = fit_nmf(V, K=3, seed=0)
    records = uncertainty_for("nmf", nm)
    assert len(records) == 30
    want = membership_nmf(nm.W[0])
    assert records[0].membership == pytest.approx(want)

    with pytest.raises(TypeError):
        uncertainty_for("kmeans", nm, X)
    with pytest.raises(ValueError):
        uncertainty_for("mystery", km, X)
