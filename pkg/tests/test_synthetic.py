import numpy as np
import pytest

from xlcalib import BinningSpec, ece, fit_temperature, generate_synthetic


def test_deterministic():
    a = generate_synthetic(500, domain_shift=1.0, logit_scale=2.0, seed=5)
    b = generate_synthetic(500, domain_shift=1.0, logit_scale=2.0, seed=5)
    assert a[0] == b[0] and a[1] == b[1]
    assert a[0].features.tobytes() == b[0].features.tobytes()
    assert a[1].logits.tobytes() == b[1].logits.tobytes()


def test_seed_changes_samples_not_task():
    a, _ = generate_synthetic(200, seed=1)
    b, _ = generate_synthetic(200, seed=2)
    assert a != b


def test_scale_only_touches_logits():
    f1, p1 = generate_synthetic(300, logit_scale=1.0, seed=3)
    f2, p2 = generate_synthetic(300, logit_scale=4.0, seed=3)
    assert f1 == f2
    np.testing.assert_array_equal(p1.labels, p2.labels)
    np.testing.assert_allclose(p2.logits, 4.0 * p1.logits)


def test_shift_translates_features_only():
    f0, p0 = generate_synthetic(300, seed=3)
    f1, p1 = generate_synthetic(300, domain_shift=2.5, seed=3)
    delta = f1.features - f0.features
    np.testing.assert_allclose(delta, np.broadcast_to(delta[0], delta.shape), atol=1e-12)
    assert np.linalg.norm(delta[0]) == pytest.approx(2.5)
    assert p0 == p1


def test_calibrated_by_construction():
    _, ps = generate_synthetic(100_000, seed=0)
    assert ece(ps, BinningSpec(10)) < 0.01


def test_temperature_recovers_scale():
    _, ps = generate_synthetic(10_000, logit_scale=2.0, seed=8)
    assert fit_temperature(ps).T == pytest.approx(2.0, rel=0.05)


@pytest.mark.parametrize("kwargs", [{"n": 0}, {"n": 5, "num_classes": 1}, {"n": 5, "logit_scale": 0.0},
                                    {"n": 5, "domain_shift": -1.0}])
def test_rejects_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        generate_synthetic(**kwargs)
