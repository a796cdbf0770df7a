import numpy as np
import pytest

from lstab import Boundary, ReasonableChanges, estimate_stability, rejection_sample_stable_zone, sample_uniform_rc, substream
from lstab.sampling import Exhausted, sample_stable_zone

RC11 = ReasonableChanges((1, 1))


def test_substreams_are_reproducible_and_distinct():
    a = substream(7, "construct", 1).random(4)
    assert np.array_equal(a, substream(7, "construct", 1).random(4))
    assert not np.array_equal(a, substream(7, "construct", 2).random(4))
    assert not np.array_equal(a, substream(7, "verify", 1).random(4))
    assert not np.array_equal(a, substream(8, "construct", 1).random(4))


def test_degenerate_box():
    eps = sample_uniform_rc(ReasonableChanges((0, 0)), substream(0, "audit"), 10)
    assert np.all(eps == 0)


def test_uniform_moments():
    eps = sample_uniform_rc(RC11, substream(1, "audit"), 100_000)
    assert np.all(np.abs(eps.mean(axis=0)) < 0.02)
    assert np.abs(eps).max() <= 1
    # variance of U(-1, 1) is 1/3
    assert np.all(np.abs(eps.var(axis=0) - 1 / 3) < 0.01)


def test_draws_stay_in_box():
    rc = ReasonableChanges((5, 3))
    eps = sample_uniform_rc(rc, substream(2, "audit"), 1000)
    assert all(np.all(np.abs(e) <= rc.eps_max) for e in eps)


def test_rejection_empty_boundary_accepts_first():
    assert rejection_sample_stable_zone(RC11, Boundary.empty(2), substream(0, "audit"), max_tries=1) is not None


def test_rejection_exhausts_on_zero_boundary():
    assert rejection_sample_stable_zone(RC11, Boundary([(0, 0)]), substream(0, "audit"), max_tries=50) is None
    with pytest.raises(Exhausted):
        sample_stable_zone(RC11, Boundary([(0, 0)]), 10, substream(0, "audit"), max_tries=50)


def test_vectorised_rejection_stays_in_zone():
    sb = Boundary([(0.5, 0.5)])
    eps, draws = sample_stable_zone(RC11, sb, 5000, substream(3, "audit"))
    assert eps.shape == (5000, 2)
    assert sb.stable_mask(np.abs(eps)).all()
    assert draws >= 5000
    # acceptance ratio near the closed-form area 0.75
    assert 5000 / draws == pytest.approx(0.75, abs=0.03)


def test_vectorised_rejection_respects_max_tries():
    # stable area fraction 1e-4: a run of 200 rejections is almost certain
    sb = Boundary([(0.01, 0.0), (0.0, 0.01)])
    with pytest.raises(Exhausted):
        sample_stable_zone(RC11, sb, 100, substream(4, "audit"), max_tries=200)


def test_estimate_stability_trivial():
    assert estimate_stability(RC11, Boundary.empty(2), 100, substream(0, "volume")) == 1.0
    assert estimate_stability(RC11, Boundary([(0, 0)]), 1000, substream(0, "volume")) == 0.0


def test_estimate_stability_quadrant():
    v = estimate_stability(RC11, Boundary([(0.5, 0.5)]), 100_000, substream(5, "volume"))
    assert v == pytest.approx(0.75, abs=0.01)
