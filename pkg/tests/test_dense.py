import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import reference as ref
from lstab import detect_dense_region, jenks_two_class, stability_curve, substream
from lstab.dense import curve_from_samples
from lstab.oracle import grid_stability
from lstab.synthetic import SynthConfig, generate_dense_dataset


def _ssd(xs):
    if not xs:
        return 0.0
    m = sum(xs) / len(xs)
    return sum((x - m) ** 2 for x in xs)


def test_curve_all_stable():
    c = curve_from_samples(np.zeros((5, 2)), np.zeros(5, dtype=int))
    assert c.k_star == 0
    assert c.estimates == {0: 1.0}


def test_curve_two_sample_trace():
    c = curve_from_samples(np.array([[0.1, 0.0], [0.9, 0.0]]), np.array([0, 1]))
    assert c.k_star == 1
    assert c.estimates[0] == 0.5
    assert c.estimates[1] == 1.0


def test_curve_stable_sample_containing_unstable_survives():
    c = curve_from_samples(np.array([[0.9, 0.0], [0.1, 0.0]]), np.array([0, 1]))
    assert c.estimates[0] == 0.0


@pytest.mark.parametrize(
    "values, small, large",
    [
        ([0.01, 0.02, 0.5, 0.6], [0, 1], [2, 3]),
        ([0.3, 0.3, 0.3], [0, 1, 2], []),
        ([0.0, 1.0], [0], [1]),
        ([0.6, 0.01, 0.5, 0.02], [1, 3], [0, 2]),
    ],
)
def test_jenks_examples(values, small, large):
    s, l = jenks_two_class(values)
    assert np.flatnonzero(s).tolist() == small
    assert np.flatnonzero(l).tolist() == large


@settings(max_examples=200)
@given(st.lists(st.integers(0, 50).map(lambda x: x / 50), min_size=1, max_size=15))
def test_jenks_is_optimal(values):
    s, l = jenks_two_class(values)
    best, _ = ref.jenks_two(values)
    small = [v for v, m in zip(values, s) if m]
    large = [v for v, m in zip(values, l) if m]
    if best is None:
        assert not large
        return
    assert large and max(small) < min(large)
    assert _ssd(small) + _ssd(large) == pytest.approx(best, abs=1e-9)


def test_jenks_empty_rejected():
    with pytest.raises(ValueError):
        jenks_two_class([])


@pytest.mark.parametrize("tid", ["CMU", "UIUC", "UCSD", "MIT"])
def test_csrankings_top_four_have_no_dense_region(csrankings, tid):
    d, f, rc = csrankings
    assert detect_dense_region(f, d, tid, rc, rng=substream(0, "dense")).k == 0


def test_csrankings_stanford(csrankings):
    d, f, rc = csrankings
    rep = detect_dense_region(f, d, "Stanford", rc, rng=substream(0, "dense"))
    assert rep.k == 1
    assert rep.differences[0] < 0.01


def test_report_invariants(csrankings):
    d, f, rc = csrankings
    rep = detect_dense_region(f, d, "UW", rc, rng=substream(1, "dense"), seed=1)
    assert sum(rep.differences) == pytest.approx(1.0, abs=1e-9)
    assert 0 <= rep.k <= rep.curve.k_star
    assert sorted(rep.small + rep.large) == list(range(rep.curve.k_star + 1))
    assert list(rep.to_dict()) == ["tuple_id", "k", "k_star", "curve", "differences", "clusters", "samples", "seed"]
    assert all(a >= b for a, b in zip(rep.curve.sizes, rep.curve.sizes[1:]))


def test_curves_non_decreasing_on_synthetic():
    sd = generate_dense_dataset(SynthConfig(seed=21))
    for i, tid in enumerate(sd.dataset.ids):
        c = stability_curve(sd.spec, sd.dataset, tid, sd.rc, 2000, substream(21, "dense", i))
        est = c.as_list()
        assert est[-1] == 1.0
        assert all(a <= b for a, b in zip(est, est[1:]))


def test_shared_pool_curve_tracks_grid_oracle():
    sd = generate_dense_dataset(SynthConfig(seed=22))
    rng = np.random.default_rng(22)
    for i, tid in enumerate(rng.choice(sd.dataset.ids, 4, replace=False)):
        c = stability_curve(sd.spec, sd.dataset, str(tid), sd.rc, 20_000, substream(22, "dense", i))
        for k in range(min(c.k_star, 3)):
            g = grid_stability(sd.spec, sd.dataset, str(tid), k, sd.rc, 101)
            assert c.estimates[k] == pytest.approx(g, abs=0.05)
