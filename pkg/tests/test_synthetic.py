import json
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lstab import rank_dataset
from lstab.errors import DomainError
from lstab.synthetic import SynthConfig, default_rc, generate_dense_dataset, write_synthetic


def test_default_size_and_margins():
    sd = generate_dense_dataset()
    assert len(sd.dataset) == 100
    assert np.allclose(np.diff(sd.region_scores), -10.0)
    assert sd.contiguous


def test_deterministic():
    a = generate_dense_dataset(SynthConfig(seed=4))
    b = generate_dense_dataset(SynthConfig(seed=4))
    assert a.dataset.to_csv() == b.dataset.to_csv()
    assert a.truth_json() == b.truth_json()
    assert generate_dense_dataset(SynthConfig(seed=5)).dataset.to_csv() != a.dataset.to_csv()


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(1, 60),
    dims=st.integers(1, 4),
    lo=st.integers(1, 4),
    extra=st.integers(0, 3),
    seed=st.integers(0, 2**32),
)
def test_regions_partition_and_truth_bounds(n, dims, lo, extra, seed):
    sd = generate_dense_dataset(SynthConfig(n_tuples=n, n_attrs=dims, region_min=lo, region_max=lo + extra, seed=seed))
    assert len(sd.dataset) == n
    assert set(sd.region) == set(sd.dataset.ids)
    sizes = defaultdict(int)
    for r in sd.region.values():
        sizes[r] += 1
    assert sorted(sizes) == list(range(len(sd.region_scores)))
    for tid, k in sd.truth_k.items():
        assert 0 <= k <= sizes[sd.region[tid]] - 1


def test_singleton_regions_have_zero_k():
    sd = generate_dense_dataset(SynthConfig(n_tuples=12, region_min=1, region_max=1))
    assert set(sd.truth_k.values()) == {0}


def test_region_ends_span_region():
    sd = generate_dense_dataset(SynthConfig(seed=6))
    order = rank_dataset(sd.spec, sd.dataset).order
    blocks = defaultdict(list)
    for tid in order:
        blocks[sd.region[tid]].append(tid)
    for members in blocks.values():
        assert sd.truth_k[members[0]] == len(members) - 1
        assert sd.truth_k[members[-1]] == len(members) - 1


def test_gap_and_spread_statistics():
    sd = generate_dense_dataset(SynthConfig(n_tuples=400, margin=10, seed=7))
    sums = sd.dataset.values.sum(axis=1)
    by_region = defaultdict(list)
    for s, tid in zip(sums, sd.dataset.ids):
        by_region[sd.region[tid]].append(s)
    regions = sorted(by_region)
    means = np.array([np.mean(by_region[r]) for r in regions])
    counts = np.array([len(by_region[r]) for r in regions])
    # each gap is c plus noise with standard error sigma*sqrt(d)*sqrt(1/n1 + 1/n2)
    se = 0.5 * np.sqrt(2) * np.sqrt(1 / counts[:-1] + 1 / counts[1:])
    assert np.all(np.abs(np.diff(means) + 10.0) < 4 * se)
    resid = np.concatenate([np.asarray(v) - np.mean(v) for v in by_region.values() if len(v) > 1])
    dof = sum(len(v) - 1 for v in by_region.values() if len(v) > 1)
    pooled = np.sqrt((resid**2).sum() / dof)
    # sum of d Gaussians with sigma = margin / 20
    assert pooled == pytest.approx(0.5 * np.sqrt(2), rel=0.2)


def test_default_rc():
    assert default_rc(10, 2).to_list() == [2.5, 2.5]
    assert default_rc(10, 4).to_list() == [1.25] * 4


@pytest.mark.parametrize(
    "kw", [{"margin": 0}, {"n_attrs": 0}, {"region_min": 0}, {"region_min": 5, "region_max": 3}, {"noise_sigma": -1}]
)
def test_invalid_parameters(kw):
    with pytest.raises(DomainError):
        SynthConfig(**kw)


def test_write_synthetic(tmp_path):
    sd = generate_dense_dataset(SynthConfig(n_tuples=10))
    csv_path, truth_path = write_synthetic(sd, str(tmp_path / "syn"))
    assert open(csv_path).readline().strip() == "id,a1,a2"
    truth = json.load(open(truth_path))
    assert set(truth) == set(sd.dataset.ids)
    assert all(set(v) == {"region", "k"} for v in truth.values())
