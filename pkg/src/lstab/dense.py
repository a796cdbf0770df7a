"""Dense-region detection from a shared pool of sampled position changes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, RankingFunctionSpec
from .engine import Probe
from .geometry import ReasonableChanges, min_skyline
from .sampling import sample_uniform_rc


@dataclass
class StabilityCurve:
    k_star: int
    estimates: dict[int, float]
    sizes: list[int] = field(default_factory=list)  # |S| after each removal sweep

    def as_list(self) -> list[float]:
        return [self.estimates[k] for k in range(self.k_star + 1)]


@dataclass
class DenseRegionReport:
    tuple_id: str
    k: int
    curve: StabilityCurve
    differences: list[float]
    small: list[int]
    large: list[int]
    seed: int | None = None
    samples: int = 0

    def to_dict(self) -> dict:
        return {
            "tuple_id": self.tuple_id,
            "k": self.k,
            "k_star": self.curve.k_star,
            "curve": self.curve.as_list(),
            "differences": self.differences,
            "clusters": {"small": self.small, "large": self.large},
            "samples": self.samples,
            "seed": self.seed,
        }


def curve_from_samples(magnitudes: np.ndarray, deltas: np.ndarray) -> StabilityCurve:
    """Per-k stability estimates from one pool of (refinement, position change) pairs.

    For each k below the largest observed change, pairs that are k-stable
    and contain no remaining k-unstable refinement are removed from the pool;
    the estimate is one minus the surviving fraction.
    """
    mags = np.abs(np.asarray(magnitudes, dtype=float))
    deltas = np.asarray(deltas, dtype=int)
    n_total = len(deltas)
    k_star = int(deltas.max()) if n_total else 0
    alive = np.ones(n_total, dtype=bool)
    estimates, sizes = {}, []
    for k in range(k_star):
        live = np.flatnonzero(alive)
        unstable = live[deltas[live] > k]
        sky = min_skyline(mags[unstable])
        cand = live[deltas[live] <= k]
        if len(cand):
            alive[cand[sky.stable_mask(mags[cand])]] = False
        sizes.append(int(alive.sum()))
        estimates[k] = 1.0 - sizes[-1] / n_total
    estimates[k_star] = 1.0
    return StabilityCurve(k_star, estimates, sizes)


def stability_curve(spec: RankingFunctionSpec, d: Dataset, t, rc, n_samples: int, rng) -> StabilityCurve:
    rc = rc if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc)
    probe = Probe(spec, d, t, fast_rerank=False)
    eps = sample_uniform_rc(rc, rng, n_samples)
    return curve_from_samples(np.abs(eps), probe.deltas(eps))


def jenks_two_class(values) -> tuple[np.ndarray, np.ndarray]:
    """Optimal two-class natural-breaks split of ``values``.

    Returns boolean masks ``(small, large)`` aligned with the input. The break
    minimises the total within-class sum of squared deviations; only breaks
    between distinct values are considered, so equal values never straddle
    it. With no variance ``large`` is all False.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n == 0:
        raise ValueError("jenks_two_class needs at least one value")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    c1 = np.cumsum(xs)
    c2 = np.cumsum(xs * xs)
    best, best_i = np.inf, None
    for i in range(1, n):  # left class xs[:i], right class xs[i:]
        if xs[i] == xs[i - 1]:
            continue
        nl, nr = i, n - i
        sl, sr = c1[i - 1], c1[-1] - c1[i - 1]
        ql, qr = c2[i - 1], c2[-1] - c2[i - 1]
        ssd = (ql - sl * sl / nl) + (qr - sr * sr / nr)
        if ssd < best - 1e-15:
            best, best_i = ssd, i
    large = np.zeros(n, dtype=bool)
    if best_i is not None:
        large[order[best_i:]] = True
    return ~large, large


def detect_dense_region(
    spec: RankingFunctionSpec, d: Dataset, t, rc, n_samples: int = 20_000, rng=None, seed=None
) -> DenseRegionReport:
    """Suggest the k spanning the dense region around ``t``.

    Differences between consecutive curve values are split into small and
    large by natural breaks; the first k with a large difference is returned
    (0 when no split exists).
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    probe_t = d.get(t) if isinstance(t, str) else t
    curve = stability_curve(spec, d, probe_t, rc, n_samples, rng)
    est = curve.as_list()
    diffs = [est[0]] + [est[k] - est[k - 1] for k in range(1, curve.k_star + 1)]
    small, large = jenks_two_class(diffs)
    large_ks = [int(k) for k in np.flatnonzero(large)]
    k = min(large_ks) if large_ks else 0
    return DenseRegionReport(
        tuple_id=probe_t.id,
        k=k,
        curve=curve,
        differences=[float(x) for x in diffs],
        small=[int(i) for i in np.flatnonzero(small)],
        large=large_ks,
        seed=seed,
        samples=n_samples,
    )
