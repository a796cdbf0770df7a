"""Brute-force references and baselines used to check the estimators."""

from __future__ import annotations

import itertools

import numpy as np

from .core import DataTuple, Dataset, RankingFunctionSpec, rank_dataset
from .engine import Probe, VerificationInfeasible
from .errors import DimensionError, SizeError
from .geometry import Boundary, ReasonableChanges, min_skyline
from .sampling import Exhausted, sample_stable_zone

MAX_GRID_CELLS = 10_000_000


def _magnitude_axis(width: float, points: int) -> np.ndarray:
    """Non-negative half of a symmetric grid with ``points`` points over [-w, w]."""
    if width == 0 or points == 1:
        return np.zeros(1)
    half = (points - 1) / 2
    if points % 2:
        return width * np.arange(0, int(half) + 1) / half
    return width * (2 * np.arange(points // 2) + 1) / (points - 1)


def _full_rerank_positions(spec, d: Dataset, t: DataTuple, refined: np.ndarray) -> np.ndarray:
    """New 0-based positions of ``t`` after replacing it by each refined row."""
    if not spec.score_based:
        out = np.empty(len(refined), dtype=int)
        for i, row in enumerate(refined):
            out[i] = rank_dataset(spec, d.replace(DataTuple(t.id, tuple(row)))).position(t.id)
        return out
    ti = d.index_of(t.id)
    mask = np.ones(len(d), dtype=bool)
    mask[ti] = False
    other_scores = spec.scores(d.values[mask])
    lower_id = np.array([i < t.id for i in d.ids], dtype=bool)[mask]
    s = spec.scores(refined)
    out = np.empty(len(s), dtype=int)
    step = max(1, 4_000_000 // max(1, len(other_scores)))
    for a in range(0, len(s), step):
        sc = s[a : a + step, None]
        above = (other_scores[None, :] > sc) | ((other_scores[None, :] == sc) & lower_id[None, :])
        out[a : a + step] = above.sum(axis=1)
    return out


def grid_stability(spec, d: Dataset, t, k: int, rc, grid_points_per_dim: int = 201, return_details: bool = False):
    """Local stability on a regular grid over the signed box, by enumeration.

    Every grid refinement is classified by re-ranking the whole dataset. A
    magnitude cell is stable when no unstable grid magnitude lies below it
    componentwise (computed with cumulative ORs along each axis); the result
    is the fraction of signed grid points whose magnitude cell is stable.
    """
    rc = rc if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc)
    t = d.get(t) if isinstance(t, str) else t
    n = d.schema.n
    if rc.n != n:
        raise DimensionError(f"RC has {rc.n} components, schema has {n}")
    g = int(grid_points_per_dim)
    if n > 3 or g < 1 or g**n > MAX_GRID_CELLS:
        raise SizeError(f"grid of {g}^{n} points exceeds the enumeration limit")

    mags = [_magnitude_axis(w, g) for w in rc.eps_max]
    shape = tuple(len(m) for m in mags)
    base_pos = rank_dataset(spec, d).position(t.id)
    unstable = np.zeros(shape, dtype=bool)
    weight = np.zeros(shape)
    origin = np.asarray(t.values)
    for signs in itertools.product((1.0, -1.0), repeat=n):
        # skip sign patterns that would duplicate a zero magnitude
        axes = [s * m if s > 0 else -m[m > 0] for s, m in zip(signs, mags)]
        if any(len(a) == 0 for a in axes):
            continue
        idx = [np.arange(len(m)) if s > 0 else np.flatnonzero(m > 0) for s, m in zip(signs, mags)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        pos = _full_rerank_positions(spec, d, t, origin + grid)
        bad = (np.abs(pos - base_pos) > k).reshape([len(a) for a in axes])
        sub = np.ix_(*idx)
        unstable[sub] |= bad
        weight[sub] += 1
    contains_unstable = unstable.copy()
    for ax in range(n):
        contains_unstable = np.logical_or.accumulate(contains_unstable, axis=ax)
    stable = ~contains_unstable
    value = float((weight * stable).sum() / weight.sum())
    if not return_details:
        return value
    cells = np.stack(np.meshgrid(*mags, indexing="ij"), axis=-1)
    boundary = min_skyline(cells[unstable]) if unstable.any() else Boundary.empty(n)
    return value, boundary


def audit_boundary(spec, d: Dataset, t, k: int, rc, sb: Boundary, samples: int = 100_000, rng=None, max_tries: int = 1000) -> float:
    """Fresh estimate of the k-unstable probability inside the stable zone of ``sb``."""
    rc = rc if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc)
    rng = rng if rng is not None else np.random.default_rng()
    try:
        eps, _ = sample_stable_zone(rc, sb, samples, rng, max_tries)
    except Exhausted as exc:
        raise VerificationInfeasible(str(exc)) from exc
    probe = Probe(spec, d, t, fast_rerank=False)
    return float((probe.deltas(eps) > k).mean())


def global_stability_2d(d: Dataset, samples: int = 500_000, rng=None) -> float:
    """Fraction of random non-negative linear weightings that reproduce the
    ranking under equal weights. Weight directions are uniform in angle.
    """
    if d.schema.n != 2:
        raise DimensionError("global stability baseline needs exactly 2 attributes")
    rng = rng if rng is not None else np.random.default_rng()
    ref = rank_dataset(RankingFunctionSpec.linear((1.0, 1.0)), d)
    if len(ref) < 2:
        return 1.0
    order = [d.index_of(i) for i in ref.order]
    v = d.values[order]
    diff = v[:-1] - v[1:]
    ids = ref.order
    id_ok = np.array([ids[i] < ids[i + 1] for i in range(len(ids) - 1)])
    hits = 0
    for start in range(0, samples, 1 << 14):
        m = min(1 << 14, samples - start)
        theta = rng.uniform(0.0, np.pi / 2, size=m)
        w = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        # the order is reproduced iff every adjacent reference pair stays ordered
        gap = w @ diff.T
        ok = (gap > 0) | ((gap == 0) & id_ok[None, :])
        hits += int(ok.all(axis=1).sum())
    return hits / samples


def audit_flags(spec: RankingFunctionSpec, d: Dataset, rc, trials: int = 50, rng=None) -> dict:
    """Empirically check declared tuple-independence and monotonicity.

    Returns ``{"tuple_independent": bool, "monotone": bool}`` where False means
    a counterexample was found among ``trials`` random refinements.
    """
    rc = rc if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc)
    rng = rng if rng is not None else np.random.default_rng()
    base = rank_dataset(spec, d)
    independent = monotone = True
    ids = d.ids
    for _ in range(trials):
        tid = ids[rng.integers(len(ids))]
        t = d.get(tid)
        eps = rng.uniform(-1, 1, size=d.schema.n) * rc.eps_max
        new = rank_dataset(spec, d.replace(DataTuple(tid, tuple(np.asarray(t.values) + eps))))
        if [i for i in new.order if i != tid] != [i for i in base.order if i != tid]:
            independent = False
        up = np.abs(eps)
        better = rank_dataset(spec, d.replace(DataTuple(tid, tuple(np.asarray(t.values) + up))))
        if better.position(tid) > base.position(tid):
            monotone = False
    return {"tuple_independent": independent, "monotone": monotone}
