"""Sampling-based estimation of local stability with PAC-style verification."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    DataTuple,
    Dataset,
    RankingFunctionSpec,
    apply_refinement,
    position_change,
    rank_dataset,
)
from .errors import ConfigError, DimensionError, DomainError, LStabError
from .geometry import Boundary, ReasonableChanges, box_volume
from .sampling import Exhausted, estimate_stability, sample_stable_zone, sample_uniform_rc, substream

RC_GRID = 1024


class VerificationInfeasible(LStabError):
    """The stable zone is too small to sample from by rejection."""


def hoeffding_sample_count(eta: float, delta: float) -> int:
    """Samples needed so that ``p - p_hat <= eta`` with probability ``1 - delta``."""
    if not (0 < eta < 1) or not (0 < delta < 1):
        raise DomainError(f"eta and delta must lie in (0, 1), got eta={eta}, delta={delta}")
    return math.ceil(math.log(1.0 / delta) / (2.0 * eta * eta))


def _resolve(d: Dataset, t) -> DataTuple:
    if isinstance(t, DataTuple):
        d.index_of(t.id)
        return t
    return d.get(str(t))


class Probe:
    """Position changes of refinements of one tuple, in batches.

    Score-based rankings are re-ranked by counting how many of the other
    tuples outrank the refined tuple (identical to a full sort under the
    descending-score, ascending-id order). External rankings invoke the
    ranking process once per refinement. With ``fast_rerank`` and a
    tuple-independent function, k-stability is decided against the two
    tuples k+1 positions above and below only.
    """

    def __init__(self, spec: RankingFunctionSpec, d: Dataset, t, fast_rerank: bool = True, workers: int = 1):
        self.spec = spec
        self.d = d
        self.t = _resolve(d, t)
        spec.check_arity(d.schema)
        self.fast = bool(fast_rerank and spec.tuple_independent)
        self.workers = max(1, int(workers))
        self.ranking = rank_dataset(spec, d)
        self.pos = self.ranking.position(self.t.id)
        self.n = d.schema.n
        self.evaluations = 0
        if spec.score_based:
            tid = self.t.id
            others = [(i, s) for i, s in self.ranking.scores.items() if i != tid]
            self._gt = np.sort(np.array([s for _, s in others], dtype=float))
            self._eq = np.sort(np.array([s for i, s in others if i < tid], dtype=float))

    def refined_values(self, eps: np.ndarray) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        if eps.ndim == 1:
            eps = eps[None, :]
        if eps.shape[1] != self.n:
            raise DimensionError(f"refinements have {eps.shape[1]} components, schema has {self.n}")
        return np.asarray(self.t.values) + eps

    def _map(self, fn, items):
        if self.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]

    def new_positions(self, eps) -> np.ndarray:
        vals = self.refined_values(eps)
        self.evaluations += len(vals)
        if self.spec.score_based:
            s = self.spec.scores(vals)
            above = len(self._gt) - np.searchsorted(self._gt, s, side="right")
            ties = np.searchsorted(self._eq, s, side="right") - np.searchsorted(self._eq, s, side="left")
            return above + ties

        def one(row):
            refined = DataTuple(self.t.id, tuple(row))
            return rank_dataset(self.spec, self.d.replace(refined)).position(self.t.id)

        return np.array(self._map(one, list(vals)), dtype=int)

    def deltas(self, eps) -> np.ndarray:
        return np.abs(self.new_positions(eps) - self.pos)

    def unstable(self, eps, k: int) -> np.ndarray:
        """Boolean mask: refinement moves the tuple more than ``k`` positions."""
        if not self.fast:
            return self.deltas(eps) > k
        order = self.ranking.order
        up = order[self.pos - k - 1] if self.pos - k - 1 >= 0 else None
        down = order[self.pos + k + 1] if self.pos + k + 1 < len(order) else None
        vals = self.refined_values(eps)
        self.evaluations += len(vals)
        tid = self.t.id
        if self.spec.score_based:
            s = self.spec.scores(vals)
            bad = np.zeros(len(vals), dtype=bool)
            if up is not None:
                su = self.ranking.scores[up]
                bad |= (s > su) | ((s == su) & (tid < up))
            if down is not None:
                sd = self.ranking.scores[down]
                bad |= (sd > s) | ((sd == s) & (down < tid))
            return bad

        def one(row):
            refined = DataTuple(tid, tuple(row))
            members = [self.d.get(i) for i in (up, down) if i is not None] + [refined]
            sub = Dataset(self.d.schema, tuple(members), {})
            r = rank_dataset(self.spec, sub)
            p = r.position(tid)
            return (up is not None and p < r.position(up)) or (down is not None and p > r.position(down))

        return np.array(self._map(one, list(vals)), dtype=bool)


def is_k_stable(spec: RankingFunctionSpec, d: Dataset, t, eps, k: int, fast_rerank: bool = True) -> bool:
    """Whether refining ``t`` by ``eps`` keeps it within ``k`` positions.

    Without the fast path this performs a full re-rank of the modified dataset.
    """
    t = _resolve(d, t)
    if fast_rerank and spec.tuple_independent:
        return not bool(Probe(spec, d, t, True).unstable(np.asarray(eps, dtype=float), k)[0])
    return position_change(spec, d, t, apply_refinement(t, eps)) <= k


@dataclass
class EngineConfig:
    """Parameters of a local-stability run. Defaults follow the reference experiments."""

    k: int
    rc: ReasonableChanges
    construction_samples_per_iter: int = 20_000
    max_iterations: int = 20
    eta: float = 0.01
    delta: float = 0.05
    alpha_target: float = 0.05
    tau_v: float = 0.05
    volume_samples: int = 100_000
    rejection_max_tries: int = 1000
    seed: int = 0
    rc_reduction: bool = True
    fast_rerank: bool = True
    reduce_samples: int = 1000
    budget_mode: str = "fixed"
    total_construction_samples: int = 750_455
    workers: int = 1

    def __post_init__(self):
        if not isinstance(self.rc, ReasonableChanges):
            self.rc = ReasonableChanges(self.rc)
        if int(self.k) != self.k or self.k < 0:
            raise ConfigError("k must be a non-negative integer")
        self.k = int(self.k)
        for name in ("eta", "delta", "alpha_target", "tau_v"):
            v = getattr(self, name)
            if not (0 < v < 1):
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        for name in (
            "construction_samples_per_iter",
            "max_iterations",
            "volume_samples",
            "rejection_max_tries",
            "reduce_samples",
            "total_construction_samples",
            "workers",
        ):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.budget_mode not in ("fixed", "apportioned"):
            raise ConfigError(f"unknown budget mode {self.budget_mode!r}")

    @property
    def verification_samples(self) -> int:
        return hoeffding_sample_count(self.eta, self.delta)

    def per_iteration_budget(self) -> int:
        if self.budget_mode == "fixed":
            return self.construction_samples_per_iter
        v = self.verification_samples
        n = (self.total_construction_samples + v) / self.max_iterations - v
        if n < 1:
            raise ConfigError("apportioned budget leaves no construction samples per iteration")
        return int(n)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rc"] = self.rc.to_list()
        return out


@dataclass
class StabilityReport:
    tuple_id: str
    k: int
    estimate: float
    alpha: float | None
    delta: float
    eta: float
    converged: bool
    iterations_used: int
    construction_samples: int
    verification_samples: int
    verification_skipped: bool
    boundary: Boundary
    rc: ReasonableChanges
    rc_effective: ReasonableChanges
    scale_factor: float
    seed: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tuple_id": self.tuple_id,
            "k": self.k,
            "estimate": self.estimate,
            "alpha": self.alpha,
            "delta": self.delta,
            "eta": self.eta,
            "converged": self.converged,
            "iterations_used": self.iterations_used,
            "construction_samples": self.construction_samples,
            "verification_samples": self.verification_samples,
            "verification_skipped": self.verification_skipped,
            "scale_factor": self.scale_factor,
            "rc": self.rc.to_list(),
            "rc_effective": self.rc_effective.to_list(),
            "boundary": self.boundary.to_list(),
            "seed": self.seed,
            "config": self.config,
        }


def _construct(probe: Probe, k, rc, prior: Boundary, n_samples, rng, max_tries):
    """One construction step. Returns (boundary, draws, fraction of draws left stable)."""
    if len(prior) == 0:
        eps = sample_uniform_rc(rc, rng, n_samples)
    else:
        eps, _ = sample_stable_zone(rc, prior, n_samples, rng, max_tries)
    bad = probe.unstable(eps, k)
    sb = prior.merged(np.abs(eps[bad])) if bad.any() else prior
    survive = float(sb.stable_mask(np.abs(eps)).mean()) if len(eps) else 1.0
    return sb, len(eps), survive


def construct_boundary(
    spec,
    d,
    t,
    k,
    rc,
    prior: Boundary | None = None,
    counterexamples=None,
    n_samples: int = 20_000,
    rng=None,
    max_tries: int = 1000,
    fast_rerank: bool = True,
) -> Boundary:
    """Sample refinements and return the skyline of the k-unstable magnitudes found.

    With a non-empty prior (merged with ``counterexamples``), draws come only
    from the stable zone of that prior.
    """
    rc = rc if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc)
    rng = rng if rng is not None else np.random.default_rng()
    prior = prior if prior is not None else Boundary.empty(rc.n)
    if counterexamples is not None and np.size(counterexamples):
        prior = prior.merged(counterexamples)
    probe = Probe(spec, d, t, fast_rerank)
    sb, _, _ = _construct(probe, k, rc, prior, n_samples, rng, max_tries)
    return sb


def _verify(probe: Probe, k, rc, sb, n_v, eta, rng, max_tries):
    try:
        eps, _ = sample_stable_zone(rc, sb, n_v, rng, max_tries)
    except Exhausted as exc:
        raise VerificationInfeasible(str(exc)) from exc
    bad = probe.unstable(eps, k)
    alpha = float(bad.mean()) + eta
    return alpha, np.abs(eps[bad]), eps


def verify_boundary(spec, d, t, k, rc, sb: Boundary, eta=0.01, delta=0.05, rng=None, max_tries=1000, fast_rerank=True):
    """Bound the k-unstable probability inside the stable zone of ``sb``.

    Draws ``hoeffding_sample_count(eta, delta)`` refinements from the zone and
    returns ``(p_hat + eta, unstable magnitudes)``. With probability at least
    ``1 - delta`` the true unstable probability is at most the returned alpha.
    """
    rc = rc if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc)
    rng = rng if rng is not None else np.random.default_rng()
    probe = Probe(spec, d, t, fast_rerank)
    alpha, counter, _ = _verify(probe, k, rc, sb, hoeffding_sample_count(eta, delta), eta, rng, max_tries)
    return alpha, counter


def _first_unstable_step(probe: Probe, k: int, axis: int, width: float) -> int | None:
    """Smallest grid index j in 1..RC_GRID whose +/- single-axis refinement is k-unstable."""

    def unstable_at(j):
        eps = np.zeros((2, probe.n))
        eps[0, axis] = j * width / RC_GRID
        eps[1, axis] = -j * width / RC_GRID
        return bool(probe.unstable(eps, k).any())

    if not unstable_at(RC_GRID):
        return None
    lo, hi = 0, RC_GRID  # lo stable (zero refinement), hi unstable
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if unstable_at(mid):
            hi = mid
        else:
            lo = mid
    return hi


def reduce_rc(spec, d, t, k, rc, budget: int = 1000, rng=None, fast_rerank=True, probe: Probe | None = None):
    """Shrink the box using single-attribute refinements.

    For each attribute, the smallest k-unstable single-attribute magnitude
    found becomes the new half-width; nothing outside it can be in the stable
    zone. Monotone functions use a binary search over a 1024-step grid,
    others test ``budget`` random magnitudes with both signs.
    """
    rc = rc if isinstance(rc, ReasonableChanges) else ReasonableChanges(rc)
    probe = probe or Probe(spec, d, t, fast_rerank)
    rng = rng if rng is not None else np.random.default_rng()
    new = rc.eps_max.copy()
    for i, width in enumerate(rc.eps_max):
        if width <= 0:
            continue
        if spec.monotone:
            j = _first_unstable_step(probe, k, i, width)
            if j is not None:
                new[i] = min(width, j * width / RC_GRID)
        else:
            mags = rng.uniform(0.0, width, size=budget)
            eps = np.zeros((2 * budget, probe.n))
            eps[:budget, i] = mags
            eps[budget:, i] = -mags
            bad = probe.unstable(eps, k)
            bad = bad[:budget] | bad[budget:]
            if bad.any():
                new[i] = min(width, float(mags[bad].min()))
    return ReasonableChanges(new)


def lstability(spec: RankingFunctionSpec, d: Dataset, t, config: EngineConfig) -> StabilityReport:
    """Estimate the alpha-local stability of ``t`` at position tolerance ``config.k``.

    Iterates construction and verification until the verified alpha reaches
    ``config.alpha_target``, the estimated stable fraction drops below
    ``tau_v``, or ``max_iterations`` is hit; then estimates the stable-zone
    volume by Monte Carlo and rescales for any box reduction.
    """
    t = _resolve(d, t)
    cfg = config
    k = cfg.k
    rc = cfg.rc
    if rc.n != d.schema.n:
        raise DimensionError(f"RC has {rc.n} components, schema has {d.schema.n}")
    probe = Probe(spec, d, t, cfg.fast_rerank, cfg.workers)

    rc_eff = reduce_rc(spec, d, t, k, rc, cfg.reduce_samples, substream(cfg.seed, "reduce"), probe=probe) if cfg.rc_reduction else rc
    full = box_volume(rc)
    scale = box_volume(rc_eff) / full if full > 0 else 1.0

    n_v = cfg.verification_samples
    per_iter = cfg.per_iteration_budget()
    prior = Boundary.empty(rc.n)
    sb = prior
    counter = np.empty((0, rc.n))
    frac = 1.0
    alpha = None
    converged = skipped = False
    n_con = n_ver = 0
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        try:
            sb, drawn, survive = _construct(
                probe, k, rc_eff, prior, per_iter, substream(cfg.seed, "construct", it), cfg.rejection_max_tries
            )
        except Exhausted:
            skipped = True
            sb = prior
            break
        n_con += drawn
        frac *= survive
        if frac < cfg.tau_v:
            skipped = True
            break
        try:
            alpha, counter, eps = _verify(
                probe, k, rc_eff, sb, n_v, cfg.eta, substream(cfg.seed, "verify", it), cfg.rejection_max_tries
            )
        except VerificationInfeasible:
            skipped = True
            alpha = None
            break
        n_ver += n_v
        if alpha <= cfg.alpha_target:
            converged = True
            break
        prior = sb.merged(counter) if len(counter) else sb
        frac *= float(prior.stable_mask(np.abs(eps)).mean())

    final = sb.merged(counter) if len(counter) else sb
    if skipped:
        alpha = None
    est = estimate_stability(rc_eff, final, cfg.volume_samples, substream(cfg.seed, "volume")) * scale
    return StabilityReport(
        tuple_id=t.id,
        k=k,
        estimate=float(min(1.0, max(0.0, est))),
        alpha=alpha,
        delta=cfg.delta,
        eta=cfg.eta,
        converged=converged,
        iterations_used=it,
        construction_samples=n_con,
        verification_samples=n_ver,
        verification_skipped=skipped,
        boundary=final,
        rc=rc,
        rc_effective=rc_eff,
        scale_factor=float(scale),
        seed=int(cfg.seed),
        config=cfg.to_dict(),
    )
