"""Random streams, uniform box sampling and rejection sampling from stable zones."""

from __future__ import annotations

import numpy as np

from .geometry import Boundary, ReasonableChanges

_MASK64 = (1 << 64) - 1

# fixed purpose tags; changing them changes every report
PURPOSES = {
    "reduce": 1,
    "construct": 2,
    "verify": 3,
    "volume": 4,
    "dense": 5,
    "audit": 6,
    "global": 7,
    "synth": 8,
}


def substream(seed: int, purpose: str, *counter: int) -> np.random.Generator:
    """Independent, reproducible generator for one phase of a computation."""
    key = [int(seed) & _MASK64, PURPOSES[purpose], *(int(c) & _MASK64 for c in counter)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def sample_uniform_rc(rc: ReasonableChanges, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw refinement(s) uniformly from the box; shape (n,) or (size, n)."""
    e = rc.eps_max
    shape = (rc.n,) if size is None else (size, rc.n)
    return rng.uniform(-1.0, 1.0, size=shape) * e


def rejection_sample_stable_zone(
    rc: ReasonableChanges, sb: Boundary, rng: np.random.Generator, max_tries: int = 1000
) -> np.ndarray | None:
    """One uniform draw from ``RC`` restricted to the stable zone of ``sb``.

    Returns None after ``max_tries`` consecutive rejections.
    """
    for _ in range(max_tries):
        eps = sample_uniform_rc(rc, rng)
        if sb.stable_mask(np.abs(eps)[None, :])[0]:
            return eps
    return None


class Exhausted(Exception):
    """Rejection sampling hit ``max_tries`` consecutive rejections."""

    def __init__(self, accepted: np.ndarray, draws: int):
        super().__init__(f"rejection sampling exhausted after {draws} draws")
        self.accepted = accepted
        self.draws = draws


def sample_stable_zone(
    rc: ReasonableChanges,
    sb: Boundary,
    count: int,
    rng: np.random.Generator,
    max_tries: int = 1000,
) -> tuple[np.ndarray, int]:
    """Draw ``count`` refinements from ``RC`` restricted to the stable zone.

    Equivalent to ``count`` sequential calls of ``rejection_sample_stable_zone``
    but vectorised. Returns ``(samples, draws)``; raises ``Exhausted`` when a
    run of ``max_tries`` consecutive rejections occurs.
    """
    if len(sb) == 0:
        return sample_uniform_rc(rc, rng, count), count
    accepted = []
    n_acc = 0
    draws = 0
    run = 0
    rate = 0.5
    while n_acc < count:
        need = count - n_acc
        block = int(min(max(1024, 1.2 * need / max(rate, 1e-3)), 1 << 20))
        eps = sample_uniform_rc(rc, rng, block)
        idx = np.flatnonzero(sb.stable_mask(np.abs(eps)))
        # rejection run preceding each acceptance, then the trailing run
        gaps = np.diff(np.concatenate([[-1], idx, [block]])) - 1
        gaps[0] += run
        take = idx[:need]
        bad = np.flatnonzero(gaps[: len(take)] >= max_tries)
        if len(bad):
            accepted.append(eps[take[: bad[0]]])
            raise Exhausted(_stack(accepted, rc.n), draws + block)
        accepted.append(eps[take])
        n_acc += len(take)
        if n_acc >= count:
            draws += int(take[-1]) + 1
            break
        run = int(gaps[-1])
        draws += block
        if run >= max_tries:
            raise Exhausted(_stack(accepted, rc.n), draws)
        rate = max(len(idx) / block, 1e-6)
    return _stack(accepted, rc.n), draws


def _stack(parts, n) -> np.ndarray:
    return np.vstack(parts) if parts else np.empty((0, n))


def estimate_stability(rc: ReasonableChanges, sb: Boundary, m: int, rng: np.random.Generator) -> float:
    """Monte Carlo fraction of the box lying in the stable zone of ``sb``."""
    if len(sb) == 0:
        return 1.0
    hits = 0
    for start in range(0, m, 1 << 16):
        size = min(1 << 16, m - start)
        hits += int(sb.stable_mask(np.abs(sample_uniform_rc(rc, rng, size))).sum())
    return hits / m
