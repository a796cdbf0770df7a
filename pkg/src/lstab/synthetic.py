"""Synthetic datasets made of dense regions with known extents."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .core import Dataset, RankingFunctionSpec, rank_dataset
from .errors import DomainError
from .geometry import ReasonableChanges
from .sampling import substream


@dataclass
class SynthConfig:
    n_tuples: int = 100
    n_attrs: int = 2
    margin: float = 10.0
    region_min: int = 2
    region_max: int = 6
    noise_sigma: float | None = None  # defaults to margin / 20
    seed: int = 0

    def __post_init__(self):
        if self.n_tuples < 1 or self.n_attrs < 1:
            raise DomainError("need at least one tuple and one attribute")
        if not self.margin > 0:
            raise DomainError("margin must be positive")
        if self.region_min < 1 or self.region_max < self.region_min:
            raise DomainError("region sizes must satisfy 1 <= min <= max")
        if self.noise_sigma is None:
            self.noise_sigma = self.margin / 20
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be non-negative")


@dataclass
class SyntheticData:
    dataset: Dataset
    region: dict[str, int]
    truth_k: dict[str, int]
    region_scores: list[float]
    contiguous: bool
    config: SynthConfig

    @property
    def spec(self) -> RankingFunctionSpec:
        return RankingFunctionSpec.linear([1.0] * self.config.n_attrs)

    @property
    def rc(self) -> ReasonableChanges:
        return default_rc(self.config.margin, self.config.n_attrs)

    def truth_json(self) -> str:
        obj = {tid: {"region": self.region[tid], "k": self.truth_k[tid]} for tid in self.dataset.ids}
        return json.dumps(obj, indent=1)


def default_rc(margin: float, n_attrs: int) -> ReasonableChanges:
    return ReasonableChanges(np.full(n_attrs, margin / (2 * n_attrs)))


def generate_dense_dataset(config: SynthConfig | None = None, **kw) -> SyntheticData:
    """Build ``n_tuples`` tuples grouped into regions spaced ``margin`` apart in score.

    Region r (0 = best) has score ``margin * (R - r)``; its tuples are drawn
    from a Gaussian centred at ``score / d`` on every attribute. Ground-truth
    k for a tuple is the number of positions from it to the far end of its
    region in the sum ranking, i.e. the smallest k whose window covers the
    region.
    """
    cfg = config or SynthConfig(**kw)
    rng = substream(cfg.seed, "synth")
    sizes = []
    while sum(sizes) < cfg.n_tuples:
        sizes.append(int(rng.integers(cfg.region_min, cfg.region_max + 1)))
    sizes[-1] -= sum(sizes) - cfg.n_tuples
    n_regions = len(sizes)
    scores = [cfg.margin * (n_regions - r) for r in range(n_regions)]

    width = len(str(cfg.n_tuples - 1))
    ids, rows, region = [], [], {}
    for r, (size, s) in enumerate(zip(sizes, scores)):
        mean = np.full(cfg.n_attrs, s / cfg.n_attrs)
        pts = rng.normal(mean, cfg.noise_sigma, size=(size, cfg.n_attrs))
        for p in pts:
            tid = f"s{len(ids):0{width}d}"
            ids.append(tid)
            rows.append(p)
            region[tid] = r
    names = [f"a{i + 1}" for i in range(cfg.n_attrs)]
    d = Dataset.from_arrays(ids, np.array(rows), names)

    order = rank_dataset(RankingFunctionSpec.linear([1.0] * cfg.n_attrs), d).order
    blocks = [region[i] for i in order]
    contiguous = all(a <= b for a, b in zip(blocks, blocks[1:]))
    truth = {}
    for r, size in enumerate(sizes):
        members = [p for p, tid in enumerate(order) if region[tid] == r]
        lo, hi = min(members), max(members)
        for p in members:
            truth[order[p]] = max(p - lo, hi - p)
    return SyntheticData(d, region, truth, scores, contiguous, cfg)


def write_synthetic(data: SyntheticData, prefix: str) -> tuple[str, str]:
    """Write ``<prefix>.csv`` and the ``<prefix>.truth.json`` sidecar."""
    csv_path, truth_path = f"{prefix}.csv", f"{prefix}.truth.json"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(data.dataset.to_csv())
    with open(truth_path, "w", encoding="utf-8") as fh:
        fh.write(data.truth_json())
    return csv_path, truth_path


def synth_config_dict(cfg: SynthConfig) -> dict:
    return asdict(cfg)
