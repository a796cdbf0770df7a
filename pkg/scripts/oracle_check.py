"""Compare sampled local stability with the exhaustive grid oracle on small synthetic instances."""

import argparse
import time

import numpy as np

from lstab import EngineConfig, lstability
from lstab.oracle import grid_stability
from lstab.synthetic import SynthConfig, generate_dense_dataset


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=3)
    ap.add_argument("--tuples", type=int, default=5)
    ap.add_argument("--grid", type=int, default=201)
    args = ap.parse_args()

    diffs = []
    start = time.perf_counter()
    for inst in range(args.instances):
        sd = generate_dense_dataset(SynthConfig(seed=100 + inst))
        rng = np.random.default_rng(inst)
        for tid in map(str, rng.choice(sd.dataset.ids, args.tuples, replace=False)):
            for k in (0, 1, 2):
                rep = lstability(sd.spec, sd.dataset, tid, EngineConfig(k=k, rc=sd.rc, seed=inst))
                g = grid_stability(sd.spec, sd.dataset, tid, k, sd.rc, args.grid)
                diffs.append(abs(rep.estimate - g))
                print(f"{inst} {tid} k={k} sampled={rep.estimate:.4f} grid={g:.4f}")
    d = np.array(diffs)
    print(f"{len(d)} cases, mean |diff| {d.mean():.4f}, max {d.max():.4f}, {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
