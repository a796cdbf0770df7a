"""Local stability curves and dense-region sizes for the CSRankings top ten."""

import argparse

from lstab import EngineConfig, detect_dense_region, lstability, substream
from lstab.fixtures import load_fixture


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    d, f, rc = load_fixture("csrankings")
    ks = range(args.k_max + 1)
    print("university".ljust(14) + "".join(f"  k={k:<4d}" for k in ks) + "  dense_k")
    for j, tid in enumerate(d.ids):
        est = [lstability(f, d, tid, EngineConfig(k=k, rc=rc, seed=args.seed)).estimate for k in ks]
        dense = detect_dense_region(f, d, tid, rc, 20_000, rng=substream(args.seed, "dense", j)).k
        print(tid.ljust(14) + "".join(f"  {e:6.3f}" for e in est) + f"  {dense:7d}")


if __name__ == "__main__":
    main()
