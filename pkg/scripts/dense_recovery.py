"""How often dense-region detection recovers the planted region width on synthetic data."""

import argparse
from collections import Counter

from lstab import detect_dense_region, substream
from lstab.synthetic import SynthConfig, generate_dense_dataset


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5, help="number of synthetic datasets")
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--samples", type=int, default=20_000)
    args = ap.parse_args()

    total = hits = 0
    errors: Counter[int] = Counter()
    for seed in range(args.seeds):
        sd = generate_dense_dataset(SynthConfig(n_tuples=args.n, seed=seed))
        got = 0
        for i, tid in enumerate(sd.dataset.ids):
            k = detect_dense_region(sd.spec, sd.dataset, tid, sd.rc, args.samples, rng=substream(seed, "dense", i)).k
            got += k == sd.truth_k[tid]
            errors[k - sd.truth_k[tid]] += 1
        print(f"seed {seed}: {got}/{len(sd.dataset)}")
        hits += got
        total += len(sd.dataset)
    print(f"overall {hits}/{total} = {hits / total:.3f}")
    print("detected - truth:", dict(sorted(errors.items())))


if __name__ == "__main__":
    main()
