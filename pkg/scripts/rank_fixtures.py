"""Print the scores and ranking of the bundled fixtures, plus the t1 refinement example."""

from lstab import apply_refinement, position_change, rank_dataset, score_tuple
from lstab.fixtures import NAMES, load_fixture


def main() -> None:
    for name in NAMES:
        d, f, _ = load_fixture(name)
        r = rank_dataset(f, d)
        print(f"# {name}")
        for pos, tid in enumerate(r.order, 1):
            print(f"{pos:3d}  {tid:14s} {r.scores[tid]:8.2f}")
    d, f, _ = load_fixture("universities")
    t1 = d.get("t1")
    refined = apply_refinement(t1, (-10, -5))
    print(f"\nt1 refined by (-10, -5): score {score_tuple(f, refined):.2f}, moves {position_change(f, d, t1, refined)} positions")


if __name__ == "__main__":
    main()
