"""NGD among color and number words on the bundled mini-corpus, then a quartet tree.

    python scripts/ngd_colors_numbers.py [--restarts 2] [--max-non-improving 2000]
"""
import argparse

import numpy as np

from simdist.cli import resolve_data_path
from simdist.ngd import ngd_matrix
from simdist.quartet import search
from simdist.termindex import exact_N, ingest_dir

COLORS = ["red", "orange", "yellow", "green", "blue", "purple", "pink", "brown", "black", "white"]
NUMBERS = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--normalizer", default="M", choices=["M", "N"])
    ap.add_argument("--restarts", type=int, default=2)
    ap.add_argument("--max-non-improving", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    index = ingest_dir(resolve_data_path("minicorpus"))
    print(f"M={index.M} N={exact_N(index)} vocabulary={len(index.vocabulary())}")
    dm = ngd_matrix(index, COLORS + NUMBERS, normalizer=args.normalizer)
    v = dm.values
    iu = np.triu_indices(10, 1)
    within = np.concatenate([v[:10, :10][iu], v[10:, 10:][iu]]).mean()
    print(f"mean NGD within groups {within:.4f}, across groups {v[:10, 10:].mean():.4f}")

    res = search(dm, restarts=args.restarts, max_non_improving=args.max_non_improving, seed=args.seed)
    print(f"S={res.score:.3f} in {res.wall_time:.1f} s")
    print(res.tree.to_newick())
    print("colors and numbers on separate sides of one edge:", res.tree.has_split(COLORS))


if __name__ == "__main__":
    main()
