"""NCD between English and Dutch paragraphs, per compressor, plus a quartet tree.

    python scripts/ncd_language_demo.py [--compressors builtin gzip bzip2] [--tree]
"""
import argparse
from importlib import resources

import numpy as np

from simdist import Blob, get_compressor, ncd_matrix, search


def load_corpus():
    root = resources.files("simdist") / "data" / "bilingual"
    files = sorted((f for f in root.iterdir() if f.name.endswith(".txt")), key=lambda f: f.name)
    return [Blob(f.name.removesuffix(".txt"), f.read_bytes()) for f in files]


def group_means(dm):
    lang = np.array([lab[:2] for lab in dm.labels])
    same = lang[:, None] == lang[None, :]
    off = ~np.eye(len(dm), dtype=bool)
    return dm.values[same & off].mean(), dm.values[~same].mean()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--compressors", nargs="+", default=["builtin", "gzip", "bzip2", "lzma"])
    ap.add_argument("--tree", action="store_true", help="also cluster the builtin matrix")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    blobs = load_corpus()
    print(f"{'compressor':<10} {'within':>8} {'cross':>8} {'diag max':>9}")
    for name in args.compressors:
        dm = ncd_matrix(get_compressor(name), blobs)
        within, cross = group_means(dm)
        print(f"{name:<10} {within:8.4f} {cross:8.4f} {np.diag(dm.values).max():9.4f}")
        if args.tree and name == "builtin":
            res = search(dm, seed=args.seed)
            print(f"  S={res.score:.3f} {res.tree.to_newick()}")


if __name__ == "__main__":
    main()
