"""Regenerate the 100-page color/number mini-corpus shipped in src/simdist/data/minicorpus.

Pages about colors, pages about numbers, and a smaller set of mixed pages
chosen so that every color co-occurs with every number at least once (all
NGD entries stay finite). Output is fully determined by the seed.

    python scripts/make_minicorpus.py [--seed 7] [--out DIR]
"""
import argparse
import itertools
import random
from pathlib import Path

COLORS = ["red", "orange", "yellow", "green", "blue", "purple", "pink", "brown", "black", "white"]
NUMBERS = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"]

COLOR_FRAMES = [
    "The painter mixed {w} on the palette before starting the canvas.",
    "Her dress was {w}, and the scarf matched the shade exactly.",
    "In the garden the flowers bloomed {w} against the wall.",
    "The designer chose a {w} tone for the kitchen tiles.",
    "A rainbow showed a band of {w} above the hills.",
    "The old car had been repainted a bright {w}.",
    "Children coloured the sky {w} with their crayons.",
]
NUMBER_FRAMES = [
    "The recipe needs {w} spoons of sugar and a pinch of salt.",
    "The train leaves at {w} o'clock from the main platform.",
    "She counted {w} apples in the basket on the table.",
    "The team scored {w} goals in the second half.",
    "It took {w} days to finish the report.",
    "There were {w} chairs around the long table.",
    "The answer to the puzzle was {w}, not more.",
]
FILLER = [
    "Nobody in the village remembered a quieter afternoon.",
    "The market closed early because of the wind.",
    "Later they walked home along the canal.",
    "A cat slept on the windowsill all day.",
    "The letter arrived a week after it was sent.",
    "Everyone agreed to meet again next month.",
]


def page(words, frames, rng):
    lines = [rng.choice(frames).format(w=w) for w in words]
    lines += rng.sample(FILLER, k=rng.randint(1, 3))
    rng.shuffle(lines)
    return " ".join(lines)


def generate(seed):
    rng = random.Random(seed)
    pages = []
    for _ in range(42):
        pages.append(page(rng.sample(COLORS, rng.randint(3, 6)), COLOR_FRAMES, rng))
    for _ in range(42):
        pages.append(page(rng.sample(NUMBERS, rng.randint(3, 6)), NUMBER_FRAMES, rng))
    # 16 mixed pages: cover the 10 x 10 cross pairs with blocks of 5 colors x 5 numbers (4 pages) ...
    halves_c = [COLORS[:5], COLORS[5:]]
    halves_n = [NUMBERS[:5], NUMBERS[5:]]
    for cs, ns in itertools.product(halves_c, halves_n):
        pages.append(page(cs, COLOR_FRAMES, rng) + " " + page(ns, NUMBER_FRAMES, rng))
    # ... plus 12 lighter ones with one color and one number
    for _ in range(12):
        pages.append(page([rng.choice(COLORS)], COLOR_FRAMES, rng) + " "
                     + page([rng.choice(NUMBERS)], NUMBER_FRAMES, rng))
    rng.shuffle(pages)
    return pages


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/simdist/data/minicorpus"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("page*.txt"):
        old.unlink()
    for i, text in enumerate(generate(args.seed)):
        (out / f"page{i:03d}.txt").write_text(text + "\n", encoding="utf-8")
    print(f"wrote {len(list(out.glob('page*.txt')))} pages to {out}")


if __name__ == "__main__":
    main()
