import itertools
import random

import pytest
from hypothesis import given, strategies as st

from simdist.termindex import (CountSnapshot, DegenerateProviderError, NormalizerUnknownError,
                               SnapshotError, dumps_snapshot, exact_N, g_mass, ingest, loads_snapshot,
                               normalize_term, save_snapshot, load_snapshot, snapshot_from_provider,
                               tokenize)

from conftest import DATA

# recounted with grep -lwi over the raw pages
MINICORPUS_FREQ = {"red": 25, "blue": 24, "white": 20, "one": 23, "seven": 26, "ten": 23, "the": 100}
MINICORPUS_JOINT = {("red", "one"): 1, ("red", "blue"): 12, ("six", "seven"): 15}
# double loop over the 138-term vocabulary, independent tokenizer
MINICORPUS_N = 92063
MINICORPUS_VOCAB = 138


def brute_N(pages):
    """Double loop over the vocabulary, straight from the definition."""
    vocab = sorted(set().union(*pages))
    total = 0
    for i, x in enumerate(vocab):
        total += sum(1 for p in pages if x in p)
        for y in vocab[i + 1:]:
            total += sum(1 for p in pages if x in p and y in p)
    return total


def random_corpus(rng, n_pages=None, vocab=None):
    words = [f"w{i}" for i in range(vocab or rng.randint(2, 50))]
    docs = []
    for k in range(n_pages or rng.randint(1, 30)):
        docs.append((f"p{k}", " ".join(rng.choices(words, k=rng.randint(1, 12)))))
    return docs


def test_two_page_example():
    idx = ingest([("1", "Horse rider"), ("2", "horse")])
    assert idx.freq("horse") == 2
    assert idx.freq("rider") == 1
    assert idx.joint_freq("horse", "rider") == 1
    assert idx.page_total() == 2


def test_empty_corpus_is_degenerate():
    idx = ingest([])
    assert idx.M == 0
    with pytest.raises(DegenerateProviderError):
        idx.freq("x")
    with pytest.raises(DegenerateProviderError):
        idx.page_total()


def test_duplicate_page_id():
    with pytest.raises(ValueError, match="duplicate page id"):
        ingest([("a", "x"), ("a", "y")])


def test_tokenization():
    assert tokenize("Horse-rider, HORSE_2 café!") == ["horse", "rider", "horse", "2", "café"]
    assert normalize_term("Horse") == "horse"
    with pytest.raises(ValueError):
        normalize_term("horse rider")


@given(st.text(max_size=80))
def test_tokenization_idempotent(text):
    for tok in tokenize(text):
        assert tokenize(tok) == [tok]
        assert normalize_term(tok) == tok


def test_minicorpus_pinned_counts(minicorpus):
    assert minicorpus.M == 100
    assert len(minicorpus.vocabulary()) == MINICORPUS_VOCAB
    for term, f in MINICORPUS_FREQ.items():
        assert minicorpus.freq(term) == f
    for (a, b), f in MINICORPUS_JOINT.items():
        assert minicorpus.joint_freq(a, b) == f == minicorpus.joint_freq(b, a)


def test_minicorpus_matches_independent_recount(minicorpus):
    pages = {}
    for p in sorted((DATA / "minicorpus").iterdir()):
        text = "".join(ch if ch.isalnum() else " " for ch in p.read_text().lower())
        pages[p.name] = set(text.split())
    for term in minicorpus.vocabulary():
        assert minicorpus.freq(term) == sum(term in s for s in pages.values())


def test_queries(horse_rider):
    assert horse_rider.freq("horse") == 46_700_000
    assert horse_rider.joint_freq("horse", "rider") == 2_630_000
    assert horse_rider.joint_freq("rider", "horse") == 2_630_000
    assert horse_rider.joint_freq("horse", "horse") == horse_rider.freq("horse")
    assert horse_rider.freq("zebra") == 0
    assert horse_rider.joint_freq("zebra", "horse") == 0


def test_exact_N_hand_counts():
    assert exact_N(ingest([("1", "a b")])) == 3
    assert exact_N(ingest([("1", "a b"), ("2", "a")])) == 4


def test_exact_N_minicorpus(minicorpus):
    assert exact_N(minicorpus) == MINICORPUS_N
    assert minicorpus.M <= MINICORPUS_N <= minicorpus.alpha() * minicorpus.M


def test_exact_N_cap():
    idx = ingest([("1", "a b c d")], vocab_cap=3)
    with pytest.raises(ValueError, match="normalizer 'M'"):
        exact_N(idx)
    assert idx.N is None


@pytest.mark.parametrize("seed", range(20))
def test_exact_N_equals_brute_force(seed):
    rng = random.Random(seed)
    docs = random_corpus(rng)
    idx = ingest(docs)
    assert exact_N(idx) == brute_N([set(tokenize(t)) for _, t in docs])


@pytest.mark.parametrize("seed", range(10))
def test_cardinality_inequalities_hold_by_construction(seed):
    idx = ingest(random_corpus(random.Random(100 + seed)))
    vocab = idx.vocabulary() + ["absent"]
    for x, y in itertools.product(vocab, repeat=2):
        fxy = idx.joint_freq(x, y)
        assert 0 <= fxy <= min(idx.freq(x), idx.freq(y)) <= idx.M
    for x in vocab:
        assert idx.joint_freq(x, x) == idx.freq(x)
    assert idx.M <= idx.N <= idx.alpha() * idx.M


def test_g_mass_one_page():
    idx = ingest([("1", "a b")])
    assert g_mass(idx, "a") == g_mass(idx, "b") == g_mass(idx, "a", "b") == 1 / 3


def test_g_mass_sums_to_one(minicorpus):
    vocab = minicorpus.vocabulary()
    total = sum(g_mass(minicorpus, x) for x in vocab)
    total += sum(g_mass(minicorpus, x, y) for x, y in itertools.combinations(vocab, 2))
    assert total == pytest.approx(1, abs=1e-9)


def test_g_mass_horse_rider_with_M(horse_rider):
    assert g_mass(horse_rider, "horse", normalizer="M") == pytest.approx(0.0058, abs=5e-5)
    with pytest.raises(NormalizerUnknownError, match="--normalizer M"):
        g_mass(horse_rider, "horse")


def test_snapshot_roundtrip_horse_rider(tmp_path, horse_rider):
    text = (DATA / "paper.counts").read_text()
    assert dumps_snapshot(horse_rider) == text
    save_snapshot(horse_rider, tmp_path / "p.counts")
    assert (tmp_path / "p.counts").read_text() == text
    again = load_snapshot(tmp_path / "p.counts")
    assert again == horse_rider


def test_snapshot_rejects_violations():
    with pytest.raises(SnapshotError, match="horse,rider"):
        loads_snapshot("simdist-counts v1 M=10 N=same-as-M\nt horse 3\nt rider 4\np horse rider 5\n")
    with pytest.raises(SnapshotError, match="duplicate pair"):
        loads_snapshot("simdist-counts v1 M=10 N=same-as-M\nt a 3\nt b 4\np a b 1\np a b 1\n")
    with pytest.raises(SnapshotError, match="termA < termB"):
        loads_snapshot("simdist-counts v1 M=10 N=same-as-M\nt a 3\nt b 4\np b a 1\n")
    with pytest.raises(SnapshotError, match="M"):
        loads_snapshot("simdist-counts v1 M=2 N=same-as-M\nt a 3\n")
    with pytest.raises(SnapshotError, match="header"):
        loads_snapshot("counts M=2\n")
    with pytest.raises(SnapshotError, match="unrecognised"):
        loads_snapshot("simdist-counts v1 M=2 N=same-as-M\nx a 1\n")
    with pytest.raises(SnapshotError, match="not a non-negative integer"):
        loads_snapshot("simdist-counts v1 M=2 N=same-as-M\nt a -1\n")
    with pytest.raises(SnapshotError, match="N=1"):
        loads_snapshot("simdist-counts v1 M=5 N=1\nt a 3\n")


def test_minicorpus_export_import_identical(minicorpus):
    text = dumps_snapshot(minicorpus)
    snap = loads_snapshot(text)
    assert dumps_snapshot(snap) == text
    assert snap.N == minicorpus.N == MINICORPUS_N
    vocab = minicorpus.vocabulary()
    for x in vocab:
        assert snap.freq(x) == minicorpus.freq(x)
    for x, y in itertools.combinations(vocab, 2):
        assert snap.joint_freq(x, y) == minicorpus.joint_freq(x, y)


def test_export_term_subset(minicorpus):
    snap = snapshot_from_provider(minicorpus, ["Red", "blue", "zebra"])
    assert snap.terms == {"blue": 24, "red": 25, "zebra": 0}
    assert snap.pairs == {("blue", "red"): 12}


def test_snapshot_scaled(horse_rider):
    big = horse_rider.scaled(3)
    assert big.M == 3 * horse_rider.M and big.freq("horse") == 3 * horse_rider.freq("horse")


def test_snapshot_pairs_stored_unordered():
    snap = CountSnapshot(10, {"a": 3, "b": 4}, {("b", "a"): 2})
    assert snap.joint_freq("a", "b") == snap.joint_freq("b", "a") == 2
