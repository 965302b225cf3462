import json
import subprocess
import sys

import numpy as np
import pytest

from simdist.cli import RunConfig, main
from simdist.matrix import DistanceMatrix
from simdist.quartet import parse_newick

from test_quartet import planted_matrix


def run(argv, capsys):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- ncd ---------------------------------------------------------------------------

def test_ncd_identical_files(tmp_path, capsys, bilingual):
    for name in ("a.txt", "b.txt"):
        (tmp_path / name).write_bytes(bilingual[0].data)
    code, out, _ = run(["ncd", tmp_path / "a.txt", tmp_path / "b.txt"], capsys)
    assert code == 0
    dm = DistanceMatrix.from_text(out)
    assert dm["a", "b"] < 0.2


def test_ncd_single_file_is_usage_error(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("hello")
    with pytest.raises(SystemExit) as exc:
        main(["ncd", str(tmp_path / "a.txt")])
    assert exc.value.code == 2
    assert "at least 2" in capsys.readouterr().err


def test_ncd_corpus_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        target = tmp_path / f"m{k}.txt"
        code, _, _ = run(["ncd", "bilingual", "-o", target], capsys)
        assert code == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    dm = DistanceMatrix.read(tmp_path / "m0.txt")
    assert len(dm) == 10 and dm.is_symmetric()
    report = json.loads((tmp_path / "m0.txt.report.json").read_text())
    assert report["config"]["compressor"] == "builtin"
    assert report["results"]["labels"] == list(dm.labels)


@pytest.mark.parametrize("fmt,start", [("csv", ",en1,"), ("json", "{")])
def test_ncd_formats(fmt, start, capsys):
    code, out, _ = run(["ncd", "bilingual", "--format", fmt], capsys)
    assert code == 0 and out.startswith(start)


def test_ncd_unreadable_leaves_no_output(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("hello there")
    target = tmp_path / "out.txt"
    code, _, err = run(["ncd", tmp_path / "a.txt", tmp_path / "missing.txt", "-o", target], capsys)
    assert code == 1 and "missing.txt" in err
    assert list(tmp_path.iterdir()) == [tmp_path / "a.txt"]


def test_ncd_threads_env(tmp_path, capsys, monkeypatch):
    _, serial, _ = run(["ncd", "bilingual"], capsys)
    monkeypatch.setenv("SIMDIST_THREADS", "3")
    _, threaded, _ = run(["ncd", "bilingual"], capsys)
    assert serial == threaded


# -- index / counts / ngd ----------------------------------------------------------

@pytest.mark.parametrize("snapshot,expected", [("paper.counts", "0.443"), ("paper-half.counts", "0.460")])
def test_ngd_horse_rider_values(snapshot, expected, capsys):
    code, out, _ = run(["ngd", "horse", "rider", "--snapshot", snapshot], capsys)
    assert code == 0 and out == expected + "\n"


def test_ngd_self_pair(capsys):
    code, out, _ = run(["ngd", "red", "red", "--index", "minicorpus"], capsys)
    assert code == 0 and out == "0.000\n"


def test_ngd_inf_and_undefined(capsys):
    assert run(["ngd", "horse", "zebra", "--snapshot", "paper.counts"], capsys)[1] == "inf\n"
    assert run(["ngd", "zebra", "yak", "--snapshot", "paper.counts"], capsys)[1] == "undefined\n"


def test_ngd_explain_recombines(capsys):
    code, out, _ = run(["ngd", "rider", "horse", "--snapshot", "paper.counts", "--explain"], capsys)
    assert code == 0
    fields = dict(line.split("=", 1) for line in out.splitlines() if "=" in line)
    assert fields["f(horse)"] == "46700000" and fields["f(horse,rider)"] == "2630000"
    assert fields["M"] == "8058044651"
    assert float(fields["numerator"]) / float(fields["denominator"]) == float(fields["value"])
    assert out.splitlines()[-1] == "0.443"


def test_ngd_normalizer_errors_surface(capsys):
    code, _, err = run(["ngd", "horse", "rider", "--snapshot", "paper.counts", "--normalizer", "N"], capsys)
    assert code == 1 and "--normalizer M" in err
    code, _, err = run(["ngd", "horse", "rider", "--snapshot", "paper.counts", "--normalizer", "1000"], capsys)
    assert code == 1 and "must not be smaller" in err


def test_ngd_one_term_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ngd", "horse", "--snapshot", "paper.counts"])
    assert exc.value.code == 2


def test_ngd_matrix_mode(capsys):
    code, out, _ = run(["ngd", "red", "blue", "one", "--index", "minicorpus"], capsys)
    dm = DistanceMatrix.from_text(out)
    assert code == 0 and dm.labels == ("red", "blue", "one")
    assert dm["red", "blue"] < dm["red", "one"]


def test_index_and_counts_round_trip(tmp_path, capsys):
    snap = tmp_path / "mini.counts"
    code, _, err = run(["index", "minicorpus", "-o", snap], capsys)
    assert code == 0 and "M=100" in err and "N=92063" in err
    code, out, _ = run(["counts", "validate", snap], capsys)
    assert code == 0 and out.startswith("ok: mini.counts: M=100 N=92063")
    via_index = run(["ngd", "red", "one", "--index", "minicorpus", "--digits", "9"], capsys)[1]
    via_snap = run(["ngd", "red", "one", "--snapshot", snap, "--digits", "9"], capsys)[1]
    assert via_index == via_snap


def test_counts_export_subset(tmp_path, capsys):
    code, out, _ = run(["counts", "export", "--snapshot", "paper.counts", "--terms", "horse"], capsys)
    assert code == 0
    assert out.splitlines() == ["simdist-counts v1 M=8058044651 N=same-as-M", "t horse 46700000"]


def test_counts_validate_rejects(tmp_path, capsys):
    bad = tmp_path / "bad.counts"
    bad.write_text("simdist-counts v1 M=10 N=same-as-M\nt a 3\nt b 4\np a b 5\n")
    code, _, err = run(["counts", "validate", bad], capsys)
    assert code == 1 and "(5, 3, 4)" in err


# -- cluster -----------------------------------------------------------------------

def write_matrix(path, dm):
    path.write_text(dm.to_text())
    return path


def test_cluster_planted(tmp_path, capsys):
    mat = write_matrix(tmp_path / "planted.txt", planted_matrix())
    code, out, _ = run(["cluster", mat, "-o", tmp_path / "tree"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "S=1.000"
    tree = parse_newick((tmp_path / "tree.nwk").read_text())
    assert tree.has_split("ab") and tree.has_split("de")
    assert (tmp_path / "tree.dot").read_text().startswith("graph tree {")
    report = json.loads((tmp_path / "tree.report.json").read_text())
    assert report["results"]["final_score"] == 1.0
    assert len(report["results"]["per_restart_best_score"]) == 10


def test_cluster_same_seed_same_tree(tmp_path, capsys):
    rng = np.random.default_rng(3)
    v = rng.random((7, 7))
    v = (v + v.T) / 2
    np.fill_diagonal(v, 0)
    mat = write_matrix(tmp_path / "m.txt", DistanceMatrix(tuple("abcdefg"), v))
    for k in range(2):
        run(["cluster", mat, "-o", tmp_path / f"t{k}", "--seed", 4, "--restarts", 2,
             "--max-non-improving", 300], capsys)
    assert (tmp_path / "t0.nwk").read_bytes() == (tmp_path / "t1.nwk").read_bytes()


def test_cluster_rejects_inf(tmp_path, capsys):
    v = planted_matrix().values.copy()
    v[1, 3] = v[3, 1] = np.inf
    mat = write_matrix(tmp_path / "m.txt", DistanceMatrix(tuple("abcde"), v))
    code, _, err = run(["cluster", mat, "-o", tmp_path / "tree"], capsys)
    assert code == 1 and "(b, d)" in err
    assert not (tmp_path / "tree.nwk").exists()


# -- check-compressor / replay -----------------------------------------------------

def test_check_compressor(capsys):
    code, out, _ = run(["check-compressor", "bilingual", "-c", "gzip"], capsys)
    assert code == 0
    for word in ("idempotency", "monotonicity", "symmetry"):
        assert word in out


def test_check_compressor_one_sample(tmp_path, capsys):
    (tmp_path / "a").write_text("x")
    with pytest.raises(SystemExit) as exc:
        main(["check-compressor", str(tmp_path / "a")])
    assert exc.value.code == 2


def test_replay_reproduces(tmp_path, capsys):
    first = tmp_path / "m.txt"
    run(["ncd", "bilingual", "-c", "bzip2", "--format", "csv", "-o", first], capsys)
    again = tmp_path / "again.txt"
    code, _, _ = run(["replay", str(first) + ".report.json", "-o", again], capsys)
    assert code == 0 and again.read_bytes() == first.read_bytes()


def test_run_config_round_trip():
    cfg = RunConfig("ngd", terms=["a", "b"], normalizer="N", seed=9)
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "simdist.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("simdist ")
