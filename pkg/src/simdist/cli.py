"""Command-line entry point: ``simdist <subcommand> ...``.

Subcommands: ncd, index, counts {validate,export}, ngd, cluster,
check-compressor, replay. Each run can write a JSON report holding its full
configuration; ``simdist replay REPORT`` re-executes it.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from . import __version__
from .compressor import COMPRESSORS, Blob, check_normality, get_compressor
from .matrix import DistanceMatrix
from .ncd import ncd_matrix, normalize_text_encoding
from .ngd import UNDEFINED, explain, format_ngd, ngd_matrix
from .quartet import DEFAULT_RESTARTS, search, to_dot
from .termindex import (CountProvider, exact_N, ingest_dir, load_snapshot, loads_snapshot,
                        dumps_snapshot)

MATRIX_FORMATS = ("matrix", "csv", "json")


class CLIError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    inputs: list[str] = field(default_factory=list)
    output: str | None = None
    report: str | None = None
    compressor: str = "builtin"
    normalizer: str = "M"
    log_base: float = 2.0
    seed: int = 0
    format: str = "matrix"
    clamp: bool = False
    symmetrization: str = "min"
    normalize_encoding: bool = False
    restarts: int = DEFAULT_RESTARTS
    max_non_improving: int | None = None
    snapshot: str | None = None
    index: str | None = None
    terms: list[str] = field(default_factory=list)
    matrix: bool = False
    explain: bool = False
    digits: int = 3
    vocab_cap: int = 5000

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise CLIError(f"unknown run-config keys: {sorted(unknown)}")
        return cls(**data)


def _workers() -> int:
    raw = os.environ.get("SIMDIST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise CLIError(f"SIMDIST_THREADS must be an integer, got {raw!r}") from None


def _write_all(outputs: dict[str, str]) -> None:
    """Write every artifact via temp files, renaming only once all are written."""
    staged = []
    try:
        for path, text in outputs.items():
            target = Path(path)
            fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, target))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, target in staged:
        os.replace(tmp, target)


def _report_text(cfg: RunConfig, results: dict, started: float) -> str:
    report = {"simdist_version": __version__, "config": cfg.to_dict(), "results": results,
              "wall_time": round(time.perf_counter() - started, 6)}
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str, out, results: dict, started: float, default_ext: str = ""):
    outputs = {}
    if cfg.output:
        outputs[cfg.output] = text
    report = cfg.report or (cfg.output + ".report.json" if cfg.output else None)
    if report:
        outputs[report] = _report_text(cfg, results, started)
    _write_all(outputs)
    if not cfg.output:
        out.write(text)


# --------------------------------------------------------------------------
# providers and inputs
# --------------------------------------------------------------------------

def resolve_data_path(name: str) -> Path:
    """A path as given, or else a file shipped in the package data directory."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("simdist") / "data" / name
    if bundled.is_file() or bundled.is_dir():
        return Path(str(bundled))
    raise CLIError(f"no such file: {name}")


def load_provider(cfg: RunConfig) -> CountProvider:
    if bool(cfg.snapshot) == bool(cfg.index):
        raise CLIError("give exactly one of --snapshot or --index")
    if cfg.snapshot:
        return load_snapshot(resolve_data_path(cfg.snapshot))
    return ingest_dir(resolve_data_path(cfg.index), vocab_cap=cfg.vocab_cap)


def _input_files(inputs: list[str]) -> list[Path]:
    files: list[Path] = []
    for name in inputs:
        p = resolve_data_path(name)
        if p.is_dir():
            files.extend(sorted(f for f in p.iterdir() if f.is_file()))
        else:
            files.append(p)
    return files


def _normalizer(cfg: RunConfig):
    if cfg.normalizer in ("M", "N"):
        return cfg.normalizer
    try:
        return float(cfg.normalizer)
    except ValueError:
        raise CLIError(f"--normalizer must be M, N or a number, got {cfg.normalizer!r}") from None


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_ncd(cfg: RunConfig, out) -> int:
    started = time.perf_counter()
    files = _input_files(cfg.inputs)
    if len(files) < 2:
        raise CLIError("ncd needs at least 2 input files")
    blobs = []
    for f in files:
        try:
            data = f.read_bytes()
        except OSError as exc:
            raise CLIError(f"cannot read {f}: {exc.strerror}") from None
        if cfg.normalize_encoding:
            data = normalize_text_encoding(data, f.name)
        blobs.append(Blob(f.stem, data))
    comp = get_compressor(cfg.compressor)
    dm = ncd_matrix(comp, blobs, cfg.symmetrization, workers=_workers(), clamp=cfg.clamp)
    results = {"compressor": comp.describe(), "n": len(dm), "labels": list(dm.labels)}
    _emit(cfg, dm.render(cfg.format), out, results, started)
    return 0


def cmd_index(cfg: RunConfig, out) -> int:
    started = time.perf_counter()
    if len(cfg.inputs) != 1:
        raise CLIError("index takes exactly one corpus directory")
    index = ingest_dir(resolve_data_path(cfg.inputs[0]), vocab_cap=cfg.vocab_cap)
    text = dumps_snapshot(index, cfg.terms or None)
    vocab = index.vocabulary()
    try:
        n_exact = exact_N(index)
    except ValueError:
        n_exact = None
    results = {"M": index.M, "N": n_exact, "vocabulary": len(vocab), "alpha": index.alpha(),
               "max_terms_per_page": index.max_terms_per_page()}
    summary = " ".join(f"{k}={'same-as-M' if v is None else v}" for k, v in results.items()) + "\n"
    if cfg.output:
        _emit(cfg, text, out, results, started)
        sys.stderr.write(summary)
    else:
        out.write(text)
    return 0


def cmd_counts(cfg: RunConfig, out) -> int:
    started = time.perf_counter()
    action = cfg.inputs[0] if cfg.inputs else None
    if action == "validate":
        if len(cfg.inputs) != 2:
            raise CLIError("usage: counts validate SNAPSHOT")
        path = resolve_data_path(cfg.inputs[1])
        snap = loads_snapshot(path.read_text(encoding="utf-8"))
        n = "same-as-M" if snap.N is None else snap.N
        out.write(f"ok: {path.name}: M={snap.M} N={n} terms={len(snap.terms)} pairs={len(snap.pairs)}\n")
        return 0
    if action == "export":
        provider = load_provider(cfg)
        text = dumps_snapshot(provider, cfg.terms or None)
        _emit(cfg, text, out, {"terms": cfg.terms}, started)
        return 0
    raise CLIError("counts needs an action: validate or export")


def cmd_ngd(cfg: RunConfig, out) -> int:
    started = time.perf_counter()
    terms = cfg.terms
    if len(terms) < 2:
        raise CLIError("ngd needs at least 2 terms")
    provider = load_provider(cfg)
    norm = _normalizer(cfg)
    if len(terms) == 2 and not cfg.matrix:
        parts = explain(provider, terms[0], terms[1], norm, cfg.log_base)
        lines = []
        if cfg.explain:
            lines += [f"f({parts.x})={parts.fx}", f"f({parts.y})={parts.fy}",
                      f"f({parts.x},{parts.y})={parts.fxy}", f"M={parts.M}",
                      f"N={provider.N if provider.N is not None else 'unknown'}",
                      f"normalizer={parts.normalizer!r}", f"log_base={cfg.log_base!r}",
                      f"numerator={parts.numerator!r}", f"denominator={parts.denominator!r}",
                      f"value={parts.value!r}"]
        lines.append(format_ngd(parts.value, cfg.digits))
        value = parts.value
        results = {"value": None if value is UNDEFINED else repr(value)}
        _emit(cfg, "\n".join(lines) + "\n", out, results, started)
        return 0
    dm = ngd_matrix(provider, terms, norm, cfg.log_base)
    _emit(cfg, dm.render(cfg.format), out, {"n": len(dm), "labels": list(dm.labels)}, started)
    return 0


def cmd_cluster(cfg: RunConfig, out) -> int:
    started = time.perf_counter()
    if len(cfg.inputs) != 1:
        raise CLIError("cluster takes exactly one matrix file")
    path = resolve_data_path(cfg.inputs[0])
    dm = DistanceMatrix.read(path)
    bad = dm.infinite_pairs()
    if bad:
        raise CLIError("matrix has infinite entries for: "
                       + ", ".join(f"({a}, {b})" for a, b in bad)
                       + "; drop those labels before clustering")
    result = search(dm, restarts=cfg.restarts, max_non_improving=cfg.max_non_improving,
                    seed=cfg.seed, workers=_workers())
    newick = result.tree.to_newick() + "\n"
    dot = to_dot(result.tree)
    results = result.report()
    results["wall_time_search"] = results.pop("wall_time")
    summary = f"S={result.score:.3f}\n{newick}"
    prefix = cfg.output
    if prefix:
        files = {prefix + ".nwk": newick, prefix + ".dot": dot,
                 (cfg.report or prefix + ".report.json"): _report_text(cfg, results, started)}
        _write_all(files)
    elif cfg.report:
        _write_all({cfg.report: _report_text(cfg, results, started)})
    out.write(summary)
    return 0


def cmd_check_compressor(cfg: RunConfig, out) -> int:
    files = _input_files(cfg.inputs)
    if len(files) < 2:
        raise CLIError("check-compressor needs at least 2 sample files")
    blobs = [Blob(f.name, f.read_bytes()) for f in files]
    report = check_normality(get_compressor(cfg.compressor), blobs)
    out.write(report.format_table() + "\n")
    return 0


COMMANDS = {
    "ncd": cmd_ncd,
    "index": cmd_index,
    "counts": cmd_counts,
    "ngd": cmd_ngd,
    "cluster": cmd_cluster,
    "check-compressor": cmd_check_compressor,
}


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    return COMMANDS[cfg.subcommand](cfg, out)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simdist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"simdist {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def outputs(p, fmt=True):
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--report", help="JSON run report path (default: OUTPUT.report.json)")
        if fmt:
            p.add_argument("--format", choices=MATRIX_FORMATS, default="matrix")

    def provider(p):
        p.add_argument("--snapshot", help="count snapshot file (bundled: paper.counts, paper-half.counts)")
        p.add_argument("--index", help="directory of text pages to index")
        p.add_argument("--vocab-cap", type=int, default=5000)

    p = sub.add_parser("ncd", help="NCD matrix over files")
    p.add_argument("inputs", nargs="+", help="files, or a directory of files")
    p.add_argument("-c", "--compressor", choices=sorted(COMPRESSORS), default="builtin")
    p.add_argument("--clamp", action="store_true", help="clip values into [0, 1]")
    p.add_argument("--symmetrization", choices=("min", "raw"), default="min")
    p.add_argument("--normalize-encoding", action="store_true",
                   help="transcode text inputs to NFC UTF-8 before compressing")
    outputs(p)

    p = sub.add_parser("index", help="index a corpus directory into a count snapshot")
    p.add_argument("inputs", nargs=1, metavar="CORPUS_DIR")
    p.add_argument("--terms", nargs="+", default=[], help="export only these terms")
    p.add_argument("--vocab-cap", type=int, default=5000)
    outputs(p, fmt=False)

    p = sub.add_parser("counts", help="validate or export count snapshots")
    p.add_argument("inputs", nargs="+", metavar="ACTION [SNAPSHOT]",
                   help="'validate SNAPSHOT' or 'export'")
    p.add_argument("--terms", nargs="+", default=[])
    provider(p)
    outputs(p, fmt=False)

    p = sub.add_parser("ngd", help="NGD of two terms, or a matrix over several")
    p.add_argument("terms", nargs="+")
    provider(p)
    p.add_argument("--normalizer", default="M", help="M (default), N, or a number")
    p.add_argument("--base", dest="log_base", type=float, default=2.0)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--matrix", action="store_true", help="emit a matrix even for two terms")
    p.add_argument("--digits", type=int, default=3)
    outputs(p)

    p = sub.add_parser("cluster", help="quartet-tree clustering of a matrix-v1 file")
    p.add_argument("inputs", nargs=1, metavar="MATRIX")
    p.add_argument("-o", "--output", help="prefix for .nwk, .dot and .report.json")
    p.add_argument("--report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--max-non-improving", type=int, default=None,
                   help="consecutive rejected mutations before a restart ends (default 1000*n)")

    p = sub.add_parser("check-compressor", help="measure compressor idempotency, monotonicity, symmetry")
    p.add_argument("inputs", nargs="+", metavar="SAMPLE")
    p.add_argument("-c", "--compressor", choices=sorted(COMPRESSORS), default="builtin")

    p = sub.add_parser("replay", help="re-run the configuration stored in a run report")
    p.add_argument("report_file", metavar="REPORT")
    p.add_argument("-o", "--output", help="override the output path")
    return parser


def _is_dir(name: str) -> bool:
    try:
        return resolve_data_path(name).is_dir()
    except CLIError:
        return False


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k in {f.name for f in fields(RunConfig)}}
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "replay":
            try:
                data = json.loads(Path(args.report_file).read_text(encoding="utf-8"))
                cfg = RunConfig.from_dict(data["config"])
            except (OSError, ValueError, KeyError, TypeError) as exc:
                raise CLIError(f"cannot read run report {args.report_file}: {exc}") from None
            if args.output:
                cfg.output = args.output
                cfg.report = None
        else:
            cfg = config_from_args(args)
            if args.subcommand == "ncd" and len(cfg.inputs) < 2 and not _is_dir(cfg.inputs[0]):
                parser.error("ncd needs at least 2 input files")
            if args.subcommand == "check-compressor" and len(cfg.inputs) < 2 and not _is_dir(cfg.inputs[0]):
                parser.error("check-compressor needs at least 2 sample files")
            if args.subcommand == "ngd" and len(cfg.terms) < 2:
                parser.error("ngd needs at least 2 terms")
        return run(cfg)
    except (CLIError, ValueError, ZeroDivisionError, OSError) as exc:
        sys.stderr.write(f"simdist: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
