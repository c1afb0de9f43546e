"""Command line front-end: ``polarbench encode | bench | selftest``.

Options can also come from a ``key = value`` config file given with
``--config``; command line flags take precedence. Exit codes: 0 success,
1 I/O error, 2 configuration or validation error, 3 failed invariant.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .encoding import ENCODINGS, fit_encoder, write_encoded
from .errors import DomainError, ParseError, PolarBenchError, SchemaMismatch
from .evaluation import CLASSIFIER_NAMES, ClassifierConfig, FoldPlan, run_benchmark
from .ingest import DEFAULT_MISSING_MARKERS, load_csv
from .report import fold_scores_csv, markdown_summary, wilcoxon_csv
from .selftest import run_checks

logger = logging.getLogger("polarbench")

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2, 3

OUT_ENV = "POLARBENCH_OUT"

ENCODING_SUFFIX = {
    "polar-boscovich": "polar",
    "polar-euclidean": "polar-euclidean",
    "impute-indicator": "impute-indicator",
    "impute": "impute",
}

LIST_KEYS = {"data", "schema", "encoding", "classifier", "p", "missing_markers"}
DEFAULTS = {
    "missing_markers": sorted(DEFAULT_MISSING_MARKERS),
    "delimiter": ",",
    "encoding": None,
    "classifier": ["nn"],
    "k": None,
    "p": ["1"],
    "alpha": "0.01",
    "max_depth": None,
    "folds": "5",
    "repeats": "5",
    "seed": "0",
    "threads": "1",
}


class ConfigError(Exception):
    pass


def read_config(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, list values are comma separated."""
    config = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key in LIST_KEYS:
                config.setdefault(key, []).extend(_split_list(value))
            else:
                config[key] = value
    return config


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",")]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--data", action="append", help="dataset file (repeatable)")
    parser.add_argument("--schema", action="append", help="sidecar schema file, one per --data")
    parser.add_argument(
        "--missing-markers",
        help="comma-separated tokens that denote a missing value (default: '?' and empty)",
    )
    parser.add_argument("--delimiter", help="field delimiter (default ',')")
    parser.add_argument("--encoding", action="append", help=f"one of {', '.join(ENCODINGS)} (repeatable)")
    parser.add_argument("--out", help=f"output directory (fallback: ${OUT_ENV})")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="write the encoded form of a dataset")
    _add_common(enc)

    bench = sub.add_parser("bench", help="run the cross-validation benchmark")
    _add_common(bench)
    bench.add_argument("--classifier", action="append", help=f"one of {', '.join(CLASSIFIER_NAMES)} (repeatable)")
    bench.add_argument("--k", help="neighbour count for nn / nn-d / frnn")
    bench.add_argument("--p", action="append", help="Minkowski p for neighbour classifiers (1 or 2; repeatable)")
    bench.add_argument("--alpha", help="CART cost-complexity pruning alpha (default 0.01)")
    bench.add_argument("--max-depth", help="CART maximum depth (default unlimited)")
    bench.add_argument("--folds", help="folds per repeat (default 5)")
    bench.add_argument("--repeats", help="cross-validation repeats (default 5)")
    bench.add_argument("--seed", help="random seed (default 0)")
    bench.add_argument("--threads", help="worker threads over fold cells (default 1)")

    st = sub.add_parser("selftest", help="check the polar-geometry identities")
    st.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing precedence)."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in ("config", "command", "verbose") or value is None:
            continue
        if key in LIST_KEYS:
            items = value if isinstance(value, list) else [value]
            value = [v for item in items for v in _split_list(item)]
        opts[key] = value
    if isinstance(opts.get("missing_markers"), str):
        opts["missing_markers"] = _split_list(opts["missing_markers"])
    return opts


def _int(opts, key, minimum=None) -> Optional[int]:
    value = opts.get(key)
    if value in (None, ""):
        return None
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"--{key.replace('_', '-')} expects an integer, got {value!r}") from None
    if minimum is not None and out < minimum:
        raise ConfigError(f"--{key.replace('_', '-')} must be at least {minimum}")
    return out


def _float(opts, key) -> float:
    try:
        return float(opts[key])
    except (TypeError, ValueError):
        raise ConfigError(f"--{key.replace('_', '-')} expects a number, got {opts[key]!r}") from None


def _encodings(opts, default) -> list[str]:
    names = opts.get("encoding") or default
    for n in names:
        if n not in ENCODINGS:
            raise ConfigError(f"unknown encoding {n!r}; valid names: {', '.join(ENCODINGS)}")
    return list(names)


def _datasets(opts) -> list[tuple[Path, Optional[Path]]]:
    data = opts.get("data") or []
    if not data:
        raise ConfigError("no dataset given (use --data)")
    schemas = opts.get("schema") or []
    if schemas and len(schemas) != len(data):
        raise ConfigError("--schema must be given once per --data")
    paths = [Path(d) for d in data]
    schema_paths = [Path(s) for s in schemas] if schemas else [None] * len(paths)
    for p in paths + [s for s in schema_paths if s is not None]:
        if not p.exists():
            raise FileNotFoundError(f"no such file: {p}")
    return list(zip(paths, schema_paths))


def _out_dir(opts, fallback: Path) -> Path:
    out = opts.get("out") or os.environ.get(OUT_ENV)
    return Path(out) if out else fallback


def _load(path, schema, opts):
    return load_csv(path, schema, opts["missing_markers"], opts.get("delimiter") or ",")


def cmd_encode(opts) -> int:
    """Fit the encoding on the whole file and write ``<stem>.<suffix>.csv``."""
    encodings = _encodings(opts, ["polar-boscovich"])
    datasets = _datasets(opts)
    for path, schema in datasets:
        data = _load(path, schema, opts)
        out_dir = _out_dir(opts, path.parent)
        out_dir.mkdir(parents=True, exist_ok=True)
        for enc in encodings:
            matrix = fit_encoder(data, enc).transform(data)
            target = out_dir / f"{path.stem}.{ENCODING_SUFFIX[enc]}.csv"
            write_encoded(target, matrix, [data.class_names[c] for c in data.labels])
            print(f"wrote {target} ({matrix.shape[0]} rows, {matrix.shape[1]} columns)")
    return EXIT_OK


def _classifiers(opts) -> list[ClassifierConfig]:
    k = _int(opts, "k", minimum=1)
    alpha = _float(opts, "alpha")
    if alpha < 0:
        raise ConfigError("--alpha must be non-negative")
    depth = _int(opts, "max_depth", minimum=1)
    ps = []
    for raw in opts.get("p") or ["1"]:
        try:
            p = float(raw)
        except ValueError:
            raise ConfigError(f"--p expects a number, got {raw!r}") from None
        if p not in (1, 2):
            raise ConfigError("--p must be 1 or 2")
        ps.append(p)
    configs = []
    for name in opts.get("classifier") or ["nn"]:
        if name not in CLASSIFIER_NAMES:
            raise ConfigError(f"unknown classifier {name!r}; valid names: {', '.join(CLASSIFIER_NAMES)}")
        if name == "cart":
            configs.append(ClassifierConfig(name, alpha=alpha, max_depth=depth))
        else:
            configs.extend(ClassifierConfig(name, k=k, p=p) for p in ps)
    return configs


def cmd_bench(opts) -> int:
    """Benchmark every dataset; failures are reported and the remaining datasets still run."""
    encodings = _encodings(opts, ["polar-boscovich", "impute-indicator"])
    classifiers = _classifiers(opts)
    plan = FoldPlan(
        n_folds=_int(opts, "folds", minimum=2),
        n_repeats=_int(opts, "repeats", minimum=1),
        seed=_int(opts, "seed"),
    )
    threads = _int(opts, "threads", minimum=1)
    datasets = _datasets(opts)
    out_dir = _out_dir(opts, Path("polarbench-out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    failures = 0
    for path, schema in datasets:
        try:
            data = _load(path, schema, opts)
            report = run_benchmark(
                data, encodings, classifiers, plan, threads=threads, name=path.stem
            )
        except (PolarBenchError, ValueError, OSError) as exc:
            failures += 1
            print(f"error: {path}: {exc}", file=sys.stderr)
            continue
        reports.append(report)
        target = out_dir / f"{path.stem}.folds.csv"
        target.write_text(fold_scores_csv(report))
        print(f"wrote {target}")
    if reports:
        (out_dir / "summary.md").write_text(markdown_summary(reports))
        (out_dir / "wilcoxon.csv").write_text(wilcoxon_csv(reports))
        print(f"wrote {out_dir / 'summary.md'} and {out_dir / 'wilcoxon.csv'}")
    return EXIT_IO if failures else EXIT_OK


def cmd_selftest(opts, checks=None) -> int:
    checks = run_checks() if checks is None else checks
    for check in checks:
        print(check.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_INVARIANT if failed else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        opts = resolve(args)
        if args.command == "encode":
            return cmd_encode(opts)
        if args.command == "bench":
            return cmd_bench(opts)
        return cmd_selftest(opts)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PolarBenchError as exc:
        print(f"{_error_kind(exc)} error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _error_kind(exc: Exception) -> str:
    for cls, kind in ((ParseError, "parse"), (SchemaMismatch, "schema"), (DomainError, "domain")):
        if isinstance(exc, cls):
            return kind
    return "validation"


if __name__ == "__main__":
    sys.exit(main())
