"""Command-line entry point: run presets or JSON configs and write CSV results."""

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from typing import List

from . import __version__
from .config import (
    PRESET_DESCRIPTIONS,
    ExperimentConfig,
    Variant,
    parse_snr_grid,
    preset_catalog,
    resolve_config,
    with_overrides,
)
from .errors import InvalidConfigurationError, RateSplitError
from .simulate import (
    ReportRow,
    SchemeSpec,
    SplitOptions,
    grouped_system,
    run_trials,
    uniform_system,
)

log = logging.getLogger("ratesplit")

CSV_COLUMNS = (
    "snr_db",
    "scheme",
    "sum_rate_mean",
    "sum_rate_stderr",
    "rate_common_outer",
    "rate_common_inner",
    "rate_private",
    "split_t",
    "split_alpha",
    "split_beta",
    "trials",
    "seed",
)
_FLOAT_COLUMNS = {c for c in CSV_COLUMNS if c not in ("scheme", "trials", "seed")}
MANIFEST_NAME = "manifest.json"


def format_float(x: float) -> str:
    return f"{x:.12g}"


def rows_to_csv(rows: List[ReportRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            format_float(getattr(row, c)) if c in _FLOAT_COLUMNS else str(getattr(row, c))
            for c in CSV_COLUMNS
        )
    return buf.getvalue()


def csv_to_rows(text: str) -> List[ReportRow]:
    """Parse CSV text written by :func:`rows_to_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        kw = {}
        for c, v in zip(CSV_COLUMNS, rec):
            kw[c] = float(v) if c in _FLOAT_COLUMNS else (v if c == "scheme" else int(v))
        rows.append(ReportRow(**kw))
    return rows


def write_atomic(path: str, data: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_system(cfg: ExperimentConfig, variant: Variant):
    if cfg.grouped:
        return grouped_system(
            cfg.M, cfg.group_sizes, variant.spread, variant.tau2, cfg.b, cfg.r_d,
            cfg.quadrature_points,
        )
    return uniform_system(cfg.M, variant.K, variant.spread, variant.tau2, cfg.quadrature_points)


def split_options(cfg: ExperimentConfig) -> SplitOptions:
    return SplitOptions(
        mu=cfg.mu,
        inner_gamma=cfg.inner_gamma,
        strong_rule=cfg.strong_rule,
        weak_threshold=cfg.weak_threshold,
        literal_group_indices=cfg.literal_group_indices,
    )


def output_name(cfg: ExperimentConfig, variant: Variant) -> str:
    return f"{cfg.name}_{variant.slug()}.csv"


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers=None) -> dict:
    """Run every sweep variant, write one CSV each and seal a manifest.

    Returns the manifest dictionary.
    """
    out_dir = out_dir or cfg.output_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise InvalidConfigurationError(f"cannot create output directory {out_dir!r}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise InvalidConfigurationError(f"output directory {out_dir!r} is not writable")
    started = time.time()
    files = {}
    specs = [SchemeSpec(s, cfg.grid_step) for s in cfg.schemes]
    options = split_options(cfg)
    for variant in cfg.variants():
        log.info("running %s %s", cfg.name, variant.slug())
        system = build_system(cfg, variant)
        report = run_trials(
            system, specs, cfg.snr_db, cfg.trials, cfg.seed,
            asymptotic=cfg.asymptotic, workers=workers, options=options,
        )
        text = rows_to_csv(report.rows)
        name = output_name(cfg, variant)
        write_atomic(os.path.join(out_dir, name), text)
        files[name] = hashlib.sha256(text.encode()).hexdigest()
    manifest = {
        "config_name": cfg.name,
        "config_hash": cfg.digest(),
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "wall_clock_seconds": round(time.time() - started, 3),
        "files": files,
    }
    write_atomic(os.path.join(out_dir, MANIFEST_NAME), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratesplit", description="Rate-splitting sum-rate experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a JSON config file")
    run.add_argument("target", help="preset name or config path ('-' reads stdin)")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output directory")
    run.add_argument("--schemes", help="comma-separated scheme list")
    run.add_argument("--snr", help="SNR grid in dB as A:B:STEP")

    sub.add_parser("list-presets", help="list built-in presets")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("target", help="preset name or config path ('-' reads stdin)")
    return p


def _apply_overrides(cfg, args) -> ExperimentConfig:
    schemes = None
    if args.schemes is not None:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    snr = None
    if args.snr is not None:
        try:
            snr = parse_snr_grid(args.snr)
        except (ValueError, KeyError) as exc:
            raise InvalidConfigurationError(f"--snr: {exc}") from exc
    return with_overrides(cfg, trials=args.trials, seed=args.seed, schemes=schemes, snr_db=snr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        if args.command == "list-presets":
            for name in preset_catalog():
                print(f"{name}\t{PRESET_DESCRIPTIONS.get(name, '')}")
            return 0
        cfg = resolve_config(args.target)
        if args.command == "validate":
            variants = len(cfg.variants())
            print(f"{cfg.name}: ok ({variants} variant(s), {len(cfg.snr_db)} SNR points, {len(cfg.schemes)} scheme(s))")
            return 0
        cfg = _apply_overrides(cfg, args)
        manifest = run_experiment(cfg, out_dir=args.out)
        out = args.out or cfg.output_dir
        for name in manifest["files"]:
            print(os.path.join(out, name))
        return 0
    except InvalidConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RateSplitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
