"""Command-line front end: batch snapshot and Monte-Carlo runs.

Configuration is a JSON object using the ScenarioConfig field names, plus
optional "n_samples" and "schemes" entries; an empty object reproduces the
built-in defaults. Every run writes its outputs plus a manifest listing the
emitted files with their content hashes. Output files are written
atomically (temp file + rename) and only after all computation succeeded,
so an error leaves no partial outputs behind.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

import argparse
import dataclasses
import datetime
import hashlib
import json
import os
import sys
import tempfile

from . import __version__
from .exposure import exposure_csv, heatmap_svg
from .experiments import (ALL_SCHEMES, METRICS, ExperimentConfig, run_monte_carlo,
                          run_snapshot, samples_csv, cdf_csv)
from .scenario import ScenarioConfig, scenario_to_dict

OUT_DIR_ENV = "EMFBEAM_OUT_DIR"
DEFAULT_OUT_DIR = "emfbeam-out"

_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}
_EXPERIMENT_KEYS = {"n_samples", "schemes"}


class ConfigError(Exception):
    pass


def load_config(path, seed=None, samples=None, schemes=None):
    """JSON file -> (ScenarioConfig, n_samples, schemes), with CLI overrides."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(data) - _SCENARIO_FIELDS - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    scenario_kw = {k: v for k, v in data.items() if k in _SCENARIO_FIELDS}
    if seed is not None:
        scenario_kw["seed"] = seed
    try:
        scenario = ScenarioConfig(**scenario_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    n_samples = samples if samples is not None else data.get("n_samples", 1000)
    tags = schemes if schemes is not None else data.get("schemes", list(ALL_SCHEMES))
    if isinstance(tags, str):
        tags = tags.replace(",", " ").split()
    tags = tuple(tags)
    bad = set(tags) - set(ALL_SCHEMES)
    if bad:
        raise ConfigError(f"unknown schemes: {sorted(bad)}; valid: {ALL_SCHEMES}")
    if not tags:
        raise ConfigError("at least one scheme must be selected")
    return scenario, n_samples, tags


def _resolve_out_dir(arg):
    return arg or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR


def _emit(out_dir, files, manifest_extra):
    """Write all files plus a manifest, all-or-nothing.

    Contents are staged as temp files in the target directory first and
    renamed into place only after every write succeeded, so a failure never
    leaves partial outputs under the final names.
    """
    os.makedirs(out_dir, exist_ok=True)
    hashes = {name: hashlib.sha256(text.encode()).hexdigest()
              for name, text in files.items()}
    manifest = {
        "tool": "emfbeam",
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        **manifest_extra,
        "files": hashes,
    }
    staged = []
    try:
        for name, text in {**files, "manifest.json":
                           json.dumps(manifest, indent=1) + "\n"}.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.")
            staged.append((tmp, name))
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    for tmp, name in staged:
        os.replace(tmp, os.path.join(out_dir, name))


def cmd_snapshot(args) -> int:
    scenario, _, schemes = load_config(args.config, seed=args.seed,
                                       schemes=args.schemes)
    result = run_snapshot(scenario, schemes=schemes)
    files = {"report.txt": result.report_text,
             "scenario.json": json.dumps(scenario_to_dict(result.scenario), indent=1) + "\n"}
    for tag, sr in result.per_scheme.items():
        files[f"exposure_{tag}.csv"] = exposure_csv(sr.emap)
        files[f"heatmap_{tag}.svg"] = heatmap_svg(
            sr.emap, scenario.R,
            title=f"{tag}  chi={sr.precoder.chi:.4g}  violation={sr.violation_pct:.3g}%")
    _emit(_resolve_out_dir(args.out_dir), files,
          {"command": "snapshot", "root_seed": scenario.seed,
           "config": dataclasses.asdict(scenario), "schemes": list(schemes)})
    print(result.report_text, end="")
    return 0


def cmd_mc(args) -> int:
    scenario, n_samples, schemes = load_config(args.config, seed=args.seed,
                                               samples=args.samples,
                                               schemes=args.schemes)
    config = ExperimentConfig(scenario=scenario, n_samples=n_samples,
                              schemes=schemes, workers=args.workers)
    samples, cdfs = run_monte_carlo(config)
    files = {"samples.csv": samples_csv(samples, schemes)}
    for (metric, scheme), series in cdfs.items():
        files[f"cdf_{metric}_{scheme}.csv"] = cdf_csv(series)
    _emit(_resolve_out_dir(args.out_dir), files,
          {"command": "mc", "root_seed": scenario.seed,
           "config": dataclasses.asdict(scenario), "schemes": list(schemes),
           "n_samples": n_samples, "workers": args.workers})
    print(f"wrote {len(files) + 1} files for {n_samples} samples")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emfbeam",
        description="exposure-aware beamforming simulator (batch runs)")
    sub = parser.add_subparsers(dest="command", required=True)

    snap = sub.add_parser("snapshot", help="one channel draw: maps + report")
    snap.add_argument("--config", help="JSON config; omitted = defaults")
    snap.add_argument("--seed", type=int, help="override the config seed")
    snap.add_argument("--out-dir", help=f"output dir (or ${OUT_DIR_ENV})")
    snap.add_argument("--schemes", nargs="+", metavar="TAG",
                      help=f"subset of {ALL_SCHEMES}")
    snap.set_defaults(func=cmd_snapshot)

    mc = sub.add_parser("mc", help="Monte-Carlo metrics and CDFs")
    mc.add_argument("--config", help="JSON config; omitted = defaults")
    mc.add_argument("--samples", type=int, help="number of channel samples")
    mc.add_argument("--seed", type=int, help="override the config seed")
    mc.add_argument("--out-dir", help=f"output dir (or ${OUT_DIR_ENV})")
    mc.add_argument("--workers", type=int, default=1, help="process pool size")
    mc.add_argument("--schemes", nargs="+", metavar="TAG",
                    help=f"subset of {ALL_SCHEMES}")
    mc.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"emfbeam: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"emfbeam: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
