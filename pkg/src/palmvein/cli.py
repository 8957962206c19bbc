"""Command-line runner: ``run``, ``grid``, ``synth`` and ``features`` subcommands.

Configuration comes from an optional JSON file, then ``--set dotted.key=value``
overrides, then the ``--seed/--runs/--out`` shortcuts.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataset import SynthSpec, synth_generate, write_feature_cache, write_synthetic
from .errors import PalmVeinError
from .experiment import ExperimentConfig, apply_overrides, emit_report, load_features, run_cell, run_grid


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment configuration")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a dotted config key, e.g. selection.swarm.particles=10")
    common.add_argument("--seed", type=int)
    common.add_argument("--runs", type=int)
    common.add_argument("--out", type=str)
    common.add_argument("--data", type=str, help="dataset root (PUT layout); synthetic data when omitted")
    common.add_argument("--features", type=str, help="feature cache file to read (run/grid) or write (features)")

    p = argparse.ArgumentParser(prog="palmvein", description="Palm-vein identification experiments")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="evaluate one (PCA, FS, classifier) cell")
    sub.add_parser("grid", parents=[common], help="evaluate the 16-cell ablation grid")
    sub.add_parser("synth", parents=[common], help="generate and write a synthetic dataset as PGM files")
    sub.add_parser("features", parents=[common], help="build and cache the feature matrix")
    return p


def load_config(args) -> ExperimentConfig:
    raw = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise PalmVeinError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise PalmVeinError(f"config {args.config} is not valid JSON: {exc}") from None
    raw = apply_overrides(raw, args.overrides)
    for key in ("seed", "runs", "out"):
        if getattr(args, key) is not None:
            raw[key] = getattr(args, key)
    if args.data is not None:
        raw.setdefault("data", {})["path"] = args.data
    if args.features is not None and args.command in ("run", "grid"):
        raw.setdefault("data", {})["cache"] = args.features
    return ExperimentConfig.from_dict(raw)


def _cmd_run(cfg: ExperimentConfig, args) -> None:
    if args.command == "run":
        reports = [run_cell(cfg)]
    else:
        reports = run_grid(cfg)
    paths = emit_report(reports, cfg.out, timing=cfg.timing)
    for rep in reports:
        s = rep.accuracy_stats
        print(f"{rep.cell_id}: mean={s['mean']:.4f} std={s['std']:.4f} min={s['min']:.4f} max={s['max']:.4f}")
    print(f"wrote {', '.join(str(p) for p in paths)}")


def _cmd_synth(cfg: ExperimentConfig, args) -> None:
    spec: SynthSpec = cfg.data.synthetic
    manifest = write_synthetic(synth_generate(spec), cfg.out)
    print(f"wrote {len(manifest.entries)} images for {manifest.n_classes} classes under {cfg.out}")


def _cmd_features(cfg: ExperimentConfig, args) -> None:
    data = load_features(cfg)
    target = args.features or str(Path(cfg.out) / "features.pvfm")
    Path(target).parent.mkdir(parents=True, exist_ok=True)
    write_feature_cache(target, data)
    print(f"wrote {data.n_samples} x {data.n_features} feature matrix to {target}")


_COMMANDS = {"run": _cmd_run, "grid": _cmd_run, "synth": _cmd_synth, "features": _cmd_features}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args)
        _COMMANDS[args.command](cfg, args)
    except (PalmVeinError, ValueError, OSError) as exc:
        print(f"palmvein {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
