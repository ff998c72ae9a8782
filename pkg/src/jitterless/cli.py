"""Command-line interface.

    jitterless stabilize  --input raw.csv --output smooth.csv -m 3
    jitterless metrics flv flows/ --frames 40
    jitterless metrics rmse a.csv b.csv
    jitterless metrics roughness seq.csv
    jitterless synth --preset standard --clean clean.csv --noisy noisy.csv --manifest spikes.json
    jitterless synth --flow-kind constant --u 3 --v 4 --count 39 --output flows/
    jitterless aggregate --input frames.json --heads 2 --output latent.json

Every command prints a JSON run report (key-sorted) and, with ``--report``,
also writes it to a file.  Exit codes: 0 success, 2 input/parse error,
3 configuration error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import aggregator, formats, metrics, synth
from .errors import InvalidConfigError, InvalidInputError
from .stabilizer import StabilizerConfig, stabilize

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3


@dataclass
class RunReport:
    command: str
    config: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    wall_time_ms: float = 0.0
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _digests(paths):
    return {str(p): file_digest(p) for p in paths}


def _fraction(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


# -- commands ----------------------------------------------------------------

def cmd_stabilize(args) -> RunReport:
    if not args.input:
        raise InvalidConfigError("--input is required")
    if not args.output:
        raise InvalidConfigError("--output is required")
    config = StabilizerConfig(m=args.m, inlier_fraction=args.inlier_fraction)
    raw = formats.read_csv(args.input)
    config.validate_for(raw.shape[0])
    smooth = stabilize(raw, config, workers=args.workers)
    formats.write_csv(args.output, smooth)
    return RunReport(
        command="stabilize",
        config={"m": config.m, "inlier_fraction": config.inlier_fraction,
                "inlier_count": config.inlier_count, "n": raw.shape[0], "dims": raw.shape[1]},
        metrics={
            "rmse_input_output": metrics.rmse(raw, smooth),
            "roughness_before": metrics.roughness(raw) if raw.shape[0] >= 3 else None,
            "roughness_after": metrics.roughness(smooth) if raw.shape[0] >= 3 else None,
        },
        inputs=_digests([args.input]),
        outputs=_digests([args.output]),
    )


def _collect_flows(paths):
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.glob("*.flo")))
        else:
            files.append(p)
    if not files:
        raise InvalidInputError("no .flo files found")
    return files


def cmd_metrics_flv(args) -> RunReport:
    if args.frames < 2:
        raise InvalidConfigError("--frames must be at least 2")
    files = _collect_flows(args.paths)[: args.frames - 1]
    flows = [formats.read_flo(f) for f in files]
    value = metrics.flv(flows)
    return RunReport(
        command="metrics flv",
        config={"frames": args.frames},
        metrics={"flv": value, "flows_used": len(flows),
                 "per_pair": [metrics.mean_displacement(f) for f in flows]},
        inputs=_digests(files),
    )


def cmd_metrics_rmse(args) -> RunReport:
    a, b = formats.read_csv(args.a), formats.read_csv(args.b)
    return RunReport(
        command="metrics rmse",
        metrics={"rmse": metrics.rmse(a, b)},
        inputs=_digests([args.a, args.b]),
    )


def cmd_metrics_roughness(args) -> RunReport:
    seq = formats.read_csv(args.input)
    return RunReport(
        command="metrics roughness",
        metrics={"roughness": metrics.roughness(seq)},
        inputs=_digests([args.input]),
    )


def _trajectory_spec(args) -> synth.TrajectorySpec:
    if args.preset not in (None, "standard"):
        raise InvalidConfigError(f"unknown preset {args.preset!r}")
    overrides = {}
    for key in ("n", "dims", "components", "noise_sigma", "outlier_rate", "outlier_magnitude"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    if args.seed is not None:
        overrides["seed"] = args.seed
    return synth.standard_spec(**overrides)


def cmd_synth(args) -> RunReport:
    if args.flow_kind:
        if not args.output:
            raise InvalidConfigError("--output directory is required for flow fields")
        flows = synth.synth_flow(
            args.flow_kind, args.width, args.height, args.count,
            u=args.u, v=args.v, scale=args.scale,
        )
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for i, f in enumerate(flows):
            path = out_dir / f"flow_{i:04d}.flo"
            formats.write_flo(path, f)
            written.append(path)
        return RunReport(
            command="synth",
            config={"flow_kind": args.flow_kind, "width": args.width, "height": args.height,
                    "count": args.count, "u": args.u, "v": args.v, "scale": args.scale},
            metrics={"flv": metrics.flv(flows)},
            outputs=_digests(written),
        )

    clean_path = args.clean
    noisy_path = args.noisy
    if args.output and not (clean_path or noisy_path):
        base = Path(args.output)
        base.mkdir(parents=True, exist_ok=True)
        clean_path, noisy_path = base / "clean.csv", base / "noisy.csv"
        args.manifest = args.manifest or base / "manifest.json"
    if not clean_path or not noisy_path:
        raise InvalidConfigError("--clean and --noisy (or --output DIR) are required")
    spec = _trajectory_spec(args)
    result = synth.generate(spec)
    formats.write_csv(clean_path, result.clean)
    formats.write_csv(noisy_path, result.noisy)
    written = [clean_path, noisy_path]
    if args.manifest:
        formats.atomic_write(args.manifest, json.dumps(result.manifest, sort_keys=True))
        written.append(args.manifest)
    return RunReport(
        command="synth",
        config={"n": spec.n, "dims": spec.dims, "seed": spec.seed,
                "components": spec.components, "noise_sigma": spec.noise_sigma,
                "outlier_rate": spec.outlier_rate, "outlier_magnitude": spec.outlier_magnitude},
        metrics={
            "rmse_noisy_clean": metrics.rmse(result.noisy, result.clean),
            "roughness_clean": metrics.roughness(result.clean),
            "roughness_noisy": metrics.roughness(result.noisy),
            "spikes": len(result.manifest["spikes"]),
        },
        outputs=_digests(written),
    )


def cmd_aggregate(args) -> RunReport:
    if not args.input:
        raise InvalidConfigError("--input is required")
    if not args.output:
        raise InvalidConfigError("--output is required")
    frames, shape = formats.read_frames_json(args.input)
    config = aggregator.AttentionConfig(heads=args.heads, **shape)
    qbar = aggregator.mean_query(frames)
    weights = aggregator.attention_weights(qbar, frames, config)
    w = aggregator.aggregate(frames, config)
    formats.write_latent_json(args.output, w)
    return RunReport(
        command="aggregate",
        config={"heads": config.heads, **shape, "frames": len(frames)},
        metrics={"weights": weights.tolist()},
        inputs=_digests([args.input]),
        outputs=_digests([args.output]),
    )


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for any randomness")
    common.add_argument("--output", default=None, help="output file or directory")
    common.add_argument("--report", default=None, help="also write the JSON report here")

    parser = argparse.ArgumentParser(prog="jitterless", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stabilize", parents=[common], help="smooth a control-sequence CSV")
    p.add_argument("input_pos", nargs="?", metavar="INPUT")
    p.add_argument("--input", default=None)
    p.add_argument("-m", "--m", type=int, default=3,
                   help="subsequence count (default 3, not a published setting)")
    p.add_argument("--inlier-fraction", type=_fraction, default=2.0 / 3.0)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_stabilize)

    pm = sub.add_parser("metrics", help="evaluate metrics")
    msub = pm.add_subparsers(dest="metric", required=True)
    q = msub.add_parser("flv", parents=[common], help="temporal coherence over .flo fields")
    q.add_argument("paths", nargs="+", help=".flo files or directories of them")
    q.add_argument("--frames", type=int, default=40, help="frame window (uses frames-1 flows)")
    q.set_defaults(func=cmd_metrics_flv)
    q = msub.add_parser("rmse", parents=[common])
    q.add_argument("a")
    q.add_argument("b")
    q.set_defaults(func=cmd_metrics_rmse)
    q = msub.add_parser("roughness", parents=[common])
    q.add_argument("input")
    q.set_defaults(func=cmd_metrics_roughness)

    p = sub.add_parser("synth", parents=[common], help="write synthetic benchmark data")
    p.add_argument("--preset", default=None, help="'standard' (the default settings)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dims", type=int, default=None)
    p.add_argument("--components", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--outlier-rate", type=float, default=None)
    p.add_argument("--outlier-magnitude", type=float, default=None)
    p.add_argument("--clean", default=None)
    p.add_argument("--noisy", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--flow-kind", choices=["zero", "constant", "radial"], default=None)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--count", type=int, default=39)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--v", type=float, default=0.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("aggregate", parents=[common], help="fuse per-frame latents")
    p.add_argument("--input", default=None)
    p.add_argument("--heads", type=int, default=1)
    p.set_defaults(func=cmd_aggregate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "input_pos", None) and not args.input:
        args.input = args.input_pos

    start = time.perf_counter()
    try:
        report = args.func(args)
    except InvalidConfigError as exc:
        print(f"jitterless: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidInputError as exc:
        print(f"jitterless: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.wall_time_ms = (time.perf_counter() - start) * 1e3

    text = report.to_json()
    if args.report:
        formats.atomic_write(args.report, text + "\n")
    print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
