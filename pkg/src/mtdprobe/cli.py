"""Command-line interface.

Subcommands: simulate, features, train, detect, run, transfer, presets.
Configuration comes from a JSON file (--config) and/or a named preset
(--preset), with --seed/--trials/--out overrides.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments, io
from .config import SimConfig
from .detect.report import REPORT_COLUMNS, analyze_trial
from .errors import ConfigError
from .features.extract import extract_features
from .features.labeling import label_flows
from .features.flows import assemble_flows
from .learn.model import load_model, save_model
from .learn.pipeline import TriggerDetector
from .simulate.engine import run_simulation

logger = logging.getLogger(__name__)


def _load_config_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _resolve_spec(args) -> experiments.ExperimentSpec:
    if args.preset:
        spec = experiments.presets().get(args.preset)
        if spec is None:
            raise ConfigError(
                f"unknown preset {args.preset!r}; available: "
                f"{', '.join(sorted(experiments.presets()))}")
        if isinstance(spec, experiments.TransferPreset):
            raise ConfigError(f"preset {args.preset!r} is a transfer preset; "
                              "use the transfer subcommand")
    elif args.config:
        spec = experiments.spec_from_dict(_load_config_file(args.config))
    else:
        spec = experiments.ExperimentSpec()
    if args.seed is not None:
        spec.master_seed = args.seed
        spec.base = spec.base.with_(seed=args.seed)
    if args.trials is not None:
        spec.trials = args.trials
    return spec


def _sim_config(args) -> SimConfig:
    data = {}
    if args.config:
        data = _load_config_file(args.config).get("sim", {})
    cfg = SimConfig.from_dict(data)
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _sim_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace, truth = run_simulation(cfg)
    io.write_trace(trace, out / "trace.txt")
    io.write_truth(truth, out / "truth.csv")
    print(f"wrote {len(trace)} packets over {len(truth)} triggers to {out}")
    return 0


def cmd_features(args) -> int:
    cfg = _sim_config(args)
    trace = io.read_trace(args.trace)
    assembly = assemble_flows(trace)
    matrix = extract_features(assembly.flows, window_w=args.window)
    if args.truth:
        truth = io.read_truth(args.truth, mechanism=cfg.mechanism)
        matrix.labels = label_flows(assembly.flows, truth, args.s)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_features(matrix, out / "features.csv")
    print(f"wrote {len(matrix)} feature rows "
          f"({assembly.discarded_no_syn + assembly.discarded_incomplete} discarded)")
    return 0


def cmd_train(args) -> int:
    matrix = io.read_features(args.features)
    if matrix.labels is None:
        raise ConfigError("training features must carry labels")
    pipeline = {}
    if args.config:
        pipeline = _load_config_file(args.config).get("pipeline", {})
    seeds = experiments.derive_seeds(args.seed or 0, 0, 0)
    detector = experiments.fit_trial_detector(
        matrix, matrix.labels, pipeline, seeds[1], seeds[2])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(detector.model_, out / "model.json")
    print(f"wrote model with {len(detector.model_.dimension_names)} dimensions")
    return 0


def cmd_detect(args) -> int:
    matrix = io.read_features(args.features)
    if matrix.labels is None:
        raise ConfigError("detection scoring needs labeled features")
    cfg = _sim_config(args)
    truth = io.read_truth(args.truth, mechanism=cfg.mechanism)
    detector = TriggerDetector.from_model(load_model(args.model))
    assignments = detector.predict(matrix)
    report = analyze_trial(matrix, assignments, truth, args.s)
    row = [cfg.mechanism, cfg.interval_s, cfg.trigger_mode, cfg.lambda_total,
           cfg.n_clients, cfg.n_servers, args.s, cfg.observation_window_s,
           cfg.seed, report.ari, report.accuracy, report.interval_estimate,
           report.interval_error_rate, report.match.tp, report.match.fp,
           report.match.fn, report.median_attacker_delay]
    print(",".join(io.format_value(v) for v in REPORT_COLUMNS))
    print(",".join(io.format_value(v) for v in row))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_rows(out / "report.csv", REPORT_COLUMNS, [row])
    return 0


def cmd_run(args) -> int:
    spec = _resolve_spec(args)
    results_path, aggregate_path, results = experiments.run_experiment(
        spec, args.out, workers=args.workers)
    ok = sum(1 for r in results if r.status == "ok")
    print(f"{ok}/{len(results)} trials ok; wrote {results_path} and {aggregate_path}")
    return 0


def cmd_transfer(args) -> int:
    if args.preset:
        preset = experiments.presets().get(args.preset)
        if not isinstance(preset, experiments.TransferPreset):
            raise ConfigError(f"{args.preset!r} is not a transfer preset")
        train, test = preset.train, preset.test
    elif args.config:
        data = _load_config_file(args.config)
        train = experiments.spec_from_dict(data["train"])
        test = experiments.spec_from_dict(data["test"])
    else:
        raise ConfigError("transfer needs --preset or --config")
    if args.trials is not None:
        train.trials = test.trials = args.trials
    if args.seed is not None:
        train.master_seed = args.seed
        test.master_seed = args.seed + 1
    cells, results_path, matrix_path = experiments.run_transfer(
        train, test, args.out, workers=args.workers)
    print(f"wrote {results_path} and {matrix_path}")
    for (i, j), vals in sorted(cells.items()):
        print(f"train point {i} -> test point {j}: "
              f"mean ARI {float(np.mean(vals)):.3f} over {len(vals)} trials")
    return 0


def cmd_presets(args) -> int:
    for name, spec in sorted(experiments.presets().items()):
        if isinstance(spec, experiments.TransferPreset):
            print(f"{name}: transfer, train sweep {spec.train.sweep}")
        else:
            desc = dict(spec.sweep)
            print(f"{name}: sweep {desc}, trials {spec.trials}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtdprobe",
        description="Simulate an IP-shuffling SDN defense and fingerprint "
                    "its trigger timing from passively sniffed traffic.")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default="out"):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--out", default=out_default, help="output directory")

    p = sub.add_parser("simulate", help="emit one packet trace and its truth log")
    common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("features", help="assemble flows and extract features")
    common(p)
    p.add_argument("--trace", required=True)
    p.add_argument("--truth", help="truth CSV for labeling")
    p.add_argument("--s", type=float, default=1.0, help="allowed detection delay")
    p.add_argument("--window", type=int, default=10, help="rolling window size")
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("train", help="fit a detection model from labeled features")
    common(p)
    p.add_argument("--features", required=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("detect", help="score a model against labeled features")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.set_defaults(fn=cmd_detect)

    p = sub.add_parser("run", help="run an experiment sweep")
    common(p)
    p.add_argument("--preset", help="named preset grid")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("transfer", help="cross-dataset model transfer")
    common(p)
    p.add_argument("--preset")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_transfer)

    p = sub.add_parser("presets", help="list available presets")
    p.set_defaults(fn=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
