"""Experiment orchestration: parameter grids, trials, aggregation, transfer.

Per-trial seeds derive from the master seed and the grid coordinates through
``numpy``'s SeedSequence (a splitmix-style hash of ``(master, (grid_index,
trial_index))``), so any row is reproducible in isolation and results are
identical no matter how many workers ran the sweep.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats as scipy_stats

from .config import SimConfig
from .detect.report import REPORT_COLUMNS, DetectionReport, analyze_trial
from .errors import ConfigError
from .features.extract import FeatureMatrix, extract_features
from .features.labeling import label_flows, undersample
from .io import write_rows
from .learn.model import load_model, save_model
from .learn.pipeline import TriggerDetector
from .simulate.engine import simulate_flow_records

logger = logging.getLogger(__name__)

RESULTS_HEADER = REPORT_COLUMNS + ["status", "error"]
AGGREGATE_KEY = ["mechanism", "T", "trigger_mode", "lambda_total",
                 "n_clients", "n_servers", "s", "O_win"]
AGGREGATE_HEADER = AGGREGATE_KEY + ["n_ok", "mean_ari", "ci95_lo", "ci95_hi"]


@dataclass
class ExperimentSpec:
    base: SimConfig = field(default_factory=SimConfig)
    sweep: dict = field(default_factory=dict)        # config field -> values; "s" allowed
    extra_points: list = field(default_factory=list)  # explicit override dicts
    trials: int = 30
    allowed_delay_s: float = 1.0
    window_w: int = 10
    group_gap_s: float = 2.0
    pipeline: dict = field(default_factory=dict)
    master_seed: int = 0
    name: str = "experiment"

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.allowed_delay_s <= 0:
            raise ConfigError("allowed_delay_s must be > 0")
        if "s" in self.sweep and not self.sweep["s"]:
            raise ConfigError("swept s list must be non-empty")
        for point in expand_grid(self):
            point.config(self.base)  # constructing validates each grid point


@dataclass(frozen=True)
class GridPoint:
    index: int
    overrides: tuple  # ((field, value), ...) excluding "s"
    s: float

    def config(self, base: SimConfig) -> SimConfig:
        return base.with_(**dict(self.overrides)) if self.overrides else base

    def describe(self) -> str:
        parts = [f"{k}={v}" for k, v in self.overrides]
        parts.append(f"s={self.s}")
        return ",".join(parts)


def expand_grid(spec: ExperimentSpec) -> list:
    keys = list(spec.sweep.keys())
    values = [spec.sweep[k] for k in keys]
    points = []
    combos = [dict(zip(keys, combo)) for combo in itertools.product(*values)] \
        if keys else [{}]
    combos += [dict(p) for p in spec.extra_points]
    for i, combo in enumerate(combos):
        s = combo.pop("s", spec.allowed_delay_s)
        points.append(GridPoint(index=i, overrides=tuple(sorted(combo.items())), s=s))
    return points


def derive_seeds(master_seed: int, grid_index: int, trial: int) -> tuple:
    """(simulation, undersampling, pipeline, surrogate) seeds for one trial."""
    seq = np.random.SeedSequence(entropy=master_seed,
                                 spawn_key=(grid_index, trial))
    state = seq.generate_state(4, dtype=np.uint64)
    return tuple(int(v) for v in state)


@dataclass
class TrialResult:
    grid_index: int
    trial: int
    s: float
    seed: int
    config: SimConfig
    status: str = "ok"
    error: str = ""
    ari: Optional[float] = None
    accuracy: Optional[float] = None
    interval_estimate: Optional[float] = None
    interval_error_rate: Optional[float] = None
    tp: int = 0
    fp: int = 0
    fn: int = 0
    median_delta: Optional[float] = None
    n_flows: int = 0
    n_retried: int = 0
    matches: list = field(default_factory=list)      # (trigger_t, est_t, delta)
    trigger_times: list = field(default_factory=list)
    complete_times: list = field(default_factory=list)
    grouped_times: list = field(default_factory=list)
    importance: Optional[list] = None

    def row(self) -> list:
        cfg = self.config
        return [cfg.mechanism, cfg.interval_s, cfg.trigger_mode, cfg.lambda_total,
                cfg.n_clients, cfg.n_servers, self.s, cfg.observation_window_s,
                self.seed, self.ari, self.accuracy, self.interval_estimate,
                self.interval_error_rate, self.tp, self.fp, self.fn,
                self.median_delta, self.status, self.error]


def fit_trial_detector(matrix: FeatureMatrix, labels: np.ndarray,
                       pipeline_params: dict, sample_seed: int,
                       pipe_seed: int) -> TriggerDetector:
    """Undersample a training copy and fit the detector on it."""
    rng = np.random.default_rng(sample_seed)
    _X, labels_sub, keep = undersample(matrix.X, labels, rng)
    train = matrix.take(keep)
    detector = TriggerDetector(random_state=pipe_seed, **pipeline_params)
    detector.fit(train, labels_sub)
    return detector


def run_trial(config: SimConfig, s: float, window_w: int, group_gap_s: float,
              pipeline_params: dict, master_seed: int, grid_index: int,
              trial: int, compute_importance: bool = False) -> TrialResult:
    """One full simulate -> features -> train -> detect pass."""
    sim_seed, sample_seed, pipe_seed, surrogate_seed = derive_seeds(
        master_seed, grid_index, trial)
    cfg = config.with_(seed=sim_seed)
    result = TrialResult(grid_index=grid_index, trial=trial, s=s,
                         seed=sim_seed, config=cfg)
    try:
        flows, truth, stats = simulate_flow_records(cfg)
        matrix = extract_features(flows, window_w=window_w)
        matrix.labels = label_flows(flows, truth, s)
        result.n_flows = stats.n_flows
        result.n_retried = stats.n_retried
        detector = fit_trial_detector(matrix, matrix.labels, pipeline_params,
                                      sample_seed, pipe_seed)
        assignments = detector.predict(matrix)
        true_interval = cfg.interval_s if cfg.trigger_mode == "fixed" else None
        report = analyze_trial(matrix, assignments, truth, s,
                               group_gap_s=group_gap_s,
                               true_interval_s=true_interval)
        result.ari = report.ari
        result.accuracy = report.accuracy
        result.interval_estimate = report.interval_estimate
        result.interval_error_rate = report.interval_error_rate
        result.tp = report.match.tp
        result.fp = report.match.fp
        result.fn = report.match.fn
        result.median_delta = report.median_attacker_delay
        result.matches = report.match.matches
        result.trigger_times = truth.times.tolist()
        result.complete_times = truth.complete_times.tolist()
        result.grouped_times = report.grouped_times.tolist()
        if compute_importance:
            from .detect.importance import feature_importance
            result.importance = feature_importance(
                matrix.X, matrix.names, assignments, random_state=surrogate_seed)
    except Exception as exc:  # failed rows keep the sweep going
        logger.warning("trial failed (grid %d, trial %d): %s", grid_index, trial, exc)
        result.status = "failed"
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _execute_task(args) -> TrialResult:
    (cfg, s, window_w, group_gap_s, pipeline_params, master_seed,
     grid_index, trial, compute_importance) = args
    return run_trial(cfg, s, window_w, group_gap_s, pipeline_params,
                     master_seed, grid_index, trial, compute_importance)


def run_trials(spec: ExperimentSpec, workers: Optional[int] = None,
               compute_importance: bool = False) -> list:
    """All grid points x trials, deterministically ordered."""
    spec.validate()
    points = expand_grid(spec)
    tasks = [(point.config(spec.base), point.s, spec.window_w, spec.group_gap_s,
              spec.pipeline, spec.master_seed, point.index, trial,
              compute_importance)
             for point in points for trial in range(spec.trials)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_execute_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute_task, tasks, chunksize=1))


def aggregate_results(results: list) -> list:
    """Per-grid-point mean ARI with a t-based 95% confidence interval."""
    by_point: dict = {}
    for res in results:
        by_point.setdefault(res.grid_index, []).append(res)
    rows = []
    for index in sorted(by_point):
        grp = by_point[index]
        cfg = grp[0].config
        ok = [r.ari for r in grp if r.status == "ok" and r.ari is not None]
        mean = lo = hi = None
        if ok:
            arr = np.asarray(ok)
            mean = float(arr.mean())
            if arr.size >= 2:
                half = float(scipy_stats.t.ppf(0.975, arr.size - 1)
                             * arr.std(ddof=1) / np.sqrt(arr.size))
                lo, hi = mean - half, mean + half
            else:
                lo = hi = mean
        rows.append([cfg.mechanism, cfg.interval_s, cfg.trigger_mode,
                     cfg.lambda_total, cfg.n_clients, cfg.n_servers, grp[0].s,
                     cfg.observation_window_s, len(ok), mean, lo, hi])
    return rows


def run_experiment(spec: ExperimentSpec, out_dir,
                   workers: Optional[int] = None) -> tuple:
    """Run the sweep and write per-trial and aggregate CSV files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_trials(spec, workers=workers)
    results_path = out / f"{spec.name}_results.csv"
    aggregate_path = out / f"{spec.name}_aggregate.csv"
    write_rows(results_path, RESULTS_HEADER, [r.row() for r in results])
    write_rows(aggregate_path, AGGREGATE_HEADER, aggregate_results(results))
    return results_path, aggregate_path, results


# --------------------------------------------------------------------- transfer

TRANSFER_HEADER = ["train_point", "test_point", "trial", "ari", "accuracy"]


def _transfer_trial(args) -> list:
    (train_tasks, test_tasks, trial, window_w, group_gap_s, pipeline_params,
     model_dir) = args
    out = []
    test_data = {}
    for j, (cfg, s, master, gi) in enumerate(test_tasks):
        seeds = derive_seeds(master, gi, trial)
        tcfg = cfg.with_(seed=seeds[0])
        flows, truth, _stats = simulate_flow_records(tcfg)
        matrix = extract_features(flows, window_w=window_w)
        matrix.labels = label_flows(flows, truth, s)
        test_data[j] = (matrix, truth, s, tcfg)
    for i, (cfg, s, master, gi) in enumerate(train_tasks):
        sim_seed, sample_seed, pipe_seed, _sur = derive_seeds(master, gi, trial)
        tcfg = cfg.with_(seed=sim_seed)
        flows, truth, _stats = simulate_flow_records(tcfg)
        matrix = extract_features(flows, window_w=window_w)
        labels = label_flows(flows, truth, s)
        detector = fit_trial_detector(matrix, labels, pipeline_params,
                                      sample_seed, pipe_seed)
        model_path = Path(model_dir) / f"model_p{i}_t{trial}.json"
        save_model(detector.model_, model_path)
        reloaded = TriggerDetector.from_model(load_model(model_path))
        for j, (tmatrix, ttruth, ts, ttcfg) in test_data.items():
            assignments = reloaded.predict(tmatrix)
            true_interval = (ttcfg.interval_s if ttcfg.trigger_mode == "fixed"
                             else None)
            report = analyze_trial(tmatrix, assignments, ttruth, ts,
                                   group_gap_s=group_gap_s,
                                   true_interval_s=true_interval)
            out.append((i, j, trial, report.ari, report.accuracy))
    return out


def run_transfer(train_spec: ExperimentSpec, test_spec: ExperimentSpec,
                 out_dir, workers: Optional[int] = None) -> tuple:
    """Train per grid point of ``train_spec``, persist each model, reload it,
    and score it on every grid point of ``test_spec``.

    Feature-dimension mismatches abort (the model names the missing
    columns). Returns (cells, results_path, matrix_path) where ``cells``
    maps (train_point, test_point) to the list of per-trial ARI values.
    """
    train_spec.validate()
    test_spec.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trials = min(train_spec.trials, test_spec.trials)
    train_points = expand_grid(train_spec)
    test_points = expand_grid(test_spec)
    train_tasks = [(p.config(train_spec.base), p.s, train_spec.master_seed, p.index)
                   for p in train_points]
    test_tasks = [(p.config(test_spec.base), p.s, test_spec.master_seed, p.index)
                  for p in test_points]
    args = [(train_tasks, test_tasks, k, train_spec.window_w,
             train_spec.group_gap_s, train_spec.pipeline, str(out))
            for k in range(trials)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(args) <= 1:
        per_trial = [_transfer_trial(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(_transfer_trial, args, chunksize=1))

    cells: dict = {}
    rows = []
    for chunk in per_trial:
        for i, j, k, ari, acc in chunk:
            cells.setdefault((i, j), []).append(ari)
            rows.append([train_points[i].describe(), test_points[j].describe(),
                         k, ari, acc])
    results_path = out / "transfer_results.csv"
    write_rows(results_path, TRANSFER_HEADER, rows)
    matrix_rows = []
    for i, tp in enumerate(train_points):
        for j, sp in enumerate(test_points):
            vals = np.asarray(cells[(i, j)])
            matrix_rows.append([tp.describe(), sp.describe(), vals.size,
                                float(vals.mean())])
    matrix_path = out / "transfer_matrix.csv"
    write_rows(matrix_path, ["train_point", "test_point", "n", "mean_ari"],
               matrix_rows)
    return cells, results_path, matrix_path


# ---------------------------------------------------------------------- presets

@dataclass
class TransferPreset:
    train: ExperimentSpec
    test: ExperimentSpec


def presets() -> dict:
    """Named experiment grids mirroring the evaluation sweeps."""
    base = SimConfig()
    lam_list = [10.0, 5.0, 1.0, 0.5, 0.2, 1.0 / 15.0, 1.0 / 30.0, 2.0 / 180.0]
    out = {
        "fig-obswindow": ExperimentSpec(
            base=base, name="fig-obswindow",
            sweep={"observation_window_s": [540.0, 1200.0, 3600.0, 7200.0,
                                            14400.0, 36000.0]}),
        "fig-interval": ExperimentSpec(
            base=base, name="fig-interval",
            sweep={"interval_s": [30.0, 60.0, 120.0, 180.0, 240.0, 300.0, 600.0]},
            extra_points=[{"trigger_mode": "random"}]),
        "fig-lambda": ExperimentSpec(
            base=base, name="fig-lambda",
            sweep={"lambda_total": lam_list, "s": [1.0, 2.0, 5.0]}),
        "fig-mechanisms": ExperimentSpec(
            base=base, name="fig-mechanisms",
            sweep={"mechanism": ["ODI", "OTI", "PEI"],
                   "lambda_total": [10.0, 5.0, 1.0, 0.5, 0.2]}),
        "fig-clients": ExperimentSpec(
            base=base, name="fig-clients",
            sweep={"n_clients": [1, 2, 3], "n_servers": [1, 2, 3]}),
        "table-interval": ExperimentSpec(
            base=base, name="table-interval",
            sweep={"interval_s": [60.0, 180.0, 300.0]}),
        "table-transfer": TransferPreset(
            train=ExperimentSpec(base=base, name="transfer-train",
                                 sweep={"interval_s": [60.0, 180.0]},
                                 trials=15, master_seed=101),
            test=ExperimentSpec(base=base, name="transfer-test",
                                sweep={"interval_s": [60.0, 180.0]},
                                trials=15, master_seed=202)),
    }
    return out


def spec_from_dict(data: dict) -> ExperimentSpec:
    sim = SimConfig.from_dict(data.get("sim", {}))
    spec = ExperimentSpec(
        base=sim,
        sweep=dict(data.get("sweep", {})),
        extra_points=list(data.get("extra_points", [])),
        trials=int(data.get("trials", 30)),
        allowed_delay_s=float(data.get("s", 1.0)),
        window_w=int(data.get("window_w", 10)),
        group_gap_s=float(data.get("group_gap", 2.0)),
        pipeline=dict(data.get("pipeline", {})),
        master_seed=int(data.get("seed", 0)),
        name=str(data.get("name", "experiment")),
    )
    spec.validate()
    return spec
