"""Experiment runner: config file -> process -> MHA loop -> trace and summary files.

Config files are TOML::

    seed = 7
    horizon = 20000
    output_dir = "runs/iid"          # optional

    [geometry]
    d = 1
    D = 1.0
    lambda_max = 5.0
    gamma = 0.25
    decision_set = { kind = "box", lower = [-1.0], upper = [1.0] }
    # or decision_set = { kind = "simplex", m = 3 }

    [loss]
    main = "quadratic_tracking"
    constraint = "ridge_constraint"

    [process]
    kind = "iid"                       # iid | markov | ar1
    points = [[0.6], [0.8], [1.0]]
    probs = [0.3, 0.4, 0.3]
    # markov: points + transition;  ar1: phi, sigma

    [experts]
    K = 3
    H = 3

    [solver]
    tol = 1e-6
    max_iters = 10000

The trace is a CSV file whose first line is a ``#`` comment carrying the
format version and column list.  The summary is a flat ``key=value`` file.
"""
from __future__ import annotations

import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import ConfigError, DecisionSet, LossSpec, ProblemGeometry
from .experts import ExpertId
from .losses import make_loss_spec
from .oracle import FeasibleOptimum, solve_feasible_optimum
from .processes import ProcessSpec, generate, stationary_law
from .strategy import MHA

log = logging.getLogger(__name__)

TRACE_VERSION = "mha-trace v1"
OUTPUT_ROOT_ENV = "MHA_OUTPUT_ROOT"


class NumericFailure(RuntimeError):
    """A run aborted on a numerical error; the trace ends with a marker row."""


@dataclass
class ExperimentConfig:
    geometry: ProblemGeometry
    main_loss: str
    constraint_loss: str
    process: ProcessSpec
    horizon: int
    K: int = 5
    H: int = 5
    tol: float = 1e-6
    max_iters: int = 10_000
    seed: int = 0
    output_dir: Optional[str] = None
    name: str = "experiment"

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        self.loss_spec()  # resolve names early
        self.process.validate(self.geometry.D)
        if self.process.d != self.geometry.d:
            raise ConfigError("process dimension does not match geometry.d")

    def loss_spec(self) -> LossSpec:
        return make_loss_spec(self.main_loss, self.constraint_loss,
                              self.geometry.m, self.geometry.d)

    def seeded_process(self) -> ProcessSpec:
        return self.process.with_seed(self.seed)


def _decision_set(tbl: dict) -> DecisionSet:
    kind = tbl.get("kind", "box")
    if kind == "box":
        return DecisionSet.box(tbl["lower"], tbl["upper"])
    if kind == "simplex":
        return DecisionSet.simplex(int(tbl["m"]))
    raise ConfigError(f"unsupported decision set kind {kind!r}")


def _process(tbl: dict, D: float, d: int) -> ProcessSpec:
    kind = tbl.get("kind")
    if kind == "iid":
        return ProcessSpec.iid(tbl["points"], tbl["probs"])
    if kind == "markov":
        return ProcessSpec.markov(tbl["points"], tbl["transition"])
    if kind == "ar1":
        return ProcessSpec.ar1(tbl["phi"], tbl["sigma"], d=d, D=D)
    raise ConfigError(f"unknown process kind {kind!r}")


def config_from_dict(raw: dict, name: str = "experiment") -> ExperimentConfig:
    try:
        g = raw["geometry"]
        geometry = ProblemGeometry(d=int(g["d"]), D=float(g["D"]),
                                   decision_set=_decision_set(g["decision_set"]),
                                   lambda_max=float(g["lambda_max"]), gamma=float(g["gamma"]))
        solver = raw.get("solver", {})
        experts = raw.get("experts", {})
        return ExperimentConfig(
            geometry=geometry,
            main_loss=raw["loss"]["main"],
            constraint_loss=raw["loss"]["constraint"],
            process=_process(raw["process"], geometry.D, geometry.d),
            horizon=int(raw["horizon"]),
            K=int(experts.get("K", 5)),
            H=int(experts.get("H", 5)),
            tol=float(solver.get("tol", 1e-6)),
            max_iters=int(solver.get("max_iters", 10_000)),
            seed=int(raw.get("seed", 0)),
            output_dir=raw.get("output_dir"),
            name=str(raw.get("name", name)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(raw, name=path.stem)


def resolve_output_dir(config: ExperimentConfig, out=None) -> Path:
    if out is not None:
        path = Path(out)
    elif config.output_dir is not None:
        path = Path(config.output_dir)
    else:
        path = Path(config.name)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not path.is_absolute():
        path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def compute_oracle(config: ExperimentConfig) -> Optional[FeasibleOptimum]:
    """Oracle optimum for iid / Markov processes; ``None`` for AR(1)."""
    if config.process.kind == "ar1":
        return None
    return solve_feasible_optimum(stationary_law(config.process), config.loss_spec(),
                                  config.geometry)


def _fmt(v) -> str:
    return repr(float(v))


def trace_columns(m: int) -> list[str]:
    return (["n"] + [f"y_{j + 1}" for j in range(m)] +
            ["lambda", "u", "c", "l", "avg_u", "avg_c", "best_expert_avg_l", "entropy_y"])


def _row(rec) -> str:
    vals = [str(rec.n)] + [_fmt(v) for v in rec.y] + [
        _fmt(rec.lam), _fmt(rec.u), _fmt(rec.c), _fmt(rec.l), _fmt(rec.avg_u),
        _fmt(rec.avg_c), _fmt(rec.best_expert_avg_l), _fmt(rec.entropy_y)]
    return ",".join(vals)


@dataclass
class RunResult:
    trace_path: Path
    summary_path: Path
    strategy: MHA
    summary: dict
    oracle: Optional[FeasibleOptimum] = None


def execute(config: ExperimentConfig, out=None, shadow=(), observations=None) -> RunResult:
    """Run MHA on the configured process, writing ``trace.csv`` and ``summary.txt``."""
    out_dir = resolve_output_dir(config, out)
    trace_path = out_dir / "trace.csv"
    summary_path = out_dir / "summary.txt"
    spec = config.loss_spec()
    if observations is None:
        observations = generate(config.seeded_process(), config.horizon)
    mha = MHA(config.geometry, spec, K=config.K, H=config.H, tol=config.tol,
              max_iters=config.max_iters, shadow=shadow)

    cols = trace_columns(config.geometry.m)
    with open(trace_path, "w", newline="") as fh:
        fh.write(f"# {TRACE_VERSION} columns={','.join(cols)}\n")
        fh.write(",".join(cols) + "\n")
        try:
            for x in observations:
                fh.write(_row(mha.step(x)) + "\n")
        except (ArithmeticError, ValueError, FloatingPointError) as exc:
            fh.write(f"# ABORTED round={mha.n + 1} error={type(exc).__name__}: {exc}\n")
            raise NumericFailure(f"round {mha.n + 1}: {exc}") from exc

    oracle = compute_oracle(config)
    summary = summarize(mha, config, oracle)
    write_summary(summary, summary_path)
    if oracle is not None:
        oracle.write(out_dir / "oracle.txt")
    return RunResult(trace_path, summary_path, mha, summary, oracle)


def run_experiment(config: ExperimentConfig, out=None) -> tuple[Path, Path]:
    """Run one experiment; returns ``(trace_path, summary_path)``."""
    res = execute(config, out)
    return res.trace_path, res.summary_path


def summarize(mha: MHA, config: ExperimentConfig, oracle: Optional[FeasibleOptimum]) -> dict:
    N = mha.n
    best = min(mha.experts, key=lambda e: e.cum_y)
    gaps = mha.regret_gaps()
    s = {
        "version": TRACE_VERSION,
        "name": config.name,
        "seed": config.seed,
        "horizon": N,
        "gamma": config.geometry.gamma,
        "avg_u": mha.sum_u / N,
        "avg_c": mha.sum_c / N,
        "avg_l": mha.sum_l / N,
        "avg_lambda": mha.sum_lam / N,
        "best_expert": str(best.id),
        "best_expert_avg_l": best.cum_y / N,
        "waa_gap_y_scaled": gaps["y"],
        "waa_gap_lambda_scaled": gaps["lambda"],
        "expert_failures": sum(e.failures for e in mha.all_experts()),
    }
    if oracle is not None:
        s["oracle_feasible"] = oracle.feasible
        s["oracle_value"] = oracle.value
        s["oracle_lambda"] = oracle.lambda_star
        s["gap_u"] = s["avg_u"] - oracle.value
    else:
        s["oracle_feasible"] = "unavailable"
    return s


def write_summary(summary: dict, path) -> Path:
    path = Path(path)
    lines = []
    for k, v in summary.items():
        if isinstance(v, bool):
            v = str(v).lower()
        elif isinstance(v, float):
            v = _fmt(v)
        lines.append(f"{k}={v}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_summary(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line and not line.startswith("#"):
            k, _, v = line.partition("=")
            out[k] = v
    return out


def read_trace(path):
    """Load a trace as ``(columns, rows)``; ``rows`` is a float array.  Marker rows are skipped."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(f"# {TRACE_VERSION}"):
        raise ValueError("not an MHA trace file")
    cols = lines[1].split(",")
    rows = [list(map(float, ln.split(","))) for ln in lines[2:] if ln and not ln.startswith("#")]
    return cols, np.array(rows).reshape(-1, len(cols))


def compare_strategies(config: ExperimentConfig, strategies, out=None) -> list[dict]:
    """Per-strategy averages on one shared observation sequence.

    ``strategies`` holds ``"mha"`` and/or expert ids (``ExpertId`` or strings
    such as ``"const_zero"`` or ``"H(2,3)"``).  Expert rows report the
    strategy that plays that expert's own pair, plus the ``sqrt(N)``-scaled
    gap between MHA's average Lagrangian and the expert's decision scored
    against MHA's dual sequence.
    """
    ids = []
    for s in strategies:
        if isinstance(s, ExpertId):
            ids.append(s)
        elif str(s).lower() != "mha":
            ids.append(ExpertId.parse(str(s)))
    res = execute(config, out, shadow=ids)
    mha = res.strategy
    N = mha.n
    rows = []
    for s in strategies:
        if not isinstance(s, ExpertId) and str(s).lower() == "mha":
            rows.append({"strategy": "mha", "avg_u": res.summary["avg_u"],
                         "avg_c": res.summary["avg_c"], "avg_l": res.summary["avg_l"],
                         "avg_lambda": res.summary["avg_lambda"],
                         "waa_gap_scaled": res.summary["waa_gap_y_scaled"]})
            continue
        eid = s if isinstance(s, ExpertId) else ExpertId.parse(str(s))
        e = mha.expert(eid)
        rows.append({"strategy": str(eid), "avg_u": e.own_u / N, "avg_c": e.own_c / N,
                     "avg_l": e.own_l / N, "avg_lambda": e.own_lambda / N,
                     "waa_gap_scaled": math.sqrt(N) * (mha.sum_l / N - e.cum_y / N)})
    out_dir = res.trace_path.parent
    write_table(rows, out_dir / "comparison.csv")
    return rows


def write_table(rows: list[dict], path) -> Path:
    path = Path(path)
    cols = list(rows[0]) if rows else []
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in r.values()) + "\n")
    return path


def _run_one(path: str, out_root: Optional[str]):
    cfg = load_config(path)
    out = Path(out_root) / cfg.name if out_root else None
    trace, summary = run_experiment(cfg, out)
    return str(trace), str(summary)


def sweep(config_dir, out=None, workers: Optional[int] = None) -> list[tuple[str, str]]:
    """Run every ``*.toml`` config in a directory as an independent job."""
    paths = sorted(str(p) for p in Path(config_dir).glob("*.toml"))
    if not paths:
        raise ConfigError(f"no *.toml configs in {config_dir}")
    for p in paths:
        load_config(p)  # fail fast on bad configs
    workers = workers or min(len(paths), os.cpu_count() or 1)
    if workers == 1:
        return [_run_one(p, out) for p in paths]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, paths, [out] * len(paths)))


def override(config: ExperimentConfig, seed=None, horizon=None) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        changes["seed"] = int(seed)
    if horizon is not None:
        changes["horizon"] = int(horizon)
    return replace(config, **changes) if changes else config
