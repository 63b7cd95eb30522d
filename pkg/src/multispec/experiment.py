"""Replicated generate-detect-evaluate sweeps with CSV/JSON emission.

Each (sweep value, replication) pair derives its own 64-bit seed by
XOR-ing the base seed with a splitmix64 hash of the pair, so runs are
independent, reproducible, and insensitive to execution order.  Rows are
always emitted in (sweep value, method, replication) order; re-running a
config reproduces the CSV byte for byte except for the seconds column.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import PSI_STREAM, _MASK64, mix_stream, rng_from
from .detect import (
    METHOD_ALG3,
    DetectionError,
    algorithm1,
    algorithm2,
    algorithm3,
    baseline_spectral_sum,
    baseline_sum_spectral,
)
from .evaluate import misclassification, nmi
from .models import BlockSchedule, ModelParams, sample_memberships, sample_network, scenario_schedule

CSV_COLUMNS = ("sweep_value", "method", "replication", "nmi", "error", "k_hat", "status", "seconds")

_METHOD_FNS = {
    "Alg1": algorithm1,
    "Alg2": algorithm2,
    "BaselineSum": baseline_sum_spectral,
    "BaselineSpectralSum": baseline_spectral_sum,
}
KNOWN_METHODS = tuple(_METHOD_FNS) + (METHOD_ALG3,)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: scenario or custom parameters, sizes, methods, seeds."""

    variant: str = "SBM"
    scenario: int | None = 1
    params_file: str | None = None
    sweep: str = "n"
    values: tuple[int, ...] = ()
    n: int | None = None
    T: int | None = None
    K: int | None = None
    methods: tuple[str, ...] = ("Alg1",)
    replications: int = 25
    eps: float = 0.5
    base_seed: int = 0

    def validate(self) -> None:
        if self.sweep not in ("n", "T"):
            raise ValueError(f"sweep must be 'n' or 'T', got {self.sweep!r}")
        if not self.values or list(self.values) != sorted(set(self.values)):
            raise ValueError("sweep values must be nonempty and strictly increasing")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        for m in self.methods:
            if m not in KNOWN_METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {KNOWN_METHODS}")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if (self.scenario is None) == (self.params_file is None):
            raise ValueError("exactly one of scenario and params_file is required")
        if self.sweep == "n" and self.T is None and self.scenario is not None:
            raise ValueError("fixed T required when sweeping n")
        if self.sweep == "T" and self.n is None:
            raise ValueError("fixed n required when sweeping T")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        cfg = cls(
            variant=doc.get("variant", "SBM"),
            scenario=doc.get("scenario"),
            params_file=doc.get("params_file"),
            sweep=doc.get("sweep", "n"),
            values=tuple(doc.get("values", ())),
            n=doc.get("n"),
            T=doc.get("T"),
            K=doc.get("K"),
            methods=tuple(doc.get("methods", ("Alg1",))),
            replications=doc.get("replications", 25),
            eps=doc.get("eps", 0.5),
            base_seed=doc.get("base_seed", 0),
        )
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class ResultRow:
    sweep_value: int
    method: str
    replication: int
    nmi: float | None
    error: float | None
    k_hat: int | None
    status: str
    seconds: float


@dataclass
class ResultsTable:
    config: ExperimentConfig
    rows: list[ResultRow] = field(default_factory=list)


def replication_seed(base_seed: int, sweep_value: int, replication: int) -> int:
    """base_seed XOR splitmix64-hash(sweep_value, replication)."""
    return (int(base_seed) ^ mix_stream(sweep_value, replication)) & _MASK64


def _resolve_model(cfg: ExperimentConfig, value: int, seed: int):
    """Parameters and sizes for one sweep point."""
    n = value if cfg.sweep == "n" else cfg.n
    if cfg.scenario is not None:
        T = value if cfg.sweep == "T" else cfg.T
        schedule = scenario_schedule(cfg.scenario, cfg.variant, n, T, seed=seed, sweep=cfg.sweep)
        pi = np.full(schedule.K, 1.0 / schedule.K)
        if cfg.variant == "DCBM":
            psi = rng_from(seed, PSI_STREAM).uniform(0.5, 1.0, size=n)
        else:
            psi = None
        params = ModelParams(pi=pi, schedule=schedule, psi=psi)
    else:
        params = ModelParams.from_json(Path(cfg.params_file).read_text())
        if cfg.sweep == "T":
            if value > params.schedule.T:
                raise ValueError(f"sweep T={value} exceeds schedule length {params.schedule.T}")
            params = ModelParams(
                pi=params.pi,
                schedule=BlockSchedule(mats=params.schedule.mats[:value]),
                psi=params.psi,
            )
        elif params.psi is not None and len(params.psi) != n:
            raise ValueError("cannot sweep n with fixed-length degree parameters")
    detect_k = params.K if cfg.K is None else cfg.K
    return params, n, detect_k


def run_point(cfg: ExperimentConfig, value: int, replication: int) -> list[ResultRow]:
    """All methods on one freshly sampled network; failures become rows."""
    seed = replication_seed(cfg.base_seed, value, replication)
    rows = []
    try:
        params, n, K = _resolve_model(cfg, value, seed)
        labels = sample_memberships(n, params.pi, seed)
        net = sample_network(params, labels, seed)
    except Exception as exc:  # bad sweep point: every method gets a failure row
        for method in cfg.methods:
            rows.append(
                ResultRow(value, method, replication, None, None, None, _status(exc), 0.0)
            )
        return rows
    for method in cfg.methods:
        t0 = time.perf_counter()
        try:
            if method == METHOD_ALG3:
                k_hat = algorithm3(net)
                row = ResultRow(
                    value, method, replication, None, None, k_hat, "ok", time.perf_counter() - t0
                )
            else:
                result = _METHOD_FNS[method](net, K, cfg.eps, seed)
                report = misclassification(labels, result.labels)
                row = ResultRow(
                    value,
                    method,
                    replication,
                    nmi(labels, result.labels),
                    report.overall_error,
                    None,
                    "ok",
                    time.perf_counter() - t0,
                )
        except (DetectionError, ValueError, RuntimeError) as exc:
            row = ResultRow(
                value, method, replication, None, None, None, _status(exc), time.perf_counter() - t0
            )
        rows.append(row)
    return rows


def _status(exc: Exception) -> str:
    return f"failed:{type(exc).__name__}"


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ResultsTable:
    """Execute the sweep; replications may run in parallel processes.

    Rows are reordered to the deterministic (sweep value, method,
    replication) order whatever the completion order was.
    """
    cfg.validate()
    tasks = [(value, rep) for value in cfg.values for rep in range(cfg.replications)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_point_star, [(cfg, v, r) for v, r in tasks]))
    else:
        chunks = [run_point(cfg, v, r) for v, r in tasks]
    by_key = {}
    for chunk in chunks:
        for row in chunk:
            by_key[(row.sweep_value, row.method, row.replication)] = row
    ordered = [
        by_key[(v, m, r)]
        for v in cfg.values
        for m in cfg.methods
        for r in range(cfg.replications)
    ]
    return ResultsTable(config=cfg, rows=ordered)


def _run_point_star(args):
    return run_point(*args)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_csv(table: ResultsTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in table.rows:
            fh.write(
                ",".join(
                    (
                        str(r.sweep_value),
                        r.method,
                        str(r.replication),
                        _fmt(r.nmi),
                        _fmt(r.error),
                        _fmt(r.k_hat),
                        r.status,
                        _fmt(r.seconds),
                    )
                )
                + "\n"
            )


def write_json(table: ResultsTable, path) -> None:
    doc = [
        {
            "sweep_value": r.sweep_value,
            "method": r.method,
            "replication": r.replication,
            "nmi": r.nmi,
            "error": r.error,
            "k_hat": r.k_hat,
            "status": r.status,
            "seconds": r.seconds,
        }
        for r in table.rows
    ]
    Path(path).write_text(json.dumps(doc, indent=2))


@dataclass(frozen=True)
class SummaryRow:
    sweep_value: int
    method: str
    n_ok: int
    n_failed: int
    mean_nmi: float | None
    se_nmi: float | None
    mean_error: float | None
    se_error: float | None
    mean_k_hat: float | None


def _mean_se(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    arr = np.asarray(values)
    se = 0.0 if len(arr) == 1 else float(arr.std(ddof=1) / np.sqrt(len(arr)))
    return float(arr.mean()), se


def summarize(table: ResultsTable) -> list[SummaryRow]:
    """Per (sweep value, method) means and standard errors over ok rows.

    Failed replications are excluded from the averages and counted in
    the attrition column.
    """
    cfg = table.config
    out = []
    for value in cfg.values:
        for method in cfg.methods:
            group = [r for r in table.rows if r.sweep_value == value and r.method == method]
            ok = [r for r in group if r.status == "ok"]
            nmi_mean, nmi_se = _mean_se([r.nmi for r in ok if r.nmi is not None])
            err_mean, err_se = _mean_se([r.error for r in ok if r.error is not None])
            khats = [r.k_hat for r in ok if r.k_hat is not None]
            out.append(
                SummaryRow(
                    sweep_value=value,
                    method=method,
                    n_ok=len(ok),
                    n_failed=len(group) - len(ok),
                    mean_nmi=nmi_mean,
                    se_nmi=nmi_se,
                    mean_error=err_mean,
                    se_error=err_se,
                    mean_k_hat=float(np.mean(khats)) if khats else None,
                )
            )
    return out


def write_summary_csv(rows: list[SummaryRow], path) -> None:
    cols = (
        "sweep_value",
        "method",
        "n_ok",
        "n_failed",
        "mean_nmi",
        "se_nmi",
        "mean_error",
        "se_error",
        "mean_k_hat",
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    (
                        str(r.sweep_value),
                        r.method,
                        str(r.n_ok),
                        str(r.n_failed),
                        _fmt(r.mean_nmi),
                        _fmt(r.se_nmi),
                        _fmt(r.mean_error),
                        _fmt(r.se_error),
                        _fmt(r.mean_k_hat),
                    )
                )
                + "\n"
            )
