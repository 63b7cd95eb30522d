"""Command-line entry points: generate, detect, select-k, eval,
experiment, diagnose.

Label files hold one 1-based community index per line; edge lists use
the "t i j" format with a 1-based layer and 0-based node indices.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .detect import (
    DETECTION_METHODS,
    algorithm1,
    algorithm2,
    algorithm3,
    baseline_spectral_sum,
    baseline_sum_spectral,
    theory_diagnostics,
)
from .evaluate import misclassification
from .experiment import (
    ExperimentConfig,
    run_experiment,
    summarize,
    write_csv,
    write_json,
    write_summary_csv,
)
from .models import ModelParams, sample_memberships, sample_network
from .network import load_multilayer, save_multilayer

_METHODS = {
    "Alg1": algorithm1,
    "Alg2": algorithm2,
    "BaselineSum": baseline_sum_spectral,
    "BaselineSpectralSum": baseline_spectral_sum,
}


def _read_labels(path) -> np.ndarray:
    """Read one label per line; 1-based indices are shifted to 0-based."""
    vals = [int(line) for line in Path(path).read_text().split()]
    labels = np.asarray(vals, dtype=np.int64)
    return labels - 1 if labels.min() >= 1 else labels


def _write_labels(labels: np.ndarray, path) -> None:
    Path(path).write_text("".join(f"{int(x) + 1}\n" for x in labels))


def _cmd_generate(args) -> int:
    params = ModelParams.from_json(Path(args.params).read_text())
    if params.psi is not None:
        n = len(params.psi)
        if args.n is not None and args.n != n:
            raise SystemExit(f"--n {args.n} conflicts with psi length {n}")
    elif args.n is None:
        raise SystemExit("--n is required when the parameter file has no psi")
    else:
        n = args.n
    labels = sample_memberships(n, params.pi, args.seed)
    net = sample_network(params, labels, args.seed)
    save_multilayer(net, args.output)
    if args.labels_out:
        _write_labels(labels, args.labels_out)
    return 0


def _cmd_detect(args) -> int:
    net = load_multilayer(args.edges, args.n, args.layers)
    result = _METHODS[args.method](net, args.k, args.eps, args.seed)
    _write_labels(result.labels, args.output)
    return 0


def _cmd_select_k(args) -> int:
    net = load_multilayer(args.edges, args.n, args.layers)
    print(algorithm3(net))
    return 0


def _cmd_eval(args) -> int:
    truth = _read_labels(args.truth)
    est = _read_labels(args.est)
    report = misclassification(truth, est)
    doc = {
        "nmi": report.nmi,
        "overall_error": report.overall_error,
        "per_community": report.per_community.tolist(),
        "permutation": report.permutation.tolist(),
        "confusion": report.confusion.tolist(),
    }
    text = json.dumps(doc, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    table = run_experiment(cfg, jobs=args.jobs)
    write_csv(table, args.output)
    if args.json_output:
        write_json(table, args.json_output)
    if args.summary:
        write_summary_csv(summarize(table), args.summary)
    return 0


def _cmd_diagnose(args) -> int:
    params = ModelParams.from_json(Path(args.params).read_text())
    if args.labels:
        labels = _read_labels(args.labels)
    elif args.n:
        # deterministic surrogate labels with the expected community sizes
        counts = np.floor(params.pi * args.n).astype(int)
        for _ in range(args.n - counts.sum()):
            counts[np.argmax(params.pi * args.n - counts)] += 1
        labels = np.repeat(np.arange(params.K), counts)
    else:
        raise SystemExit("diagnose needs --labels or --n")
    diag = theory_diagnostics(params, labels, Delta=args.delta, C=args.c, C_prime=args.c_prime)
    doc = {
        "d": diag.d,
        "lambda": diag.lam,
        "n_min": diag.n_min,
        "n_max": diag.n_max,
        "bound": diag.bound,
        "prob_floor": diag.prob_floor,
        "condition_ok": diag.condition_ok,
    }
    if diag.n_tilde is not None:
        doc.update(
            n_tilde=diag.n_tilde.tolist(),
            tau=diag.tau.tolist(),
            psi_min=diag.psi_min,
            n_tilde_min=diag.n_tilde_min,
            n_tilde_max=diag.n_tilde_max,
            dc_count_bound=diag.dc_count_bound,
            dc_prob_floor=diag.dc_prob_floor,
            dc_condition_ok=diag.dc_condition_ok,
        )
    text = json.dumps(doc, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multispec",
        description="Community detection for multilayer networks via sums of squared adjacencies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a network from a parameter file")
    p.add_argument("--params", required=True, help="ModelParams JSON file")
    p.add_argument("--n", type=int, help="node count (required unless psi fixes it)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="edge-list output path")
    p.add_argument("--labels-out", help="also write the sampled true labels")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("detect", help="estimate community labels from an edge list")
    p.add_argument("--edges", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=sorted(_METHODS), default="Alg1")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="membership output, one label per line")
    p.set_defaults(fn=_cmd_detect)

    p = sub.add_parser("select-k", help="estimate the number of communities")
    p.add_argument("--edges", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--layers", type=int, required=True)
    p.set_defaults(fn=_cmd_select_k)

    p = sub.add_parser("eval", help="score estimated labels against the truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--est", required=True)
    p.add_argument("--output", help="write the report JSON here instead of stdout")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("experiment", help="run a replicated sweep from a config file")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON file")
    p.add_argument("--output", default="results.csv", help="results CSV path")
    p.add_argument("--summary", help="also write per-point mean/stderr CSV")
    p.add_argument("--json-output", help="also mirror the rows as JSON")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("diagnose", help="evaluate the recovery conditions and bounds")
    p.add_argument("--params", required=True, help="ModelParams JSON file")
    p.add_argument("--labels", help="true label file (one per line)")
    p.add_argument("--n", type=int, help="synthesize expected-size labels instead")
    p.add_argument("--delta", type=float, default=8.5)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--c-prime", type=float, default=1.0)
    p.add_argument("--output")
    p.set_defaults(fn=_cmd_diagnose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
