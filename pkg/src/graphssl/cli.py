"""Command-line front end for the experiment harness and one-off solves."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .bounds import BoundInputs, EmpiricalRisks, make_bound_report, report_to_json
from .graphs import load_edge_list, laplacian
from .harmonic import HarmonicConfig, export_solution_csv, solve_hard
from .harness import (
    DEFAULT_GAMMA_G_SWEEP,
    DEFAULT_THRESHOLD_EPSILONS,
    DEFAULT_THRESHOLD_GAMMA_G,
    ExperimentConfig,
    emit_reports,
    run_synthetic_study,
    run_threshold_study,
    run_uci_protocol,
    save_probe_csv,
)

__all__ = ["main", "build_parser"]


def _float_list(s: str):
    return tuple(float(t) for t in s.split(",") if t.strip())


def _str_list(s: str):
    return tuple(t.strip() for t in s.split(",") if t.strip())


def _label_column(s: str):
    try:
        return int(s)
    except ValueError:
        return s


def _parse_label_assignments(s: str):
    out = {}
    for part in s.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad label assignment {part!r}; use index=+1 or index=-1")
        idx, val = part.split("=", 1)
        v = int(val)
        if v not in (-1, 1):
            raise ValueError(f"label for vertex {idx} must be -1 or +1")
        out[int(idx)] = v
    if not out:
        raise ValueError("no label assignments given")
    return out


def load_config_file(path: str) -> dict:
    """Read a plain "key = value" file; '#' starts a comment, keys match the long flags."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {ln}: expected 'key = value'")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="reports", help="output directory")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--timing", action="store_true",
                    help="record wall time per cell (makes reports nondeterministic)")


def _add_protocol(sp):
    sp.add_argument("csv", help="input CSV file")
    sp.add_argument("--kernel", type=_str_list, default=("linear", "cubic", "rbf"),
                    help="comma list from {linear, cubic, cubic_homogeneous, rbf}")
    sp.add_argument("--algorithms", type=_str_list, default=("svm", "mr", "gc"))
    sp.add_argument("--fractions", type=_float_list, default=(0.01, 0.1))
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--epsilon", type=float, default=1e-6)
    sp.add_argument("--knn-k", type=int, default=5)
    sp.add_argument("--tasks", type=int, default=3, help="max binary tasks to run")
    sp.add_argument("--max-points", type=int, default=600)
    sp.add_argument("--scheme", choices=("one_vs_one", "consecutive_pairs"),
                    default="consecutive_pairs")
    sp.add_argument("--label-column", type=_label_column, default=-1)
    sp.add_argument("--header", action="store_true")
    sp.add_argument("--no-bias", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="graphssl",
        description="Graph-based semi-supervised learning experiments",
    )
    p.add_argument("--config", help="key = value file mirroring the long flags; flags win")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synthetic", help="ribbon benchmark: graph cuts vs manifold reg.")
    sp.add_argument("--kernel", type=_str_list, default=("linear", "cubic", "rbf"))
    sp.add_argument("--gamma-g", type=_float_list, default=DEFAULT_GAMMA_G_SWEEP)
    sp.add_argument("--gamma", type=float, default=0.1)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--bias", action="store_true",
                    help="enable the bias term (off by default here)")
    sp.add_argument("--probes", action="store_true", help="also dump probe-grid scores")
    _add_common(sp)

    sp = sub.add_parser("uci", help="three-fold benchmark protocol on a CSV dataset")
    _add_protocol(sp)
    _add_common(sp)

    sp = sub.add_parser("threshold", help="confidence-threshold study on a CSV dataset")
    _add_protocol(sp)
    sp.add_argument("--epsilons", type=_float_list, default=DEFAULT_THRESHOLD_EPSILONS)
    sp.add_argument("--gamma-g", type=_float_list, default=DEFAULT_THRESHOLD_GAMMA_G)
    _add_common(sp)

    sp = sub.add_parser("harmonic", help="one-off harmonic solve on an edge-list graph")
    sp.add_argument("edge_list", help="text file with one 'i j w' line per edge")
    sp.add_argument("--labels", required=True,
                    help="comma list of index=+1 / index=-1 assignments")
    sp.add_argument("--gamma-g", type=float, default=0.0)
    sp.add_argument("--epsilon", type=float, default=0.0)
    sp.add_argument("--out", default=None, help="CSV output path (default stdout)")

    sp = sub.add_parser("bounds", help="evaluate the generalization-bound report")
    sp.add_argument("--vc-dim", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--n-l", type=int, required=True)
    sp.add_argument("--eta", type=float, default=0.05)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--gamma-g", type=float, default=0.0)
    sp.add_argument("--c-u", type=float, default=0.01)
    sp.add_argument("--lambda-max", type=float, required=True)
    sp.add_argument("--epsilon", type=float, default=0.0)
    sp.add_argument("--n-eps", type=int, default=0)
    sp.add_argument("--empirical-risk", type=float, default=0.0)
    sp.add_argument("--soft-label-risk", type=float, default=0.0)
    sp.add_argument("--thresholded-risk", type=float, default=0.0,
                    help="kept-set risk term, without the exclusion slack")
    sp.add_argument("--out", default=None, help="JSON output path (default stdout)")

    return p


def _apply_config(parser: argparse.ArgumentParser, argv, config: dict):
    """Install config values as subparser defaults so explicit flags still win."""
    subparsers = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    for sp in set(subparsers.choices.values()):
        updates = {}
        for action in sp._actions:
            if action.dest in config:
                raw = config[action.dest]
                if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                    updates[action.dest] = raw.lower() in ("1", "true", "yes", "on")
                elif action.type is not None:
                    updates[action.dest] = action.type(raw)
                else:
                    updates[action.dest] = raw
        if updates:
            sp.set_defaults(**updates)


def _protocol_config(args) -> ExperimentConfig:
    return ExperimentConfig(
        source=args.csv,
        algorithms=tuple(args.algorithms),
        kernels=tuple(args.kernel),
        labeled_fractions=tuple(args.fractions),
        epsilon=args.epsilon,
        knn_k=args.knn_k,
        repetitions=args.reps,
        seed=args.seed,
        max_points=args.max_points,
        max_tasks=args.tasks,
        scheme=args.scheme,
        label_column=args.label_column,
        header=args.header,
        bias=not args.no_bias,
        record_timing=args.timing,
    )


def _summarize(table, written) -> None:
    print(f"{len(table.rows)} result rows, {len(table.failures)} recorded failures")
    for path in written:
        print(f"wrote {path}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(pre, "config", None):
        try:
            _apply_config(parser, argv, load_config_file(pre.config))
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "synthetic":
            table, probes = run_synthetic_study(
                gamma_g_values=args.gamma_g,
                kernels=args.kernel,
                gamma=args.gamma,
                epsilon=args.epsilon,
                bias=args.bias,
                record_timing=args.timing,
            )
            written = emit_reports(table, args.format, args.out)
            if args.probes:
                for (algo, kname, gg), scores in sorted(probes["scores"].items()):
                    path = os.path.join(args.out, f"probe_{algo}_{kname}_gg{gg:g}.csv")
                    save_probe_csv(path, probes["x1"], probes["x2"], scores)
                    written.append(path)
            _summarize(table, written)
        elif args.command == "uci":
            table = run_uci_protocol(_protocol_config(args))
            _summarize(table, emit_reports(table, args.format, args.out))
        elif args.command == "threshold":
            table = run_threshold_study(
                _protocol_config(args),
                epsilons=args.epsilons,
                gamma_g_values=args.gamma_g,
            )
            _summarize(table, emit_reports(table, args.format, args.out))
        elif args.command == "harmonic":
            graph = load_edge_list(args.edge_list)
            assignments = _parse_label_assignments(args.labels)
            labels = np.zeros(graph.n)
            for idx, val in assignments.items():
                if not 0 <= idx < graph.n:
                    raise ValueError(f"label index {idx} out of range for {graph.n} vertices")
                labels[idx] = val
            solution = solve_hard(laplacian(graph), labels, HarmonicConfig(args.gamma_g))
            if args.out:
                export_solution_csv(solution, args.epsilon, args.out)
                print(f"wrote {args.out}")
            else:
                kept = solution.confidences >= args.epsilon
                print("index,ell,confidence,kept")
                for i, (v, c, k) in enumerate(
                    zip(solution.values, solution.confidences, kept)
                ):
                    print(f"{i},{v:.17g},{c:.17g},{int(k)}")
        elif args.command == "bounds":
            inputs = BoundInputs(
                h=args.vc_dim, n=args.n, n_l=args.n_l, eta=args.eta, delta=args.delta,
                gamma_g=args.gamma_g, c_u=args.c_u, lambda_max=args.lambda_max,
                epsilon=args.epsilon, n_eps=args.n_eps,
            )
            slack = 2.0 * args.epsilon * args.n_eps / args.n
            risks = EmpiricalRisks(
                empirical_risk_induced=args.empirical_risk,
                thresholded_empirical_risk=args.thresholded_risk + slack,
                soft_label_risk_labeled=args.soft_label_risk,
                n_eps=args.n_eps,
                thresholded_raw=args.thresholded_risk,
                slack=slack,
            )
            text = report_to_json(make_bound_report(inputs, risks))
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text + "\n")
                print(f"wrote {args.out}")
            else:
                print(text)
        else:  # pragma: no cover
            raise ValueError(f"unknown command {args.command!r}")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
