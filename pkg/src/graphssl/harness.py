"""Experiment orchestration: canonical synthetic problem, benchmark protocol, studies, reports."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import empirical_risks
from .cuts import GraphCutConfig, misclassification_rate, train_graph_cut, _train_on_induced
from .data import (
    BinaryTask,
    Dataset,
    compute_standardization,
    decompose_binary_tasks,
    load_csv_dataset,
    make_split,
)
from .graphs import SimilarityGraph, WeightSpec, build_knn_graph, build_radius_graph, laplacian
from .harmonic import HarmonicConfig, solve_hard, threshold_labels
from .manifold import LapSvmConfig, train_lapsvm
from .svm import (
    KernelSpec,
    SvmConfig,
    decision_scores,
    gram_matrix,
    kernel_matrix,
    train_svm,
)

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "ResultTable",
    "SyntheticProblem",
    "generate_synthetic",
    "run_synthetic_study",
    "run_uci_protocol",
    "run_threshold_study",
    "emit_reports",
    "aggregate",
    "resolve_kernel",
    "save_probe_csv",
]

BASE_COLUMNS = (
    "dataset",
    "task",
    "algorithm",
    "kernel",
    "fraction",
    "repetition",
    "gamma",
    "gamma_u",
    "gamma_g",
    "epsilon",
    "val_error",
    "test_error",
    "induced_size",
    "seconds",
)

DEFAULT_GAMMA_G_SWEEP = (1e-4, 1e-2, 1.0, 1e2, 1e12)
DEFAULT_THRESHOLD_GAMMA_G = (1e-2, 1.0, 1e2, 1e4, 1e6, 1e12)
DEFAULT_THRESHOLD_EPSILONS = (0.0, 1e-6, 1e-3)


@dataclass
class ExperimentConfig:
    """Benchmark protocol settings; desk-scale defaults.

    The margin weight grid is log-spaced over ``gamma_bounds`` times the
    labeled count, the smoothness grid over ``gamma_u_bounds`` times each
    gamma, and the harmonic regularizer is linked as gamma_g = gamma /
    gamma_u.  ``record_timing`` defaults to off so that reports are exactly
    reproducible for a fixed seed.
    """

    source: str = "synthetic"
    algorithms: tuple = ("svm", "mr", "gc")
    kernels: tuple = ("linear", "cubic", "rbf")
    labeled_fractions: tuple = (0.01, 0.1)
    gamma_grid_size: int = 5
    gamma_u_grid_size: int = 7
    gamma_bounds: tuple = (0.01, 0.1)
    gamma_u_bounds: tuple = (1e-3, 1e3)
    link_gamma_g: bool = True
    epsilon: float = 1e-6
    knn_k: int = 5
    repetitions: int = 5
    seed: int = 0
    max_points: int = 600
    max_tasks: int = 3
    scheme: str = "consecutive_pairs"
    label_column: object = -1
    header: bool = False
    bias: bool = True
    svm_tol: float = 1e-6
    max_passes: int = 1000
    record_timing: bool = False
    keep_grid: bool = False

    def __post_init__(self):
        if not self.kernels or not self.algorithms:
            raise ValueError("kernels and algorithms must be nonempty")
        if self.gamma_grid_size < 1 or self.gamma_u_grid_size < 1:
            raise ValueError("grids must be nonempty")
        for f in self.labeled_fractions:
            if not 0 < f <= 1:
                raise ValueError("labeled fractions must lie in (0, 1]")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")


@dataclass
class ResultRow:
    dataset: str
    task: str
    algorithm: str
    kernel: str
    fraction: float
    repetition: int
    gamma: float | None = None
    gamma_u: float | None = None
    gamma_g: float | None = None
    epsilon: float | None = None
    val_error: float | None = None
    test_error: float | None = None
    induced_size: int | None = None
    seconds: float = 0.0
    extras: dict = field(default_factory=dict)

    def sort_key(self):
        def f(v):
            return -1.0 if v is None else float(v)

        return (
            self.dataset,
            self.task,
            self.algorithm,
            self.kernel,
            float(self.fraction),
            int(self.repetition),
            f(self.epsilon),
            f(self.gamma_g),
            f(self.gamma),
        )

    def as_dict(self, extra_columns=()):
        out = {c: getattr(self, c) for c in BASE_COLUMNS}
        for c in extra_columns:
            out[c] = self.extras.get(c)
        return out


@dataclass
class ResultTable:
    """Rows plus recorded per-cell failures; every attempted cell lands in one of the two."""

    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    extra_columns: tuple = ()
    group_keys: tuple = ("dataset", "algorithm", "kernel", "fraction")
    grid_evals: list = field(default_factory=list)

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: r.sort_key())


@dataclass
class SyntheticProblem:
    dataset: Dataset
    graph: SimilarityGraph
    labels: np.ndarray
    truth: np.ndarray
    positive_index: int
    negative_index: int


def generate_synthetic() -> SyntheticProblem:
    """Two disconnected 9 x 2 point ribbons with one labeled vertex each.

    Points are the integer grid {(i, j) : i in -4..4, j in {-2, -1, 1, 2}}
    ordered row-major by (j, i), connected by a radius-1 graph with Gaussian
    bandwidth 2, so all 50 edges are axis-aligned with weight exp(-1/2).
    The vertex at (-4, -2) carries label +1 and the one at (4, 2) label -1;
    ``truth`` assigns +1 to the bottom ribbon and -1 to the top one.
    """
    points = [(float(i), float(j)) for j in (-2, -1, 1, 2) for i in range(-4, 5)]
    features = np.array(points)
    dataset = Dataset(features)
    graph = build_radius_graph(dataset, 1.0, WeightSpec(2.0))
    labels = np.zeros(len(points))
    pos = points.index((-4.0, -2.0))
    neg = points.index((4.0, 2.0))
    labels[pos] = 1.0
    labels[neg] = -1.0
    truth = np.where(features[:, 1] < 0, 1, -1)
    return SyntheticProblem(dataset, graph, labels, truth, pos, neg)


def resolve_kernel(name: str, num_features: int | None = None,
                   sigma_bar: float | None = None) -> KernelSpec:
    """Map a kernel name to a spec; rbf width defaults to sqrt(K) * sigma_bar."""
    if name == "linear":
        return KernelSpec.linear()
    if name == "cubic":
        return KernelSpec.cubic()
    if name == "cubic_homogeneous":
        return KernelSpec.cubic(homogeneous=True)
    if name == "rbf":
        if num_features is None or sigma_bar is None or sigma_bar <= 0:
            raise ValueError("rbf kernel needs the feature count and a positive sigma_bar")
        return KernelSpec.rbf(float(np.sqrt(num_features) * sigma_bar))
    raise ValueError(f"unknown kernel {name!r}")


def _child_seed(base: int, *key) -> int:
    ss = np.random.SeedSequence(entropy=int(base), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] % (2**63))


def _subsample_task(task: BinaryTask, max_points: int | None, seed: int) -> BinaryTask:
    """Class-interleaved subsample, deterministic for a given seed."""
    if not max_points or task.n <= max_points:
        return task
    rng = np.random.default_rng(seed)
    pools = []
    for cls in (1, -1):
        pos = np.flatnonzero(task.signed_labels == cls)
        pools.append(list(pos[rng.permutation(pos.size)]))
    keep: list[int] = []
    turn = 0
    while len(keep) < max_points and (pools[0] or pools[1]):
        pool = pools[turn % 2]
        if pool:
            keep.append(pool.pop())
        turn += 1
    keep_arr = np.sort(np.array(keep, dtype=int))
    return BinaryTask(
        task.positive_class,
        task.negative_class,
        task.point_indices[keep_arr],
        task.signed_labels[keep_arr],
    )


def _probe_grid(features: np.ndarray, resolution: int = 100):
    lo = features.min(axis=0) - 1.0
    hi = features.max(axis=0) + 1.0
    xs = np.linspace(lo[0], hi[0], resolution)
    ys = np.linspace(lo[1], hi[1], resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return xs, ys, np.column_stack([gx.ravel(), gy.ravel()])


def run_synthetic_study(
    gamma_g_values=DEFAULT_GAMMA_G_SWEEP,
    kernels=("linear", "cubic", "rbf"),
    gamma: float = 0.1,
    epsilon: float = 0.01,
    bias: bool = False,
    probe_resolution: int = 100,
    record_timing: bool = False,
):
    """Graph cuts versus manifold regularization on the synthetic ribbons.

    For every kernel and harmonic regularizer value the cut pipeline is
    trained directly and the manifold baseline with the linked smoothness
    weight gamma_u = gamma / gamma_g.  Each cell records the training error
    against the true ribbon labels; dense probe-grid scores over the
    bounding box (inflated by 1) are returned for plotting.  The bias is off
    by default, matching the linear-collapse analysis.
    """
    prob = generate_synthetic()
    x = prob.dataset.features
    stats = compute_standardization(prob.dataset, np.arange(prob.dataset.n))
    xs, ys, grid = _probe_grid(x, probe_resolution)
    table = ResultTable(group_keys=("dataset", "algorithm", "kernel", "fraction"))
    probes: dict = {"x1": xs, "x2": ys, "scores": {}}
    frac = float(np.count_nonzero(prob.labels)) / prob.dataset.n
    for kname in kernels:
        kern = resolve_kernel(kname, prob.dataset.num_features, stats.sigma_bar)
        for gg in gamma_g_values:
            t0 = time.perf_counter()
            try:
                res = train_graph_cut(
                    x, prob.graph, prob.labels,
                    GraphCutConfig(gg, epsilon, kern, gamma, bias=bias),
                )
                err = misclassification_rate(res.model, x, prob.truth)
                probes["scores"][("gc", kname, gg)] = (
                    decision_scores(res.model, grid).reshape(xs.size, ys.size)
                )
                table.rows.append(ResultRow(
                    "synthetic", "ribbons", "gc", kname, frac, 0,
                    gamma=gamma, gamma_u=gamma / gg, gamma_g=gg, epsilon=epsilon,
                    test_error=err, induced_size=res.induced.size,
                    seconds=time.perf_counter() - t0 if record_timing else 0.0,
                ))
            except Exception as exc:  # cell failures never abort the sweep
                table.failures.append({
                    "dataset": "synthetic", "algorithm": "gc", "kernel": kname,
                    "gamma_g": gg, "reason": str(exc),
                })
            t0 = time.perf_counter()
            try:
                gu = gamma / gg
                model = train_lapsvm(
                    x, prob.graph, prob.labels,
                    LapSvmConfig(gamma, gu, kern, bias=bias),
                )
                err = misclassification_rate(model, x, prob.truth)
                probes["scores"][("mr", kname, gg)] = (
                    decision_scores(model, grid).reshape(xs.size, ys.size)
                )
                table.rows.append(ResultRow(
                    "synthetic", "ribbons", "mr", kname, frac, 0,
                    gamma=gamma, gamma_u=gu, gamma_g=gg, epsilon=None,
                    test_error=err, induced_size=prob.dataset.n,
                    seconds=time.perf_counter() - t0 if record_timing else 0.0,
                ))
            except Exception as exc:
                table.failures.append({
                    "dataset": "synthetic", "algorithm": "mr", "kernel": kname,
                    "gamma_g": gg, "reason": str(exc),
                })
    return table, probes


def _signed_label_vector(task: BinaryTask, split, order: np.ndarray) -> np.ndarray:
    """length-|order| vector: signed label where the point is labeled, else 0."""
    y = np.zeros(order.size)
    labeled = set(split.labeled.tolist())
    lab = dict(zip(task.point_indices.tolist(), task.signed_labels.tolist()))
    for pos, ds_idx in enumerate(order.tolist()):
        if ds_idx in labeled:
            y[pos] = lab[ds_idx]
    return y


def _prepare_cell(dataset: Dataset, task: BinaryTask, frac: float, cfg, seed: int):
    """Split, per-fold scale stats, graph, and label vectors for one protocol cell."""
    split = make_split(task, frac, seed)
    x_tr = dataset.features[split.train]
    stats = compute_standardization(dataset, split.train)
    if stats.sigma_bar <= 0:
        raise ValueError("training fold has zero feature scale; cannot build a graph")
    k = min(cfg.knn_k, split.train.size - 1)
    graph = build_knn_graph(
        x_tr, k, WeightSpec.from_feature_scale(dataset.num_features, stats.sigma_bar)
    )
    y_train = _signed_label_vector(task, split, split.train)
    truth_train = task.labels_for(split.train)
    return split, x_tr, stats, graph, y_train, truth_train


def _load_source(cfg: ExperimentConfig):
    """Dataset, its binary tasks, and a display name for the config's source.

    ``source`` is either a CSV path or the literal "synthetic", which wraps
    the ribbon problem as a two-class dataset.
    """
    if cfg.source == "synthetic":
        prob = generate_synthetic()
        dataset = Dataset(prob.dataset.features,
                          ["top" if t < 0 else "bottom" for t in prob.truth])
        dname = "synthetic"
    else:
        dataset = load_csv_dataset(cfg.source, cfg.label_column, cfg.header)
        dname = os.path.splitext(os.path.basename(str(cfg.source)))[0]
    tasks = decompose_binary_tasks(dataset, cfg.scheme)
    if cfg.max_tasks:
        tasks = tasks[: cfg.max_tasks]
    return dataset, tasks, dname


def run_uci_protocol(cfg: ExperimentConfig) -> ResultTable:
    """Three-fold benchmark with validation-based parameter selection.

    Per task, labeled fraction and repetition: split into train/validation/
    test folds, build the 5-NN graph over the training fold with bandwidth
    2 K sigma_bar^2, and for each algorithm and kernel pick the grid cell
    with the lowest validation error (ties prefer smaller gamma, then larger
    gamma_g).  The selected model's test error makes one result row;
    failures are recorded per cell instead of aborting the run.
    """
    dataset, tasks, dname = _load_source(cfg)
    table = ResultTable()
    for ti, task in enumerate(tasks):
        task = _subsample_task(task, cfg.max_points, _child_seed(cfg.seed, 9999, ti))
        tname = f"{task.positive_class}_vs_{task.negative_class}"
        for fi, frac in enumerate(cfg.labeled_fractions):
            for rep in range(cfg.repetitions):
                key = {"dataset": dname, "task": tname, "fraction": frac, "repetition": rep}
                try:
                    prepared = _prepare_cell(
                        dataset, task, frac, cfg, _child_seed(cfg.seed, ti, fi, rep)
                    )
                except Exception as exc:
                    table.failures.append({**key, "reason": str(exc)})
                    continue
                _run_protocol_grids(dataset, task, cfg, key, prepared, table)
    return table


def _subset_error(cross, train_idx, model, truth):
    """Zero-one error using a precomputed eval-by-train kernel block."""
    if cross.shape[0] == 0:
        raise ValueError("evaluation set is empty")
    scores = cross[:, train_idx] @ model.coefficients + model.bias
    pred = np.where(scores >= 0, 1, -1)
    return float(np.mean(pred != truth))


def _run_protocol_grids(dataset, task, cfg, key, prepared, table):
    split, x_tr, stats, graph, y_train, _ = prepared
    x_va = dataset.features[split.validation]
    x_te = dataset.features[split.test]
    y_va = task.labels_for(split.validation)
    y_te = task.labels_for(split.test)
    n_l = split.n_l
    gammas = np.geomspace(cfg.gamma_bounds[0] * n_l, cfg.gamma_bounds[1] * n_l,
                          cfg.gamma_grid_size)
    ratios = np.geomspace(cfg.gamma_u_bounds[0], cfg.gamma_u_bounds[1],
                          cfg.gamma_u_grid_size)
    labeled_local = np.flatnonzero(y_train != 0)
    y_lab = y_train[labeled_local].astype(int)
    gl = laplacian(graph)
    all_local = np.arange(x_tr.shape[0])

    harmonic_cache = {}
    if "gc" in cfg.algorithms:
        for ratio in ratios:
            gg = 1.0 / ratio
            try:
                sol = solve_hard(gl, y_train, HarmonicConfig(gg))
                harmonic_cache[gg] = (sol, threshold_labels(sol, cfg.epsilon))
            except Exception as exc:
                table.failures.append({**key, "algorithm": "gc", "gamma_g": gg,
                                       "reason": str(exc)})

    for kname in cfg.kernels:
        kern = resolve_kernel(kname, dataset.num_features, stats.sigma_bar)
        k_tr = gram_matrix(kern, x_tr)
        k_va = kernel_matrix(kern, x_va, x_tr)
        k_te = kernel_matrix(kern, x_te, x_tr)
        for algo in cfg.algorithms:
            t0 = time.perf_counter()
            # candidates: (gamma, gamma_u, gamma_g, model, size, train index subset)
            cands = []
            if algo == "svm":
                sub = np.ix_(labeled_local, labeled_local)
                for g in gammas:
                    try:
                        model = train_svm(x_tr[labeled_local], y_lab, kern,
                                          SvmConfig(g, cfg.bias, cfg.svm_tol,
                                                    cfg.max_passes),
                                          gram=k_tr[sub])
                        cands.append((g, None, None, model, n_l, labeled_local))
                    except Exception as exc:
                        table.failures.append({**key, "algorithm": algo, "kernel": kname,
                                               "gamma": float(g), "reason": str(exc)})
            elif algo == "gc":
                for g in gammas:
                    for ratio in ratios:
                        gg = 1.0 / ratio
                        if gg not in harmonic_cache:
                            continue
                        sol, induced = harmonic_cache[gg]
                        try:
                            model, used, _ = _train_on_induced(
                                x_tr, induced, y_train, kern,
                                SvmConfig(g, cfg.bias, cfg.svm_tol, cfg.max_passes),
                                gram=k_tr,
                            )
                            gu_echo = g / gg if cfg.link_gamma_g else None
                            cands.append((g, gu_echo, gg, model, used.size, used.indices))
                        except Exception as exc:
                            table.failures.append({
                                **key, "algorithm": algo, "kernel": kname,
                                "gamma": float(g), "gamma_g": float(gg),
                                "reason": str(exc),
                            })
            elif algo == "mr":
                for g in gammas:
                    for ratio in ratios:
                        gu = ratio * g
                        try:
                            model = train_lapsvm(
                                x_tr, graph, y_train,
                                LapSvmConfig(g, gu, kern, tol=cfg.svm_tol, bias=cfg.bias,
                                             max_passes=cfg.max_passes),
                                gram=k_tr, graph_laplacian=gl,
                            )
                            gg_echo = g / gu if cfg.link_gamma_g else None
                            cands.append((g, gu, gg_echo, model, x_tr.shape[0], all_local))
                        except Exception as exc:
                            table.failures.append({
                                **key, "algorithm": algo, "kernel": kname,
                                "gamma": float(g), "gamma_u": float(gu),
                                "reason": str(exc),
                            })
            else:
                raise ValueError(f"unknown algorithm {algo!r}")

            scored = []
            for g, gu, gg, model, size, idx in cands:
                ve = _subset_error(k_va, idx, model, y_va)
                scored.append((ve, float(g), -(gg if gg is not None else 0.0),
                               gu, gg, model, size, idx))
                if cfg.keep_grid:
                    table.grid_evals.append({
                        **key, "algorithm": algo, "kernel": kname, "gamma": float(g),
                        "gamma_u": None if gu is None else float(gu),
                        "gamma_g": None if gg is None else float(gg),
                        "val_error": float(ve),
                    })
            if not scored:
                table.failures.append({**key, "algorithm": algo, "kernel": kname,
                                       "reason": "no grid cell produced a model"})
                continue
            scored.sort(key=lambda c: (c[0], c[1], c[2]))
            ve, g, _, gu, gg, model, size, idx = scored[0]
            te = _subset_error(k_te, idx, model, y_te)
            table.rows.append(ResultRow(
                key["dataset"], key["task"], algo, kname, key["fraction"],
                key["repetition"],
                gamma=float(g),
                gamma_u=None if gu is None else float(gu),
                gamma_g=None if gg is None else float(gg),
                epsilon=cfg.epsilon if algo == "gc" else None,
                val_error=float(ve), test_error=float(te), induced_size=int(size),
                seconds=time.perf_counter() - t0 if cfg.record_timing else 0.0,
            ))


def run_threshold_study(
    cfg: ExperimentConfig,
    epsilons=DEFAULT_THRESHOLD_EPSILONS,
    gamma_g_values=DEFAULT_THRESHOLD_GAMMA_G,
) -> ResultTable:
    """Sweep the confidence threshold against the harmonic regularizer.

    Uses the first configured labeled fraction (1 percent by default) and
    the first configured kernel.  For each (epsilon, gamma_g) cell the cut
    pipeline is retrained and the row records the thresholded empirical
    risk, the training and test errors against the true labels, and the
    kept percentage of the training fold.  The margin weight is pinned to
    the geometric center of the selection range.
    """
    dataset, tasks, dname = _load_source(cfg)
    frac = cfg.labeled_fractions[0]
    kname = cfg.kernels[0]
    table = ResultTable(
        extra_columns=("thresholded_risk", "train_error", "kept_pct", "slack"),
        group_keys=("dataset", "algorithm", "kernel", "fraction", "epsilon", "gamma_g"),
    )
    for ti, task in enumerate(tasks):
        task = _subsample_task(task, cfg.max_points, _child_seed(cfg.seed, 9999, ti))
        tname = f"{task.positive_class}_vs_{task.negative_class}"
        for rep in range(cfg.repetitions):
            key = {"dataset": dname, "task": tname, "fraction": frac, "repetition": rep}
            try:
                prepared = _prepare_cell(dataset, task, frac, cfg,
                                         _child_seed(cfg.seed, ti, 0, rep))
            except Exception as exc:
                table.failures.append({**key, "reason": str(exc)})
                continue
            split, x_tr, stats, graph, y_train, truth_train = prepared
            x_te = dataset.features[split.test]
            y_te = task.labels_for(split.test)
            kern = resolve_kernel(kname, dataset.num_features, stats.sigma_bar)
            k_tr = gram_matrix(kern, x_tr)
            k_te = kernel_matrix(kern, x_te, x_tr)
            g = float(np.sqrt(cfg.gamma_bounds[0] * cfg.gamma_bounds[1]) * split.n_l)
            gl = laplacian(graph)
            for gg in gamma_g_values:
                try:
                    sol = solve_hard(gl, y_train, HarmonicConfig(gg))
                except Exception as exc:
                    table.failures.append({**key, "gamma_g": gg, "reason": str(exc)})
                    continue
                for eps in epsilons:
                    t0 = time.perf_counter()
                    try:
                        induced = threshold_labels(sol, eps)
                        model, used, _ = _train_on_induced(
                            x_tr, induced, y_train, kern,
                            SvmConfig(g, cfg.bias, cfg.svm_tol, cfg.max_passes),
                            gram=k_tr,
                        )
                        train_scores = (k_tr[:, used.indices] @ model.coefficients
                                        + model.bias)
                        risks = empirical_risks(train_scores, sol, y_train, eps)
                        train_err = float(np.mean(
                            np.where(train_scores >= 0, 1, -1) != truth_train
                        ))
                        test_err = _subset_error(k_te, used.indices, model, y_te)
                    except Exception as exc:
                        table.failures.append({**key, "gamma_g": gg, "epsilon": eps,
                                               "reason": str(exc)})
                        continue
                    table.rows.append(ResultRow(
                        key["dataset"], key["task"], "gc", kname, frac,
                        key["repetition"],
                        gamma=g, gamma_u=g / gg, gamma_g=float(gg), epsilon=float(eps),
                        val_error=None, test_error=float(test_err),
                        induced_size=int(used.size),
                        seconds=time.perf_counter() - t0 if cfg.record_timing else 0.0,
                        extras={
                            "thresholded_risk": float(risks.thresholded_empirical_risk),
                            "train_error": float(train_err),
                            "kept_pct": float(used.size / x_tr.shape[0]),
                            "slack": float(risks.slack),
                        },
                    ))
    return table


def aggregate(table: ResultTable) -> list[dict]:
    """Mean rows over the table's group keys (tasks and repetitions pool together)."""
    numeric = ("val_error", "test_error", "induced_size", "seconds") + tuple(
        table.extra_columns
    )
    groups: dict = {}
    for row in table.rows:
        key = tuple(row.as_dict(table.extra_columns)[k] for k in table.group_keys)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: tuple(-1.0 if v is None else v if isinstance(v, (int, float)) else str(v) for v in k)):
        rows = groups[key]
        rec = dict(zip(table.group_keys, key))
        for col in numeric:
            vals = [row.as_dict(table.extra_columns)[col] for row in rows]
            vals = [v for v in vals if v is not None]
            rec[f"mean_{col}"] = float(np.mean(vals)) if vals else None
        rec["count"] = len(rows)
        out.append(rec)
    return out


def _jsonable(v):
    if v is None or isinstance(v, (str, int, bool)):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return str(v)


def _fmt_csv(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def emit_reports(table: ResultTable, format: str = "csv", path: str = ".") -> list[str]:
    """Write the per-cell file and the aggregated summary file.

    ``path`` is a directory (created if missing).  Columns follow the fixed
    base order with any study-specific extras appended; rows are sorted by
    key, CSV floats carry 6 significant digits, and JSON keeps full
    precision, so output bytes are a pure function of the table.
    """
    if not table.rows:
        raise ValueError("no results to report")
    if format not in ("csv", "json"):
        raise ValueError(f"unknown report format {format!r}")
    os.makedirs(path, exist_ok=True)
    columns = list(BASE_COLUMNS) + list(table.extra_columns)
    rows = [r.as_dict(table.extra_columns) for r in table.sorted_rows()]
    summary = aggregate(table)
    written = []
    if format == "csv":
        cells_path = os.path.join(path, "cells.csv")
        with open(cells_path, "w", encoding="utf-8") as fh:
            fh.write(",".join(columns) + "\n")
            for r in rows:
                fh.write(",".join(_fmt_csv(r[c]) for c in columns) + "\n")
        written.append(cells_path)
        summary_path = os.path.join(path, "summary.csv")
        sum_cols = list(summary[0].keys())
        with open(summary_path, "w", encoding="utf-8") as fh:
            fh.write(",".join(sum_cols) + "\n")
            for r in summary:
                fh.write(",".join(_fmt_csv(r[c]) for c in sum_cols) + "\n")
        written.append(summary_path)
    else:
        cells_path = os.path.join(path, "cells.json")
        payload = {
            "columns": columns,
            "rows": [{k: _jsonable(v) for k, v in r.items()} for r in rows],
            "failures": [
                {k: _jsonable(v) for k, v in f.items()} for f in table.failures
            ],
        }
        with open(cells_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(cells_path)
        summary_path = os.path.join(path, "summary.json")
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(
                {"group_keys": list(table.group_keys),
                 "rows": [{k: _jsonable(v) for k, v in r.items()} for r in summary]},
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")
        written.append(summary_path)
    return written


def save_probe_csv(path, xs, ys, scores) -> None:
    """Plot-ready dump of a dense probe grid: one "x1,x2,score" row per grid point."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,x2,score\n")
        for i, a in enumerate(xs):
            for j, b in enumerate(ys):
                fh.write(f"{a:.17g},{b:.17g},{scores[i, j]:.17g}\n")
