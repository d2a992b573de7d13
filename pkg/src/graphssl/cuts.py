"""Two-stage max-margin graph cuts: harmonic labeling, thresholding, hinge training."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graphs import SimilarityGraph, laplacian
from .harmonic import (
    HarmonicConfig,
    HarmonicSolution,
    InducedSet,
    SoftHarmonicConfig,
    solve_hard,
    solve_soft,
    threshold_labels,
)
from .svm import KernelSpec, SvmConfig, SvmModel, decision_scores, train_svm

__all__ = [
    "GraphCutConfig",
    "GraphCutResult",
    "train_graph_cut",
    "misclassification_rate",
]


@dataclass
class GraphCutConfig:
    """Knobs of the two-stage pipeline.

    ``gamma_g`` regularizes the harmonic stage, ``epsilon`` drops
    low-confidence vertices, and ``kernel`` / ``gamma`` parameterize the
    margin stage.  ``soft_mode`` swaps the clamped solver for the relaxed one
    with penalties ``c_l`` / ``c_u``.
    """

    gamma_g: float
    epsilon: float
    kernel: KernelSpec
    gamma: float
    soft_mode: bool = False
    c_l: float = 1.0
    c_u: float = 0.01
    bias: bool = True
    svm_tol: float = 1e-6
    max_passes: int = 1000
    solver_tol: float = 1e-10

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.gamma_g < 0:
            raise ValueError("gamma_g must be nonnegative")


@dataclass
class GraphCutResult:
    model: SvmModel
    harmonic: HarmonicSolution
    induced: InducedSet
    labeled_fallback: bool


def _train_on_induced(features, induced: InducedSet, labels, kernel, svm_cfg: SvmConfig,
                      gram=None):
    """Margin training on the induced set; one-class sets fall back to the labeled points.

    ``gram`` may carry a precomputed Gram matrix over all of ``features``;
    the induced block is sliced out of it.
    """
    if induced.size == 0:
        raise ValueError("empty induced set: every vertex fell below the threshold")
    fallback = np.unique(induced.labels).size < 2
    if fallback:
        warnings.warn(
            "induced set is single-class; falling back to the labeled points",
            stacklevel=3,
        )
        idx = np.flatnonzero(labels != 0)
        y = np.asarray(labels, dtype=float)[idx].astype(int)
        induced = InducedSet(idx, y, int(len(labels) - idx.size))
    sub_gram = None
    if gram is not None:
        sub_gram = gram[np.ix_(induced.indices, induced.indices)]
    model = train_svm(
        np.asarray(features, dtype=float)[induced.indices],
        induced.labels,
        kernel,
        svm_cfg,
        gram=sub_gram,
    )
    return model, induced, fallback


def train_graph_cut(points, graph: SimilarityGraph, labels, cfg: GraphCutConfig) -> GraphCutResult:
    """Run the full pipeline on one training set.

    Parameters
    ----------
    points : (n, K) array
        Features of the graph vertices (the training fold).
    graph : SimilarityGraph
        Built over exactly these points.
    labels : length-n vector over {-1, 0, +1}
        Nonzero entries are the known labels.
    cfg : GraphCutConfig

    Steps: solve the (hard or soft) harmonic system with ``gamma_g``,
    threshold confidences at ``epsilon``, then fit the max-margin
    discriminator on the kept vertices with their sign labels.  All three
    artifacts are returned.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if graph.n != x.shape[0]:
        raise ValueError("graph must be built over exactly the training points")
    gl = laplacian(graph)
    if cfg.soft_mode:
        solution = solve_soft(
            gl,
            labels,
            SoftHarmonicConfig(cfg.c_l, cfg.c_u, cfg.gamma_g, cfg.solver_tol),
        )
    else:
        solution = solve_hard(gl, labels, HarmonicConfig(cfg.gamma_g, cfg.solver_tol))
    induced = threshold_labels(solution, cfg.epsilon)
    model, induced, fallback = _train_on_induced(
        x, induced, labels, cfg.kernel,
        SvmConfig(cfg.gamma, bias=cfg.bias, tol=cfg.svm_tol, max_passes=cfg.max_passes),
    )
    return GraphCutResult(model, solution, induced, fallback)


def misclassification_rate(model: SvmModel, points, truth) -> float:
    """Mean zero-one loss of sign predictions; a score of exactly 0 counts as +1."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(truth, dtype=int).ravel()
    if x.shape[0] == 0:
        raise ValueError("evaluation set is empty")
    if x.shape[0] != y.size:
        raise ValueError("points and truth must align")
    pred = np.where(decision_scores(model, x) >= 0, 1, -1)
    return float(np.mean(pred != y))
