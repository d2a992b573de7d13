"""Manifold-regularized max-margin training and axis-aligned Laplacian analysis.

The trainer minimizes, over expansions f = sum_j alpha_j k(x_j, .) on all n
graph vertices (plus an optional bias),

    sum_{i in l} max(1 - y_i f(x_i), 0) + gamma ||f||_K^2 + gamma_u f' L f.

Stationarity collapses the problem to a box-constrained dual over the labeled
points with the deformed Gram matrix  K (2 gamma I + 2 gamma_u L K)^{-1}
restricted to labeled rows, reusing the same dual-ascent core as the plain
trainer.  The reduction is solved in the scale-free form
(I + (gamma_u / gamma) L K), whose spectrum lies right of 1, so the
factorization stays reliable even when the raw condition number is large.
A projected-subgradient primal loop is available as an explicit alternative
and as a fallback when the factorization breaks down numerically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as dense_linalg
from scipy import sparse

from .graphs import GraphLaplacian, SimilarityGraph, laplacian
from .svm import KernelSpec, SvmModel, _solve_box_qp, gram_matrix, hinge_loss

__all__ = [
    "LapSvmConfig",
    "train_lapsvm",
    "axis_aligned_deltas",
    "manifold_quadratic_form",
]

@dataclass
class LapSvmConfig:
    gamma: float
    gamma_u: float
    kernel: KernelSpec
    tol: float = 1e-6
    bias: bool = True
    max_passes: int = 1000
    use_subgradient: bool = False
    subgradient_iters: int = 10_000

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.gamma_u < 0:
            raise ValueError("gamma_u must be nonnegative")


def _objective(k, lap, labels_mask, y_l, alpha, bias, gamma, gamma_u):
    f = k @ alpha
    hinged = float(hinge_loss(f[labels_mask] + bias, y_l).sum())
    reg = gamma * float(alpha @ f) + gamma_u * float(f @ (lap @ f))
    return hinged + reg


def _train_subgradient(k, lap, labels_mask, y_l, cfg: LapSvmConfig):
    """Projected-subgradient descent on the primal; fixed c / sqrt(t) schedule.

    Returns the best iterate visited (the all-zero start included).
    """
    n = k.shape[0]
    r = 2.0 * cfg.gamma * k + 2.0 * cfg.gamma_u * (lap @ k)
    scale = max(1.0, float(np.abs(r).sum(axis=1).max()))
    step0 = 1.0 / scale
    k_l = k[labels_mask]
    alpha = np.zeros(n)
    bias = 0.0
    best = (
        _objective(k, lap, labels_mask, y_l, alpha, bias, cfg.gamma, cfg.gamma_u),
        alpha.copy(),
        0.0,
    )
    for t in range(1, cfg.subgradient_iters + 1):
        margins = y_l * (k_l @ alpha + bias)
        active = margins < 1.0
        grad_a = r @ alpha - k_l.T @ (y_l * active)
        alpha -= (step0 / np.sqrt(t)) * grad_a
        if cfg.bias:
            bias -= (step0 / np.sqrt(t)) * (-(y_l * active).sum())
        obj = _objective(k, lap, labels_mask, y_l, alpha, bias, cfg.gamma, cfg.gamma_u)
        if obj < best[0]:
            best = (obj, alpha.copy(), bias)
    return best[1], best[2], best[0]


def train_lapsvm(points, graph: SimilarityGraph, labels, cfg: LapSvmConfig,
                 gram=None, graph_laplacian=None) -> SvmModel:
    """Fit a manifold-regularized discriminator expanded over all n points.

    Parameters
    ----------
    points : (n, K) array
        Features of every graph vertex, labeled or not.
    graph : SimilarityGraph
        Adjacency built over exactly these points.
    labels : length-n vector over {-1, 0, +1}
        Nonzero entries mark the labeled set.
    cfg : LapSvmConfig
        ``gamma_u`` = 0 is tolerated here (flagged): the smoothness term
        vanishes and the result matches plain max-margin training on the
        labeled points.  ``use_subgradient`` forces the primal loop.
    gram, graph_laplacian : optional precomputed Gram matrix and Laplacian.

    Raises a ``ValueError`` suggesting a larger gamma when the reduction
    matrix 2 gamma I + 2 gamma_u L K cannot be assembled finitely; a
    factorization breakdown falls back to the subgradient loop with a
    warning.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    n = x.shape[0]
    if graph.n != n:
        raise ValueError("graph must be built over exactly the given points")
    y = np.asarray(labels, dtype=float).ravel()
    if y.shape != (n,):
        raise ValueError(f"labels must be a length-{n} vector (0 marks unlabeled)")
    l_mask = y != 0
    y_l = y[l_mask]
    if y_l.size == 0 or np.unique(y_l).size < 2:
        raise ValueError("both classes must be present among the labeled points")
    if not np.all(np.isin(y_l, (-1.0, 1.0))):
        raise ValueError("labeled entries must be -1 or +1")
    if cfg.gamma_u == 0:
        warnings.warn("gamma_u = 0: smoothness term disabled", stacklevel=2)

    k = gram_matrix(cfg.kernel, x) if gram is None else gram
    lap = laplacian(graph).laplacian if graph_laplacian is None else graph_laplacian.laplacian

    use_fallback = cfg.use_subgradient
    z = None
    if not use_fallback:
        # scale-free reduction system; its eigenvalues all lie right of 1
        a_mat = np.eye(n) + (cfg.gamma_u / cfg.gamma) * (lap @ k)
        rhs = np.zeros((n, int(l_mask.sum())))
        rhs[np.flatnonzero(l_mask), np.arange(rhs.shape[1])] = 1.0
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", dense_linalg.LinAlgWarning)
                z = dense_linalg.lu_solve(dense_linalg.lu_factor(a_mat), rhs)
            z /= 2.0 * cfg.gamma
        except dense_linalg.LinAlgError:
            z = None
        if z is None or not np.all(np.isfinite(z)):
            if not np.all(np.isfinite(a_mat)):
                raise ValueError(
                    "reduction matrix 2*gamma*I + 2*gamma_u*L@K is not finite; "
                    "try a larger gamma"
                )
            warnings.warn(
                "reduction factorization broke down; "
                "falling back to subgradient descent",
                stacklevel=2,
            )
            use_fallback = True

    if use_fallback:
        alpha, bias, objective = _train_subgradient(k, lap, l_mask, y_l, cfg)
        gap = float("nan")
        lam = None
    else:
        k_eff = k[l_mask] @ z
        k_eff = 0.5 * (k_eff + k_eff.T)
        min_eig = float(np.linalg.eigvalsh(k_eff)[0])
        if min_eig < -1e-8 * max(1.0, float(np.max(np.abs(np.diag(k_eff))))):
            warnings.warn(
                f"deformed Gram matrix is indefinite (min eigenvalue {min_eig:.3e})",
                stacklevel=2,
            )
        lam, bias, _, gap, _ = _solve_box_qp(
            k_eff, y_l, 1.0, cfg.bias, 0.5, cfg.tol,
            cfg.max_passes * max(int(y_l.size), 100),
        )
        alpha = z @ (y_l * lam)
        objective = _objective(k, lap, l_mask, y_l, alpha, bias, cfg.gamma, cfg.gamma_u)

    return SvmModel(
        train_points=x.copy(),
        coefficients=alpha,
        bias=bias,
        kernel=cfg.kernel,
        objective_value=objective,
        duality_gap=gap,
        dual_vars=lam,
        labels=None,
        box=1.0,
    )


def axis_aligned_deltas(g: SimilarityGraph, d) -> np.ndarray:
    """Per-dimension weighted edge-length sums on an axis-aligned graph.

    Returns the vector with entries sum_{i,j} w_ij (x_im - x_jm)^2 over
    ordered pairs.  Every edge must differ in exactly one coordinate (others
    equal within 1e-12); the first violating edge is reported.
    """
    x = np.atleast_2d(np.asarray(getattr(d, "features", d), dtype=float))
    if g.n != x.shape[0]:
        raise ValueError("graph and features disagree on the number of points")
    coo = g.weights.tocoo()
    mask = coo.row < coo.col
    rows, cols, w = coo.row[mask], coo.col[mask], coo.data[mask]
    diffs = x[rows] - x[cols]
    moved = np.abs(diffs) > 1e-12
    bad = np.flatnonzero(moved.sum(axis=1) != 1)
    if bad.size:
        e = bad[0]
        raise ValueError(
            f"edge ({rows[e]}, {cols[e]}) is not axis-aligned: "
            f"displacement {diffs[e].tolist()}"
        )
    return 2.0 * (w[:, None] * diffs**2).sum(axis=0)


def manifold_quadratic_form(gl, f_values) -> float:
    """The smoothness energy f' L f = 0.5 sum_{i,j} w_ij (f_i - f_j)^2."""
    lap = gl.laplacian if isinstance(gl, GraphLaplacian) else sparse.csr_matrix(gl)
    f = np.asarray(f_values, dtype=float)
    return float(f @ (lap @ f))
