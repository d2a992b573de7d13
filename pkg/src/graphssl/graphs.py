"""Similarity graphs with Gaussian edge weights, Laplacians, and spectral helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

__all__ = [
    "WeightSpec",
    "SimilarityGraph",
    "GraphLaplacian",
    "TransitionMatrix",
    "PowerIterationError",
    "build_knn_graph",
    "build_radius_graph",
    "laplacian",
    "transition_matrix",
    "largest_laplacian_eigenvalue",
    "save_edge_list",
    "load_edge_list",
]


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge; carries the best eigenvalue estimate."""

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


@dataclass(frozen=True)
class WeightSpec:
    """Gaussian edge weighting w(x, x') = exp(-||x - x'||^2 / bandwidth)."""

    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def weights_from_sq_dists(self, sq_dists):
        return np.exp(-np.asarray(sq_dists, dtype=float) / self.bandwidth)

    @classmethod
    def from_feature_scale(cls, num_features: int, sigma_bar: float) -> "WeightSpec":
        """Bandwidth 2 * K * sigma_bar^2, matching graphs built on K raw features."""
        if sigma_bar <= 0:
            raise ValueError("sigma_bar must be positive to derive a bandwidth")
        return cls(2.0 * num_features * sigma_bar**2)


@dataclass(frozen=True)
class SimilarityGraph:
    """Sparse symmetric similarity matrix with zero diagonal and weights in [0, 1]."""

    n: int
    weights: sparse.csr_matrix

    def __post_init__(self):
        w = self.weights.tocsr()
        if w.shape != (self.n, self.n):
            raise ValueError("weight matrix shape does not match vertex count")
        if w.diagonal().any():
            raise ValueError("similarity graph must have a zero diagonal")
        if (w != w.T).nnz:
            raise ValueError("weight matrix must be symmetric")
        if w.nnz and (w.data.min() < 0 or w.data.max() > 1):
            raise ValueError("weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)

    @property
    def num_edges(self) -> int:
        return self.weights.nnz // 2


@dataclass(frozen=True)
class GraphLaplacian:
    """L = D - W together with the degree vector d_i = sum_j w_ij."""

    laplacian: sparse.csr_matrix
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-(sub)stochastic walk matrix with entries w_ij / (d_i + sink_gamma).

    With ``sink_gamma`` 0 nonisolated rows sum to 1; otherwise row i sums to
    d_i / (d_i + sink_gamma) and the missing mass belongs to an absorbing sink.
    Zero-degree rows with no sink are all-zero and listed in
    ``zero_degree_rows``.
    """

    probs: sparse.csr_matrix
    sink_gamma: float
    degrees: np.ndarray
    zero_degree_rows: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    def sink_mass(self) -> np.ndarray:
        denom = self.degrees + self.sink_gamma
        return np.divide(
            self.sink_gamma, denom, out=np.zeros_like(denom), where=denom > 0
        )


def _features_of(d) -> np.ndarray:
    x = np.asarray(getattr(d, "features", d), dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a 2-D feature array")
    return x


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def build_knn_graph(d, k: int, w: WeightSpec) -> SimilarityGraph:
    """k-nearest-neighbor graph with union symmetrization.

    An edge (i, j) exists iff j is among the k nearest neighbors of i or
    vice versa; distance ties are broken toward the smaller vertex index.
    Neighbor search is exact (brute force).
    """
    x = _features_of(d)
    n = x.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k} for n={n}")
    d2 = _pairwise_sq_dists(x)
    d2_rank = d2.copy()
    np.fill_diagonal(d2_rank, np.inf)  # exclude self-pairs
    cols = np.broadcast_to(np.arange(n), (n, n))
    order = np.lexsort((cols, d2_rank), axis=-1)
    nbrs = order[:, :k]

    adj = np.zeros((n, n), dtype=bool)
    adj[np.repeat(np.arange(n), k), nbrs.ravel()] = True
    adj |= adj.T
    np.fill_diagonal(adj, False)

    weights = np.where(adj, w.weights_from_sq_dists(d2), 0.0)
    return SimilarityGraph(n, sparse.csr_matrix(weights))


def build_radius_graph(d, radius: float, w: WeightSpec) -> SimilarityGraph:
    """Graph connecting every pair with 0 < ||x_i - x_j|| <= radius."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    x = _features_of(d)
    n = x.shape[0]
    d2 = _pairwise_sq_dists(x)
    adj = (d2 > 0) & (d2 <= radius * radius)
    np.fill_diagonal(adj, False)
    weights = np.where(adj, w.weights_from_sq_dists(d2), 0.0)
    return SimilarityGraph(n, sparse.csr_matrix(weights))


def laplacian(g: SimilarityGraph) -> GraphLaplacian:
    """Assemble L = D - W and the degree vector."""
    degrees = np.ravel(g.weights.sum(axis=1))
    lap = (sparse.diags(degrees) - g.weights).tocsr()
    return GraphLaplacian(lap, degrees)


def transition_matrix(g: SimilarityGraph, gamma_g: float) -> TransitionMatrix:
    """Random-walk matrix P with entries w_ij / (d_i + gamma_g).

    ``gamma_g`` > 0 adds an absorbing sink reached from vertex i with
    per-step probability gamma_g / (d_i + gamma_g).  Zero-degree vertices
    with gamma_g = 0 get an all-zero row and are flagged, not rejected.
    """
    if gamma_g < 0:
        raise ValueError("gamma_g must be nonnegative")
    degrees = np.ravel(g.weights.sum(axis=1))
    denom = degrees + gamma_g
    inv = np.divide(1.0, denom, out=np.zeros_like(denom), where=denom > 0)
    probs = (sparse.diags(inv) @ g.weights).tocsr()
    zero_rows = np.flatnonzero(denom == 0)
    return TransitionMatrix(probs, float(gamma_g), degrees, zero_rows)


def largest_laplacian_eigenvalue(L, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Accepts a :class:`GraphLaplacian`, a sparse matrix, or a dense array.
    The start vector is the normalized all-ones vector plus a tiny
    index-dependent perturbation, so runs are deterministic.  Convergence is
    declared either by the eigenpair residual certificate
    ||Av - lambda v|| <= tol * lambda, or when the geometric tail of the
    Rayleigh-quotient sequence (estimated from successive differences) drops
    below tol * lambda.  Failure raises :class:`PowerIterationError`
    carrying the best estimate.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = L.laplacian if isinstance(L, GraphLaplacian) else L
    n = a.shape[0]
    v = 1.0 + 1e-6 * np.arange(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    prev_lam = None
    prev_diff = None
    for _ in range(max_iter):
        av = a @ v
        lam = float(v @ av)
        scale = max(abs(lam), 1e-30)
        if np.linalg.norm(av - lam * v) <= tol * scale:
            return max(lam, 0.0)
        if prev_lam is not None:
            diff = abs(lam - prev_lam)
            if diff <= 1e-16 * scale:
                return max(lam, 0.0)
            if prev_diff is not None and prev_diff > 0:
                ratio = diff / prev_diff
                # remaining tail of a geometric sequence: diff * r / (1 - r)
                if ratio < 1 and diff * ratio / (1.0 - ratio) <= tol * scale:
                    return max(lam, 0.0)
            prev_diff = diff
        prev_lam = lam
        nrm = np.linalg.norm(av)
        if nrm == 0.0:
            return 0.0
        v = av / nrm
    raise PowerIterationError(
        f"power iteration did not converge within {max_iter} iterations "
        f"(best estimate {lam:.6g})",
        best_estimate=lam,
    )


def save_edge_list(g: SimilarityGraph, path) -> None:
    """Write the graph as one "i j w" line per undirected edge (0-based, i < j)."""
    coo = g.weights.tocoo()
    mask = coo.row < coo.col
    order = np.lexsort((coo.col[mask], coo.row[mask]))
    rows, cols, data = coo.row[mask][order], coo.col[mask][order], coo.data[mask][order]
    with open(path, "w", encoding="utf-8") as fh:
        for i, j, w in zip(rows, cols, data):
            fh.write(f"{i} {j} {w:.17g}\n")


def load_edge_list(path, n: int | None = None) -> SimilarityGraph:
    """Read an "i j w" edge list; n defaults to the largest index plus one."""
    rows, cols, data = [], [], []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}: line {ln}: expected 'i j w'")
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
            if i == j:
                raise ValueError(f"{path}: line {ln}: self-loops are not allowed")
            if not 0 <= w <= 1 or not np.isfinite(w):
                raise ValueError(f"{path}: line {ln}: weight must lie in [0, 1]")
            rows += [i, j]
            cols += [j, i]
            data += [w, w]
    if not rows:
        raise ValueError(f"{path}: no edges")
    size = n if n is not None else max(max(rows), max(cols)) + 1
    mat = sparse.coo_matrix((data, (rows, cols)), shape=(size, size))
    return SimilarityGraph(size, mat.tocsr())
