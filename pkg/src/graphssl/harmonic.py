"""Regularized harmonic labeling: clamped and soft solvers, walk decomposition, thresholding."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as dense_linalg
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg

from .graphs import GraphLaplacian, SimilarityGraph, laplacian

__all__ = [
    "HarmonicConfig",
    "HarmonicSolution",
    "SoftHarmonicConfig",
    "AbsorptionDecomposition",
    "InducedSet",
    "SingularSystemError",
    "SolverConvergenceError",
    "solve_hard",
    "solve_soft",
    "absorption_decomposition",
    "threshold_labels",
    "export_solution_csv",
]

_DENSE_LIMIT = 500  # direct factorization below this many unknowns, PCG above


class SingularSystemError(RuntimeError):
    """The clamped system is singular (an unlabeled component carries no label)."""


class SolverConvergenceError(RuntimeError):
    """The iterative solver stopped above tolerance; carries the residual norm."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass
class HarmonicConfig:
    gamma_g: float = 0.0
    solver_tol: float = 1e-10
    max_iter: int = 5000

    def __post_init__(self):
        if self.gamma_g < 0:
            raise ValueError("gamma_g must be nonnegative")
        if not self.solver_tol > 0:
            raise ValueError("solver_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass
class SoftHarmonicConfig:
    """Diagonal penalty weights for the relaxed solver: c_l on labeled rows, c_u elsewhere.

    The regime c_l = 1 and 0 < c_u < c_l is the one whose stability constant
    is known; other settings remain solvable but emit a warning.
    """

    c_l: float = 1.0
    c_u: float = 0.01
    gamma_g: float = 0.0
    solver_tol: float = 1e-10
    max_iter: int = 5000

    def __post_init__(self):
        if self.gamma_g < 0:
            raise ValueError("gamma_g must be nonnegative")
        if min(self.c_l, self.c_u) < 0:
            raise ValueError("penalty weights must be nonnegative")
        if min(self.c_l, self.c_u) <= 0 and self.gamma_g <= 0:
            raise ValueError("need positive penalties or gamma_g > 0 for a definite system")


@dataclass
class HarmonicSolution:
    """Soft labels over all vertices.

    ``values[i]`` equals the clamp value exactly for labeled i under the hard
    solver; the soft solver only pulls labeled entries toward their targets.
    ``residual`` is the achieved linear-system residual norm.
    """

    values: np.ndarray
    labeled_mask: np.ndarray
    gamma_g: float
    residual: float

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def confidences(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labeled_mask)


@dataclass
class AbsorptionDecomposition:
    """Absorption probabilities of the labeled-boundary random walk.

    ``p_plus[r]`` / ``p_minus[r]`` are the probabilities that a walk from the
    r-th unlabeled vertex is absorbed at a +1 / -1 labeled vertex;
    ``sink_mass`` is the remainder lost to the regularization sink.
    """

    p_plus: np.ndarray
    p_minus: np.ndarray
    sink_mass: np.ndarray
    unlabeled_indices: np.ndarray


@dataclass
class InducedSet:
    """Confident vertices kept by thresholding, with their sign labels."""

    indices: np.ndarray
    labels: np.ndarray
    n_excluded: int

    @property
    def size(self) -> int:
        return self.indices.size


def _check_label_vector(labels, n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"labels must be a length-{n} vector (0 marks unlabeled)")
    nz = y[y != 0]
    if nz.size == 0:
        raise ValueError("at least one labeled vertex is required")
    if not np.all(np.isin(nz, (-1.0, 1.0))):
        raise ValueError("labeled entries must be -1 or +1")
    return y


def _check_unlabeled_components(lap: sparse.csr_matrix, labeled_mask: np.ndarray) -> None:
    adj = lap.copy().tolil()
    adj.setdiag(0)
    ncomp, comp = connected_components(abs(adj.tocsr()), directed=False)
    has_label = np.zeros(ncomp, dtype=bool)
    has_label[comp[labeled_mask]] = True
    bad = np.flatnonzero(~has_label[comp] & ~labeled_mask)
    if bad.size:
        comp_id = comp[bad[0]]
        members = np.flatnonzero(comp == comp_id)
        raise SingularSystemError(
            f"gamma_g = 0 with an unlabeled connected component (id {comp_id}, "
            f"vertices {members[:10].tolist()}{'...' if members.size > 10 else ''}); "
            "label a vertex in it or use gamma_g > 0"
        )


def _spd_solve(a: sparse.csr_matrix, rhs: np.ndarray, tol: float, max_iter: int):
    """Solve an SPD sparse system: Cholesky below the dense limit, Jacobi-PCG above."""
    n = a.shape[0]
    rhs_norm = np.linalg.norm(rhs)
    if n <= _DENSE_LIMIT:
        dense = a.toarray()
        try:
            factor = dense_linalg.cho_factor(dense)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded earlier
            raise SingularSystemError(f"clamped system is not positive definite: {exc}")
        x = dense_linalg.cho_solve(factor, rhs)
        for _ in range(2):  # iterative refinement keeps the residual near roundoff
            r = rhs - dense @ x
            if np.linalg.norm(r) <= tol * rhs_norm:
                break
            x += dense_linalg.cho_solve(factor, r)
        return x, float(np.linalg.norm(rhs - dense @ x))
    diag = a.diagonal()
    pre = sparse.diags(np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 1.0))
    x, info = cg(a, rhs, rtol=tol, atol=0.0, maxiter=max_iter, M=pre)
    residual = float(np.linalg.norm(rhs - a @ x))
    if info != 0:
        raise SolverConvergenceError(
            f"conjugate gradient stopped after {max_iter} iterations "
            f"with residual {residual:.3e}",
            residual=residual,
        )
    return x, residual


def _clamped_solve(
    gl: GraphLaplacian,
    labeled_mask: np.ndarray,
    boundary: np.ndarray,
    gamma_g: float,
    tol: float,
    max_iter: int,
):
    """Solve (L_uu + gamma_g I) x_u = W_ul b_l with x clamped to b on labeled vertices."""
    n = gl.n
    values = np.array(boundary, dtype=float)
    values[~labeled_mask] = 0.0
    u = np.flatnonzero(~labeled_mask)
    if u.size == 0:
        return values, 0.0
    if gamma_g == 0.0:
        _check_unlabeled_components(gl.laplacian, labeled_mask)
    l = np.flatnonzero(labeled_mask)
    lap = gl.laplacian
    a = (lap[u][:, u] + gamma_g * sparse.identity(u.size, format="csr")).tocsr()
    rhs = -(lap[u][:, l] @ values[l])  # off-diagonal of L is -W, so this is W_ul b_l
    x, residual = _spd_solve(a, rhs, tol, max_iter)
    values[u] = x
    return values, residual


def solve_hard(gl: GraphLaplacian, labels, cfg: HarmonicConfig | None = None) -> HarmonicSolution:
    """Harmonic labeling with hard clamps and ridge term gamma_g.

    Parameters
    ----------
    gl : GraphLaplacian
    labels : length-n vector over {-1, 0, +1}
        Nonzero entries are clamped; zeros mark unlabeled vertices.
    cfg : HarmonicConfig, optional

    The unlabeled block solves (L_uu + gamma_g I) x = W_ul y_l, which is
    positive definite whenever gamma_g > 0, or gamma_g = 0 and every
    connected component containing unlabeled vertices also contains a label
    (otherwise :class:`SingularSystemError` identifies the component).
    """
    cfg = cfg or HarmonicConfig()
    y = _check_label_vector(labels, gl.n)
    mask = y != 0
    values, residual = _clamped_solve(gl, mask, y, cfg.gamma_g, cfg.solver_tol, cfg.max_iter)
    if np.max(np.abs(values)) > 1.0 + 1e-9:
        raise SolverConvergenceError(
            f"confidence bound violated (max |value| = {np.max(np.abs(values)):.12g}); "
            "this indicates a solver failure",
            residual=residual,
        )
    return HarmonicSolution(values, mask, cfg.gamma_g, residual)


def solve_soft(
    gl: GraphLaplacian, pseudo_targets, cfg: SoftHarmonicConfig | None = None
) -> HarmonicSolution:
    """Relaxed harmonic labeling: minimize (x - y)' C (x - y) + x' (L + gamma_g I) x.

    ``pseudo_targets`` is a length-n real vector that is zero off the labeled
    set; its nonzero entries define the labeled mask and the diagonal of C
    (c_l on labeled rows, c_u elsewhere).  The closed-form minimizer is
    (C + L + gamma_g I)^{-1} C y.  When all targets lie in [-1, 1] the
    solution provably does too; a violation raises, it is never clipped.
    """
    cfg = cfg or SoftHarmonicConfig()
    y = np.asarray(pseudo_targets, dtype=float)
    if y.shape != (gl.n,):
        raise ValueError(f"pseudo_targets must be a length-{gl.n} vector")
    if not np.all(np.isfinite(y)):
        raise ValueError("pseudo_targets must be finite")
    if not (cfg.c_l == 1.0 and 0 < cfg.c_u < cfg.c_l):
        warnings.warn(
            "penalty weights outside the stability regime (c_l = 1, 0 < c_u < c_l)",
            stacklevel=2,
        )
    mask = y != 0
    c_diag = np.where(mask, cfg.c_l, cfg.c_u)
    a = (
        gl.laplacian
        + sparse.diags(c_diag + cfg.gamma_g * np.ones(gl.n))
    ).tocsr()
    rhs = c_diag * y
    values, residual = _spd_solve(a, rhs, cfg.solver_tol, cfg.max_iter)
    bound = np.max(np.abs(y)) if y.any() else 0.0
    if bound <= 1.0 and np.max(np.abs(values), initial=0.0) > bound + 1e-9:
        raise SolverConvergenceError(
            "soft solution escaped the target range; this indicates a solver failure",
            residual=residual,
        )
    return HarmonicSolution(values, mask, cfg.gamma_g, residual)


def absorption_decomposition(
    g: SimilarityGraph, labels, gamma_g: float = 0.0
) -> AbsorptionDecomposition:
    """Split soft labels into absorption probabilities at +1 and -1 vertices.

    Runs the clamped solver twice with indicator boundaries (1 on the
    positive labels, 0 on the negative ones, and vice versa).  The remainder
    1 - p_plus - p_minus is the probability of ending in the regularization
    sink; it vanishes when gamma_g = 0 on a connected graph, and the
    difference p_plus - p_minus reproduces the harmonic values.
    """
    gl = laplacian(g)
    y = _check_label_vector(labels, g.n)
    mask = y != 0
    cfg = HarmonicConfig(gamma_g=gamma_g)
    plus_boundary = np.where(y > 0, 1.0, 0.0)
    minus_boundary = np.where(y < 0, 1.0, 0.0)
    vp, _ = _clamped_solve(gl, mask, plus_boundary, gamma_g, cfg.solver_tol, cfg.max_iter)
    vm, _ = _clamped_solve(gl, mask, minus_boundary, gamma_g, cfg.solver_tol, cfg.max_iter)
    u = np.flatnonzero(~mask)
    p_plus, p_minus = vp[u], vm[u]
    for name, p in (("p_plus", p_plus), ("p_minus", p_minus)):
        if p.size and p.min() < -1e-9:
            raise SolverConvergenceError(
                f"{name} has a negative entry ({p.min():.3e}); solver failure", residual=0.0
            )
    p_plus = np.maximum(p_plus, 0.0)
    p_minus = np.maximum(p_minus, 0.0)
    sink = 1.0 - p_plus - p_minus
    if sink.size and sink.min() < -1e-9:
        raise SolverConvergenceError(
            f"absorption masses exceed 1 ({sink.min():.3e}); solver failure", residual=0.0
        )
    return AbsorptionDecomposition(p_plus, p_minus, np.maximum(sink, 0.0), u)


def threshold_labels(solution: HarmonicSolution, epsilon: float) -> InducedSet:
    """Keep vertices with confidence >= epsilon, labeled by the sign of their value.

    ``n_excluded`` counts the dropped vertices.  With epsilon > 0 an exact
    zero is excluded by the confidence test itself; with epsilon = 0 zeros
    are kept and mapped to +1, which is flagged with a warning.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    kept = solution.confidences >= epsilon
    idx = np.flatnonzero(kept)
    vals = solution.values[idx]
    if epsilon == 0 and np.any(vals == 0):
        warnings.warn("zero-confidence vertices mapped to +1", stacklevel=2)
    labels = np.where(vals >= 0, 1, -1)
    return InducedSet(idx, labels, int(solution.n - idx.size))


def export_solution_csv(solution: HarmonicSolution, epsilon: float, path) -> None:
    """Write "index,ell,confidence,kept" rows; kept is the epsilon-threshold flag."""
    kept = solution.confidences >= epsilon
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,ell,confidence,kept\n")
        for i, (v, c, k) in enumerate(zip(solution.values, solution.confidences, kept)):
            fh.write(f"{i},{v:.17g},{c:.17g},{int(k)}\n")
