"""Kernels and a hinge-loss max-margin trainer with kernel-expansion prediction.

The trainer minimizes  sum_i max(1 - y_i f(x_i), 0) + gamma ||f||_K^2  over
the span of the training points (plus an optional unpenalized bias).  This is
the standard soft-margin dual with box constant 1 / (2 gamma), solved by
pairwise (with bias) or single-coordinate (without bias) dual ascent with
deterministic maximal-violation working-set selection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelSpec",
    "SvmConfig",
    "SvmModel",
    "SvmConvergenceError",
    "kernel_matrix",
    "gram_matrix",
    "hinge_loss",
    "train_svm",
    "predict",
    "decision_scores",
    "export_model_csv",
]

_TAU = 1e-12  # curvature floor for degenerate dual directions


class SvmConvergenceError(RuntimeError):
    """Dual ascent hit its update budget; carries the last duality gap."""

    def __init__(self, message: str, duality_gap: float):
        super().__init__(message)
        self.duality_gap = duality_gap


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family: 'linear', 'polynomial' (degree, offset) or 'rbf' (width).

    The rbf kernel is exp(-||x - x'||^2 / (2 width^2)); the polynomial kernel
    is (<x, x'> + offset)^degree.
    """

    kind: str
    degree: int = 3
    offset: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "polynomial", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "polynomial" and self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")
        if self.kind == "rbf" and not self.width > 0:
            raise ValueError("rbf width must be positive")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")

    @classmethod
    def polynomial(cls, degree: int, offset: float = 1.0) -> "KernelSpec":
        return cls("polynomial", degree=degree, offset=offset)

    @classmethod
    def cubic(cls, homogeneous: bool = False) -> "KernelSpec":
        return cls("polynomial", degree=3, offset=0.0 if homogeneous else 1.0)

    @classmethod
    def rbf(cls, width: float) -> "KernelSpec":
        return cls("rbf", width=width)

    def describe(self) -> str:
        if self.kind == "linear":
            return "linear"
        if self.kind == "polynomial":
            return f"polynomial,{self.degree},{self.offset:.17g}"
        return f"rbf,{self.width:.17g}"


def kernel_matrix(kernel: KernelSpec, a, b) -> np.ndarray:
    """Kernel evaluations between the rows of a and the rows of b."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if kernel.kind == "linear":
        return a @ b.T
    if kernel.kind == "polynomial":
        base = a @ b.T + kernel.offset
        out = base
        for _ in range(kernel.degree - 1):
            out = out * base
        return out
    sq_a = np.einsum("ij,ij->i", a, a)
    sq_b = np.einsum("ij,ij->i", b, b)
    d2 = np.maximum(sq_a[:, None] + sq_b[None, :] - 2.0 * (a @ b.T), 0.0)
    return np.exp(-d2 / (2.0 * kernel.width**2))


def gram_matrix(kernel: KernelSpec, points, check_psd: bool = True) -> np.ndarray:
    """Symmetric Gram matrix over one point set; warns if visibly indefinite."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    k = kernel_matrix(kernel, x, x)
    if np.max(np.abs(k - k.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(k))):
        raise ValueError("kernel produced an asymmetric Gram matrix")
    k = 0.5 * (k + k.T)
    if kernel.kind == "rbf":
        np.fill_diagonal(k, 1.0)
    if check_psd:
        min_eig = float(np.linalg.eigvalsh(k)[0])
        if min_eig < -1e-8 * max(1.0, float(np.max(np.diag(k)))):
            warnings.warn(f"Gram matrix is indefinite (min eigenvalue {min_eig:.3e})",
                          stacklevel=2)
    return k


def hinge_loss(score, y):
    """max(1 - y * score, 0); accepts scalars or arrays."""
    return np.maximum(1.0 - np.asarray(y, dtype=float) * np.asarray(score, dtype=float), 0.0)


@dataclass
class SvmConfig:
    gamma: float
    bias: bool = True
    tol: float = 1e-6
    max_passes: int = 1000

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be positive")


@dataclass
class SvmModel:
    """Kernel expansion f(x) = sum_i coefficients[i] k(train_points[i], x) + bias."""

    train_points: np.ndarray
    coefficients: np.ndarray
    bias: float
    kernel: KernelSpec
    objective_value: float
    duality_gap: float
    dual_vars: np.ndarray | None = None
    labels: np.ndarray | None = None
    box: float | None = None

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.coefficients != 0)


def _bias_from_gradient(lam, y, grad, c_box) -> float:
    yg = -(y * grad)
    free = (lam > 0) & (lam < c_box)
    if free.any():
        return float(yg[free].mean())
    up = ((y > 0) & (lam < c_box)) | ((y < 0) & (lam > 0))
    low = ((y < 0) & (lam < c_box)) | ((y > 0) & (lam > 0))
    hi = yg[up].max() if up.any() else None
    lo = yg[low].min() if low.any() else None
    if hi is None and lo is None:
        return 0.0
    if hi is None:
        return float(lo)
    if lo is None:
        return float(hi)
    return float(0.5 * (hi + lo))


def _hinge_optimal_bias(scores_no_bias, y) -> float:
    """Exact minimizer of sum_i max(1 - y_i (s_i + b), 0) over b.

    The sum is convex piecewise linear in b, so a minimum sits at one of the
    kinks b = y_i - s_i; the first minimizing kink is returned.
    """
    candidates = y - scores_no_bias
    totals = hinge_loss(scores_no_bias[None, :] + candidates[:, None], y[None, :]).sum(axis=1)
    return float(candidates[int(np.argmin(totals))])


def _evaluate(lam, y, grad, bias, gamma):
    """Primal value, dual value (both in hinge + gamma norm units) and their gap."""
    quad = float(lam @ grad + lam.sum())  # lam' Q lam, since grad = Q lam - 1
    scores = y * (grad + 1.0) + bias
    primal = float(hinge_loss(scores, y).sum() + gamma * quad)
    dual = 2.0 * gamma * (float(lam.sum()) - 0.5 * quad)
    return primal, dual, primal - dual


def _step_pair(q, lam, grad, y, i, j, c_box):
    """Analytic two-variable update keeping y' lam constant (equal boxes)."""
    old_i, old_j = lam[i], lam[j]
    if y[i] != y[j]:
        quad = q[i, i] + q[j, j] + 2.0 * q[i, j]
        if quad <= 0:
            quad = _TAU
        delta = (-grad[i] - grad[j]) / quad
        diff = old_i - old_j
        lam[i] = old_i + delta
        lam[j] = old_j + delta
        if diff > 0:
            if lam[j] < 0:
                lam[j] = 0.0
                lam[i] = diff
        else:
            if lam[i] < 0:
                lam[i] = 0.0
                lam[j] = -diff
        if diff > 0:
            if lam[i] > c_box:
                lam[i] = c_box
                lam[j] = c_box - diff
        else:
            if lam[j] > c_box:
                lam[j] = c_box
                lam[i] = c_box + diff
    else:
        quad = q[i, i] + q[j, j] - 2.0 * q[i, j]
        if quad <= 0:
            quad = _TAU
        delta = (grad[i] - grad[j]) / quad
        total = old_i + old_j
        lam[i] = old_i - delta
        lam[j] = old_j + delta
        if total > c_box:
            if lam[i] > c_box:
                lam[i] = c_box
                lam[j] = total - c_box
        else:
            if lam[j] < 0:
                lam[j] = 0.0
                lam[i] = total
        if total > c_box:
            if lam[j] > c_box:
                lam[j] = c_box
                lam[i] = total - c_box
        else:
            if lam[i] < 0:
                lam[i] = 0.0
                lam[j] = total
    grad += q[:, i] * (lam[i] - old_i) + q[:, j] * (lam[j] - old_j)


def _solve_box_qp(gram, y, c_box, use_bias, gamma, tol, max_updates):
    """Dual ascent for min 0.5 lam' Q lam - sum(lam), 0 <= lam <= c_box (, y' lam = 0).

    Q = (y y') * gram.  Working sets are chosen by maximal KKT violation with
    first-index tie-breaking, so the run is deterministic.  Terminates when
    the duality gap (in primal units) falls below tol * (1 + |primal|).
    """
    m = y.size
    q = (y[:, None] * y[None, :]) * gram
    lam = np.zeros(m)
    grad = -np.ones(m)
    idx = np.arange(m)
    eps = tol
    updates = 0
    check_every = max(1000, m)

    def certify():
        """Exact gradient, best bias, and the duality-gap certificate."""
        nonlocal grad
        grad = q @ lam - 1.0  # shed incremental roundoff drift
        bias = _bias_from_gradient(lam, y, grad, c_box) if use_bias else 0.0
        primal, _, gap = _evaluate(lam, y, grad, bias, gamma)
        if use_bias:
            # the gradient rule can sit off the hinge kink; take the exact
            # piecewise-linear minimizer when it gives a lower primal
            alt = _hinge_optimal_bias(y * (grad + 1.0), y)
            alt_primal, _, alt_gap = _evaluate(lam, y, grad, alt, gamma)
            if alt_primal < primal:
                return alt, alt_primal, alt_gap
        return bias, primal, gap

    while True:
        progressed = False
        while updates < max_updates:
            if use_bias:
                yg = -(y * grad)
                up = ((y > 0) & (lam < c_box)) | ((y < 0) & (lam > 0))
                low = ((y < 0) & (lam < c_box)) | ((y > 0) & (lam > 0))
                if not up.any() or not low.any():
                    break
                i = int(idx[up][np.argmax(yg[up])])
                j = int(idx[low][np.argmin(yg[low])])
                if yg[i] - yg[j] <= eps:
                    break
                _step_pair(q, lam, grad, y, i, j, c_box)
            else:
                pg = np.where(lam <= 0, np.minimum(grad, 0.0),
                              np.where(lam >= c_box, np.maximum(grad, 0.0), grad))
                i = int(np.argmax(np.abs(pg)))
                if abs(pg[i]) <= eps:
                    break
                old = lam[i]
                lam[i] = min(max(old - grad[i] / max(q[i, i], _TAU), 0.0), c_box)
                grad += q[:, i] * (lam[i] - old)
            updates += 1
            progressed = True
            if updates % check_every == 0:
                bias, primal, gap = certify()
                if gap <= tol * (1.0 + abs(primal)):
                    return lam, bias, primal, gap, updates
        bias, primal, gap = certify()
        if gap <= tol * (1.0 + abs(primal)):
            return lam, bias, primal, gap, updates
        if updates >= max_updates or not progressed:
            raise SvmConvergenceError(
                f"dual ascent stalled after {updates} updates with duality gap {gap:.3e}",
                duality_gap=gap,
            )
        eps = max(eps * 0.1, 1e-15)


def train_svm(points, labels, kernel: KernelSpec, cfg: SvmConfig,
              gram: np.ndarray | None = None) -> SvmModel:
    """Fit the max-margin discriminator on (points, +-1 labels).

    Returns a model whose duality gap is at most tol * (1 + |objective|);
    at an interior dual variable the margin residual |y f(x) - 1| is then
    bounded by the working-set threshold.  Training is deterministic.
    ``gram`` may carry a precomputed Gram matrix over ``points``.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(labels, dtype=float).ravel()
    if x.shape[0] != y.size:
        raise ValueError("points and labels must align")
    if x.shape[0] < 2:
        raise ValueError("need at least two training points")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise ValueError("both classes must be present")
    if gram is None:
        gram = gram_matrix(kernel, x)
    c_box = 1.0 / (2.0 * cfg.gamma)
    lam, bias, primal, gap, _ = _solve_box_qp(
        gram, y, c_box, cfg.bias, cfg.gamma, cfg.tol,
        cfg.max_passes * max(x.shape[0], 100),
    )
    return SvmModel(
        train_points=x.copy(),
        coefficients=lam * y,
        bias=bias,
        kernel=kernel,
        objective_value=primal,
        duality_gap=gap,
        dual_vars=lam,
        labels=y.astype(int),
        box=c_box,
    )


def decision_scores(model: SvmModel, points) -> np.ndarray:
    """Vectorized scores sum_i alpha_i k(x_i, x) + b for each row of points."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[1] != model.train_points.shape[1]:
        raise ValueError(
            f"feature dimension mismatch: got {x.shape[1]}, "
            f"model expects {model.train_points.shape[1]}"
        )
    return kernel_matrix(model.kernel, x, model.train_points) @ model.coefficients + model.bias


def predict(model: SvmModel, x) -> float:
    """Score a single feature vector; classify by the sign of the result."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("predict expects a single feature vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("input must be finite")
    return float(decision_scores(model, x[None, :])[0])


def export_model_csv(model: SvmModel, path) -> None:
    """Write the kernel descriptor, bias, and the nonzero expansion terms."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"kernel,{model.kernel.describe()}\n")
        fh.write(f"bias,{model.bias:.17g}\n")
        fh.write("index,alpha\n")
        for i in model.support_indices:
            fh.write(f"{i},{model.coefficients[i]:.17g}\n")
