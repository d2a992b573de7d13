"""Shared helpers: random graph generators and independent oracles."""

import numpy as np
from scipy import sparse

from graphssl import SimilarityGraph


def random_connected_graph(rng, n, extra_edge_prob=0.15):
    """Random connected weighted graph: random spanning tree plus extra edges.

    Returns the SimilarityGraph and its dense weight matrix.
    """
    w = np.zeros((n, n))
    for v in range(1, n):
        u = int(rng.integers(0, v))
        w[u, v] = w[v, u] = float(rng.uniform(0.2, 1.0))
    extra = rng.random((n, n)) < extra_edge_prob
    for i in range(n):
        for j in range(i + 1, n):
            if extra[i, j] and w[i, j] == 0:
                w[i, j] = w[j, i] = float(rng.uniform(0.05, 1.0))
    return SimilarityGraph(n, sparse.csr_matrix(w)), w


def random_labels(rng, n, n_labeled):
    """Length-n vector with n_labeled random +-1 entries (at least one of each sign)."""
    idx = rng.permutation(n)[:n_labeled]
    y = np.zeros(n)
    signs = rng.choice([-1.0, 1.0], size=n_labeled)
    if n_labeled >= 2:
        signs[0], signs[1] = 1.0, -1.0
    y[idx] = signs
    return y


def dense_harmonic_oracle(w, labels, gamma_g):
    """Clamped harmonic solve built from scratch with dense numpy only."""
    n = w.shape[0]
    lab = np.flatnonzero(labels != 0)
    unl = np.flatnonzero(labels == 0)
    lap = np.diag(w.sum(axis=1)) - w
    vals = np.asarray(labels, dtype=float).copy()
    if unl.size:
        a = lap[np.ix_(unl, unl)] + gamma_g * np.eye(unl.size)
        vals[unl] = np.linalg.solve(a, w[np.ix_(unl, lab)] @ vals[lab])
    return vals


def gradient_descent_quadratic(a, b, tol=1e-10, max_iter=500_000):
    """Minimize 0.5 x'Ax - b'x by plain gradient descent with a safe fixed step."""
    step = 1.0 / float(np.linalg.eigvalsh(a)[-1])
    x = np.zeros_like(b)
    for _ in range(max_iter):
        grad = a @ x - b
        if np.linalg.norm(grad) <= tol:
            break
        x = x - step * grad
    return x


def svm_qp_oracle(gram, y, c_box, bias):
    """Box-constrained dual solved by cvxopt; bias recovered from free-variable KKT."""
    from cvxopt import matrix, solvers

    m = len(y)
    y = np.asarray(y, dtype=float)
    q_mat = np.outer(y, y) * gram + 1e-10 * np.eye(m)
    g_mat = np.vstack([-np.eye(m), np.eye(m)])
    h_vec = np.concatenate([np.zeros(m), c_box * np.ones(m)])
    solvers.options.update(
        {"show_progress": False, "abstol": 1e-12, "reltol": 1e-12, "feastol": 1e-12}
    )
    if bias:
        sol = solvers.qp(
            matrix(q_mat), matrix(-np.ones(m)), matrix(g_mat), matrix(h_vec),
            matrix(y.reshape(1, -1)), matrix(0.0),
        )
    else:
        sol = solvers.qp(matrix(q_mat), matrix(-np.ones(m)), matrix(g_mat), matrix(h_vec))
    lam = np.array(sol["x"]).ravel()
    alpha = lam * y
    b = 0.0
    if bias:
        free = (lam > 1e-6 * c_box) & (lam < (1 - 1e-6) * c_box)
        if free.any():
            b = float(np.mean(y[free] - (gram[free] @ alpha)))
    return alpha, b


def pairwise_quadratic_form(w, f):
    """0.5 * sum_ij w_ij (f_i - f_j)^2 computed directly from the weights."""
    diff = f[:, None] - f[None, :]
    return 0.5 * float((w * diff**2).sum())
