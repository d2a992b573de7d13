import numpy as np
import pytest
from scipy import sparse

from conftest import (
    dense_harmonic_oracle,
    gradient_descent_quadratic,
    random_connected_graph,
    random_labels,
)
from graphssl import (
    HarmonicConfig,
    SimilarityGraph,
    SingularSystemError,
    SoftHarmonicConfig,
    absorption_decomposition,
    export_solution_csv,
    laplacian,
    solve_hard,
    solve_soft,
    threshold_labels,
)


def path_graph(n):
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 1.0
    return SimilarityGraph(n, sparse.csr_matrix(w))


def path4_labels():
    return path_graph(4), np.array([1.0, 0.0, 0.0, -1.0])


class TestSolveHard:
    def test_path4_unregularized(self):
        g, y = path4_labels()
        sol = solve_hard(laplacian(g), y, HarmonicConfig(0.0))
        assert np.allclose(sol.values, [1, 1 / 3, -1 / 3, -1], atol=1e-12)
        assert sol.values[0] == 1.0 and sol.values[3] == -1.0

    def test_path4_gamma_one(self):
        g, y = path4_labels()
        sol = solve_hard(laplacian(g), y, HarmonicConfig(1.0))
        assert np.allclose(sol.values, [1, 0.25, -0.25, -1], atol=1e-12)

    def test_all_labeled_verbatim(self):
        g, _ = path4_labels()
        y = np.array([1.0, -1.0, 1.0, -1.0])
        sol = solve_hard(laplacian(g), y)
        assert np.array_equal(sol.values, y)
        assert sol.residual == 0.0

    def test_unlabeled_component_is_an_error(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        w[2, 3] = w[3, 2] = 1.0  # second component carries no label
        g = SimilarityGraph(4, sparse.csr_matrix(w))
        y = np.array([1.0, -1.0, 0.0, 0.0])
        with pytest.raises(SingularSystemError, match="component"):
            solve_hard(laplacian(g), y, HarmonicConfig(0.0))
        sol = solve_hard(laplacian(g), y, HarmonicConfig(0.5))  # regularized is fine
        assert np.allclose(sol.values[2:], 0.0)

    def test_harmonic_property_random_graphs(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n = int(rng.integers(5, 40))
            g, w = random_connected_graph(rng, n)
            y = random_labels(rng, n, max(2, n // 5))
            sol = solve_hard(laplacian(g), y, HarmonicConfig(0.0))
            deg = w.sum(axis=1)
            for i in np.flatnonzero(y == 0):
                avg = float(w[i] @ sol.values) / deg[i]
                assert abs(sol.values[i] - avg) < 1e-8

    def test_confidence_and_shrinkage_bounds(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            n = int(rng.integers(6, 30))
            g, w = random_connected_graph(rng, n)
            y = random_labels(rng, n, 3)
            lab = np.flatnonzero(y != 0)
            unl = np.flatnonzero(y == 0)
            for gamma in (0.0, 0.1, 1.0, 10.0):
                sol = solve_hard(laplacian(g), y, HarmonicConfig(gamma))
                assert np.max(np.abs(sol.values)) <= 1 + 1e-9
                if gamma > 0:
                    rhs = w[np.ix_(unl, lab)] @ y[lab]
                    assert (
                        np.linalg.norm(sol.values[unl])
                        <= np.linalg.norm(rhs) / gamma + 1e-12
                    )

    def test_shrinks_to_zero_at_huge_gamma(self):
        g, y = path4_labels()
        sol = solve_hard(laplacian(g), y, HarmonicConfig(1e12))
        assert np.max(np.abs(sol.values[1:3])) < 1e-11

    def test_label_flip_antisymmetry_exact(self):
        rng = np.random.default_rng(23)
        g, _ = random_connected_graph(rng, 15)
        y = random_labels(rng, 15, 4)
        a = solve_hard(laplacian(g), y, HarmonicConfig(0.3))
        b = solve_hard(laplacian(g), -y, HarmonicConfig(0.3))
        assert np.array_equal(a.values, -b.values)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(24)
        for _ in range(10):
            n = int(rng.integers(5, 25))
            g, w = random_connected_graph(rng, n)
            y = random_labels(rng, n, 2)
            for gamma in (0.0, 0.7):
                sol = solve_hard(laplacian(g), y, HarmonicConfig(gamma))
                assert np.allclose(sol.values, dense_harmonic_oracle(w, y, gamma), atol=1e-9)

    def test_residual_recorded(self):
        g, y = path4_labels()
        sol = solve_hard(laplacian(g), y, HarmonicConfig(0.0, solver_tol=1e-10))
        assert sol.residual <= 1e-10 * np.sqrt(2) + 1e-15

    def test_large_sparse_cg_path(self):
        # above the dense cutoff the Jacobi-PCG branch is used
        rng = np.random.default_rng(25)
        n = 620
        g, w = random_connected_graph(rng, n, extra_edge_prob=0.01)
        y = random_labels(rng, n, 10)
        sol = solve_hard(laplacian(g), y, HarmonicConfig(0.0, solver_tol=1e-12))
        deg = w.sum(axis=1)
        unl = np.flatnonzero(y == 0)
        resid = np.abs(sol.values[unl] - (w[unl] @ sol.values) / deg[unl])
        assert np.max(resid) < 1e-8

    def test_bad_labels_rejected(self):
        g, _ = path4_labels()
        with pytest.raises(ValueError):
            solve_hard(laplacian(g), np.array([2.0, 0, 0, 0]))
        with pytest.raises(ValueError):
            solve_hard(laplacian(g), np.zeros(4))


class TestSolveSoft:
    def test_two_vertex_worked_example(self):
        w = np.array([[0.0, 1.0], [1.0, 0.0]])
        g = SimilarityGraph(2, sparse.csr_matrix(w))
        sol = solve_soft(laplacian(g), np.array([1.0, 0.0]), SoftHarmonicConfig(1.0, 0.01))
        assert sol.values[0] == pytest.approx(1.01 / 1.02, abs=1e-12)
        assert sol.values[1] == pytest.approx(1.00 / 1.02, abs=1e-12)

    def test_huge_penalties_recover_targets(self):
        g = path_graph(4)
        y = np.array([1.0, 0.0, 0.0, -1.0])
        with pytest.warns(UserWarning, match="stability regime"):
            sol = solve_soft(laplacian(g), y, SoftHarmonicConfig(1e9, 1e9))
        assert np.allclose(sol.values, y, atol=1e-6)

    def test_zero_targets_zero_solution(self):
        g = path_graph(3)
        sol = solve_soft(laplacian(g), np.zeros(3), SoftHarmonicConfig(1.0, 0.5, gamma_g=0.1))
        assert np.allclose(sol.values, 0.0)

    def test_matches_gradient_descent_minimizer(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            n = int(rng.integers(3, 10))
            g, w = random_connected_graph(rng, n)
            y = random_labels(rng, n, max(1, n // 3))
            cfg = SoftHarmonicConfig(1.0, float(rng.uniform(0.01, 0.5)),
                                     float(rng.uniform(0, 1)))
            sol = solve_soft(laplacian(g), y, cfg)
            lap = np.diag(w.sum(axis=1)) - w
            c = np.where(y != 0, cfg.c_l, cfg.c_u)
            a = 2.0 * (np.diag(c) + lap + cfg.gamma_g * np.eye(n))
            b = 2.0 * c * y
            ref = gradient_descent_quadratic(a, b)
            assert np.allclose(sol.values, ref, atol=1e-6)

    def test_invalid_penalties(self):
        with pytest.raises(ValueError):
            SoftHarmonicConfig(0.0, 0.0, 0.0)


class TestAbsorption:
    def test_path4_gamblers_ruin(self):
        g, y = path4_labels()
        dec = absorption_decomposition(g, y, 0.0)
        assert dec.unlabeled_indices.tolist() == [1, 2]
        assert dec.p_plus[0] == pytest.approx(2 / 3, abs=1e-12)
        assert dec.p_minus[0] == pytest.approx(1 / 3, abs=1e-12)
        assert dec.p_plus[0] - dec.p_minus[0] == pytest.approx(1 / 3, abs=1e-12)

    def test_connected_no_sink(self):
        g, y = path4_labels()
        dec = absorption_decomposition(g, y, 0.0)
        assert np.max(dec.sink_mass) <= 1e-9

    def test_huge_gamma_all_sink(self):
        g, y = path4_labels()
        dec = absorption_decomposition(g, y, 1e12)
        assert np.min(dec.sink_mass) > 1 - 1e-9

    def test_consistency_with_harmonic_and_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            n = int(rng.integers(4, 20))
            g, w = random_connected_graph(rng, n)
            y = random_labels(rng, n, 2)
            gamma = float(rng.choice([0.0, 0.2, 2.0]))
            dec = absorption_decomposition(g, y, gamma)
            ref = dense_harmonic_oracle(w, y, gamma)
            unl = np.flatnonzero(y == 0)
            assert np.allclose(dec.p_plus - dec.p_minus, ref[unl], atol=1e-9)
            total = dec.p_plus + dec.p_minus + dec.sink_mass
            assert np.allclose(total, 1.0, atol=1e-9)


class TestThreshold:
    def test_path4_examples(self):
        g, y = path4_labels()
        sol = solve_hard(laplacian(g), y, HarmonicConfig(0.0))
        ind = threshold_labels(sol, 0.3)
        assert ind.indices.tolist() == [0, 1, 2, 3]
        assert ind.labels.tolist() == [1, 1, -1, -1]
        assert ind.n_excluded == 0
        ind = threshold_labels(sol, 0.4)
        assert ind.indices.tolist() == [0, 3] and ind.n_excluded == 2
        ind = threshold_labels(sol, 0.0)
        assert ind.size == 4 and ind.n_excluded == 0

    def test_exact_zero_excluded_when_thresholded(self):
        g = path_graph(3)
        y = np.array([1.0, 0.0, -1.0])
        sol = solve_hard(laplacian(g), y)  # middle value is exactly 0
        ind = threshold_labels(sol, 0.1)
        assert 1 not in ind.indices and ind.n_excluded == 1

    def test_exact_zero_kept_and_flagged_at_zero_eps(self):
        g = path_graph(3)
        sol = solve_hard(laplacian(g), np.array([1.0, 0.0, -1.0]))
        with pytest.warns(UserWarning, match="mapped to"):
            ind = threshold_labels(sol, 0.0)
        assert ind.labels[ind.indices.tolist().index(1)] == 1

    def test_epsilon_out_of_range(self):
        g, y = path4_labels()
        sol = solve_hard(laplacian(g), y)
        with pytest.raises(ValueError):
            threshold_labels(sol, 1.5)


class TestExport:
    def test_csv_shape_and_values(self, tmp_path):
        g, y = path4_labels()
        sol = solve_hard(laplacian(g), y)
        path = tmp_path / "sol.csv"
        export_solution_csv(sol, 0.4, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "index,ell,confidence,kept"
        fields = [ln.split(",") for ln in lines[1:]]
        assert [f[0] for f in fields] == ["0", "1", "2", "3"]
        assert [f[3] for f in fields] == ["1", "0", "0", "1"]
        assert float(fields[1][1]) == pytest.approx(1 / 3, abs=1e-15)


class TestIterativeSolverContract:
    def test_cg_nonconvergence_reports_residual(self):
        from conftest import random_connected_graph, random_labels
        from graphssl import SolverConvergenceError

        rng = np.random.default_rng(91)
        n = 520  # above the dense cutoff, so the iterative branch runs
        g, _ = random_connected_graph(rng, n, extra_edge_prob=0.004)
        y = random_labels(rng, n, 4)
        with pytest.raises(SolverConvergenceError) as exc:
            solve_hard(laplacian(g), y, HarmonicConfig(0.0, solver_tol=1e-14,
                                                       max_iter=2))
        assert exc.value.residual > 0
