import json
import math

import numpy as np
import pytest
from scipy import sparse

from graphssl import (
    BoundInputs,
    HarmonicConfig,
    SimilarityGraph,
    assemble_bound_p1,
    assemble_bound_p2,
    empirical_risks,
    inductive_error,
    laplacian,
    make_bound_report,
    report_to_json,
    solve_hard,
    solve_soft,
    stability_beta,
    transductive_error,
)


class TestInductiveError:
    def test_worked_value(self):
        assert inductive_error(3, 100, 0.05) == pytest.approx(0.44700, abs=1e-4)

    def test_eta_half_term(self):
        # the -ln(eta/4) contribution at eta = 0.5 is ln(8) = 2.0794
        with_term = inductive_error(3, 100, 0.5) ** 2 * 100
        base = 3 * (math.log(200 / 3) + 1)
        assert with_term - base == pytest.approx(-math.log(0.125), abs=1e-12)

    def test_vanishes_for_large_n(self):
        assert inductive_error(3, 10**12, 0.05) < 1e-4

    def test_h_above_2n_allowed(self):
        assert inductive_error(250, 1000, 0.05) > 0  # ln(2n/h) is negative here

    def test_vacuous_regime_rejected(self):
        with pytest.raises(ValueError, match="vacuous"):
            inductive_error(100, 3, 0.9)

    def test_bad_eta(self):
        with pytest.raises(ValueError):
            inductive_error(3, 100, 1.0)


class TestStabilityBeta:
    def test_worked_value(self):
        assert stability_beta(0.0, 1, 0.01, 2.0) == pytest.approx(53.7401, abs=1e-3)

    def test_cu_one_kills_second_term(self):
        for gg in (0.0, 1.0, 7.0):
            assert stability_beta(gg, 10, 1.0, 5.0) \
                == pytest.approx(2 * math.sqrt(2) / (gg + 1), rel=1e-12)

    def test_vanishes_for_huge_gamma(self):
        assert stability_beta(1e12, 100, 0.01, 2.0) < 1e-5

    def test_bad_cu(self):
        with pytest.raises(ValueError):
            stability_beta(1.0, 10, 0.0, 1.0)

    def test_monotone_nonincreasing_on_range(self):
        grid = np.geomspace(1.0, 1e6, 200)
        vals = [stability_beta(g, 50, 0.01, 2.0) for g in grid]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_stability_schedule_bounded(self):
        prods = []
        for n_l in (10, 100, 1000, 10_000):
            beta = stability_beta(float(n_l) ** 1.5, n_l, 0.01, 2.0)
            prods.append(n_l * beta)
        assert all(a >= b - 1e-12 for a, b in zip(prods, prods[1:]))
        assert max(prods) < 50


class TestTransductiveError:
    def test_worked_value(self):
        assert transductive_error(0.01, 100, 0.05) == pytest.approx(1.36812, abs=1e-4)

    def test_zero_beta(self):
        expected = math.sqrt(2 * math.log(2 / 0.05) / 100) * 4
        assert transductive_error(0.0, 100, 0.05) == pytest.approx(expected, rel=1e-12)

    def test_decays_at_root_rate_under_schedule(self):
        # with beta following the n_l^{3/2}-regularized schedule the error
        # decays like n_l^{-1/2}: the sqrt-normalized values stay bounded
        vals, scaled = [], []
        for n_l in (10, 100, 1000, 10_000):
            beta = stability_beta(float(n_l) ** 1.5, n_l, 0.01, 2.0)
            err = transductive_error(beta, n_l, 0.05)
            vals.append(err)
            scaled.append(err * math.sqrt(n_l))
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert max(scaled) < 100


class TestAssembly:
    def test_p1_sum(self):
        assert assemble_bound_p1(0.1, 0.05, 0.2, 0.3) == pytest.approx(0.65)

    def test_p1_zeros(self):
        assert assemble_bound_p1(0, 0, 0, 0) == 0

    def test_p1_commutative(self):
        import itertools

        vals = (0.11, 0.23, 0.31, 0.05)
        results = {assemble_bound_p1(*p) for p in itertools.permutations(vals)}
        assert max(results) - min(results) < 1e-15

    def test_p1_negative_rejected(self):
        with pytest.raises(ValueError):
            assemble_bound_p1(-0.1, 0, 0, 0)

    def test_p2_reduces_to_p1_when_nothing_excluded(self):
        assert assemble_bound_p2(0.1, 1e-3, 0, 50, 0.05, 0.2, 0.3) \
            == pytest.approx(assemble_bound_p1(0.1, 0.05, 0.2, 0.3))

    def test_p2_full_exclusion_slack(self):
        # eps = 0.5 and n_eps = n gives slack exactly 1
        assert assemble_bound_p2(0.0, 0.5, 40, 40, 0.0, 0.0, 0.0) == 1.0

    def test_p2_tiny_slack(self):
        val = assemble_bound_p2(0.0, 1e-6, 50, 1000, 0.0, 0.0, 0.0)
        assert val == pytest.approx(1e-7, rel=1e-12)

    def test_bounds_dominate_first_terms(self):
        assert assemble_bound_p1(0.3, 0.0, 0.1, 0.1) >= 0.3
        assert assemble_bound_p2(0.3, 0.01, 5, 10, 0.0, 0.1, 0.1) >= 0.3


def path4_solution(gamma=0.0):
    w = np.zeros((4, 4))
    for i in range(3):
        w[i, i + 1] = w[i + 1, i] = 1.0
    g = SimilarityGraph(4, sparse.csr_matrix(w))
    y = np.array([1.0, 0.0, 0.0, -1.0])
    return g, y, solve_hard(laplacian(g), y, HarmonicConfig(gamma))


class TestEmpiricalRisks:
    def test_hard_mode_soft_risk_is_zero(self):
        _, y, sol = path4_solution()
        risks = empirical_risks(np.array([0.9, 0.2, -0.2, -0.9]), sol, y, 0.3)
        assert risks.soft_label_risk_labeled == 0.0

    def test_perfect_classifier_zero_risk(self):
        _, y, sol = path4_solution()
        risks = empirical_risks(sol.values.copy(), sol, y, 0.0)
        assert risks.empirical_risk_induced == 0.0
        assert risks.thresholded_empirical_risk == 0.0
        assert risks.n_eps == 0

    def test_path4_thresholded_example(self):
        _, y, sol = path4_solution()
        scores = np.array([1.0, 0.4, -0.4, -1.0])  # agrees with induced labels
        risks = empirical_risks(scores, sol, y, 0.3)
        assert risks.n_eps == 0
        assert risks.thresholded_empirical_risk == pytest.approx(0.0)

    def test_slack_and_exclusion_counting(self):
        _, y, sol = path4_solution()
        risks = empirical_risks(np.array([1.0, 1.0, 1.0, -1.0]), sol, y, 0.4)
        # interior vertices (confidence 1/3) are excluded at eps = 0.4
        assert risks.n_eps == 2
        assert risks.slack == pytest.approx(2 * 0.4 * 2 / 4)
        # the interior disagreement is invisible to the kept-set term
        assert risks.thresholded_raw == 0.0
        assert risks.empirical_risk_induced == pytest.approx(0.25)

    def test_soft_mode_nonzero_labeled_risk(self):
        g, y, _ = path4_solution()
        sol = solve_soft(laplacian(g), y)
        risks = empirical_risks(np.zeros(4), sol, y, 0.0)
        assert risks.soft_label_risk_labeled > 0


class TestBoundReport:
    def make_report(self):
        _, y, sol = path4_solution()
        risks = empirical_risks(np.array([1.0, 0.4, -0.4, -1.0]), sol, y, 1e-3)
        inputs = BoundInputs(h=2, n=4, n_l=2, eta=0.05, delta=0.05, gamma_g=0.0,
                             c_u=0.01, lambda_max=3.414, epsilon=1e-3,
                             n_eps=risks.n_eps)
        return make_bound_report(inputs, risks), inputs, risks

    def test_assembly_consistency(self):
        report, inputs, risks = self.make_report()
        recomposed = (report.thresholded_risk + report.soft_label_risk_labeled
                      + report.delta_T + report.delta_I)
        assert report.bound_p2 == recomposed
        assert report.bound_p1 == assemble_bound_p1(
            report.empirical_risk_induced, report.soft_label_risk_labeled,
            report.delta_T, report.delta_I,
        )
        assert report.confidence == pytest.approx(0.9)

    def test_p2_close_to_p1_for_small_eps(self):
        rng = np.random.default_rng(71)
        for n_l in (4, 16, 64):
            eps = 1.0 / math.sqrt(n_l)
            n = 4 * n_l
            n_eps = int(rng.integers(0, n))
            slackful = assemble_bound_p2(0.1, eps, n_eps, n, 0.02, 0.3, 0.2)
            plain = assemble_bound_p1(0.1, 0.02, 0.3, 0.2)
            assert slackful - plain <= 2.0 / math.sqrt(n_l) + 1e-12

    def test_json_round_trip(self):
        report, inputs, _ = self.make_report()
        payload = json.loads(report_to_json(report))
        assert payload["inputs"]["n_l"] == 2
        assert payload["beta"] == report.beta
        assert payload["bound_p2"] == report.bound_p2

    def test_input_validation(self):
        with pytest.raises(ValueError):
            BoundInputs(h=1, n=4, n_l=5, eta=0.05, delta=0.05, gamma_g=0.0,
                        c_u=0.5, lambda_max=1.0)
        with pytest.warns(UserWarning, match="vacuous"):
            BoundInputs(h=10, n=4, n_l=2, eta=0.05, delta=0.05, gamma_g=0.0,
                        c_u=0.5, lambda_max=1.0)
