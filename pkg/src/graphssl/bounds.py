"""Generalization-bound calculators and the empirical risk quantities they consume."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .harmonic import HarmonicSolution

__all__ = [
    "BoundInputs",
    "BoundReport",
    "EmpiricalRisks",
    "inductive_error",
    "stability_beta",
    "transductive_error",
    "assemble_bound_p1",
    "assemble_bound_p2",
    "empirical_risks",
    "make_bound_report",
    "report_to_json",
]


@dataclass
class BoundInputs:
    """Everything the combined bounds need besides the measured risks.

    ``h`` is the VC dimension of the discriminator class and is supplied by
    the caller (for linear classifiers with bias on K features, h = K + 1 is
    the usual choice).  ``lambda_max`` is the largest Laplacian eigenvalue.
    """

    h: int
    n: int
    n_l: int
    eta: float
    delta: float
    gamma_g: float
    c_u: float
    lambda_max: float
    epsilon: float = 0.0
    n_eps: int = 0

    def __post_init__(self):
        if self.h < 1 or self.n < 1 or self.n_l < 1:
            raise ValueError("h, n and n_l must be positive")
        if self.n_l > self.n:
            raise ValueError("n_l cannot exceed n")
        if not 0 < self.eta < 1 or not 0 < self.delta < 1:
            raise ValueError("eta and delta must lie in (0, 1)")
        if self.gamma_g < 0 or self.lambda_max < 0:
            raise ValueError("gamma_g and lambda_max must be nonnegative")
        if not 0 < self.c_u <= 1:
            raise ValueError("c_u must lie in (0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0 <= self.n_eps <= self.n:
            raise ValueError("n_eps must lie in [0, n]")
        if self.h > self.n:
            warnings.warn("VC dimension exceeds the sample size; the bound is vacuous",
                          stacklevel=2)


@dataclass
class BoundReport:
    beta: float
    delta_I: float
    delta_T: float
    empirical_risk_induced: float
    soft_label_risk_labeled: float
    thresholded_risk: float
    bound_p1: float
    bound_p2: float
    confidence: float
    inputs: BoundInputs


@dataclass
class EmpiricalRisks:
    """Risk terms measured on one training fold.

    ``thresholded_empirical_risk`` already includes the exclusion slack
    2 * epsilon * n_eps / n; ``thresholded_raw`` is the bare kept-set term.
    """

    empirical_risk_induced: float
    thresholded_empirical_risk: float
    soft_label_risk_labeled: float
    n_eps: int
    thresholded_raw: float
    slack: float


def inductive_error(h: int, n: int, eta: float) -> float:
    """sqrt((h (ln(2n/h) + 1) - ln(eta/4)) / n)."""
    if h < 1 or n < 1:
        raise ValueError("h and n must be positive")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    radicand = (h * (math.log(2.0 * n / h) + 1.0) - math.log(eta / 4.0)) / n
    if radicand <= 0:
        raise ValueError(f"vacuous regime: radicand {radicand:.6g} is not positive")
    return math.sqrt(radicand)


def stability_beta(gamma_g: float, n_l: int, c_u: float, lambda_max: float) -> float:
    """2 [ sqrt(2)/(gamma_g + 1) + sqrt(2 n_l) (1 - sqrt(c_u))/sqrt(c_u)
    * (lambda_max + gamma_g)/(gamma_g^2 + 1) ]."""
    if not 0 < c_u <= 1:
        raise ValueError("c_u must lie in (0, 1]")
    if gamma_g < 0:
        raise ValueError("gamma_g must be nonnegative")
    if n_l < 1:
        raise ValueError("n_l must be positive")
    first = math.sqrt(2.0) / (gamma_g + 1.0)
    second = (
        math.sqrt(2.0 * n_l)
        * (1.0 - math.sqrt(c_u))
        / math.sqrt(c_u)
        * (lambda_max + gamma_g)
        / (gamma_g**2 + 1.0)
    )
    return 2.0 * (first + second)


def transductive_error(beta: float, n_l: int, delta: float) -> float:
    """beta + sqrt(2 ln(2/delta) / n_l) * (n_l beta + 4)."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if n_l < 1:
        raise ValueError("n_l must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return beta + math.sqrt(2.0 * math.log(2.0 / delta) / n_l) * (n_l * beta + 4.0)


def assemble_bound_p1(
    empirical_risk_induced: float,
    soft_label_risk_labeled: float,
    delta_T: float,
    delta_I: float,
) -> float:
    """Risk bound: induced empirical risk + labeled soft-label risk + both error terms."""
    parts = (empirical_risk_induced, soft_label_risk_labeled, delta_T, delta_I)
    if any(p < 0 for p in parts):
        raise ValueError("all bound components must be nonnegative")
    return empirical_risk_induced + soft_label_risk_labeled + delta_T + delta_I


def assemble_bound_p2(
    thresholded_empirical_risk: float,
    eps: float,
    n_eps: int,
    n: int,
    soft_label_risk_labeled: float,
    delta_T: float,
    delta_I: float,
) -> float:
    """Thresholded variant: kept-set risk + 2 eps n_eps / n + the remaining terms.

    ``thresholded_empirical_risk`` here is the bare kept-set term, without
    the exclusion slack (which this function adds).
    """
    parts = (thresholded_empirical_risk, eps, soft_label_risk_labeled, delta_T, delta_I)
    if any(p < 0 for p in parts) or n_eps < 0:
        raise ValueError("all bound components must be nonnegative")
    if n_eps > n:
        raise ValueError("n_eps cannot exceed n")
    slack = 2.0 * eps * n_eps / n
    return (thresholded_empirical_risk + slack) + soft_label_risk_labeled + delta_T + delta_I


def empirical_risks(scores, solution: HarmonicSolution, truth, epsilon: float) -> EmpiricalRisks:
    """Risk terms of a discriminator against graph-induced labels.

    Parameters
    ----------
    scores : length-n vector
        Discriminator outputs on the training points, aligned with the
        harmonic solution.
    solution : HarmonicSolution
    truth : length-n vector over {-1, 0, +1}
        True labels on the labeled set, zero elsewhere.
    epsilon : threshold in [0, 1]

    The induced risk is the mean sign disagreement with the harmonic labels;
    the thresholded risk restricts it to confident vertices and adds the
    slack 2 * epsilon * n_eps / n; the labeled soft-label risk is the mean
    squared gap between soft labels and true labels over the labeled set
    (exactly zero under the clamped solver).
    """
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    f = np.asarray(scores, dtype=float)
    n = solution.n
    if f.shape != (n,):
        raise ValueError(f"scores must be a length-{n} vector")
    y = np.asarray(truth, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"truth must be a length-{n} vector")
    l_mask = solution.labeled_mask
    pred = np.where(f >= 0, 1, -1)
    induced_labels = np.where(solution.values >= 0, 1, -1)
    disagree = pred != induced_labels
    induced_risk = float(np.mean(disagree))
    kept = solution.confidences >= epsilon
    n_eps = int(n - kept.sum())
    raw = float(disagree[kept].sum() / n)
    slack = 2.0 * epsilon * n_eps / n
    soft = float(np.mean((solution.values[l_mask] - y[l_mask]) ** 2))
    return EmpiricalRisks(
        empirical_risk_induced=induced_risk,
        thresholded_empirical_risk=raw + slack,
        soft_label_risk_labeled=soft,
        n_eps=n_eps,
        thresholded_raw=raw,
        slack=slack,
    )


def make_bound_report(inputs: BoundInputs, risks: EmpiricalRisks) -> BoundReport:
    """Assemble both combined bounds from the formula inputs and measured risks."""
    beta = stability_beta(inputs.gamma_g, inputs.n_l, inputs.c_u, inputs.lambda_max)
    d_i = inductive_error(inputs.h, inputs.n, inputs.eta)
    d_t = transductive_error(beta, inputs.n_l, inputs.delta)
    p1 = assemble_bound_p1(risks.empirical_risk_induced, risks.soft_label_risk_labeled, d_t, d_i)
    p2 = assemble_bound_p2(
        risks.thresholded_raw,
        inputs.epsilon,
        risks.n_eps,
        inputs.n,
        risks.soft_label_risk_labeled,
        d_t,
        d_i,
    )
    return BoundReport(
        beta=beta,
        delta_I=d_i,
        delta_T=d_t,
        empirical_risk_induced=risks.empirical_risk_induced,
        soft_label_risk_labeled=risks.soft_label_risk_labeled,
        thresholded_risk=risks.thresholded_empirical_risk,
        bound_p1=p1,
        bound_p2=p2,
        confidence=1.0 - (inputs.eta + inputs.delta),
        inputs=inputs,
    )


def report_to_json(report: BoundReport, indent: int = 2) -> str:
    """Serialize a report with its inputs echoed; keys are sorted for stable output."""
    payload = asdict(report)
    return json.dumps(payload, indent=indent, sort_keys=True)
