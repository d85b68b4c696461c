"""Privatization mechanisms for SPD-valued summaries.

Three mechanisms are provided.  The tangent Gaussian mechanism adds
isotropic Gaussian noise in the vectorised log chart and maps back through
the matrix exponential; its output is always SPD and the squared
log-Euclidean deviation from the summary is exactly sigma^2 chi^2_d
distributed.  The extrinsic Gaussian baseline perturbs the summary's own
entries in SYM(k) and may leave the SPD cone.  The Riemannian Laplace
baseline samples a density proportional to exp(-distance/sigma) with a
Metropolis chain run in the flat log chart.

Noise calibration comes in two flavors: the classical closed form
``sensitivity * sqrt(2 ln(1.25/delta)) / epsilon`` (valid for epsilon < 1)
and the analytic calibration, which bisects for the smallest sigma
satisfying the exact Gaussian-mechanism privacy condition and is never
worse than the classical value.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, NumericalError
from .geometry import (
    SpdMatrix,
    SymMatrix,
    expm_stack,
    invvecd_stack,
    logm_stack,
    vecd_stack,
)
from .sampling import RngState, gaussian_vector, log_jacobian

# Metropolis acceptance ratios outside this band get a warning diagnostic.
ACCEPTANCE_BAND = (0.2, 0.9)

# Bisection bracket for the analytic calibration, as multiples of the
# sensitivity, and its relative convergence width.
_ANALYTIC_BRACKET = (1e-6, 1e6)
_ANALYTIC_RTOL = 1e-12


class SensitivityKind(str, enum.Enum):
    LOG_EUCLIDEAN = "log_euclidean"
    EXTRINSIC = "extrinsic"


class CalibrationKind(str, enum.Enum):
    CLASSICAL = "classical"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) privacy budget; delta strictly inside (0, 1)."""

    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise DomainError(f"epsilon must be a positive real, got {self.epsilon}")
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class Sensitivity:
    """Worst-case summary displacement over adjacent datasets."""

    value: float
    kind: SensitivityKind

    def __post_init__(self) -> None:
        if not (self.value >= 0 and math.isfinite(self.value)):
            raise DomainError(f"sensitivity must be nonnegative, got {self.value}")


@dataclass(frozen=True)
class MechanismConfig:
    """Budget, sensitivity and calibration flavor driving the noise scale."""

    budget: PrivacyBudget
    sensitivity: Sensitivity
    calibration: CalibrationKind
    mcmc_burn_in: int = 50000

    def __post_init__(self) -> None:
        if self.calibration == CalibrationKind.CLASSICAL and self.budget.epsilon >= 1:
            raise DomainError(
                "classical calibration requires epsilon < 1; use analytic calibration"
            )
        if self.mcmc_burn_in < 1:
            raise DomainError("mcmc_burn_in must be a positive integer")

    def noise_scale(self) -> float:
        if self.calibration == CalibrationKind.CLASSICAL:
            return calibrate_classical(self.sensitivity, self.budget)
        return calibrate_analytic(self.sensitivity, self.budget)


def sensitivity_frechet_le(n: int, r: float) -> Sensitivity:
    """Sensitivity 2r/n of the log-Euclidean Fréchet mean over datasets of
    size n inside a geodesic ball of radius r."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if not (r > 0):
        raise DomainError("r must be positive")
    return Sensitivity(value=2.0 * r / n, kind=SensitivityKind.LOG_EUCLIDEAN)


def sensitivity_extrinsic(n: int, r: float) -> Sensitivity:
    """Euclidean sensitivity 2(e^r - 1)/n of the Fréchet mean viewed as an
    element of SYM(k), for data in a log-Euclidean ball of radius r."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if not (r > 0):
        raise DomainError("r must be positive")
    return Sensitivity(value=2.0 * math.expm1(r) / n, kind=SensitivityKind.EXTRINSIC)


def _std_normal_cdf(x: float) -> float:
    # erfc keeps full precision in the far tails where 1 - Phi cancels.
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def calibrate_classical(sensitivity: Sensitivity, budget: PrivacyBudget) -> float:
    """Closed-form noise scale Delta * sqrt(2 ln(1.25/delta)) / epsilon."""
    if budget.epsilon >= 1:
        raise DomainError(
            f"classical calibration requires epsilon < 1 (got {budget.epsilon}); "
            "use calibrate_analytic instead"
        )
    if sensitivity.value <= 0:
        raise DomainError("classical calibration requires a positive sensitivity")
    return (
        sensitivity.value
        * math.sqrt(2.0 * math.log(1.25 / budget.delta))
        / budget.epsilon
    )


def _analytic_condition(sigma: float, delta_s: float, epsilon: float) -> float:
    a = delta_s / (2.0 * sigma) - epsilon * sigma / delta_s
    b = -delta_s / (2.0 * sigma) - epsilon * sigma / delta_s
    return _std_normal_cdf(a) - math.exp(epsilon) * _std_normal_cdf(b)


def calibrate_analytic(sensitivity: Sensitivity, budget: PrivacyBudget) -> float:
    """Smallest sigma meeting the exact Gaussian privacy condition.

    Bisects Phi(D/2s - es/D) - e^eps Phi(-D/2s - es/D) <= delta, which is
    continuous and strictly decreasing in sigma, to relative width 1e-12.
    The result never exceeds the classical scale when epsilon < 1.
    """
    if sensitivity.value <= 0:
        raise DomainError("analytic calibration requires a positive sensitivity")
    delta_s = sensitivity.value
    eps, delta = budget.epsilon, budget.delta
    lo = delta_s * _ANALYTIC_BRACKET[0]
    hi = delta_s * _ANALYTIC_BRACKET[1]
    if _analytic_condition(lo, delta_s, eps) <= delta:
        return lo
    if _analytic_condition(hi, delta_s, eps) > delta:
        raise NumericalError(
            f"analytic calibration bracket failed for eps={eps}, delta={delta}"
        )
    while hi - lo > _ANALYTIC_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if _analytic_condition(mid, delta_s, eps) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def tangent_gaussian(rng: RngState, summary: SpdMatrix, sigma: float) -> SpdMatrix:
    """Privatize ``summary`` with isotropic Gaussian noise in the log chart."""
    if not (sigma > 0):
        raise DomainError("sigma must be positive")
    k = summary.dim
    d = k * (k + 1) // 2
    center = vecd_stack(logm_stack(summary.entries))
    z = gaussian_vector(rng, d, center, sigma)
    return SpdMatrix(expm_stack(invvecd_stack(z, k)))


def tangent_gaussian_stack(
    rng: RngState, summary: SpdMatrix, sigma: float, size: int
) -> np.ndarray:
    """Vectorised draws of the tangent Gaussian mechanism.

    Returns a (size, k, k) array of SPD matrices; the bulk form of
    :func:`tangent_gaussian` for Monte-Carlo diagnostics.
    """
    if not (sigma > 0):
        raise DomainError("sigma must be positive")
    size = int(size)
    if size < 1:
        raise DomainError("size must be >= 1")
    k = summary.dim
    d = k * (k + 1) // 2
    center = vecd_stack(logm_stack(summary.entries))
    z = center + sigma * rng.generator.standard_normal((size, d))
    return expm_stack(invvecd_stack(z, k))


def extrinsic_gaussian(rng: RngState, summary: SpdMatrix, sigma: float) -> SymMatrix:
    """Perturb the summary's own entries with Gaussian noise in SYM(k).

    The noise acts on vecd(summary), not on vecd(log summary), so the output
    is symmetric but in general not positive definite.
    """
    if not (sigma > 0):
        raise DomainError("sigma must be positive")
    k = summary.dim
    d = k * (k + 1) // 2
    z = gaussian_vector(rng, d, vecd_stack(summary.entries), sigma)
    return SymMatrix(invvecd_stack(z, k))


@dataclass(frozen=True)
class LaplaceDraw:
    """One Riemannian Laplace release with its chain diagnostics."""

    sample: SpdMatrix
    acceptance_ratio: float
    warning: str | None = None


def _laplace_chains(
    rng: RngState,
    center: np.ndarray,
    dim: int,
    sigma: float,
    burn_in: int,
    proposal_sigma: float,
    n_chains: int,
    jacobian_correction: bool,
) -> tuple[np.ndarray, float]:
    """Run ``n_chains`` Metropolis chains in the log chart; return final
    states (n_chains, d) and the pooled acceptance ratio.

    The target exp(-||z - center||/sigma) is the Laplace density in the flat
    chart; the log-Gaussian proposal is a symmetric Gaussian step there, so
    plain Metropolis with the target ratio is exact.  Chains start on the
    sphere of radius d*sigma around the center (the mean radius of the
    target), which keeps the burn-in in the stationary bulk for every
    dimension; starting near the center instead leaves the chain with an
    exponentially small escape rate in high dimension.
    """
    d = center.shape[0]
    gen = rng.generator
    direction = gen.standard_normal((n_chains, d))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    states = center + (d * sigma) * direction / norms
    dist = np.full(n_chains, d * sigma, dtype=float)
    if jacobian_correction:
        # chain states are log-chart coordinates, so the SPD eigenvalues
        # are the exponentials of the symmetric matrix's spectrum
        log_j = log_jacobian(np.exp(np.linalg.eigvalsh(invvecd_stack(states, dim))))
    accepted = 0
    for _ in range(int(burn_in)):
        cand = states + proposal_sigma * gen.standard_normal((n_chains, d))
        cand_dist = np.linalg.norm(cand - center, axis=1)
        log_ratio = (dist - cand_dist) / sigma
        if jacobian_correction:
            cand_log_j = log_jacobian(
                np.exp(np.linalg.eigvalsh(invvecd_stack(cand, dim)))
            )
            log_ratio = log_ratio + log_j - cand_log_j
        take = np.log(gen.random(n_chains)) < log_ratio
        states[take] = cand[take]
        dist[take] = cand_dist[take]
        if jacobian_correction:
            log_j[take] = cand_log_j[take]
        accepted += int(take.sum())
    return states, accepted / (int(burn_in) * n_chains)


def riemannian_laplace(
    rng: RngState,
    summary: SpdMatrix,
    sigma: float,
    burn_in: int = 50000,
    proposal_sigma: float | None = None,
    jacobian_correction: bool = False,
) -> LaplaceDraw:
    """Privatize ``summary`` by Metropolis sampling of the Laplace density
    exp(-rho(X, summary)/sigma); a fresh chain per release.

    ``proposal_sigma`` defaults to ``sigma``.  ``jacobian_correction``
    switches on an alternative acceptance rule that weighs the candidate and
    current states by the log-chart volume term, for sensitivity analysis of
    the plain target-ratio rule; it is off by default.
    """
    if not (sigma > 0):
        raise DomainError("sigma must be positive")
    if burn_in < 1:
        raise DomainError("burn_in must be >= 1")
    if proposal_sigma is None:
        proposal_sigma = sigma
    if not (proposal_sigma > 0):
        raise DomainError("proposal_sigma must be positive")
    k = summary.dim
    center = vecd_stack(logm_stack(summary.entries))
    states, ratio = _laplace_chains(
        rng, center, k, sigma, burn_in, proposal_sigma, 1, jacobian_correction
    )
    sample = SpdMatrix(expm_stack(invvecd_stack(states[0], k)))
    warning = None
    if not (ACCEPTANCE_BAND[0] <= ratio <= ACCEPTANCE_BAND[1]):
        warning = (
            f"acceptance ratio {ratio:.3f} outside "
            f"[{ACCEPTANCE_BAND[0]}, {ACCEPTANCE_BAND[1]}]; "
            "check proposal_sigma and burn_in"
        )
    return LaplaceDraw(sample=sample, acceptance_ratio=ratio, warning=warning)


def laplace_chains_stack(
    rng: RngState,
    summary: SpdMatrix,
    sigma: float,
    burn_in: int,
    n_chains: int,
    proposal_sigma: float | None = None,
    jacobian_correction: bool = False,
) -> tuple[np.ndarray, float]:
    """Final states of ``n_chains`` independent Laplace chains as a
    (n_chains, k, k) SPD stack, plus the pooled acceptance ratio."""
    if not (sigma > 0):
        raise DomainError("sigma must be positive")
    if burn_in < 1:
        raise DomainError("burn_in must be >= 1")
    if n_chains < 1:
        raise DomainError("n_chains must be >= 1")
    if proposal_sigma is None:
        proposal_sigma = sigma
    k = summary.dim
    center = vecd_stack(logm_stack(summary.entries))
    states, ratio = _laplace_chains(
        rng, center, k, sigma, burn_in, proposal_sigma, int(n_chains), jacobian_correction
    )
    return expm_stack(invvecd_stack(states, k)), ratio


def privacy_loss(
    y: SpdMatrix, f_d: SpdMatrix, f_dp: SpdMatrix, sigma: float
) -> float:
    """Log ratio of tangent Gaussian output densities at ``y`` for summaries
    ``f_d`` and ``f_dp``.

    The log-chart volume term depends on ``y`` alone and cancels, leaving
    (||v'||^2 - ||v||^2) / (2 sigma^2) with v, v' the log-chart offsets of
    ``y`` from the two summaries.
    """
    if not (sigma > 0):
        raise DomainError("sigma must be positive")
    if y.dim != f_d.dim or y.dim != f_dp.dim:
        raise DimensionError("privacy loss requires matching dimensions")
    log_y = logm_stack(y.entries)
    v = vecd_stack(log_y - logm_stack(f_d.entries))
    v_prime = vecd_stack(log_y - logm_stack(f_dp.entries))
    return float((v_prime @ v_prime - v @ v) / (2.0 * sigma**2))
