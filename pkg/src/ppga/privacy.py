"""Privacy parameters, Gaussian noise and the privacy ledger for the noised consensus average."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

C_EPSILON = 1.5
C_DELTA = 0.3
C_ITERATIONS = 0.001


class PrivacyBudgetError(ValueError):
    pass


class NoiseMagnitudeWarning(UserWarning):
    pass


def default_alpha(epsilon: float, delta: float) -> float:
    """Renyi order that spends half of ``epsilon`` on the RDP-to-DP conversion."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return 2.0 * math.log(1.0 / delta) / epsilon + 1.0


def auto_parameters(n: int) -> tuple[float, float, int]:
    """(epsilon, delta, K) from the population size: 1.5/ln n, 0.3/sqrt n, max(1, round(0.001 n))."""
    if n < 2:
        raise ValueError("automatic privacy parameters need n >= 2")
    return C_EPSILON / math.log(n), C_DELTA / math.sqrt(n), max(1, round(C_ITERATIONS * n))


@dataclass(frozen=True)
class DpParams:
    epsilon: float
    delta: float
    alpha: float
    iterations: int
    n: int
    m: int | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if not self.eps_prime > 0:
            raise PrivacyBudgetError(
                f"epsilon={self.epsilon} must exceed log(1/delta)/(alpha-1)="
                f"{self.conversion_cost} for a positive per-iteration budget"
            )

    @property
    def conversion_cost(self) -> float:
        return math.log(1.0 / self.delta) / (self.alpha - 1.0)

    @property
    def eps_prime(self) -> float:
        return (self.epsilon - self.conversion_cost) / self.iterations

    @property
    def sigma2(self) -> float:
        return self.alpha / (self.n**2 * self.eps_prime)

    @property
    def sensitivity(self) -> float:
        return math.sqrt(2.0) / self.n

    def noise_magnitude(self, m: int | None = None) -> float:
        """Expected squared norm of one noise draw, m * sigma^2."""
        m = self.m if m is None else m
        if m is None:
            raise ValueError("number of projects unknown")
        return m * self.sigma2


def derive_dp_params(
    epsilon: float,
    delta: float,
    alpha: float | None,
    iterations: int,
    n: int,
    m: int | None = None,
) -> DpParams:
    if alpha is None:
        alpha = default_alpha(epsilon, delta)
    params = DpParams(epsilon=epsilon, delta=delta, alpha=alpha, iterations=iterations, n=n, m=m)
    if m is not None and params.noise_magnitude() >= 1:
        warnings.warn(
            f"m*sigma^2 = {params.noise_magnitude():.4g} >= 1; tail bounds on the noised iterates do not apply",
            NoiseMagnitudeWarning,
            stacklevel=2,
        )
    return params


def auto_dp_params(n: int, m: int | None = None) -> DpParams:
    epsilon, delta, iterations = auto_parameters(n)
    return derive_dp_params(epsilon, delta, None, iterations, n, m)


def sample_noise(sigma2: float, m: int, k: int, seed: int) -> np.ndarray:
    """Noise vector for iteration ``k``.

    Drawn from a Philox stream keyed by ``seed`` with the counter positioned by
    ``k``, so the draw depends only on (seed, k, sigma2).
    """
    if k < 1:
        raise ValueError("iterations are numbered from 1")
    if sigma2 == 0:
        return np.zeros(m)
    key = int(seed) & 0xFFFFFFFFFFFFFFFF
    bitgen = np.random.Philox(key=key, counter=[0, int(k), 0, 0])
    return math.sqrt(sigma2) * np.random.Generator(bitgen).standard_normal(m)


def privacy_ledger(params: DpParams, m: int | None = None) -> dict:
    """Accounting for K noised averages: per-step and composed RDP, and the (epsilon, delta) it converts to."""
    m = params.m if m is None else m
    composed = params.iterations * params.eps_prime
    report = {
        "epsilon": params.epsilon,
        "delta": params.delta,
        "alpha": params.alpha,
        "iterations": params.iterations,
        "n": params.n,
        "eps_prime": params.eps_prime,
        "rdp_per_iteration": params.eps_prime,
        "rdp_composed": composed,
        "converted_epsilon": composed + params.conversion_cost,
        "sigma2": params.sigma2,
        "sensitivity": params.sensitivity,
        "noise_magnitude": None,
        "m_sigma2_warning": None,
    }
    if m is not None:
        report["noise_magnitude"] = m * params.sigma2
        report["m_sigma2_warning"] = bool(m * params.sigma2 >= 1)
    return report
