"""Welfare, proportionality, distance and core-violation measurements for an allocation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ppga.geometry import max_linear
from ppga.model import Instance, feasible_region


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    sw: float
    ps_min_times_n: float
    ps_avg: float
    sd_per_m: float | None
    nash_welfare: float
    core_violation: float | None
    excluded_voters: int

    def to_dict(self) -> dict:
        return asdict(self)


def social_welfare(instance: Instance, z) -> float:
    """Mean utility over all n voters, zero-utility voters included."""
    return float(instance.utilities(z).sum() / instance.n)


def proportionality(instance: Instance, z) -> tuple[float, float]:
    """(n * min_i PS_i, mean_i PS_i) over voters with positive attainable utility."""
    best = instance.max_utilities()
    keep = best > 0
    if not keep.any():
        raise MetricsError("every voter has zero attainable utility")
    ps = instance.utilities(z)[keep] / best[keep]
    return float(instance.n * ps.min()), float(ps.mean())


def statistical_distance(z, z_ref, m: int | None = None) -> float:
    """Total variation distance divided by the number of projects."""
    z = np.asarray(z, dtype=float)
    z_ref = np.asarray(z_ref, dtype=float)
    if z.shape != z_ref.shape:
        raise ValueError(f"allocation shapes differ: {z.shape} vs {z_ref.shape}")
    m = len(z) if m is None else m
    return float(0.5 * np.abs(z - z_ref).sum() / m)


def deviation_weights(instance: Instance, z, eps: float = 0.0, delta: float = 0.0) -> np.ndarray:
    """w_j = (1/n) sum_i u_ij / (U_i(z) + delta/(1+eps)); the deviation ratio is w @ z'."""
    if eps < 0 or delta < 0:
        raise ValueError("eps and delta must be nonnegative")
    shift = delta / (1.0 + eps) if math.isfinite(delta) else math.inf
    util = instance.utilities(z)
    sizes = instance.ballot_sizes()
    denom = util + shift
    bad = np.flatnonzero((sizes > 0) & ~(denom > 0))
    if bad.size:
        raise MetricsError(f"voter {int(bad[0])} has zero utility and no additive slack")
    owner = np.repeat(np.arange(instance.n), sizes)
    w = np.zeros(instance.m)
    np.add.at(w, instance.indices, 1.0 / denom[owner])
    return w / instance.n


def core_violation(instance: Instance, z, eps: float = 0.0, delta: float = 0.0) -> float:
    """max over z' of (1/n) sum_i U_i(z') / (U_i(z) + delta/(1+eps)).

    A value at most 1 + eps certifies that ``z`` is an (eps, delta)-core
    outcome. Exact for linear utilities, where the ratio is linear in z'.
    """
    w = deviation_weights(instance, z, eps, delta)
    _, value = max_linear(w, feasible_region(instance))
    return value


def nash_welfare(instance: Instance, z, upsilon: float = 0.0) -> float:
    """Sum of log(U_i(z) + upsilon) over voters with positive attainable utility."""
    best = instance.max_utilities()
    util = instance.utilities(z)[best > 0] + upsilon
    if np.any(util <= 0):
        return -math.inf
    return float(np.log(util).sum())


def evaluate(instance: Instance, z, reference=None, upsilon: float = 0.0) -> MetricsReport:
    z = np.asarray(z, dtype=float)
    ps_min, ps_avg = proportionality(instance, z)
    try:
        cv = core_violation(instance, z)
    except MetricsError:
        cv = None
    return MetricsReport(
        sw=social_welfare(instance, z),
        ps_min_times_n=ps_min,
        ps_avg=ps_avg,
        sd_per_m=statistical_distance(z, reference) if reference is not None else None,
        nash_welfare=nash_welfare(instance, z, upsilon),
        core_violation=cv,
        excluded_voters=int((instance.max_utilities() <= 0).sum()),
    )
