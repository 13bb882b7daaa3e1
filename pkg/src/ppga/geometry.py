"""Euclidean projection onto the capped simplex and exact linear maximization over it.

Both kernels come in a batched form operating row-wise on 2-D arrays. Every
row is handled independently, so results do not depend on how rows are
grouped into batches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ppga.model import FeasibleRegion

TOL = 1e-12


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    active_upper: frozenset[int]
    active_lower: frozenset[int]
    simplex_active: bool
    shift: float


def project_rows(V: np.ndarray, bounds: np.ndarray, total: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Project each row of ``V`` onto ``{0 <= z <= bounds, sum(z) <= total}``.

    Returns the projected rows and the optimal shift ``tau`` for each row.
    The shift solves ``sum(clip(v - tau, 0, b)) = total`` when the sum
    constraint binds and is zero otherwise. It is located by sweeping the
    2m breakpoints ``{v_j - b_j, v_j}`` in sorted order.
    """
    V = np.asarray(V, dtype=float)
    R, m = V.shape
    b = np.broadcast_to(bounds, (R, m))
    Z = np.clip(V, 0.0, b)
    tau = np.zeros(R)
    over = Z.sum(axis=1) > total
    if not over.any():
        return Z, tau
    Vo = V[over]
    bo = b[over]
    # phi(tau) = sum_j clip(v_j - tau, 0, b_j) is piecewise linear and nonincreasing.
    # Entering (v_j - b_j) the slope drops by one, leaving (v_j) it rises by one.
    points = np.concatenate([Vo - bo, Vo], axis=1)
    steps = np.concatenate([-np.ones_like(Vo), np.ones_like(Vo)], axis=1)
    order = np.argsort(points, axis=1, kind="stable")
    p = np.take_along_axis(points, order, axis=1)
    slope = np.cumsum(np.take_along_axis(steps, order, axis=1), axis=1)
    gaps = np.diff(p, axis=1)
    phi = np.empty_like(p)
    phi[:, 0] = bo.sum(axis=1)
    phi[:, 1:] = phi[:, :1] + np.cumsum(slope[:, :-1] * gaps, axis=1)
    # first segment [p_k, p_{k+1}] whose right end drops to the cap
    k = np.argmax(phi[:, 1:] <= total, axis=1)
    rows = np.arange(len(k))
    s = slope[rows, k]
    t = p[rows, k] + (phi[rows, k] - total) / np.where(s < 0, -s, 1.0)
    # one exact re-solve on the identified active set
    Zt = np.clip(Vo - t[:, None], 0.0, bo)
    free = (Vo - t[:, None] > 0) & (Vo - t[:, None] < bo)
    nfree = free.sum(axis=1)
    upper_mass = np.where(~free & (Zt >= bo), bo, 0.0).sum(axis=1)
    refined = (np.where(free, Vo, 0.0).sum(axis=1) + upper_mass - total) / np.maximum(nfree, 1)
    t = np.where(nfree > 0, refined, t)
    t = np.maximum(t, 0.0)
    Z[over] = np.clip(Vo - t[:, None], 0.0, bo)
    tau[over] = t
    return Z, tau


def project(v, region: FeasibleRegion) -> ProjectionResult:
    """Euclidean projection of ``v`` onto ``region``."""
    v = np.asarray(v, dtype=float)
    if v.shape != region.bounds.shape:
        raise ValueError(f"expected a vector of length {region.m}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project a non-finite vector")
    Z, tau = project_rows(v[None, :], region.bounds, region.total_cap)
    z = Z[0]
    t = float(tau[0])
    upper = frozenset(int(j) for j in np.flatnonzero(z >= region.bounds - TOL))
    lower = frozenset(int(j) for j in np.flatnonzero(z <= TOL))
    return ProjectionResult(
        point=z,
        active_upper=upper,
        active_lower=lower - upper,
        simplex_active=bool(t > 0 or abs(z.sum() - region.total_cap) <= TOL),
        shift=t,
    )


def max_linear_rows(W: np.ndarray, bounds: np.ndarray, total: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise exact maximizer of ``w @ z`` over the capped simplex.

    Greedy fill: visit coordinates by decreasing weight (ties to the lower
    index) and fill each positive-weight coordinate up to its cap until the
    total cap is used up.
    """
    W = np.asarray(W, dtype=float)
    R, m = W.shape
    b = np.broadcast_to(bounds, (R, m))
    order = np.argsort(-W, axis=1, kind="stable")
    ws = np.take_along_axis(W, order, axis=1)
    bs = np.take_along_axis(b, order, axis=1)
    before = np.cumsum(bs, axis=1) - bs
    fill = np.clip(total - before, 0.0, bs)
    fill = np.where(ws > 0, fill, 0.0)
    Z = np.empty_like(W)
    np.put_along_axis(Z, order, fill, axis=1)
    return Z, (ws * fill).sum(axis=1)


def max_linear(w, region: FeasibleRegion) -> tuple[np.ndarray, float]:
    w = np.asarray(w, dtype=float)
    Z, val = max_linear_rows(w[None, :], region.bounds, region.total_cap)
    return Z[0], float(val[0])
