"""First-order-accurate maximization of each agent's augmented Lagrangian (the x-update).

Agent i maximizes

    log(a_i @ x + upsilon) - gamma_i @ (x - z) - rho/2 * ||x - z||^2

over the capped simplex. A point is accepted once the Frank-Wolfe gap
``max_{z' in Z} (z' - x) @ g(x)`` of the objective gradient ``g`` is at most
``xi``; the gap is evaluated exactly with the greedy linear maximizer.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ppga.geometry import max_linear_rows, project_rows
from ppga.model import FeasibleRegion

UPSILON_FLOOR = 1e-9
HARD_ITERATION_CAP = 20_000
_MAX_HALVINGS = 80


class SubsolverError(RuntimeError):
    def __init__(self, message, x=None, residual=None, agent=None):
        super().__init__(message)
        self.x = x
        self.residual = residual
        self.agent = agent


def effective_upsilon(upsilon: float) -> float:
    return max(float(upsilon), UPSILON_FLOOR)


def lipschitz_bound(upsilon: float, rho: float, beta: float = 0.0) -> float:
    """L + rho with L = (1+beta)^2 / (2 upsilon^2) + beta / upsilon."""
    u = effective_upsilon(upsilon)
    return (1 + beta) ** 2 / (2 * u * u) + beta / u + rho


def iteration_cap(upsilon: float, rho: float, xi: float, hard_cap: int = HARD_ITERATION_CAP) -> int:
    L = lipschitz_bound(upsilon, rho)
    if xi >= 1:
        return int(min(10, hard_cap))
    formula = 10 * math.sqrt(L / xi) * math.log(1 / xi)
    # the formula overflows long before it matters; clamp as a float first
    return int(min(10 * math.ceil(min(formula / 10, hard_cap)), hard_cap))


@dataclass(frozen=True)
class SubproblemSpec:
    voter: int
    approvals: np.ndarray
    z_prev: np.ndarray
    gamma_prev: np.ndarray
    rho: float
    upsilon: float = 0.0
    xi: float = 1e-8

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.xi > 0:
            raise ValueError("xi must be positive")

    @property
    def upsilon_eff(self) -> float:
        return effective_upsilon(self.upsilon)

    @property
    def lipschitz(self) -> float:
        return lipschitz_bound(self.upsilon, self.rho)

    def weights(self, m: int) -> np.ndarray:
        a = np.zeros(m)
        a[np.asarray(self.approvals, dtype=np.int64)] = 1.0
        return a

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        a = self.weights(len(x))
        d = x - self.z_prev
        return float(math.log(a @ x + self.upsilon_eff) - self.gamma_prev @ d - 0.5 * self.rho * d @ d)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a = self.weights(len(x))
        return a / (a @ x + self.upsilon_eff) - self.gamma_prev - self.rho * (x - self.z_prev)


def _gradient(A, X, Zp, Gm, rho, ups):
    return A / ((A * X).sum(axis=1) + ups)[:, None] - Gm - rho * (X - Zp)


def _gap_from(G, X, bounds):
    _, best = max_linear_rows(G, bounds)
    return np.maximum(best - (G * X).sum(axis=1), 0.0)


def _solve_block(A, Zp, Gm, X0, rho, ups, xi, bounds, max_iter):
    """Restarted accelerated projected gradient ascent with per-row backtracking.

    Backtracking and restarts use gradients only (secant curvature test and the
    gradient restart rule), since objective differences near the optimum fall
    below floating-point resolution long before the gap reaches small xi.
    """
    R, m = A.shape
    X, _ = project_rows(X0, bounds)
    gX = _gradient(A, X, Zp, Gm, rho, ups)
    res = _gap_from(gX, X, bounds)
    best_x, best_res = X.copy(), res.copy()
    iters = np.zeros(R, dtype=np.int64)
    Y = X.copy()
    T = np.ones(R)
    step = 1.0 / (rho + (A * A).sum(axis=1) / ((A * X).sum(axis=1) + ups) ** 2)
    live = np.flatnonzero(res > xi)
    it = 0
    while live.size and it < max_iter:
        it += 1
        a, zp, gm = A[live], Zp[live], Gm[live]
        y = Y[live]
        g = _gradient(a, y, zp, gm, rho, ups)
        s = step[live].copy()
        xn = np.empty_like(y)
        gn = np.empty_like(y)
        todo = np.arange(len(live))
        for attempt in range(_MAX_HALVINGS):
            cand, _ = project_rows(y[todo] + s[todo, None] * g[todo], bounds)
            gc = _gradient(a[todo], cand, zp[todo], gm[todo], rho, ups)
            d = np.sqrt(((cand - y[todo]) ** 2).sum(axis=1))
            dg = np.sqrt(((gc - g[todo]) ** 2).sum(axis=1))
            ok = (s[todo] * dg <= d * (1 + 1e-9)) | (attempt == _MAX_HALVINGS - 1)
            xn[todo[ok]] = cand[ok]
            gn[todo[ok]] = gc[ok]
            todo = todo[~ok]
            if not todo.size:
                break
            s[todo] *= 0.5
        iters[live] += 1
        x_old = X[live]
        restart = ((y - xn) * (xn - x_old)).sum(axis=1) > 0
        t_old = T[live]
        t_new = np.where(restart, 1.0, 0.5 * (1 + np.sqrt(1 + 4 * t_old * t_old)))
        beta = np.where(restart, 0.0, (t_old - 1) / t_new)
        y_new = xn + beta[:, None] * (xn - x_old)
        # keep the extrapolated point inside the log domain
        u_y = (a * y_new).sum(axis=1) + ups
        u_x = (a * xn).sum(axis=1) + ups
        bad = u_y < 0.5 * u_x
        y_new[bad] = xn[bad]
        t_new[bad] = 1.0
        X[live], Y[live], T[live] = xn, y_new, t_new
        # the objective is rho-strongly concave, so steps past 1/rho never pass the secant test
        step[live] = np.minimum(s * 1.25, 1.0 / rho)
        r = _gap_from(gn, xn, bounds)
        res[live] = r
        better = r < best_res[live]
        idx = live[better]
        best_x[idx] = xn[better]
        best_res[idx] = r[better]
        live = live[r > xi]
    return best_x, best_res, iters


def solve_rows(
    A: np.ndarray,
    z_prev: np.ndarray,
    gamma: np.ndarray,
    x0: np.ndarray,
    rho: float,
    upsilon: float,
    xi: float,
    bounds: np.ndarray,
    max_iter: int | None = None,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve one x-subproblem per row of ``A`` (0/1 approval weights).

    Returns ``(X, residuals, iterations)``. Rows are independent; splitting
    them across ``threads`` workers does not change any result.
    """
    A = np.asarray(A, dtype=float)
    R, m = A.shape
    Zp = np.broadcast_to(np.asarray(z_prev, dtype=float), (R, m))
    Gm = np.asarray(gamma, dtype=float)
    ups = effective_upsilon(upsilon)
    if max_iter is None:
        max_iter = iteration_cap(upsilon, rho, xi)
    if threads <= 1 or R < 2 * threads:
        return _solve_block(A, Zp, Gm, x0, rho, ups, xi, bounds, max_iter)
    cuts = np.linspace(0, R, threads + 1).astype(int)
    spans = [(lo, hi) for lo, hi in zip(cuts[:-1], cuts[1:]) if hi > lo]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(
            pool.map(
                lambda span: _solve_block(
                    A[span[0] : span[1]],
                    Zp[span[0] : span[1]],
                    Gm[span[0] : span[1]],
                    x0[span[0] : span[1]],
                    rho,
                    ups,
                    xi,
                    bounds,
                    max_iter,
                ),
                spans,
            )
        )
    return tuple(np.concatenate(p) for p in zip(*parts))


def fo_residual(x, spec: SubproblemSpec, region: FeasibleRegion) -> float:
    """Exact first-order gap ``max_{z in Z} (z - x) @ g(x)``; zero iff x is optimal."""
    x = np.asarray(x, dtype=float)
    g = spec.gradient(x)
    _, best = max_linear_rows(g[None, :], region.bounds, region.total_cap)
    return float(max(best[0] - g @ x, 0.0))


def solve_x_subproblem(
    spec: SubproblemSpec,
    region: FeasibleRegion,
    x0=None,
    max_iter: int | None = None,
) -> tuple[np.ndarray, float]:
    m = region.m
    a = spec.weights(m)[None, :]
    start = np.zeros((1, m)) if x0 is None else np.asarray(x0, dtype=float)[None, :]
    X, res, _ = solve_rows(
        a,
        np.asarray(spec.z_prev, dtype=float),
        np.asarray(spec.gamma_prev, dtype=float)[None, :],
        start,
        spec.rho,
        spec.upsilon,
        spec.xi,
        region.bounds,
        max_iter=max_iter,
    )
    if res[0] > spec.xi:
        raise SubsolverError(
            f"agent {spec.voter}: residual {res[0]:.3g} above xi={spec.xi:g} at the iteration cap",
            x=X[0],
            residual=float(res[0]),
            agent=spec.voter,
        )
    return X[0], float(res[0])
