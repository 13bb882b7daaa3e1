"""Noised consensus ADMM on the smoothed Nash welfare objective, and its noiseless baseline.

Voters with identical ballots face identical subproblems at every iteration
(same start, same duals, same broadcast z), so the solver keeps one local
copy per distinct ballot and weights it by multiplicity. All sums over agents
are multiplicity-weighted and taken in first-appearance order.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ppga.geometry import project_rows
from ppga.model import Instance, feasible_region
from ppga.privacy import DpParams, auto_dp_params, privacy_ledger, sample_noise
from ppga.subsolver import SubsolverError, effective_upsilon, solve_rows


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    upsilon: float = 0.0
    xi: float | None = None
    seed: int = 0
    threads: int = 1
    on_subsolver_failure: str = "accept"  # or "abort"

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.upsilon < 0:
            raise ValueError("upsilon must be nonnegative")
        if self.xi is not None and not self.xi > 0:
            raise ValueError("xi must be positive")
        if self.on_subsolver_failure not in ("accept", "abort"):
            raise ValueError("on_subsolver_failure must be 'accept' or 'abort'")


@dataclass(frozen=True)
class BaselineConfig:
    # the noiseless loop only needs the fixed point; a stiffer penalty reaches it far sooner
    rho: float = 100.0
    upsilon: float = 0.0
    xi: float = 1e-8
    tol: float = 1e-7
    max_iters: int = 5000
    threads: int = 1


@dataclass(frozen=True)
class ConsensusProblem:
    """Distinct-ballot view of an instance."""

    ballots: np.ndarray  # (G, m) 0/1
    counts: np.ndarray  # (G,)
    first_voter: np.ndarray  # (G,)
    bounds: np.ndarray
    n: int

    @classmethod
    def from_instance(cls, instance: Instance) -> "ConsensusProblem":
        ballots, counts, first = instance.profile()
        return cls(ballots, counts, first, feasible_region(instance).bounds, instance.n)

    @property
    def m(self) -> int:
        return len(self.bounds)

    def agent_sum(self, X: np.ndarray) -> np.ndarray:
        return (self.counts[:, None] * X).sum(axis=0)


@dataclass
class AdmmState:
    k: int
    x: np.ndarray  # one row per distinct ballot
    gamma: np.ndarray
    z: np.ndarray
    q_prev: np.ndarray
    z_accum: np.ndarray
    rho: float

    @classmethod
    def zeros(cls, problem: ConsensusProblem, rho: float) -> "AdmmState":
        G, m = problem.ballots.shape
        return cls(0, np.zeros((G, m)), np.zeros((G, m)), np.zeros(m), np.zeros(m), np.zeros(m), rho)

    def dual_sum(self, problem: ConsensusProblem) -> np.ndarray:
        return problem.agent_sum(self.gamma)


@dataclass
class SolverReport:
    allocation: np.ndarray
    trace: list[dict]
    ledger: dict | None
    params: dict
    iterations: int
    converged: bool = True
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        # wall time is left out so that reports are reproducible byte for byte
        return {
            "allocation": [float(v) for v in self.allocation],
            "iterations": self.iterations,
            "converged": self.converged,
            "ledger": self.ledger,
            "params": self.params,
            "trace": self.trace,
        }


def iterate(
    state: AdmmState,
    problem: ConsensusProblem,
    sigma2: float,
    seed: int,
    upsilon: float,
    xi: float,
    threads: int = 1,
    on_failure: str = "accept",
) -> tuple[AdmmState, dict]:
    """One ADMM round: x-update, noise draw, noised average, dual step."""
    k = state.k + 1
    rho = state.rho
    X, res, its = solve_rows(
        problem.ballots, state.z, state.gamma, state.x, rho, upsilon, xi, problem.bounds, threads=threads
    )
    failed = np.flatnonzero(res > xi)
    if failed.size and on_failure == "abort":
        g = int(failed[0])
        raise SubsolverError(
            f"iteration {k}: x-update for agent {int(problem.first_voter[g])} stopped at residual {res[g]:.3g} > xi={xi:g}",
            x=X[g],
            residual=float(res[g]),
            agent=int(problem.first_voter[g]),
        )
    q = sample_noise(sigma2, problem.m, k, seed)
    z = problem.agent_sum(X) / problem.n + q - state.q_prev
    gamma = state.gamma + rho * (X - z)
    D = X - z
    w = problem.counts / problem.n
    record = {
        "k": k,
        "primal_residual": math.sqrt(float((problem.counts * (D * D).sum(axis=1)).sum()) / problem.n),
        "mean_subproblem_residual": float((w * res).sum()),
        "max_subproblem_residual": float(res.max()),
        "subsolver_iterations": int(its.max()),
        "subsolver_failures": int((problem.counts[failed]).sum()),
        "noise_norm": float(np.sqrt((q * q).sum())),
    }
    new = AdmmState(k, X, gamma, z, q, state.z_accum + z, rho)
    return new, record


def default_xi(n: int) -> float:
    return max(1e-8, 0.1 / math.sqrt(n))


def solve_consensus(
    instance: Instance,
    iterations: int,
    sigma2: float,
    config: AdmmConfig = AdmmConfig(),
    problem: ConsensusProblem | None = None,
    callback=None,
) -> tuple[np.ndarray, AdmmState, list[dict]]:
    """K rounds from the all-zeros start; returns the projected time average of z."""
    problem = problem or ConsensusProblem.from_instance(instance)
    xi = config.xi if config.xi is not None else default_xi(instance.n)
    state = AdmmState.zeros(problem, config.rho)
    trace = []
    for _ in range(iterations):
        state, rec = iterate(
            state, problem, sigma2, config.seed, config.upsilon, xi, config.threads, config.on_subsolver_failure
        )
        trace.append(rec)
        if callback is not None:
            callback(state, rec)
    zbar = state.z_accum / iterations
    zhat, _ = project_rows(zbar[None, :], problem.bounds)
    return zhat[0], state, trace


def run(instance: Instance, dp: DpParams | str = "auto", config: AdmmConfig = AdmmConfig()) -> SolverReport:
    """The private mechanism: K noised ADMM rounds, then projection of the averaged z."""
    start = time.perf_counter()
    if isinstance(dp, str):
        if dp != "auto":
            raise ValueError(f"unknown privacy setting {dp!r}")
        dp = auto_dp_params(instance.n, instance.m)
    if dp.n != instance.n:
        raise ValueError(f"privacy parameters were derived for n={dp.n}, instance has n={instance.n}")
    xi = config.xi if config.xi is not None else default_xi(instance.n)
    zhat, _, trace = solve_consensus(instance, dp.iterations, dp.sigma2, config)
    params = asdict(config)
    del params["threads"]  # results do not depend on it
    params["xi"] = xi
    params["upsilon_eff"] = effective_upsilon(config.upsilon)
    return SolverReport(
        allocation=zhat,
        trace=trace,
        ledger=privacy_ledger(dp, instance.m),
        params=params,
        iterations=dp.iterations,
        converged=all(r["subsolver_failures"] == 0 for r in trace),
        wall_time=time.perf_counter() - start,
    )


def run_noiseless(instance: Instance, config: BaselineConfig = BaselineConfig()) -> SolverReport:
    """Noiseless ADMM run to tolerance; its projected final iterate is the reference core allocation."""
    start = time.perf_counter()
    problem = ConsensusProblem.from_instance(instance)
    state = AdmmState.zeros(problem, config.rho)
    trace = []
    converged = False
    for _ in range(config.max_iters):
        z_old = state.z
        state, rec = iterate(state, problem, 0.0, 0, config.upsilon, config.xi, config.threads)
        rec["z_change"] = float(np.sqrt(((state.z - z_old) ** 2).sum()))
        trace.append(rec)
        if rec["primal_residual"] <= config.tol and rec["z_change"] <= config.tol:
            converged = True
            break
    zstar, _ = project_rows(state.z[None, :], problem.bounds)
    params = asdict(config)
    del params["threads"]  # results do not depend on it
    params["upsilon_eff"] = effective_upsilon(config.upsilon)
    return SolverReport(
        allocation=zstar[0],
        trace=trace,
        ledger=None,
        params=params,
        iterations=state.k,
        converged=converged,
        wall_time=time.perf_counter() - start,
    )
