"""Small analytic instances and a seeded generator of PB-like elections."""

from __future__ import annotations

import numpy as np

from ppga.model import Instance


def split_pair() -> Instance:
    """Two voters, two full-budget projects, one approval each. MNW optimum (1/2, 1/2)."""
    return Instance.from_approvals([1.0, 1.0], 1.0, [[0], [1]])


def two_blocs(n: int = 1000) -> Instance:
    """Two equal blocs approving distinct projects; a third project nobody approves."""
    if n % 2:
        raise ValueError("n must be even")
    return Instance.from_approvals([1.0, 1.0, 1.0], 1.0, [[0]] * (n // 2) + [[1]] * (n // 2))


def single_voter(m: int = 3) -> Instance:
    """One voter approving every project; caps 0.3, 0.5, 0.7, ... sum past the budget."""
    sizes = [0.3 + 0.2 * j for j in range(m)]
    return Instance.from_approvals(sizes, 1.0, [list(range(m))])


def synthetic_election(
    n: int,
    m: int,
    seed: int = 0,
    mean_approvals: float = 1.8,
    budget: float = 4_000_000.0,
    empty_fraction: float = 0.0,
) -> tuple[list[float], float, list[list[int]]]:
    """Seeded approval election shaped like a city-wide PB vote.

    Project popularity follows a Zipf-like law, costs are log-uniform between
    2% and 40% of the budget, and ballot lengths are 1 + Poisson.
    Returns ``(costs, budget, ballots)``.
    """
    rng = np.random.default_rng(seed)
    costs = np.round(budget * np.exp(rng.uniform(np.log(0.02), np.log(0.4), size=m)), -2)
    popularity = 1.0 / np.arange(1, m + 1) ** 0.8
    popularity = popularity[rng.permutation(m)]
    popularity /= popularity.sum()
    lengths = 1 + rng.poisson(max(mean_approvals - 1.0, 0.0), size=n)
    ballots = []
    for i in range(n):
        if rng.random() < empty_fraction:
            ballots.append([])
            continue
        k = int(min(lengths[i], m))
        ballots.append(sorted(rng.choice(m, size=k, replace=False, p=popularity).tolist()))
    return costs.tolist(), budget, ballots
