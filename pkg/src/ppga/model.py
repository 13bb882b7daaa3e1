"""Domain types: election instances, linear approval utilities and the feasible polytope."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class FeasibleRegion:
    """Capped simplex ``{z : 0 <= z_j <= b_j, sum(z) <= total_cap}``."""

    bounds: np.ndarray
    total_cap: float = 1.0

    @property
    def m(self) -> int:
        return len(self.bounds)

    def contains(self, z, tol: float = 1e-9) -> bool:
        z = np.asarray(z, dtype=float)
        if z.shape != self.bounds.shape:
            return False
        return bool(
            np.all(z >= -tol) and np.all(z <= self.bounds + tol) and z.sum() <= self.total_cap + tol
        )


@dataclass(frozen=True, eq=False)
class Instance:
    """A public-good allocation problem with binary (approval) linear utilities.

    Approvals are stored in CSR form: voter ``i`` approves
    ``indices[indptr[i]:indptr[i + 1]]`` (sorted, deduplicated).
    """

    sizes: np.ndarray
    capacity: float
    indptr: np.ndarray
    indices: np.ndarray
    project_labels: tuple[str, ...] | None = None
    voter_labels: tuple[str, ...] | None = None
    _profile: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_approvals(
        cls,
        sizes: Sequence[float],
        capacity: float,
        approvals: Sequence[Sequence[int]],
        project_labels: Sequence[str] | None = None,
        voter_labels: Sequence[str] | None = None,
    ) -> "Instance":
        sizes = np.asarray(sizes, dtype=float)
        if sizes.ndim != 1 or len(sizes) < 1:
            raise ValueError("need at least one project")
        if not np.all(np.isfinite(sizes)) or np.any(sizes <= 0):
            raise ValueError("project sizes must be finite and positive")
        if not (np.isfinite(capacity) and capacity > 0):
            raise ValueError("capacity must be positive")
        if len(approvals) < 1:
            raise ValueError("need at least one voter")
        m = len(sizes)
        indptr = np.zeros(len(approvals) + 1, dtype=np.int64)
        chunks = []
        for i, ballot in enumerate(approvals):
            row = np.unique(np.asarray(list(ballot), dtype=np.int64))
            if row.size and (row[0] < 0 or row[-1] >= m):
                raise ValueError(f"voter {i} approves a project outside [0, {m})")
            chunks.append(row)
            indptr[i + 1] = indptr[i] + row.size
        indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
        if project_labels is not None and len(project_labels) != m:
            raise ValueError("project_labels length differs from number of projects")
        if voter_labels is not None and len(voter_labels) != len(approvals):
            raise ValueError("voter_labels length differs from number of voters")
        return cls(
            sizes=sizes,
            capacity=float(capacity),
            indptr=indptr,
            indices=indices,
            project_labels=tuple(project_labels) if project_labels is not None else None,
            voter_labels=tuple(voter_labels) if voter_labels is not None else None,
        )

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.sizes)

    def approvals(self, voter: int) -> np.ndarray:
        if not 0 <= voter < self.n:
            raise IndexError(f"voter {voter} out of range [0, {self.n})")
        return self.indices[self.indptr[voter] : self.indptr[voter + 1]]

    def ballot_sizes(self) -> np.ndarray:
        return np.diff(self.indptr)

    def region(self) -> FeasibleRegion:
        return feasible_region(self)

    def utilities(self, z) -> np.ndarray:
        """Vector of U_i(z) for every voter."""
        z = np.asarray(z, dtype=float)
        vals = np.zeros(self.n)
        if self.indices.size == 0:
            return vals
        contrib = z[self.indices]
        csum = np.concatenate(([0.0], np.cumsum(contrib)))
        # per-voter sums without reduceat's empty-segment quirk
        vals = csum[self.indptr[1:]] - csum[self.indptr[:-1]]
        return vals

    def max_utilities(self) -> np.ndarray:
        b = feasible_region(self).bounds
        return np.minimum(1.0, self.utilities(b))

    def profile(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Distinct ballots in order of first appearance.

        Returns ``(ballots, counts, first_voter)`` with ``ballots`` a dense 0/1
        matrix of shape (G, m).
        """
        if "ballots" not in self._profile:
            seen: dict[tuple[int, ...], int] = {}
            first: list[int] = []
            counts: list[int] = []
            for i in range(self.n):
                key = tuple(self.approvals(i).tolist())
                g = seen.get(key)
                if g is None:
                    seen[key] = len(first)
                    first.append(i)
                    counts.append(1)
                else:
                    counts[g] += 1
            ballots = np.zeros((len(first), self.m))
            for key, g in seen.items():
                ballots[g, list(key)] = 1.0
            self._profile["ballots"] = (ballots, np.asarray(counts, dtype=np.int64), np.asarray(first))
        return self._profile["ballots"]

    def subset(self, voters: Sequence[int]) -> "Instance":
        voters = list(voters)
        return Instance.from_approvals(
            self.sizes,
            self.capacity,
            [self.approvals(i) for i in voters],
            project_labels=self.project_labels,
            voter_labels=[self.voter_labels[i] for i in voters] if self.voter_labels else None,
        )


def feasible_region(instance: Instance) -> FeasibleRegion:
    return FeasibleRegion(bounds=np.minimum(1.0, instance.sizes / instance.capacity), total_cap=1.0)


def utility(instance: Instance, voter: int, z) -> float:
    """U_i(z): total budget share of the projects voter ``i`` approves."""
    z = np.asarray(z, dtype=float)
    return float(z[instance.approvals(voter)].sum())


def max_utility(instance: Instance, voter: int) -> float:
    # LP optimum: fill approved projects to their caps until the total cap binds.
    b = feasible_region(instance).bounds
    return float(min(1.0, b[instance.approvals(voter)].sum()))
