"""Regenerate the bundled desk-scale election (src/ppga/data/desk.pb)."""

import argparse
from pathlib import Path

from ppga.fixtures import synthetic_election
from ppga.ingest import RawElection, write_pabulib

DATA = Path(__file__).resolve().parents[1] / "src" / "ppga" / "data"


def build(n: int, m: int, seed: int) -> RawElection:
    costs, budget, ballots = synthetic_election(n, m, seed=seed)
    ids = [str(101 + j) for j in range(m)]
    meta = {
        "description": "Synthetic city-wide approval election",
        "country": "Nowhere",
        "unit": "Desk City",
        "num_projects": str(m),
        "num_votes": str(n),
        "budget": str(int(budget)),
        "vote_type": "approval",
        "rule": "greedy",
    }
    projects = [
        {"project_id": pid, "cost": str(int(c)), "name": f"Project {pid}", "category": ("green", "roads", "culture")[j % 3]}
        for j, (pid, c) in enumerate(zip(ids, costs))
    ]
    votes = [{"voter_id": str(100000 + i), "vote": ",".join(ids[j] for j in b)} for i, b in enumerate(ballots)]
    approvals = [[ids[j] for j in b] for b in ballots]
    return RawElection(meta, ["project_id", "cost", "name", "category"], projects, ["voter_id", "vote"], votes, approvals)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=12_000)
    ap.add_argument("--m", type=int, default=30)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", type=Path, default=DATA / "desk.pb")
    args = ap.parse_args()
    args.out.write_text(write_pabulib(build(args.n, args.m, args.seed)), encoding="utf-8")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
