"""Reading participatory-budgeting election files (.pb) and the cost-utility transform.

A file has three semicolon-separated sections, each introduced by a line
holding only its name::

    META
    key;value
    budget;4000000
    PROJECTS
    project_id;cost;name
    1;200000;Park
    VOTES
    voter_id;vote
    17;1,3
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ppga.model import Instance

SECTIONS = ("META", "PROJECTS", "VOTES")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class RawElection:
    meta: dict[str, str]
    project_columns: list[str]
    projects: list[dict[str, str]]
    vote_columns: list[str]
    votes: list[dict[str, str]]
    approvals: list[list[str]]
    warnings: list[str] = field(default_factory=list, compare=False)

    @property
    def budget(self) -> float:
        return float(self.meta["budget"])

    @property
    def project_ids(self) -> list[str]:
        return [p["project_id"] for p in self.projects]

    @property
    def costs(self) -> list[float]:
        return [float(p["cost"]) for p in self.projects]


def _number(text: str, what: str, line: int) -> float:
    try:
        value = float(text.strip().replace(",", "."))
    except ValueError:
        raise ParseError(f"{what} {text!r} is not a number", line) from None
    if not math.isfinite(value):
        raise ParseError(f"{what} {text!r} is not finite", line)
    return value


def parse_pabulib(text: str) -> RawElection:
    rows: dict[str, list[tuple[int, list[str]]]] = {}
    section = None
    reader = csv.reader(io.StringIO(text.lstrip("﻿")), delimiter=";")
    for row in reader:
        lineno = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        head = row[0].strip()
        if len(row) == 1 and head.upper() in SECTIONS:
            section = head.upper()
            if section in rows:
                raise ParseError(f"section {section} appears twice", lineno)
            rows[section] = []
            continue
        if section is None:
            raise ParseError("content before the first section header", lineno)
        rows[section].append((lineno, [cell.strip() for cell in row]))

    for name in SECTIONS:
        if name not in rows:
            raise ParseError(f"missing {name} section")
        if not rows[name]:
            raise ParseError(f"{name} section has no header row")

    meta_line, meta_header = rows["META"][0]
    meta = {}
    for lineno, row in rows["META"][1:]:
        if len(row) < 2:
            raise ParseError("META row needs a key and a value", lineno)
        meta[row[0]] = ";".join(row[1:])
    if "budget" not in meta:
        raise ParseError("META has no budget", meta_line)
    budget_line = next(ln for ln, r in rows["META"][1:] if r[0] == "budget")
    if not _number(meta["budget"], "budget", budget_line) > 0:
        raise ParseError("budget must be positive", budget_line)

    warnings: list[str] = []
    proj_line, project_columns = rows["PROJECTS"][0]
    if project_columns[0] != "project_id" or "cost" not in project_columns:
        raise ParseError("PROJECTS header must start with project_id and contain cost", proj_line)
    projects = []
    seen = set()
    for lineno, row in rows["PROJECTS"][1:]:
        if len(row) != len(project_columns):
            raise ParseError(f"expected {len(project_columns)} columns, got {len(row)}", lineno)
        rec = dict(zip(project_columns, row))
        if rec["project_id"] in seen:
            raise ParseError(f"duplicate project id {rec['project_id']!r}", lineno)
        seen.add(rec["project_id"])
        if not _number(rec["cost"], "cost", lineno) > 0:
            raise ParseError(f"project {rec['project_id']!r} has nonpositive cost", lineno)
        projects.append(rec)
    if not projects:
        raise ParseError("no projects", proj_line)

    vote_line, vote_columns = rows["VOTES"][0]
    if vote_columns[0] != "voter_id" or "vote" not in vote_columns:
        raise ParseError("VOTES header must start with voter_id and contain vote", vote_line)
    votes, approvals = [], []
    unknown = 0
    for lineno, row in rows["VOTES"][1:]:
        if len(row) != len(vote_columns):
            raise ParseError(f"expected {len(vote_columns)} columns, got {len(row)}", lineno)
        rec = dict(zip(vote_columns, row))
        picked = []
        for pid in (p.strip() for p in rec["vote"].split(",")):
            if not pid:
                continue
            if pid in seen:
                picked.append(pid)
            else:
                unknown += 1
        votes.append(rec)
        approvals.append(picked)
    if unknown:
        warnings.append(f"dropped {unknown} approvals of unknown project ids")

    for key, count in (("num_projects", len(projects)), ("num_votes", len(votes))):
        if key in meta and meta[key].strip() != str(count):
            warnings.append(f"META {key}={meta[key]} but the file has {count}")

    return RawElection(meta, project_columns, projects, vote_columns, votes, approvals, warnings)


def read_pabulib(path) -> RawElection:
    return parse_pabulib(Path(path).read_text(encoding="utf-8"))


def write_pabulib(raw: RawElection) -> str:
    """Serialize back to the sectioned format (votes are written as stored)."""
    out = io.StringIO()
    w = csv.writer(out, delimiter=";", lineterminator="\n")
    w.writerow(["META"])
    w.writerow(["key", "value"])
    for k, v in raw.meta.items():
        w.writerow([k, v])
    w.writerow(["PROJECTS"])
    w.writerow(raw.project_columns)
    for p in raw.projects:
        w.writerow([p[c] for c in raw.project_columns])
    w.writerow(["VOTES"])
    w.writerow(raw.vote_columns)
    for v in raw.votes:
        w.writerow([v[c] for c in raw.vote_columns])
    return out.getvalue()


def cost_utility(raw: RawElection) -> Instance:
    """u_ij = 1 iff voter i approves project j; sizes are costs, capacity the budget."""
    index = {pid: j for j, pid in enumerate(raw.project_ids)}
    return Instance.from_approvals(
        raw.costs,
        raw.budget,
        [[index[p] for p in ballot] for ballot in raw.approvals],
        project_labels=raw.project_ids,
        voter_labels=[v["voter_id"] for v in raw.votes],
    )


def sample_voters(instance: Instance, size: int, seed: int = 0) -> Instance:
    """Seeded uniform subsample without replacement, kept in file order."""
    if size >= instance.n:
        return instance
    if size < 1:
        raise ValueError("sample size must be positive")
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(instance.n, size=size, replace=False))
    return instance.subset(keep.tolist())


def load_instance(path, sample: int | None = None, seed: int = 0) -> Instance:
    inst = cost_utility(read_pabulib(path))
    return sample_voters(inst, sample, seed) if sample else inst
