"""Command-line entry points: solve, baseline, compare, metrics.

Exit codes: 0 success, 2 unreadable or malformed input, 3 infeasible privacy
budget, 4 subsolver abort.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ppga import __version__
from ppga.admm import AdmmConfig, BaselineConfig, run, run_noiseless
from ppga.ingest import ParseError, load_instance
from ppga.metrics import MetricsError, evaluate
from ppga.model import Instance
from ppga.privacy import PrivacyBudgetError, auto_parameters, default_alpha, derive_dp_params, privacy_ledger
from ppga.report import SCHEMA_VERSION, dumps
from ppga.subsolver import SubsolverError

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_ABORT = 0, 2, 3, 4
COMPARED = ("sw_ratio", "ps_min_times_n", "ps_avg", "sd_per_m", "core_violation")


def _auto_float(text: str):
    return "auto" if text == "auto" else float(text)


def _auto_int(text: str):
    return "auto" if text == "auto" else int(text)


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str
    epsilon: float | str = "auto"
    delta: float | str = "auto"
    iterations: int | str = "auto"
    alpha: float | str = "auto"
    rho: float = 1.0
    baseline_rho: float = BaselineConfig.rho
    upsilon: float = 0.0
    xi: float | None = None
    baseline_xi: float = BaselineConfig.xi
    tol: float = BaselineConfig.tol
    max_iters: int = BaselineConfig.max_iters
    seed: int = 0
    runs: int = 1
    threads: int = 1
    sample: int | None = None
    out: str | None = None
    csv: str | None = None
    allocation: str | None = None
    reference: str | None = None
    on_failure: str = "accept"
    baseline_only: bool = False

    def __post_init__(self):
        for name in ("epsilon", "delta", "alpha"):
            v = getattr(self, name)
            if v != "auto" and not (isinstance(v, float) and v > 0):
                raise ValueError(f"--{name} must be positive or 'auto'")
        if self.iterations != "auto" and not (isinstance(self.iterations, int) and self.iterations >= 1):
            raise ValueError("--iterations must be a positive integer or 'auto'")
        if not (self.rho > 0 and self.baseline_rho > 0):
            raise ValueError("--rho must be positive")
        if self.upsilon < 0:
            raise ValueError("--upsilon must be nonnegative")
        if self.xi is not None and not self.xi > 0:
            raise ValueError("--xi must be positive")
        if self.runs < 1 or self.threads < 1:
            raise ValueError("--runs and --threads must be at least 1")
        if self.sample is not None and self.sample < 1:
            raise ValueError("--sample must be positive")
        if self.command == "metrics" and not self.allocation:
            raise ValueError("metrics needs --allocation")

    def dp_params(self, n: int, m: int):
        """Resolve 'auto' entries against the (post-sampling) voter count."""
        eps_a, delta_a, k_a = auto_parameters(n)
        eps = eps_a if self.epsilon == "auto" else self.epsilon
        delta = delta_a if self.delta == "auto" else self.delta
        k = k_a if self.iterations == "auto" else self.iterations
        alpha = default_alpha(eps, delta) if self.alpha == "auto" else self.alpha
        return derive_dp_params(eps, delta, alpha, k, n, m)

    def admm(self, seed: int) -> AdmmConfig:
        return AdmmConfig(
            rho=self.rho,
            upsilon=self.upsilon,
            xi=self.xi,
            seed=seed,
            threads=self.threads,
            on_subsolver_failure=self.on_failure,
        )

    def baseline(self) -> BaselineConfig:
        return BaselineConfig(
            rho=self.baseline_rho,
            upsilon=self.upsilon,
            xi=self.baseline_xi,
            tol=self.tol,
            max_iters=self.max_iters,
            threads=self.threads,
        )

    def echo(self) -> dict:
        # thread count and output paths do not influence results
        d = asdict(self)
        for key in ("threads", "out", "csv"):
            d.pop(key)
        return d


def _instance_info(inst: Instance) -> dict:
    return {
        "n": inst.n,
        "m": inst.m,
        "capacity": inst.capacity,
        "excluded_voters": int((inst.max_utilities() <= 0).sum()),
        "projects": list(inst.project_labels) if inst.project_labels else None,
    }


def _header(cfg: RunConfig, inst: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        "instance": _instance_info(inst),
    }


def _solve(cfg: RunConfig, inst: Instance) -> dict:
    dp = cfg.dp_params(inst.n, inst.m)
    rep = run(inst, dp, cfg.admm(cfg.seed))
    out = _header(cfg, inst)
    out.update(rep.to_dict())
    out["metrics"] = evaluate(inst, rep.allocation, upsilon=cfg.upsilon).to_dict()
    return out


def _baseline(cfg: RunConfig, inst: Instance) -> dict:
    rep = run_noiseless(inst, cfg.baseline())
    out = _header(cfg, inst)
    out.update(rep.to_dict())
    out["metrics"] = evaluate(inst, rep.allocation, upsilon=cfg.upsilon).to_dict()
    return out


def _aggregate(rows: list[dict]) -> dict:
    agg = {}
    for key in COMPARED:
        vals = [r[key] for r in rows if r[key] is not None]
        agg[key] = (
            {"mean": float(np.mean(vals)), "median": float(np.median(vals)), "min": float(np.min(vals))}
            if vals
            else None
        )
    agg["runs"] = len(rows)
    return agg


def compare(cfg: RunConfig, inst: Instance, core_report=None) -> dict:
    """Baseline, then one private run per seed, all measured against the baseline."""
    core = core_report or run_noiseless(inst, cfg.baseline())
    zstar = core.allocation
    core_metrics = evaluate(inst, zstar, upsilon=cfg.upsilon)
    out = _header(cfg, inst)
    out["core"] = {
        "allocation": zstar,
        "iterations": core.iterations,
        "converged": core.converged,
        "metrics": core_metrics.to_dict(),
    }
    if cfg.baseline_only:
        return out
    dp = cfg.dp_params(inst.n, inst.m)
    rows = []
    for r in range(cfg.runs):
        seed = cfg.seed + r
        rep = run(inst, dp, cfg.admm(seed))
        met = evaluate(inst, rep.allocation, reference=zstar, upsilon=cfg.upsilon)
        rows.append(
            {
                "seed": seed,
                "sw_ratio": met.sw / core_metrics.sw if core_metrics.sw > 0 else None,
                "ps_min_times_n": met.ps_min_times_n,
                "ps_avg": met.ps_avg,
                "sd_per_m": met.sd_per_m,
                "core_violation": met.core_violation,
                "subsolver_converged": rep.converged,
                "allocation": rep.allocation,
            }
        )
    out["ledger"] = privacy_ledger(dp, inst.m)
    out["runs"] = rows
    out["aggregate"] = _aggregate(rows)
    return out


def _read_vector(path: str, key: str = "allocation") -> np.ndarray:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["core"]["allocation"] if key not in data and "core" in data else data[key]
    return np.asarray(data, dtype=float)


def _metrics(cfg: RunConfig, inst: Instance) -> dict:
    z = _read_vector(cfg.allocation)
    if z.shape != (inst.m,):
        raise ValueError(f"allocation has {z.size} entries, the election has {inst.m} projects")
    if not inst.region().contains(z, tol=1e-9):
        raise ValueError("allocation lies outside the feasible region")
    ref = _read_vector(cfg.reference) if cfg.reference else None
    out = _header(cfg, inst)
    out["allocation"] = z
    out["metrics"] = evaluate(inst, z, reference=ref, upsilon=cfg.upsilon).to_dict()
    return out


def sw_ratio_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "sw_ratio"])
    for row in report.get("runs", []):
        w.writerow([row["seed"], "%.17g" % row["sw_ratio"] if row["sw_ratio"] is not None else ""])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ppga", description="Private fair allocation of divisible public goods.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="election file (.pb)")
    common.add_argument("--sample", type=int, help="subsample this many voters")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--upsilon", type=float, default=0.0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="report path (default: stdout)")
    dp = argparse.ArgumentParser(add_help=False)
    dp.add_argument("--epsilon", type=_auto_float, default="auto")
    dp.add_argument("--delta", type=_auto_float, default="auto")
    dp.add_argument("--iterations", type=_auto_int, default="auto")
    dp.add_argument("--alpha", type=_auto_float, default="auto")
    dp.add_argument("--rho", type=float, default=1.0)
    dp.add_argument("--xi", type=float, default=None)
    dp.add_argument("--on-failure", choices=("accept", "abort"), default="accept")
    base = argparse.ArgumentParser(add_help=False)
    base.add_argument("--baseline-rho", type=float, default=BaselineConfig.rho)
    base.add_argument("--baseline-xi", type=float, default=BaselineConfig.xi)
    base.add_argument("--tol", type=float, default=BaselineConfig.tol)
    base.add_argument("--max-iters", type=int, default=BaselineConfig.max_iters)

    sub.add_parser("solve", parents=[common, dp], help="one private run")
    sub.add_parser("baseline", parents=[common, base], help="noiseless reference allocation")
    c = sub.add_parser("compare", parents=[common, dp, base], help="baseline plus private runs over seeds")
    c.add_argument("--runs", type=int, default=1)
    c.add_argument("--csv", help="write per-seed SW ratios here")
    c.add_argument("--baseline-only", action="store_true")
    m = sub.add_parser("metrics", parents=[common], help="measure a given allocation")
    m.add_argument("--allocation", required=True, help="JSON list or report holding an allocation")
    m.add_argument("--reference", help="JSON list or report used for the statistical distance")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    kw = {k: v for k, v in vars(args).items() if k in fields}
    return RunConfig(**kw)


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"ppga: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not os.path.isfile(cfg.input):
        print(f"ppga: cannot read {cfg.input}", file=sys.stderr)
        return EXIT_INPUT
    try:
        inst = load_instance(cfg.input, cfg.sample, cfg.seed)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            if cfg.command == "solve":
                report = _solve(cfg, inst)
            elif cfg.command == "baseline":
                report = _baseline(cfg, inst)
            elif cfg.command == "compare":
                report = compare(cfg, inst)
            else:
                report = _metrics(cfg, inst)
    except (ParseError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"ppga: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrivacyBudgetError as exc:
        print(f"ppga: privacy budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SubsolverError as exc:
        print(f"ppga: aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ValueError, MetricsError) as exc:
        print(f"ppga: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(dumps(report), cfg.out)
    if cfg.command == "compare" and cfg.csv:
        Path(cfg.csv).write_text(sw_ratio_csv(report), encoding="utf-8")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
