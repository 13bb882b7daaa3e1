"""Desk-scale comparison of the private mechanism against the noiseless core.

Subsamples the bundled election, solves the baseline once, then runs the
private mechanism over several seeds for each penalty value and prints
median statistics. With --horizon it also tracks the noiseless time average
over longer runs, which separates the averaging transient from the noise.
"""

import argparse
import time
from importlib import resources

import numpy as np

from ppga.admm import AdmmConfig, BaselineConfig, ConsensusProblem, run, run_noiseless, solve_consensus
from ppga.geometry import project_rows
from ppga.ingest import load_instance
from ppga.metrics import proportionality, social_welfare, statistical_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", default=str(resources.files("ppga") / "data" / "desk.pb"))
    ap.add_argument("--sample", type=int, default=10_000)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--rho", type=float, nargs="+", default=[1.0, 10.0, 30.0, 100.0])
    ap.add_argument("--horizon", type=int, nargs="*", default=[])
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    inst = load_instance(args.input, sample=args.sample, seed=0)
    t0 = time.perf_counter()
    core = run_noiseless(inst, BaselineConfig(threads=args.threads))
    zstar = core.allocation
    sw_core = social_welfare(inst, zstar)
    print(f"n={inst.n} m={inst.m} baseline: {core.iterations} iterations, converged={core.converged}, "
          f"{time.perf_counter() - t0:.0f}s, SW={sw_core:.5f}, min PS x n={proportionality(inst, zstar)[0]:.1f}")

    print(f"{'rho':>8} {'SD/m':>10} {'SW ratio':>9} {'PSxn':>8} {'sum z':>7} {'sec/run':>8}")
    for rho in args.rho:
        stats = []
        t0 = time.perf_counter()
        for seed in range(args.seeds):
            z = run(inst, "auto", AdmmConfig(rho=rho, seed=seed, threads=args.threads)).allocation
            stats.append((statistical_distance(z, zstar), social_welfare(inst, z) / sw_core,
                          proportionality(inst, z)[0], z.sum()))
        med = np.median(np.array(stats), axis=0)
        per = (time.perf_counter() - t0) / args.seeds
        print(f"{rho:8g} {med[0]:10.2e} {med[1]:9.3f} {med[2]:8.2f} {med[3]:7.3f} {per:8.1f}")

    if args.horizon:
        prob = ConsensusProblem.from_instance(inst)
        marks = set(args.horizon)
        for rho in args.rho:
            def show(state, rec, rho=rho):
                if state.k in marks:
                    zbar = project_rows((state.z_accum / state.k)[None, :], prob.bounds)[0][0]
                    print(f"noiseless rho={rho:g} K={state.k}: SD/m {statistical_distance(zbar, zstar):.2e}, "
                          f"SW ratio {social_welfare(inst, zbar) / sw_core:.3f}")
            solve_consensus(inst, max(marks), 0.0, AdmmConfig(rho=rho, threads=args.threads), problem=prob, callback=show)


if __name__ == "__main__":
    main()
