"""Side by side (p, q) comparison on one scenario and sample covariance.

Prints the worst-case objective, actual SINR, iteration count and stop
reason per pair, and optionally dumps the first restriction SOCP for one
pair as text.

    python scripts/compare_pq.py --snr 20 --dump "2,3/2" > restriction.txt
"""
import argparse
import sys

import numpy as np

from rabeam import bench
from rabeam.linalg import ExtRational, gram_factor
from rabeam.rab import build_restriction, initial_point, solve_sequential
from rabeam.scenario import build_covariances, optimal_sinr, sample_covariance, sinr

PAIRS = [(2, 1), (2, "3/2"), (2, 2), (2, 4), (2, "inf"), (1, 2), ("inf", 2), (4, "3/2")]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr", type=float, default=20.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eta-factor", type=float, default=0.05)
    ap.add_argument("--dump", help="p,q pair whose first restriction is printed")
    args = ap.parse_args()

    cfg = bench.ExperimentConfig(eta_factor=args.eta_factor)
    cov = build_covariances(cfg.scenario(args.snr))
    R_hat = sample_covariance(cov.R, cfg.snapshots, np.random.default_rng(args.seed))
    Q = gram_factor(cov.R_s_presumed)
    print(f"optimal SINR {10 * np.log10(optimal_sinr(cov.R_s, cov.R_ipn)):.2f} dB", file=sys.stderr)
    print(f"{'p':>4} {'q':>4} {'t*':>10} {'SINR dB':>8} {'iters':>5}  stop")
    for p, q in PAIRS:
        prob = bench.make_problem(cfg, R_hat, Q, p, q)
        w, t, trace = solve_sequential(prob)
        print(f"{str(ExtRational.of(p)):>4} {str(ExtRational.of(q)):>4} {t:10.5f} "
              f"{10 * np.log10(sinr(w, cov.R_s, cov.R_ipn)):8.2f} {len(trace.records) - 1:5d}  "
              f"{trace.stop_reason.value}")
    if args.dump:
        p, q = args.dump.split(",")
        prob = bench.make_problem(cfg, R_hat, Q, p, q)
        sys.stdout.write(build_restriction(prob, initial_point(prob)).program.dump())


if __name__ == "__main__":
    main()
