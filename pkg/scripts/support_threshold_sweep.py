"""Sweep the relative support threshold (and lambda scale) of the relay diagnoser.

Prints the exact-support success rate for complete and partial blockages at
each operating point; the default threshold is the one that maximizes the
worst-case success across the grid.

    python scripts/support_threshold_sweep.py --trials 200
"""

import argparse
import dataclasses

import numpy as np

from relaycs.experiments import SolverParams, preset, run_fig1


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--faults", type=int, default=8)
    parser.add_argument("--rho", type=float, nargs="+", default=[0.02, 0.05, 0.1, 0.2, 0.3, 0.4])
    parser.add_argument("--lam-scale", type=float, nargs="+", default=[1.0])
    parser.add_argument("--m-bs", type=int, nargs="+", default=[24, 32, 40, 48, 56, 64])
    args = parser.parse_args()

    base = preset("fig1_diagnosis")
    print("lam_scale rho  " + " ".join(f"{k[:4]}@{m:<3d}" for k in ("complete", "partial") for m in args.m_bs))
    for scale in args.lam_scale:
        for rho in args.rho:
            config = dataclasses.replace(
                base,
                trials=args.trials,
                faults=[args.faults],
                m_bs=args.m_bs,
                relay_solver=SolverParams(lam_scale=scale, support_rho=rho),
            )
            rates = [row["success_rate"] for row in run_fig1(config).summary.rows]
            print(f"{scale:9.2f} {rho:4.2f} " + " ".join(f"{r:8.3f}" for r in rates), f" min-mean={np.mean(rates):.3f}")


if __name__ == "__main__":
    main()
