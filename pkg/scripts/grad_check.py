"""Finite-difference gradient check of the full tagger on a tiny model, over several seeds."""
import argparse
import time

from evt.training import TINY_CONFIG, grad_check, tiny_problem


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--h", type=float, default=1e-5)
    args = ap.parse_args()
    model, _, _ = tiny_problem(TINY_CONFIG, 0)
    print(f"{model.n_parameters} parameters")
    worst = 0.0
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        err = grad_check(TINY_CONFIG, seed=seed, h=args.h)
        worst = max(worst, err)
        print(f"seed {seed}: max relative error {err:.3e} ({time.perf_counter() - t0:.1f}s)")
    print(f"worst {worst:.3e} -> {'ok' if worst <= 1e-4 else 'FAIL'}")


if __name__ == "__main__":
    main()
