"""Mean test macro F1 of MBC-8FG, TBC-2 and MMC-8FG over several seeds (desk scale).

    python3 scripts/directional_benchmark.py --seeds 0 1 2
"""

import argparse
import time

import torch

from mmhar.experiments import BEST_MODELS, mean_f1, run_seed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--participants", type=int, default=1)
    args = ap.parse_args()
    torch.set_num_threads(1)
    runs = []
    for seed in args.seeds:
        t0 = time.perf_counter()
        run = run_seed(seed, participants=args.participants)
        runs.append(run)
        cells = "  ".join(f"{m}={run.f1[m]:.3f}" for m in BEST_MODELS)
        print(f"seed {seed}: {cells}  ({time.perf_counter() - t0:.0f} s)")
    means = mean_f1(runs)
    print("mean:   " + "  ".join(f"{m}={means[m]:.3f}" for m in BEST_MODELS))
    margin = means["MMC-8FG"] - max(means["MBC-8FG"], means["TBC-2"])
    print(f"MMC minus best single modality: {margin:+.3f}")


if __name__ == "__main__":
    main()
