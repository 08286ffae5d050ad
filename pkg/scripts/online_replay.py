"""Train the three best modalities on one seed, then replay a continuous sequence online.

Prints frame accuracy per model with and without membrane relaxation.
"""

import argparse

import torch

from mmhar.experiments import BEST_MODELS, online_accuracy, run_seed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--action-duration", type=float, default=4.0)
    ap.add_argument("--pause-duration", type=float, default=2.0)
    args = ap.parse_args()
    torch.set_num_threads(1)
    run = run_seed(args.seed)
    print("offline test F1: " + "  ".join(f"{m}={run.f1[m]:.3f}" for m in BEST_MODELS))
    for relax in (True, False):
        acc = online_accuracy(run.checkpoints, args.seed, action_duration=args.action_duration,
                              pause_duration=args.pause_duration, relaxation=relax)
        print(f"relaxation={relax!s:5s} " + "  ".join(f"{m}={acc[m]:.3f}" for m in BEST_MODELS))


if __name__ == "__main__":
    main()
