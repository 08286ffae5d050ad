"""Single-window inference latency of untrained models at paper or desk scale."""

import argparse

from mmhar.core import resolve_modalities
from mmhar.harness import benchmark_latency
from mmhar.models import Presets, build_model

DEFAULT = "MBC-8FG,TBC-1top,TBC-1bot,TBC-2,MMC-8FG"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", choices=["paper", "desk"], default="paper")
    ap.add_argument("--modality", default=DEFAULT, help="comma list or all17")
    ap.add_argument("--repetitions", type=int, default=30)
    args = ap.parse_args()
    presets = Presets.named(args.preset)
    models = [build_model(m, presets) for m in resolve_modalities(args.modality)]
    print(f"{'modality':10s} {'mean ms':>9s} {'std ms':>8s} {'ratio':>7s} {'Hz':>8s}")
    for r in benchmark_latency(models, repetitions=args.repetitions):
        print(f"{r.name:10s} {r.mean_ms:9.2f} {r.std_ms:8.2f} {r.ratio:7.2f} {r.hz:8.1f}")


if __name__ == "__main__":
    main()
