"""trainloc CLI: train on synthetic scenes, export score maps."""
from __future__ import annotations

import argparse
import sys

from .infer import infer_export
from .model import HourglassSpec
from .train import TrainConfig, train


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(prog="trainloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the hourglass localizer on a scene dir")
    p.add_argument("--scenes", required=True, help="dir produced by `cedir synth`")
    p.add_argument("--out", required=True, help="run dir (checkpoint, manifest, loss curve)")
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--crop", type=int, default=TrainConfig.crop)
    p.add_argument("--lr", type=float, default=TrainConfig.lr)
    p.add_argument("--w-fg", type=float, default=TrainConfig.w_fg)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("infer", help="field CDF1 -> score map CDF1")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    if args.command == "train":
        config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                             crop=args.crop, lr=args.lr, w_fg=args.w_fg,
                             seed=args.seed)
        train(args.scenes, args.out, config, HourglassSpec())
    else:
        infer_export(args.checkpoint, args.infile, args.out)


if __name__ == "__main__":
    main()
    sys.exit(0)
