"""Command-line entry point: ``elfd {train,evaluate,recognize,degrade,inspect,split}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..descriptors import KINDS
from ..imaging import degrade, load_pgm, parse_degradation, save_pgm
from ..recognition import compete, multiscale_recognize, recognize_single_scale
from .archive import read_bank
from .config import CONFIG_KEYS, ExperimentConfig, load_config
from .dataset import load_image, scan_dataset, split
from .diagnostics import inspect_image
from .experiment import _write_split, evaluate, train


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    for key in CONFIG_KEYS:
        p.add_argument(f"--{key}", dest=f"cfg_{key}", metavar="VALUE", help=f"override '{key}'")


def _config(args) -> ExperimentConfig:
    base = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {k: getattr(args, f"cfg_{k}") for k in CONFIG_KEYS if getattr(args, f"cfg_{k}") is not None}
    cfg = base.with_overrides(overrides)
    if not cfg.dataset:
        raise SystemExit("error: no dataset given (config key 'dataset' or --dataset)")
    return cfg


def _parse_target(text: str | None, kind: str):
    if text is None:
        return None
    idx = [int(v) - 1 for v in text.split(",")]
    if kind.startswith("e"):
        if len(idx) != 2:
            raise SystemExit("error: --target for elmd/elpd is 'P,C' (1-based frequencies)")
        return tuple(idx)
    if len(idx) != 1:
        raise SystemExit("error: --target for lmd/lpd is a single 1-based frequency")
    return idx[0]


def cmd_train(args) -> int:
    model = train(_config(args))
    print(f"model written to {model}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    table = evaluate(cfg, args.model)
    sys.stdout.write(table.to_text())
    print(f"results written to {cfg.output}")
    return 0


def cmd_split(args) -> int:
    cfg = _config(args)
    manifest = scan_dataset(cfg.dataset, cfg.resize)
    train_set, test_set = split(manifest, cfg.seed, cfg.n_train)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    _write_split(out / "split_train.txt", train_set, manifest.root)
    _write_split(out / "split_test.txt", test_set, manifest.root)
    print(f"{len(train_set)} training / {len(test_set)} test images -> {out}")
    return 0


def cmd_recognize(args) -> int:
    bank = read_bank(Path(args.model) / args.kind)
    resize = None
    if args.resize:
        h, _, w = args.resize.partition("x")
        resize = (int(h), int(w))
    image = load_image(args.image, resize)
    if args.mode == "single":
        result = compete([recognize_single_scale(bank, args.single_scale, image)])
    else:
        result = multiscale_recognize(bank, image)
    print(f"identity={bank.class_names[result.identity]} scale={result.winning_scale} "
          f"confidence={result.confidence:.6f}")
    for r in result.per_scale:
        print(f"  scale {r.scale:3d}  top={bank.class_names[r.class_id]}  confidence={r.confidence:.6f}"
              + ("  (degenerate)" if r.degenerate else ""))
    return 0


def cmd_degrade(args) -> int:
    spec = parse_degradation(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for path in args.images:
        img = load_pgm(path)
        save_pgm(img if spec is None else degrade(img, spec), out / Path(path).name)
    print(f"{len(args.images)} image(s) written to {out}")
    return 0


def cmd_inspect(args) -> int:
    image = load_pgm(args.image)
    bank = read_bank(Path(args.model) / args.kind) if args.model else None
    written = inspect_image(image, args.scale, args.kind, args.out, _parse_target(args.target, args.kind),
                            args.planes, bank)
    print(f"{len(written)} file(s) written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elfd", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn merge maps and dictionaries, write the model archive")
    _add_config_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="run the degradation protocol and write result tables")
    _add_config_args(p)
    p.add_argument("--model", help="model directory (default: <output>/model)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("split", help="write the seeded train/test lists")
    _add_config_args(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("recognize", help="identify a single probe image")
    p.add_argument("image")
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=KINDS, default="elmd")
    p.add_argument("--mode", choices=("single", "competition"), default="competition")
    p.add_argument("--single-scale", type=int, default=11)
    p.add_argument("--resize", help="HxW, as used at training time")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("degrade", help="apply a degradation to PGM files")
    p.add_argument("images", nargs="+")
    p.add_argument("--spec", required=True,
                   help="lowres:F | gaussian:SIGMA:SIZE | motion:LEN:ANGLE | kernel:PATH | none")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("inspect", help="dump label images, histograms and confidences")
    p.add_argument("image")
    p.add_argument("--scale", type=int, default=11)
    p.add_argument("--kind", choices=KINDS, default="elmd")
    p.add_argument("--target", help="1-based frequency (lmd/lpd) or 'P,C' pair (elmd/elpd)")
    p.add_argument("--planes", action="store_true", help="also write magnitude/phase planes")
    p.add_argument("--model", help="model directory for a per-scale confidence CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
