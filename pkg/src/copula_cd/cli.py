"""Command-line interface: ``copula-cd {synth|train|infer|eval|run}``.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numerical
divergence during training.
"""

import os
import sys

# honor the thread cap before any BLAS-backed import happens
_threads = os.environ.get("COPULA_CD_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _threads)

import argparse
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="copula-cd",
        description=(
            "Heterogeneous change detection: train a copula-constrained "
            "network on an unchanged region, score superpixel pairs by "
            "their learned dependence density, and cluster into a change map."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, checkpoint=False, eval_paths=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="pipeline config file")
        p.add_argument("--out", default=None, help="override the output directory")
        if checkpoint:
            p.add_argument("--checkpoint", default=None, help="model bundle path")
        if eval_paths:
            p.add_argument("--pred", default=None, help="override predicted mask path")
            p.add_argument("--truth", default=None, help="override truth mask path")
        return p

    add("synth", "generate a synthetic scene from the [synth] section")
    add("train", "segment, select training samples, fit marginals, train", checkpoint=True)
    add("infer", "produce a change map from a trained checkpoint", checkpoint=True)
    add("eval", "score a predicted mask against ground truth", eval_paths=True)
    add("run", "train, infer, and (with truth configured) eval", checkpoint=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    from dataclasses import replace

    from .config import load_config
    from .training import DivergenceError

    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg = replace(cfg, out_dir=Path(args.out))

        from . import pipeline

        if args.command == "synth":
            paths = pipeline.run_synth(cfg)
            print(f"wrote scene: {paths['pre']}, {paths['post']}, {paths['truth']}")
        elif args.command == "train":
            ckpt = Path(args.checkpoint) if args.checkpoint else None
            result = pipeline.run_train(cfg, checkpoint_path=ckpt)
            final = result.history[-1, -1] if len(result.history) else float("nan")
            print(
                f"trained on {result.n_training_pairs} superpixel pairs, "
                f"final loss {final:.6g}; checkpoint: {result.checkpoint_path}"
            )
        elif args.command == "infer":
            ckpt = args.checkpoint or cfg.out_dir / "model.ckpt"
            result = pipeline.run_infer(cfg, ckpt)
            changed = int(result.labels.sum())
            print(
                f"{changed}/{len(result.labels)} superpixels changed "
                f"({result.backend['backend']} backend); mask: {result.mask_path}"
            )
        elif args.command == "eval":
            pred = Path(args.pred) if args.pred else cfg.out_dir / "change_map.png"
            truth = Path(args.truth) if args.truth else cfg.truth_path
            if truth is None:
                raise ValueError("no truth mask: configure [paths] truth or pass --truth")
            rep = pipeline.run_eval(pred, truth, cfg.out_dir)
            print(
                f"oe={rep.oe} pcc={rep.pcc:.4f} kc={rep.kc:.4f}; "
                f"report: {cfg.out_dir / 'metrics.json'}"
            )
        elif args.command == "run":
            train_result, infer_result, rep = pipeline.run_all(cfg)
            print(f"checkpoint: {train_result.checkpoint_path}")
            print(f"mask: {infer_result.mask_path}")
            if rep is not None:
                print(f"oe={rep.oe} pcc={rep.pcc:.4f} kc={rep.kc:.4f}")
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
