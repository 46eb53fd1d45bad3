"""Command line entry point: ``dmnet <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import TYPE_CHECKING

from .audio import read_wav
from .config import ProjectConfig, dump_config, load_config
from .core import Split, Variant
from .errors import EXIT_OK, ConfigurationError, DMNetError, VerificationError
from .metrics.report import evaluate
from .model.config import ModelConfig
from .model.inference import Restorer
from .model.network import count_parameters
from .plotting import plot_spectrograms
from .runtime import configure_runtime
from .simulation.corpus import CorpusBuilder, CorpusRequest
from .simulation.verify import verify_corpus
from .training.trainer import train

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s | %(levelname)-7s | %(name)s | %(message)s"
VERIFICATION_NAME = "verification.jsonl"
VARIANT_CHOICES = [v.value for v in Variant]


def _plain(value: object) -> object:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, list):
        return [_plain(v) for v in value]
    return value


def _command(args: argparse.Namespace) -> dict[str, object]:
    """The invocation's arguments as plain values, for the resolved document."""
    return {key: _plain(value) for key, value in sorted(vars(args).items()) if key != "handler"}


def _resolve_paths(args: argparse.Namespace) -> None:
    """Anchor every relative path argument at `--workdir`."""
    root = args.workdir
    for key, value in list(vars(args).items()):
        if key == "workdir":
            continue
        if isinstance(value, Path):
            setattr(args, key, root / value)
        elif isinstance(value, list) and all(isinstance(v, Path) for v in value):
            setattr(args, key, [root / v for v in value])


def _simulate(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    cfg = cfg.override("simulate", count=args.count, seed=args.seed, workers=args.workers)
    dump_config(cfg, args.out, _command(args))
    result = CorpusBuilder().build(
        CorpusRequest(
            clean_manifest=args.clean,
            noise_manifest=args.noise,
            out_dir=args.out,
            config=cfg.simulate,
        ),
    )
    print(f"{len(result.entries)} pairs in {result.manifest_path}")
    if not args.verify:
        return EXIT_OK

    reports = verify_corpus(result.manifest_path)
    path = args.out / VERIFICATION_NAME
    path.write_text("".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports), encoding="utf-8")
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"FAIL {r.id}: {', '.join(r.failures())}")
    if failed:
        names = ", ".join(r.id for r in failed)
        msg = f"{len(failed)} of {len(reports)} pairs failed verification: {names}"
        raise VerificationError(msg)
    print(f"all {len(reports)} pairs passed verification, report in {path}")
    return EXIT_OK


def _train(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    cfg = cfg.override("train", steps=args.steps, seed=args.seed)
    if args.variant is not None:
        cfg = cfg.override("model", variant=Variant(args.variant))
    dump_config(cfg, args.out, _command(args))
    result = train(cfg.model, cfg.train, args.manifest, args.out, resume=args.resume)
    print(f"{result.steps} steps, final checkpoint {result.final_checkpoint}")
    if result.alpha_trajectory:
        print(f"alpha {result.alpha_trajectory[-1][1]:.4f}")
    return EXIT_OK


def _restore(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    dtype = configure_runtime()
    restorer = Restorer.from_checkpoint(args.checkpoint, dtype=dtype)
    cfg = replace(cfg, stft=restorer.cfg.stft, model=restorer.cfg)
    source, out = args.input, args.out
    if source.is_dir():
        dump_config(cfg, out, _command(args))
        written = restorer.restore_dir(source, out)
    else:
        dump_config(cfg, out.parent, _command(args))
        written = [restorer.restore_file(source, out)]
    print(f"restored {len(written)} files")
    return EXIT_OK


def _evaluate(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    if args.split is not None:
        cfg = cfg.override("evaluate", split=Split(args.split))
    dump_config(cfg, args.out, _command(args))
    restored = None if args.noisy else args.restored
    report = evaluate(args.manifest, restored, args.external, cfg.evaluate)
    report.write(args.out, stem=report.label)
    print(report.summary_text(), end="")
    return EXIT_OK


def _plot(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    labels = args.labels or [p.stem for p in args.inputs]
    if len(labels) != len(args.inputs):
        msg = f"got {len(labels)} labels for {len(args.inputs)} inputs"
        raise ConfigurationError(msg)
    out = args.out
    dump_config(cfg, out.parent, _command(args))
    panels = {label: read_wav(path) for label, path in zip(labels, args.inputs, strict=True)}
    plot_spectrograms(panels, out)
    print(f"wrote {out}")
    return EXIT_OK


def _params(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    variants = [Variant(args.variant)] if args.variant else list(Variant)
    base: ModelConfig = cfg.model
    for variant in variants:
        n = count_parameters(base.with_variant(variant))
        print(f"{variant.value:>4} {n:>10d} ({n / 1e6:.2f} M)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per run type."""
    parser = argparse.ArgumentParser(prog="dmnet", description=__doc__)
    parser.add_argument("--config", type=Path, help="YAML configuration document")
    parser.add_argument("--workdir", type=Path, default=Path(), help="base directory for relative paths")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="build a paired corpus")
    simulate.add_argument("--clean", required=True, type=Path, help="directory or list file of clean speech")
    simulate.add_argument("--noise", required=True, type=Path, help="directory or list file of noise recordings")
    simulate.add_argument("--out", required=True, type=Path)
    simulate.add_argument("--count", type=int)
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--workers", type=int)
    simulate.add_argument("--verify", action="store_true", help="check every pair against its distortion spec")
    simulate.set_defaults(handler=_simulate)

    training = commands.add_parser("train", help="train a network on a corpus")
    training.add_argument("--manifest", required=True, type=Path)
    training.add_argument("--out", required=True, type=Path, help="run directory for logs and checkpoints")
    training.add_argument("--variant", choices=VARIANT_CHOICES)
    training.add_argument("--steps", type=int)
    training.add_argument("--seed", type=int)
    training.add_argument("--resume", type=Path, help="checkpoint to continue from")
    training.set_defaults(handler=_train)

    restore = commands.add_parser("restore", help="restore a WAV file or a directory of them")
    restore.add_argument("--checkpoint", required=True, type=Path)
    restore.add_argument("--input", required=True, type=Path)
    restore.add_argument("--out", required=True, type=Path)
    restore.set_defaults(handler=_restore)

    evaluation = commands.add_parser("evaluate", help="score restored files against a corpus")
    evaluation.add_argument("--manifest", required=True, type=Path)
    evaluation.add_argument("--restored", type=Path, help="directory of restored files named <id>.wav")
    evaluation.add_argument("--noisy", action="store_true", help="score the degraded files themselves")
    evaluation.add_argument("--external", type=Path, help="JSONL of externally computed scores")
    evaluation.add_argument("--split", choices=[s.value for s in Split])
    evaluation.add_argument("--out", required=True, type=Path)
    evaluation.set_defaults(handler=_evaluate)

    plot = commands.add_parser("plot", help="draw spectrograms side by side")
    plot.add_argument("inputs", nargs="+", type=Path)
    plot.add_argument("--labels", nargs="+")
    plot.add_argument("--out", required=True, type=Path)
    plot.set_defaults(handler=_plot)

    params = commands.add_parser("params", help="count trainable parameters")
    params.add_argument("--variant", choices=VARIANT_CHOICES)
    params.set_defaults(handler=_params)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run a command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, force=True)
    if args.command == "evaluate" and not args.noisy and args.restored is None:
        parser.error("evaluate needs --restored or --noisy")
    _resolve_paths(args)
    try:
        cfg = load_config(args.config)
        return int(args.handler(args, cfg))
    except DMNetError as e:
        logger.error("%s: %s", type(e).__name__, e)  # noqa: TRY400
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
