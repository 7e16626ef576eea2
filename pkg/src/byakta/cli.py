"""Command-line entry point: byakta {synth,bench,normalize,train-toy,gradcheck}."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ByaktaError, EmptyAfterNormalization

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; we reserve 2 for runtime errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _key_value(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value config file (default: $BYAKTA_CONFIG)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--set", dest="overrides", type=_key_value, action="append", default=[],
                   metavar="KEY=VALUE", help="override one config key; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="byakta", description="Bangla/English text-to-speech toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="synthesize text to a WAV file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--text")
    src.add_argument("--input-file", type=Path)
    p.add_argument("--out", type=Path, required=True)
    _config_args(p)

    p = sub.add_parser("bench", help="synthesize every sentence of a benchmark list")
    p.add_argument("--list", dest="list_path", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    _config_args(p)

    p = sub.add_parser("normalize", help="normalize text from stdin to stdout, line by line")
    p.add_argument("--lexicon", type=Path)
    p.add_argument("--vocab", type=Path)

    p = sub.add_parser("train-toy", help="overfit the toy corpus and save weights plus a config")
    p.add_argument("--out-weights", type=Path, required=True)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--ssrn-steps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    sub.add_parser("gradcheck", help="finite-difference check of every differentiable kernel")
    return parser


def _load_config(args):
    from .pipeline import PipelineConfig

    cfg = PipelineConfig.load(args.config)
    overrides = dict(args.overrides)
    if args.seed is not None:
        overrides["seed"] = args.seed
    return cfg.updated(**overrides) if overrides else cfg


def _report(report) -> str:
    return (f"segments={report.segments} frames={list(report.frames)} dropped={report.dropped} "
            f"max_frames_reached={report.max_frames_reached}")


def cmd_synth(args) -> int:
    from .dsp import write_wav
    from .pipeline import synthesize

    text = args.text if args.text is not None else args.input_file.read_text(encoding="utf-8")
    audio, report = synthesize(text, _load_config(args))
    write_wav(audio, args.out)
    print(f"{args.out}: {audio.duration:.3f} s, {_report(report)}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .pipeline import REPORT_NAME, load_benchmark, run_benchmark

    bench = load_benchmark(args.list_path)
    rows = run_benchmark(bench, _load_config(args), args.out_dir)
    failed = sum(r.status != "ok" for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} sentences synthesized; report in {args.out_dir / REPORT_NAME}",
          file=sys.stderr)
    return EXIT_OK


def cmd_normalize(args) -> int:
    from .text import NumeralLexicon, Vocabulary, normalize_text

    vocab = Vocabulary.from_file(args.vocab) if args.vocab else Vocabulary.default()
    lexicon = NumeralLexicon.from_file(args.lexicon) if args.lexicon else NumeralLexicon.default()
    for line in sys.stdin:
        line = line.rstrip("\n")
        try:
            print(normalize_text(line, vocab, lexicon).text)
        except EmptyAfterNormalization:
            print()
    return EXIT_OK


def cmd_train_toy(args) -> int:
    from .models.experiments import train_toy
    from .pipeline import PipelineConfig, save_weights

    ck = train_toy(args.steps, args.ssrn_steps, args.seed)
    args.out_weights.parent.mkdir(parents=True, exist_ok=True)
    save_weights(ck.combined(), args.out_weights)
    cfg = PipelineConfig(text2mel_weights=args.out_weights, ssrn_weights=args.out_weights, seed=args.seed)
    # paths in the config are relative to the config file
    text = cfg.dump().replace(str(args.out_weights), args.out_weights.name)
    cfg_path = args.out_weights.with_suffix(".cfg")
    cfg_path.write_text(text, encoding="utf-8")
    print(f"text2mel loss {ck.text2mel_loss:.4f}, attention diagonality {ck.diagonality:.3f}; "
          f"ssrn loss {ck.ssrn_start:.4f} -> {ck.ssrn_loss:.4f}", file=sys.stderr)
    print(f"wrote {args.out_weights} and {cfg_path}", file=sys.stderr)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .verify import TOLERANCE, run_kernel_checks

    checks = run_kernel_checks()
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'} {c.name:24s} max rel err {c.error:.3e}")
    bad = [c.name for c in checks if not c.ok]
    if bad:
        print(f"{len(bad)} kernels exceed {TOLERANCE:g}: {', '.join(bad)}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "bench": cmd_bench, "normalize": cmd_normalize, "train-toy": cmd_train_toy,
            "gradcheck": cmd_gradcheck}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ByaktaError, OSError) as exc:
        print(f"byakta {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
