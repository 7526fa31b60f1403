"""Command line interface.

Subcommands:
  check    parse and compile a constraint spec, print per-position counts
  sample   run a chain against a provider, one detokenized emission per line
  oracle   dump the exact target distribution of a tabular provider
  report   render figures + TSV trace from a run log
  serve    host the session service over HTTP

Exit codes: 0 ok, 1 I/O, 2 infeasible/parse, 3 provider failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .constraints import compile_masks, parse_constraint_spec
from .errors import (
    BadPositionError,
    BadTokenIdError,
    BadTransitionError,
    ConflictingPinsError,
    EmptyMaskError,
    InfeasibleError,
    LengthChangedError,
    LengthMismatchError,
    NoFreePositionsError,
    ProviderFailureError,
    SpecParseError,
    TooLargeError,
    UnknownTokenError,
    UntokenizableError,
    VersecraftError,
)
from .providers import TabularModel
from .registry import ProviderRegistry, provider_from_selector
from .runlog import RunLogWriter, SampleRecord
from .sampler import (
    ALL_MASK,
    SamplerConfig,
    exact_target_distribution,
    init_chain,
    run,
)
from .vocabulary import detokenize, load_vocabulary

EXIT_OK = 0
EXIT_IO = 1
EXIT_SPEC = 2
EXIT_PROVIDER = 3

_SPEC_ERRORS = (
    SpecParseError,
    InfeasibleError,
    ConflictingPinsError,
    BadPositionError,
    BadTokenIdError,
    UnknownTokenError,
    UntokenizableError,
    LengthMismatchError,
    LengthChangedError,
    EmptyMaskError,
    NoFreePositionsError,
    TooLargeError,
    BadTransitionError,
)


def _fail(exc: Exception) -> int:
    if isinstance(exc, ProviderFailureError):
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    if isinstance(exc, _SPEC_ERRORS):
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if isinstance(exc, OSError):
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    if isinstance(exc, (VersecraftError, ValueError)):
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    raise exc


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _config_from_args(args) -> SamplerConfig:
    return SamplerConfig(
        proposal_temperature=args.temperature,
        target_temperature=args.target_temperature,
        burn_in=args.burn_in,
        thinning=args.thinning,
        max_steps=args.max_steps,
        rng_seed=args.seed,
    )


def _add_sampler_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="rng seed (default 0)")
    parser.add_argument("--burn-in", type=int, default=0)
    parser.add_argument("--thinning", type=int, default=1)
    parser.add_argument("--max-steps", type=int, default=None)
    parser.add_argument("--temperature", type=float, default=1.0, help="proposal temperature")
    parser.add_argument("--target-temperature", type=float, default=1.0)


def cmd_check(args) -> int:
    try:
        vocab = load_vocabulary(args.vocab)
        cs = parse_constraint_spec(_read(args.spec), vocab)
        masks = compile_masks(cs, vocab)
    except Exception as exc:
        return _fail(exc)
    print(f"length {cs.length}, vocabulary {len(vocab)} tokens")
    print("position  allowed  pinned")
    for p, count in enumerate(masks.allowed_counts()):
        pin = "yes" if p in masks.pinned else ""
        print(f"{p:>8}  {count:>7}  {pin}")
    print("feasible")
    return EXIT_OK


def cmd_sample(args) -> int:
    provider = None
    log = None
    try:
        provider = provider_from_selector(args.provider, args.vocab)
        vocab = provider.vocabulary
        cs = parse_constraint_spec(_read(args.spec), vocab)
        masks = compile_masks(cs, vocab)
        cfg = _config_from_args(args)
        if args.log:
            log = RunLogWriter(args.log)
        state = init_chain(ALL_MASK, masks, provider, cfg)
        for emission in run(state, masks, provider, cfg):
            print(detokenize(emission.seq))
            if log:
                log.append(
                    SampleRecord(
                        step=emission.step,
                        energy=emission.energy,
                        accept_rate=emission.accept_rate,
                        ids=emission.seq.ids,
                    )
                )
    except Exception as exc:
        return _fail(exc)
    finally:
        if log:
            log.close()
        if hasattr(provider, "close"):
            provider.close()
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        provider = provider_from_selector(args.provider, args.vocab)
        if not isinstance(provider, TabularModel):
            raise ProviderFailureError("oracle needs a tabular provider")
        cs = parse_constraint_spec(_read(args.spec), provider.vocabulary)
        masks = compile_masks(cs, provider.vocabulary)
        cfg = SamplerConfig(target_temperature=args.target_temperature)
        dist = exact_target_distribution(provider, masks, cfg)
    except Exception as exc:
        return _fail(exc)
    for ids, prob in sorted(dist.items(), key=lambda kv: (-kv[1], kv[0])):
        print(" ".join(str(i) for i in ids), f"{prob:.12e}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .report import write_report

    try:
        paths = write_report(args.log, args.out)
    except Exception as exc:
        return _fail(exc)
    for p in paths:
        print(p)
    return EXIT_OK


def _parse_registry_flags(args) -> ProviderRegistry:
    registry = ProviderRegistry()
    for item in args.tabular or []:
        name, _, rest = item.partition("=")
        vocab_path, _, table_path = rest.partition(":")
        if not (name and vocab_path and table_path):
            raise ValueError(f"--tabular wants NAME=VOCAB:TABLE, got {item!r}")
        registry.register_tabular(name, vocab_path, table_path)
    for item in args.bridge or []:
        name, _, command = item.partition("=")
        if not (name and command):
            raise ValueError(f"--bridge wants NAME=COMMAND, got {item!r}")
        registry.register_bridge(name, command)
    return registry


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        registry = _parse_registry_flags(args)
        host, _, port = args.listen.rpartition(":")
        app = create_app(
            registry, args.log_dir, step_delay=args.step_delay, static_dir=args.static
        )
    except Exception as exc:
        return _fail(exc)
    uvicorn.run(
        app,
        host=host or "127.0.0.1",
        port=int(port),
        log_level="warning",
        timeout_graceful_shutdown=5,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="versecraft",
        description="Constrained composition by Metropolis-Hastings sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="compile a constraint spec and report feasibility")
    p.add_argument("--spec", required=True)
    p.add_argument("--vocab", required=True)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("sample", help="run a chain, print one emission per line")
    p.add_argument("--spec", required=True)
    p.add_argument("--vocab", help="vocabulary file (tabular providers)")
    p.add_argument("--provider", required=True, help="tabular:<path> | bridge:<command>")
    p.add_argument("--log", help="also append run-log records to this file")
    _add_sampler_flags(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("oracle", help="dump the exact target distribution (tabular only)")
    p.add_argument("--spec", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--provider", required=True, help="tabular:<path>")
    p.add_argument("--target-temperature", type=float, default=1.0)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("report", help="render figures and a TSV trace from a run log")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("serve", help="host the composition session service")
    p.add_argument(
        "--listen",
        default=os.environ.get("VERSECRAFT_LISTEN", "127.0.0.1:8465"),
        help="host:port (env VERSECRAFT_LISTEN)",
    )
    p.add_argument(
        "--log-dir",
        default=os.environ.get("VERSECRAFT_LOG_DIR", "run-logs"),
        help="session run-log directory (env VERSECRAFT_LOG_DIR)",
    )
    p.add_argument("--tabular", action="append", metavar="NAME=VOCAB:TABLE")
    p.add_argument("--bridge", action="append", metavar="NAME=COMMAND")
    p.add_argument("--step-delay", type=float, default=0.0, help="seconds between steps while running")
    p.add_argument("--static", help="serve this directory (operator console) at /")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
