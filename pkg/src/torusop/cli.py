"""Command line: ``torusop {classify,norms,orbit,invert,recover} --config FILE``.

Exit codes: 0 pass, 1 fail, 2 inconclusive or finding, 3 usage or config error.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import __version__
from .catalog import CatalogError
from .commands import COMMANDS
from .config import ConfigError, ExperimentConfig, load_config
from .dsl import SpecEvaluationError, SpecSyntaxError
from .fourier import FourierError
from .lbeta import LBetaError
from .orbit import OrbitError
from .quantize import QuantizeError
from .report import atomic_write, dumps, sidecar
from .symbols import SymbolError

EXIT_USAGE = 3
_SETUP_ERRORS = (ConfigError, CatalogError, SpecSyntaxError, SpecEvaluationError, FourierError,
                 SymbolError, QuantizeError, OrbitError, LBetaError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits: {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="torusop", description="Discrete-symbol operator experiments on the torus.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "classify": "order-zero test and symbol/orbit analyticity verdicts",
        "norms": "truncated norm against the C_p lattice bound",
        "orbit": "orbit identity, finite-difference orders, Taylor remainders",
        "invert": "invert lam I + eps Op(a) and classify the inverse symbol",
        "recover": "B^beta recovery pipeline, bound chain and mu constant",
    }
    for name, text in helps.items():
        c = sub.add_parser(name, help=text, description=text)
        c.add_argument("--config", required=True, type=Path, help="TOML config (or a JSON report to re-run)")
        c.add_argument("--seed", type=_u64, help="override experiment.seed")
        c.add_argument("--out", type=Path, help="output directory (default: output.dir)")
        c.add_argument("--strict", action="store_true",
                       help="inconclusive or finding exits 1; warnings become errors")
        fmt = c.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="write only the JSON report")
        fmt.add_argument("--csv", action="store_true", help="write only the CSV tables")
    return p


def run(cfg: ExperimentConfig, command: str, out_dir: Path, write_json=True, write_csv=True,
        argv=()):
    """Execute one command and write its outputs; returns (envelope, written paths)."""
    result = COMMANDS[command](cfg)
    env = result.envelope
    written = {}
    if write_json:
        path = out_dir / f"{command}.json"
        atomic_write(path, dumps(env))
        meta = out_dir / f"{command}.meta.json"
        atomic_write(meta, dumps(sidecar(argv)))
        written["json"], written["meta"] = path, meta
    if write_csv:
        for name, text in result.tables.items():
            path = out_dir / f"{command}_{name}.csv"
            atomic_write(path, text)
            written[name] = path
    return env, written


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.replace("experiment", seed=args.seed)
        out_dir = args.out if args.out is not None else Path(cfg.output.dir)
        with warnings.catch_warnings():
            if args.strict:
                warnings.simplefilter("error")
            env, written = run(cfg, args.command, out_dir, not args.csv, not args.json, argv)
    except _SETUP_ERRORS as exc:
        print(f"torusop {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code = env.exit_code
    if args.strict and code == 2:
        code = 1
    for kind, path in written.items():
        print(f"wrote {kind}: {path}")
    print(f"{args.command}: {env.status}")
    return code


if __name__ == "__main__":
    sys.exit(main())
