import argparse
import logging
import sys

from rich.console import Console

from kernel_lib.commands import (
    Cert, Check, Coherence, Command, CommandRunner, Eq, Eval, Fuzz, Norm, Settings,
)
from kernel_lib.models import DEFAULT_CAP
from kernel_lib.rewrite import DEFAULT_FUEL
from kernel_lib.syntax import Signature, SignatureError


class Kernel:
    def __init__(self, settings: Settings, log_level, console: Console | None = None) -> None:
        """Kernel front end over the given settings.
        Logger is configured as a stdout logger at the given level."""

        # Logging
        ch = logging.StreamHandler()
        ch.setLevel(log_level)
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        ch.setFormatter(formatter)
        self.logger = logging.getLogger('TYPE-KERNEL')
        self.logger.setLevel(log_level)
        self.logger.addHandler(ch)

        # Reports go to a plain, fixed-width console
        self.console = console or Console(color_system=None, width=100, highlight=False)
        self.runner = CommandRunner(self.logger, settings, self.console)

    def run(self, cmd: Command) -> int:
        self.logger.debug(f"Settings: {self.runner.settings}")
        return self.runner.run(cmd)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Checker, normalizer and certificate tool for a small dependent type theory")
    parser.add_argument("--sig", default="x=1;y=1", help="Signature as x=<n>;y=<k0>,<k1>,...: Default x=1;y=1")
    parser.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help=f"Machine step limit: Default {DEFAULT_FUEL}")
    parser.add_argument("--cap", type=int, default=DEFAULT_CAP, help=f"Model enumeration cap: Default {DEFAULT_CAP}")
    parser.add_argument("--loglevel", help="Log verbosity level: Default INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="Check a context, substitution, type or term")
    check.add_argument("file")

    norm = sub.add_parser("norm", help="Normalize a type and certify the result")
    norm.add_argument("file")
    norm.add_argument("--out", help="Write the completeness certificate here")

    eq = sub.add_parser("eq", help="Decide equality of two types or two terms")
    eq.add_argument("file_a")
    eq.add_argument("file_b")
    eq.add_argument("--cert", help="Write a conversion certificate here")

    evaluate = sub.add_parser("eval", help="Tabulate an expression in the finite-set model")
    evaluate.add_argument("file")

    cert = sub.add_parser("cert", help="Replay a certificate")
    cert.add_argument("file")

    coherence = sub.add_parser("coherence", help="Check a coherence diagram on random bindings")
    coherence.add_argument("diagram", help="Diagram id, or all")
    coherence.add_argument("--seed", type=int, default=0)
    coherence.add_argument("--count", type=int, default=10)
    coherence.add_argument("--report", help="Write a JSON summary here")

    fuzz = sub.add_parser("fuzz", help="Check normalization properties on random types")
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--count", type=int, default=100)
    fuzz.add_argument("--size", type=int, default=8)
    fuzz.add_argument("--report", help="Write a JSON summary here")
    return parser


def command_from(args: argparse.Namespace) -> Command:
    match args.command:
        case "check":
            return Check(args.file)
        case "norm":
            return Norm(args.file, args.out)
        case "eq":
            return Eq(args.file_a, args.file_b, args.cert)
        case "eval":
            return Eval(args.file)
        case "cert":
            return Cert(args.file)
        case "coherence":
            return Coherence(args.diagram, args.seed, args.count, args.report)
    return Fuzz(args.seed, args.count, args.size, args.report)


if __name__ == '__main__':
    parser = build_parser()
    args = parser.parse_args()
    loglevel = logging.INFO
    if args.loglevel == "DEBUG":
        loglevel = logging.DEBUG
    elif args.loglevel == "WARNING":
        loglevel = logging.WARNING
    elif args.loglevel == "ERROR":
        loglevel = logging.ERROR
    try:
        settings = Settings(Signature.parse(args.sig), args.fuel, args.cap)
    except SignatureError as e:
        parser.error(str(e))
    kernel = Kernel(settings, loglevel)
    try:
        code = kernel.run(command_from(args))
    except KeyboardInterrupt:
        print('Interrupt signal received, shutting down')
        code = 130
    except Exception as e:
        print('Unexpected error has occured, shutting down')
        code = 1
    sys.exit(code)
