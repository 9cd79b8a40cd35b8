import json
from dataclasses import dataclass, field
from logging import Logger
from pathlib import Path
from random import Random
from typing import Any

from rich.console import Console
from rich.table import Table
from rich.text import Text

from kernel_lib import certificates as certs
from kernel_lib.concrete import ParseError, Source, load_source, show
from kernel_lib.generators import Generator, GeneratorError
from kernel_lib.models import (
    DEFAULT_CAP, FinSetModel, ModelTooLargeError, agreement, show_env, show_value,
)
from kernel_lib.normal import cover_eq, decide_ty_eq, inst_nty, norm, quote
from kernel_lib.rewrite import DEFAULT_FUEL, FuelExhaustedError, Truth, convertible
from kernel_lib.syntax import Comp, CtxExpr, Empty, Expr, Id, Signature, SignatureError
from kernel_lib.wellformed import Checker, IllFormedError


EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class Settings:
    sig: Signature = field(default_factory=lambda: Signature(1, (1,)))
    fuel: int = DEFAULT_FUEL
    cap: int = DEFAULT_CAP


@dataclass(frozen=True)
class Check:
    file: str


@dataclass(frozen=True)
class Norm:
    file: str
    out: str | None = None


@dataclass(frozen=True)
class Eq:
    file_a: str
    file_b: str
    cert: str | None = None


@dataclass(frozen=True)
class Eval:
    file: str
    sig: Signature | None = None


@dataclass(frozen=True)
class Cert:
    file: str


@dataclass(frozen=True)
class Coherence:
    diagram_id: str
    seed: int = 0
    count: int = 10
    report: str | None = None


@dataclass(frozen=True)
class Fuzz:
    seed: int = 0
    count: int = 100
    size: int = 8
    report: str | None = None


Command = Check | Norm | Eq | Eval | Cert | Coherence | Fuzz


class CommandRunner:
    """Runs one command and reports on the injected console. The return
    value is the process exit code: 0 pass, 1 semantic failure, 2 parse or
    usage error."""

    def __init__(self, logger: Logger, settings: Settings, console: Console) -> None:
        self.logger = logger
        self.settings = settings
        self.console = console

    def say(self, message: str) -> None:
        self.console.print(message, markup=False, highlight=False)

    def checker(self, sig: Signature | None = None) -> Checker:
        return Checker(self.logger, self.settings.sig if sig is None else sig, self.settings.fuel)

    def run(self, cmd: Command) -> int:
        self.logger.info(f"Running {type(cmd).__name__.lower()}")
        try:
            match cmd:
                case Check():
                    return self.check(cmd)
                case Norm():
                    return self.norm(cmd)
                case Eq():
                    return self.eq(cmd)
                case Eval():
                    return self.eval(cmd)
                case Cert():
                    return self.cert(cmd)
                case Coherence():
                    return self.coherence(cmd)
                case Fuzz():
                    return self.fuzz(cmd)
        except ParseError as e:
            self.logger.error(f"Parse error: {e}")
            self.say(f"parse error: {e}")
            return EXIT_USAGE
        except (OSError, SignatureError, UsageError) as e:
            self.logger.error(f"Usage error: {e}")
            self.say(f"error: {e}")
            return EXIT_USAGE
        raise UsageError(f"unknown command {cmd!r}")

    def read(self, path: str) -> Source:
        return load_source(Path(path).read_text(encoding="utf-8"))

    def write(self, path: str, text: str) -> None:
        Path(path).write_text(text, encoding="utf-8")
        self.logger.info(f"Wrote {path}")

    def write_json(self, path: str, summary: dict[str, Any]) -> None:
        self.write(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")

    def rejected(self, err: IllFormedError) -> int:
        self.logger.error(f"Rejected: {err.reason}")
        self.say(f"rejected: {err.reason} in {show(err.subtree)}")
        return EXIT_FAILED

    def check(self, cmd: Check) -> int:
        src = self.read(cmd.file)
        ctx = src.ctx or Empty()
        checker = self.checker()
        try:
            checker.check_ctx(ctx)
            self.say(self.judge(checker, ctx, src.expr))
        except IllFormedError as e:
            return self.rejected(e)
        return EXIT_OK

    def judge(self, checker: Checker, ctx: CtxExpr, e: Expr) -> str:
        """Checks e in ctx and describes the judgement"""
        match e.SORT:
            case "ctx":
                checker.check_ctx(e)
                return "context ok"
            case "ty":
                checker.check_ty(ctx, e)
                return f"type ok in {show(ctx)}"
            case "tm":
                return f"{show(e)} : {show(checker.infer_tm(e, ctx))}"
        ok = checker.check_sub(ctx, e)
        return f"{show(ok.sub)} : {show(ok.dom)} -> {show(ok.cod)}"

    def _check_declared(self, src: Source) -> None:
        """Checks the expression in its declared context, if there is one"""
        if src.ctx is not None:
            checker = self.checker()
            checker.check_ctx(src.ctx)
            self.judge(checker, src.ctx, src.expr)

    def norm(self, cmd: Norm) -> int:
        src = self.read(cmd.file)
        if src.expr.SORT != "ty":
            raise UsageError("norm expects a type")
        try:
            self._check_declared(src)
            cert = certs.compl_cert(src.expr, self.settings.fuel)
        except IllFormedError as e:
            return self.rejected(e)
        except FuelExhaustedError as e:
            self.logger.warning(f"Normalization stopped: {e}")
            self.say(f"unknown: {e}")
            return EXIT_FAILED
        self.say(show(cert.source))
        report = certs.check_cert(cert, self.settings.fuel)
        self.say(f"certificate: {len(cert.steps)} steps, {'valid' if report else 'invalid'}")
        if cmd.out is not None:
            self.write(cmd.out, certs.dump_cert(cert))
        return EXIT_OK if report else EXIT_FAILED

    def eq(self, cmd: Eq) -> int:
        left, right = self.read(cmd.file_a), self.read(cmd.file_b)
        if left.expr.SORT != right.expr.SORT or left.expr.SORT not in ("ty", "tm"):
            raise UsageError("eq compares two types or two terms")
        try:
            self._check_declared(left)
            self._check_declared(right)
        except IllFormedError as e:
            return self.rejected(e)
        fuel = self.settings.fuel
        if left.expr.SORT == "ty":
            verdict = decide_ty_eq(left.expr, right.expr, fuel)
        else:
            verdict = convertible(left.expr, right.expr, fuel)
        self.say(str(verdict))
        if cmd.cert is not None and verdict is Truth.TRUE and left.expr.SORT == "ty":
            try:
                cert = certs.conversion_cert(left.expr, right.expr, fuel)
            except certs.NotConvertibleError as e:
                self.logger.error(f"No conversion certificate: {e}")
                self.say(f"no certificate: {e}")
                return EXIT_FAILED
            self.write(cmd.cert, certs.dump_cert(cert))
        return EXIT_OK if verdict is Truth.TRUE else EXIT_FAILED

    def eval(self, cmd: Eval) -> int:
        src = self.read(cmd.file)
        sig = self.settings.sig if cmd.sig is None else cmd.sig
        ctx = src.ctx or Empty()
        checker = self.checker(sig)
        try:
            checker.check_ctx(ctx)
            self.judge(checker, ctx, src.expr)
        except IllFormedError as e:
            return self.rejected(e)
        model = FinSetModel(self.logger, sig, self.settings.cap)
        table = Table(title=Text(f"{show(src.expr)} under {sig}"))
        table.add_column("environment")
        table.add_column("value")
        try:
            if src.expr.SORT == "ctx":
                for env in model.eval_ctx(src.expr):
                    table.add_row(Text(show_env(env)), Text(""))
            else:
                for env, value in model.table(ctx, src.expr):
                    table.add_row(Text(show_env(env)), Text(self._show_semantic(src.expr.SORT, value)))
        except ModelTooLargeError as e:
            self.say(f"too large: {e}")
            return EXIT_FAILED
        self.console.print(table)
        return EXIT_OK

    def _show_semantic(self, sort: str, value: Any) -> str:
        match sort:
            case "ty":
                return "{" + ", ".join(show_value(v) for v in value) + "}"
            case "sub":
                return show_env(value)
        return show_value(value)

    def cert(self, cmd: Cert) -> int:
        cert = certs.load_cert(Path(cmd.file).read_text(encoding="utf-8"))
        report = certs.check_cert(cert, self.settings.fuel)
        if report:
            self.say(f"valid: {len(cert.steps)} steps")
            return EXIT_OK
        self.logger.error(f"Certificate fails at step {report.failed_step}")
        self.say(f"invalid at step {report.failed_step}: {report.reason}")
        return EXIT_FAILED

    def coherence(self, cmd: Coherence) -> int:
        if cmd.diagram_id == "all":
            names = list(certs.DIAGRAMS)
        elif cmd.diagram_id in certs.DIAGRAMS:
            names = [cmd.diagram_id]
        else:
            raise UsageError(f"no diagram named '{cmd.diagram_id}'")
        generator = Generator(self.logger, self.settings.sig, Random(cmd.seed), self.settings.fuel)
        signatures = (self.settings.sig,)
        table = Table(title=f"coherence, seed {cmd.seed}")
        for column in ("diagram", "passed", "failed", "model unknown"):
            table.add_column(column)
        summary: dict[str, Any] = {}
        failed = 0
        for name in names:
            counts = {"passed": 0, "failed": 0, "model_unknown": 0}
            for _ in range(cmd.count):
                try:
                    bindings = generator.diagram_bindings(name)
                except GeneratorError as e:
                    self.logger.warning(f"Skipped a {name} instance: {e}")
                    continue
                report = certs.coherence_2cell(name, bindings, self.settings.fuel, signatures, self.settings.cap)
                counts["passed" if report.passed else "failed"] += 1
                if report.model is Truth.UNKNOWN:
                    counts["model_unknown"] += 1
                if not report.passed:
                    self.logger.error(f"{name} fails for {', '.join(f'{k}={show(v)}' for k, v in bindings.items())}")
            failed += counts["failed"]
            summary[name] = counts
            table.add_row(name, str(counts["passed"]), str(counts["failed"]), str(counts["model_unknown"]))
        if cmd.diagram_id in ("all", "Ass", "Idl", "Idr"):
            corners_ok = self._pentagon(generator, cmd.count)
            summary["pentagon_corners"] = {"passed": corners_ok}
            failed += 0 if corners_ok else 1
        self.console.print(table)
        if cmd.report is not None:
            self.write_json(cmd.report, {"seed": cmd.seed, "count": cmd.count, "diagrams": summary})
        return EXIT_OK if failed == 0 else EXIT_FAILED

    def _pentagon(self, generator: Generator, count: int) -> bool:
        ok = True
        for _ in range(count):
            bindings = generator.diagram_bindings("Ass")
            suite = certs.pentagon_suite(bindings, self.settings.fuel, (self.settings.sig,), self.settings.cap)
            if not suite.passed:
                self.logger.error("Pentagon suite fails")
                ok = False
        self.say(f"pentagon corners: {'pass' if ok else 'fail'}")
        return ok

    def fuzz(self, cmd: Fuzz) -> int:
        generator = Generator(self.logger, self.settings.sig, Random(cmd.seed), self.settings.fuel)
        fuel = self.settings.fuel
        counts = {name: {"passed": 0, "failed": 0, "unknown": 0}
                  for name in ("completeness", "stability", "functoriality", "model")}

        def tally(name: str, verdict: Truth) -> None:
            key = {Truth.TRUE: "passed", Truth.FALSE: "failed", Truth.UNKNOWN: "unknown"}[verdict]
            counts[name][key] += 1
            if verdict is Truth.FALSE:
                self.logger.error(f"Fuzz property {name} fails")

        for index in range(cmd.count):
            base = generator.ctx(generator.rng.randint(0, 2))
            d, mid = generator.sub(base, 3)
            g, top = generator.sub(mid, 3)
            a = generator.ty(top, cmd.size)
            self.logger.debug(f"Fuzz case {index}: {show(a)} in {show(top)}")
            try:
                n = norm(a, fuel)
                tally("completeness", Truth.of(bool(certs.check_cert(certs.compl_cert(a, fuel), fuel))))
                tally("stability", Truth.of(norm(quote(n), fuel) == n))
                tally("functoriality", Truth.all_of(
                    cover_eq(inst_nty(n, Comp(g, d), fuel), inst_nty(inst_nty(n, g, fuel), d, fuel), fuel),
                    cover_eq(inst_nty(n, Id(), fuel), n, fuel),
                ))
            except FuelExhaustedError:
                for name in ("completeness", "stability", "functoriality"):
                    tally(name, Truth.UNKNOWN)
                continue
            verdict = agreement(top, a, quote(n), (self.settings.sig,), self.settings.cap, fuel, self.logger)
            tally("model", verdict)
        table = Table(title=f"fuzz, seed {cmd.seed}, {cmd.count} types of size {cmd.size}")
        for column in ("property", "passed", "failed", "unknown"):
            table.add_column(column)
        for name, c in counts.items():
            table.add_row(name, str(c["passed"]), str(c["failed"]), str(c["unknown"]))
        self.console.print(table)
        if cmd.report is not None:
            self.write_json(cmd.report, {"seed": cmd.seed, "count": cmd.count, "size": cmd.size, "properties": counts})
        return EXIT_OK if all(c["failed"] == 0 for c in counts.values()) else EXIT_FAILED


class UsageError(Exception):
    """A command was given inputs it cannot run on"""
    pass
