import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import product
from logging import Logger
from math import prod
from typing import Any, Callable, Iterable, TypeAlias

from kernel_lib.laws import RuleId
from kernel_lib.normal import NPi, NTy, NU, inst_nty, nel, quote
from kernel_lib.rewrite import DEFAULT_FUEL, Truth
from kernel_lib.syntax import (
    App, Comp, CtxExpr, El, Empty, Eps, Expr, Ext, Id, InEl, Inst, InU, Lam, P,
    Pi, Plus, Q, Signature, Sing, SubExpr, TInst, TmExpr, TyExpr, U,
)
from kernel_lib.wellformed import Checker


DEFAULT_CAP = 10000


class Model(ABC):
    """The operations a model of the calculus interprets the syntax with.
    Carriers are left to the instance; the equations are checked, not
    assumed."""

    @abstractmethod
    def empty(self) -> Any: ...
    @abstractmethod
    def ext(self, ctx: Any, ty: Any) -> Any: ...
    @abstractmethod
    def id(self) -> Any: ...
    @abstractmethod
    def comp(self, f: Any, g: Any) -> Any: ...
    @abstractmethod
    def eps(self) -> Any: ...
    @abstractmethod
    def p(self) -> Any: ...
    @abstractmethod
    def plus(self, g: Any, ty: Any) -> Any: ...
    @abstractmethod
    def sing(self, tm: Any) -> Any: ...
    @abstractmethod
    def u(self) -> Any: ...
    @abstractmethod
    def el(self, tm: Any) -> Any: ...
    @abstractmethod
    def pi(self, dom: Any, cod: Any) -> Any: ...
    @abstractmethod
    def inst_ty(self, ty: Any, g: Any) -> Any: ...
    @abstractmethod
    def q(self) -> Any: ...
    @abstractmethod
    def inst_tm(self, tm: Any, g: Any) -> Any: ...
    @abstractmethod
    def lam(self, dom: Any, body: Any) -> Any: ...
    @abstractmethod
    def app(self, tm: Any) -> Any: ...
    @abstractmethod
    def in_u(self, i: int) -> Any: ...
    @abstractmethod
    def in_el(self, i: int, j: int) -> Any: ...


def interpret(model: Model, e: Expr) -> Any:
    """Folds the syntax into the model"""
    match e:
        case Empty():
            return model.empty()
        case Ext(ctx, ty):
            return model.ext(interpret(model, ctx), interpret(model, ty))
        case Id():
            return model.id()
        case Comp(f, g):
            return model.comp(interpret(model, f), interpret(model, g))
        case Eps():
            return model.eps()
        case P():
            return model.p()
        case Plus(g, ty):
            return model.plus(interpret(model, g), interpret(model, ty))
        case Sing(tm):
            return model.sing(interpret(model, tm))
        case U():
            return model.u()
        case El(tm):
            return model.el(interpret(model, tm))
        case Pi(dom, cod):
            return model.pi(interpret(model, dom), interpret(model, cod))
        case Inst(ty, g):
            return model.inst_ty(interpret(model, ty), interpret(model, g))
        case Q():
            return model.q()
        case TInst(tm, g):
            return model.inst_tm(interpret(model, tm), interpret(model, g))
        case Lam(dom, body):
            return model.lam(interpret(model, dom), interpret(model, body))
        case App(tm):
            return model.app(interpret(model, tm))
        case InU(i):
            return model.in_u(i)
        case InEl(i, j):
            return model.in_el(i, j)
    raise TypeError(f"not an expression: {e!r}")


# Finite sets

@dataclass(frozen=True, eq=False)
class FunctionTable:
    """A total function on a finite enumeration, as (argument, value) pairs.
    Equality ignores the order of the pairs."""
    pairs: tuple[tuple["Value", "Value"], ...]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FunctionTable) and frozenset(self.pairs) == frozenset(other.pairs)

    def __hash__(self) -> int:
        return hash(frozenset(self.pairs))

    def __call__(self, arg: "Value") -> "Value":
        for key, value in self.pairs:
            if key == arg:
                return value
        raise KeyError(arg)


Value: TypeAlias = int | FunctionTable
Env: TypeAlias = tuple
Family: TypeAlias = Callable[[Env], tuple[Value, ...]]
SubFn: TypeAlias = Callable[[Env], Env]
TmFn: TypeAlias = Callable[[Env], Value]


def show_value(v: Value) -> str:
    if isinstance(v, FunctionTable):
        return "{" + ", ".join(f"{show_value(a)} -> {show_value(b)}" for a, b in v.pairs) + "}"
    return str(v)


def show_env(env: Env) -> str:
    items: list[str] = []
    while env:
        env, value = env
        items.append(show_value(value))
    return "(" + ", ".join(reversed(items)) + ")"


class FinSetModel(Model):
    """Contexts are finite enumerations of nested-pair environments, types
    are families of finite enumerations, substitutions and terms are
    functions on environments. U is interpreted by range(x), El by the
    fibre sizes of the signature. Enumerations above `cap` elements raise
    ModelTooLargeError."""

    def __init__(self, logger: Logger, sig: Signature, cap: int = DEFAULT_CAP) -> None:
        self.logger = logger
        self.sig = sig
        self.cap = cap

    def _bounded(self, size: int, what: str) -> None:
        if size > self.cap:
            self.logger.warning(f"{what} has {size} elements, over the cap of {self.cap}")
            raise ModelTooLargeError(size, self.cap)

    def empty(self) -> tuple[Env, ...]:
        return ((),)

    def ext(self, ctx: tuple[Env, ...], ty: Family) -> tuple[Env, ...]:
        envs = tuple((env, v) for env in ctx for v in ty(env))
        self._bounded(len(envs), "context")
        return envs

    def id(self) -> SubFn:
        return lambda env: env

    def comp(self, f: SubFn, g: SubFn) -> SubFn:
        return lambda env: f(g(env))

    def eps(self) -> SubFn:
        return lambda env: ()

    def p(self) -> SubFn:
        return lambda env: env[0]

    def plus(self, g: SubFn, ty: Family) -> SubFn:
        return lambda env: (g(env[0]), env[1])

    def sing(self, tm: TmFn) -> SubFn:
        return lambda env: (env, tm(env))

    def u(self) -> Family:
        base = tuple(range(self.sig.x_card))
        return lambda env: base

    def el(self, tm: TmFn) -> Family:
        return lambda env: tuple(range(self.sig.y_card[tm(env)]))

    def pi(self, dom: Family, cod: Family) -> Family:
        def tables(env: Env) -> tuple[Value, ...]:
            args = dom(env)
            choices = [cod((env, a)) for a in args]
            self._bounded(prod(len(c) for c in choices), "function space")
            return tuple(FunctionTable(tuple(zip(args, values))) for values in product(*choices))
        return tables

    def inst_ty(self, ty: Family, g: SubFn) -> Family:
        return lambda env: ty(g(env))

    def q(self) -> TmFn:
        return lambda env: env[1]

    def inst_tm(self, tm: TmFn, g: SubFn) -> TmFn:
        return lambda env: tm(g(env))

    def lam(self, dom: Family, body: TmFn) -> TmFn:
        return lambda env: FunctionTable(tuple((a, body((env, a))) for a in dom(env)))

    def app(self, tm: TmFn) -> TmFn:
        return lambda env: tm(env[0])(env[1])

    def in_u(self, i: int) -> TmFn:
        return lambda env: i

    def in_el(self, i: int, j: int) -> TmFn:
        return lambda env: j

    def eval_ctx(self, ctx: CtxExpr) -> tuple[Env, ...]:
        return interpret(self, ctx)

    def eval_ty(self, ty: TyExpr) -> Family:
        return interpret(self, ty)

    def eval_sub(self, sub: SubExpr) -> SubFn:
        return interpret(self, sub)

    def eval_tm(self, tm: TmExpr) -> TmFn:
        return interpret(self, tm)

    def table(self, ctx: CtxExpr, e: Expr) -> list[tuple[Env, Any]]:
        """The interpretation of e tabulated over every environment of ctx"""
        sem = interpret(self, e)
        return [(env, sem(env)) for env in self.eval_ctx(ctx)]

    def agree(self, ctx: CtxExpr, x: Expr, y: Expr) -> Truth:
        """Pointwise equality over every environment of ctx. Types are
        compared as sets of elements."""
        try:
            envs = self.eval_ctx(ctx)
            fx, fy = interpret(self, x), interpret(self, y)
            for env in envs:
                left, right = fx(env), fy(env)
                if x.SORT == "ty":
                    left, right = frozenset(left), frozenset(right)
                if left != right:
                    self.logger.debug(f"Models disagree at {show_env(env)} under {self.sig}")
                    return Truth.FALSE
        except ModelTooLargeError:
            return Truth.UNKNOWN
        return Truth.TRUE


def small_signatures(max_x: int = 2, max_y: int = 2) -> tuple[Signature, ...]:
    """Every signature with at most max_x base elements and fibres of at
    most max_y elements"""
    return tuple(Signature(x, ys)
                 for x in range(max_x + 1)
                 for ys in product(range(max_y + 1), repeat=x))


def agreement(ctx: CtxExpr, x: Expr, y: Expr, signatures: Iterable[Signature],
              cap: int = DEFAULT_CAP, fuel: int = DEFAULT_FUEL, logger: Logger | None = None) -> Truth:
    """Model agreement of x and y over the signatures under which both are
    well-formed in ctx; UNKNOWN when none is, or every one is too large"""
    logger = logging.getLogger("TYPE-KERNEL") if logger is None else logger
    verdicts: list[Truth] = []
    for sig in signatures:
        checker = Checker(logger, sig, fuel)
        if not (checker.accepts(Empty(), ctx) and checker.accepts(ctx, x) and checker.accepts(ctx, y)):
            continue
        verdict = FinSetModel(logger, sig, cap).agree(ctx, x, y)
        if verdict is Truth.FALSE:
            return verdict
        verdicts.append(verdict)
    if Truth.TRUE in verdicts:
        return Truth.TRUE
    return Truth.UNKNOWN


@dataclass(frozen=True)
class EquationInstance:
    """Both sides of one named law, well-formed in ctx"""
    rule: RuleId
    ctx: CtxExpr
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class ModelReport:
    checked: int
    violations: tuple[EquationInstance, ...]
    unknown: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations


def check_model_equations(m: FinSetModel, samples: Iterable[EquationInstance]) -> ModelReport:
    checked, unknown = 0, 0
    violations: list[EquationInstance] = []
    for sample in samples:
        verdict = m.agree(sample.ctx, sample.lhs, sample.rhs)
        checked += 1
        if verdict is Truth.FALSE:
            m.logger.error(f"{sample.rule.value} fails in the model under {m.sig}")
            violations.append(sample)
        elif verdict is Truth.UNKNOWN:
            unknown += 1
    m.logger.info(f"Checked {checked} equation instances under {m.sig}: {len(violations)} violations, {unknown} too large")
    return ModelReport(checked, tuple(violations), unknown)


@dataclass(frozen=True)
class ProbeReport:
    cardinality: int
    x_card: int
    closed_codes: tuple[InU, ...]

    @property
    def passed(self) -> bool:
        return self.cardinality == self.x_card == len(self.closed_codes)


def consistency_probe(m: FinSetModel, fuel: int = DEFAULT_FUEL) -> ProbeReport:
    """The closed elements of U are exactly the codes of the signature"""
    cardinality = len(m.eval_ty(U())(()))
    checker = Checker(m.logger, m.sig, fuel)
    codes = tuple(InU(i) for i in range(m.sig.x_card + 1) if checker.accepts(Empty(), InU(i)))
    return ProbeReport(cardinality, m.sig.x_card, codes)


# Normal forms

class NormalFormModel(Model):
    """Types are normal types, everything else stays syntax. Interpreting a
    type whose annotations are already normal agrees with norm."""

    def __init__(self, fuel: int = DEFAULT_FUEL) -> None:
        self.fuel = fuel

    def empty(self) -> CtxExpr:
        return Empty()

    def ext(self, ctx: CtxExpr, ty: NTy) -> CtxExpr:
        return Ext(ctx, quote(ty))

    def id(self) -> SubExpr:
        return Id()

    def comp(self, f: SubExpr, g: SubExpr) -> SubExpr:
        return Comp(f, g)

    def eps(self) -> SubExpr:
        return Eps()

    def p(self) -> SubExpr:
        return P()

    def plus(self, g: SubExpr, ty: NTy) -> SubExpr:
        return Plus(g, quote(ty))

    def sing(self, tm: TmExpr) -> SubExpr:
        return Sing(tm)

    def u(self) -> NTy:
        return NU()

    def el(self, tm: TmExpr) -> NTy:
        return nel(tm, self.fuel)

    def pi(self, dom: NTy, cod: NTy) -> NTy:
        return NPi(dom, cod)

    def inst_ty(self, ty: NTy, g: SubExpr) -> NTy:
        return inst_nty(ty, g, self.fuel)

    def q(self) -> TmExpr:
        return Q()

    def inst_tm(self, tm: TmExpr, g: SubExpr) -> TmExpr:
        return TInst(tm, g)

    def lam(self, dom: NTy, body: TmExpr) -> TmExpr:
        return Lam(quote(dom), body)

    def app(self, tm: TmExpr) -> TmExpr:
        return App(tm)

    def in_u(self, i: int) -> TmExpr:
        return InU(i)

    def in_el(self, i: int, j: int) -> TmExpr:
        return InEl(i, j)


class ModelTooLargeError(Exception):
    """An enumeration exceeds the configured cap"""

    def __init__(self, size: int, cap: int) -> None:
        super().__init__(f"enumeration of {size} elements exceeds the cap of {cap}")
        self.size = size
        self.cap = cap
