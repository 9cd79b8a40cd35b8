from dataclasses import dataclass
from logging import Logger

from kernel_lib.normal import NPi, cover_eq, decide_ty_eq, norm, quote
from kernel_lib.rewrite import DEFAULT_FUEL, FuelExhaustedError, Truth
from kernel_lib.syntax import (
    App, Comp, CtxExpr, El, Empty, Eps, Expr, Ext, Id, InEl, Inst, InU, Lam, P,
    Pi, Plus, Q, Signature, Sing, SubExpr, TInst, TmExpr, TyExpr, U,
)


@dataclass(frozen=True)
class CtxOk:
    ctx: CtxExpr


@dataclass(frozen=True)
class SubOk:
    dom: CtxExpr
    cod: CtxExpr
    sub: SubExpr


@dataclass(frozen=True)
class TyOk:
    ctx: CtxExpr
    ty: TyExpr


@dataclass(frozen=True)
class TmOk:
    ctx: CtxExpr
    ty: TyExpr
    tm: TmExpr


Judgement = CtxOk | SubOk | TyOk | TmOk


class Checker:
    """Bidirectional checker for raw syntax. Acceptance returns a Judgement,
    rejection raises IllFormedError naming the offending subtree.
    Type comparisons go through decide_ty_eq; an undecided comparison
    rejects."""

    def __init__(self, logger: Logger, sig: Signature, fuel: int = DEFAULT_FUEL) -> None:
        self.logger = logger
        self.sig = sig
        self.fuel = fuel

    def reject(self, subtree: Expr, reason: str) -> None:
        self.logger.debug(f"Rejected {type(subtree).__name__}: {reason}")
        raise IllFormedError(subtree, reason)

    def same_type(self, subtree: Expr, expected: TyExpr, found: TyExpr) -> None:
        verdict = decide_ty_eq(expected, found, self.fuel)
        if verdict is Truth.FALSE:
            self.reject(subtree, "type mismatch")
        elif verdict is Truth.UNKNOWN:
            self.reject(subtree, f"type comparison undecided within fuel {self.fuel}")

    def check_ctx(self, ctx: CtxExpr) -> CtxOk:
        match ctx:
            case Empty():
                pass
            case Ext(prefix, ty):
                self.check_ctx(prefix)
                self.check_ty(prefix, ty)
            case _:
                self.reject(ctx, "not a context")
        return CtxOk(ctx)

    def infer_sub(self, sub: SubExpr, dom: CtxExpr) -> CtxExpr:
        match sub:
            case Id():
                return dom
            case Eps():
                return Empty()
            case Comp(f, g):
                return self.infer_sub(f, self.infer_sub(g, dom))
            case P():
                if not isinstance(dom, Ext):
                    self.reject(sub, "p needs an extended context")
                return dom.ctx
            case Plus(g, ty):
                if not isinstance(dom, Ext):
                    self.reject(sub, "a lift needs an extended domain")
                cod = self.infer_sub(g, dom.ctx)
                self.check_ty(cod, ty)
                self.same_type(sub, dom.ty, Inst(ty, g))
                return Ext(cod, ty)
            case Sing(tm):
                return Ext(dom, self.infer_tm(tm, dom))
        self.reject(sub, "not a substitution")

    def check_sub(self, dom: CtxExpr, sub: SubExpr) -> SubOk:
        return SubOk(dom, self.infer_sub(sub, dom), sub)

    def check_ty(self, ctx: CtxExpr, ty: TyExpr) -> TyOk:
        match ty:
            case U():
                pass
            case El(tm):
                self.check_tm(ctx, U(), tm)
            case Pi(dom, cod):
                self.check_ty(ctx, dom)
                self.check_ty(Ext(ctx, dom), cod)
            case Inst(inner, sub):
                self.check_ty(self.infer_sub(sub, ctx), inner)
            case _:
                self.reject(ty, "not a type")
        return TyOk(ctx, ty)

    def infer_tm(self, tm: TmExpr, ctx: CtxExpr) -> TyExpr:
        match tm:
            case Q():
                if not isinstance(ctx, Ext):
                    self.reject(tm, "q needs an extended context")
                return Inst(ctx.ty, P())
            case TInst(inner, sub):
                return Inst(self.infer_tm(inner, self.infer_sub(sub, ctx)), sub)
            case Lam(dom, body):
                self.check_ty(ctx, dom)
                return Pi(dom, self.infer_tm(body, Ext(ctx, dom)))
            case App(inner):
                if not isinstance(ctx, Ext):
                    self.reject(tm, "app needs an extended context")
                fn_ty = self.infer_tm(inner, ctx.ctx)
                try:
                    shape, arg = norm(fn_ty, self.fuel), norm(ctx.ty, self.fuel)
                except FuelExhaustedError:
                    self.reject(tm, f"function type undecided within fuel {self.fuel}")
                if not isinstance(shape, NPi):
                    self.reject(tm, "applied term does not have a function type")
                verdict = cover_eq(arg, shape.dom, self.fuel)
                if verdict is not Truth.TRUE:
                    self.reject(tm, f"argument context does not match the domain ({verdict})")
                return quote(shape.cod)
            case InU(i):
                if not isinstance(ctx, Empty):
                    self.reject(tm, "inU lives in the empty context")
                if not self.sig.has_base(i):
                    self.reject(tm, f"index {i} out of range for {self.sig}")
                return U()
            case InEl(i, j):
                if not isinstance(ctx, Empty):
                    self.reject(tm, "inEl lives in the empty context")
                if not self.sig.has_fibre(i, j):
                    self.reject(tm, f"indices ({i}, {j}) out of range for {self.sig}")
                return El(InU(i))
        self.reject(tm, "not a term")

    def check_tm(self, ctx: CtxExpr, ty: TyExpr, tm: TmExpr) -> TmOk:
        self.same_type(tm, ty, self.infer_tm(tm, ctx))
        return TmOk(ctx, ty, tm)

    def accepts(self, ctx: CtxExpr, expr: Expr) -> bool:
        """True when the type, term or substitution is well-formed in ctx"""
        try:
            match expr.SORT:
                case "ty":
                    self.check_ty(ctx, expr)
                case "tm":
                    self.infer_tm(expr, ctx)
                case "sub":
                    self.infer_sub(expr, ctx)
                case _:
                    self.check_ctx(expr)
        except IllFormedError:
            return False
        return True


class IllFormedError(Exception):
    """Raw syntax is not a well-formed derivation"""

    def __init__(self, subtree: Expr, reason: str) -> None:
        super().__init__(reason)
        self.subtree = subtree
        self.reason = reason
