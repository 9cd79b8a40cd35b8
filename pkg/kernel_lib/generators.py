from logging import Logger
from random import Random
from typing import Callable, TypeVar

from kernel_lib.certificates import DIAGRAM_BINDINGS
from kernel_lib.laws import RuleId
from kernel_lib.models import EquationInstance
from kernel_lib.normal import NPi, NTy, decide_ty_eq, norm, quote
from kernel_lib.rewrite import DEFAULT_FUEL, FuelExhaustedError, Truth
from kernel_lib.syntax import (
    App, Comp, CtxExpr, El, Empty, Eps, Expr, Ext, Id, InEl, Inst, InU, Lam, P,
    Pi, Plus, Q, Signature, Sing, SubExpr, TInst, TmExpr, TyExpr, U,
)
from kernel_lib.wellformed import Checker, IllFormedError


T = TypeVar("T")

ATTEMPTS = 50


class Generator:
    """Seeded random syntax that the checker accepts. Every builder takes a
    node budget that bounds the parts it generates."""

    def __init__(self, logger: Logger, sig: Signature, rng: Random, fuel: int = DEFAULT_FUEL) -> None:
        self.logger = logger
        self.sig = sig
        self.rng = rng
        self.fuel = fuel
        self.checker = Checker(logger, sig, fuel)

    def _first(self, options: list[Callable[[], T | None]]) -> T | None:
        """Tries the options in random order; the first success wins"""
        self.rng.shuffle(options)
        for option in options:
            result = option()
            if result is not None:
                return result
        return None

    def _split(self, budget: int) -> tuple[int, int]:
        left = self.rng.randint(1, budget - 2)
        return left, budget - 1 - left

    def _is_u(self, ty: TyExpr) -> bool:
        return decide_ty_eq(ty, U(), self.fuel) is Truth.TRUE

    def _typed(self, ctx: CtxExpr, tm: TmExpr) -> tuple[TmExpr, TyExpr] | None:
        try:
            return tm, self.checker.infer_tm(tm, ctx)
        except IllFormedError:
            return None

    def _mapped(self, ctx: CtxExpr, sub: SubExpr) -> tuple[SubExpr, CtxExpr] | None:
        try:
            return sub, self.checker.infer_sub(sub, ctx)
        except IllFormedError:
            return None

    def ctx(self, depth: int = 2, budget: int = 4) -> CtxExpr:
        ctx: CtxExpr = Empty()
        for _ in range(depth):
            ctx = Ext(ctx, self.ty(ctx, budget))
        return ctx

    def ty(self, ctx: CtxExpr, budget: int) -> TyExpr:
        options: list[Callable[[], TyExpr | None]] = []
        if budget >= 2:
            def el() -> TyExpr | None:
                t = self.tm_u(ctx, budget - 1)
                return None if t is None else El(t)
            options.append(el)
        if budget >= 3:
            def pi() -> TyExpr:
                left, right = self._split(budget)
                dom = self.ty(ctx, left)
                return Pi(dom, self.ty(Ext(ctx, dom), right))

            def inst() -> TyExpr:
                left, right = self._split(budget)
                g, cod = self.sub(ctx, left)
                return Inst(self.ty(cod, right), g)
            options += [pi, inst]
        options.append(lambda: U())
        return self._first(options)

    def tm_u(self, ctx: CtxExpr, budget: int) -> TmExpr | None:
        """A code: a term whose type is convertible to U"""
        options: list[Callable[[], TmExpr | None]] = []
        if isinstance(ctx, Empty) and self.sig.x_card:
            options.append(lambda: InU(self.rng.randrange(self.sig.x_card)))
        if isinstance(ctx, Ext):
            if self._is_u(ctx.ty):
                options.append(lambda: Q())
            if budget >= 3:
                def weakened() -> TmExpr | None:
                    t = self.tm_u(ctx.ctx, budget - 2)
                    return None if t is None else TInst(t, P())
                options.append(weakened)
        if budget >= 3:
            def instantiated() -> TmExpr | None:
                left, right = self._split(budget)
                g, cod = self.sub(ctx, left)
                t = self.tm_u(cod, right)
                return None if t is None else TInst(t, g)
            options.append(instantiated)
        return self._first(options)

    def tm(self, ctx: CtxExpr, budget: int) -> tuple[TmExpr, TyExpr] | None:
        options: list[Callable[[], tuple[TmExpr, TyExpr] | None]] = []
        if isinstance(ctx, Ext):
            options.append(lambda: self._typed(ctx, Q()))
        if isinstance(ctx, Empty):
            closed = [InU(i) for i in range(self.sig.x_card)]
            closed += [InEl(i, j) for i in range(self.sig.x_card) for j in range(self.sig.y_card[i])]
            if closed:
                options.append(lambda: self._typed(ctx, self.rng.choice(closed)))
        if budget >= 3:
            def lam() -> tuple[TmExpr, TyExpr] | None:
                left, right = self._split(budget)
                dom = self.ty(ctx, left)
                body = self.tm(Ext(ctx, dom), right)
                return None if body is None else self._typed(ctx, Lam(dom, body[0]))

            def inst() -> tuple[TmExpr, TyExpr] | None:
                left, right = self._split(budget)
                g, cod = self.sub(ctx, left)
                inner = self.tm(cod, right)
                return None if inner is None else self._typed(ctx, TInst(inner[0], g))
            options += [lam, inst]
        if budget >= 4 and isinstance(ctx, Ext):
            def beta() -> tuple[TmExpr, TyExpr] | None:
                body = self.tm(ctx, budget - 3)
                return None if body is None else self._typed(ctx, App(Lam(ctx.ty, body[0])))
            options.append(beta)
        return self._first(options)

    def sub(self, ctx: CtxExpr, budget: int) -> tuple[SubExpr, CtxExpr]:
        """A substitution out of ctx and its codomain"""
        options: list[Callable[[], tuple[SubExpr, CtxExpr] | None]] = [
            lambda: (Id(), ctx),
            lambda: (Eps(), Empty()),
        ]
        if isinstance(ctx, Ext):
            options.append(lambda: (P(), ctx.ctx))
        if budget >= 2:
            def single() -> tuple[SubExpr, CtxExpr] | None:
                found = self.tm(ctx, budget - 1)
                return None if found is None else self._mapped(ctx, Sing(found[0]))
            options.append(single)
        if budget >= 3:
            def comp() -> tuple[SubExpr, CtxExpr] | None:
                left, right = self._split(budget)
                g, mid = self.sub(ctx, left)
                f, _ = self.sub(mid, right)
                return self._mapped(ctx, Comp(f, g))
            options.append(comp)
            if isinstance(ctx, Ext):
                options.append(lambda: self._lift(ctx, budget))
        return self._first(options)

    def _lift(self, ctx: Ext, budget: int) -> tuple[SubExpr, CtxExpr] | None:
        match ctx.ty:
            case Inst(a, g):
                candidate = Plus(g, a)
            case ty if self._is_u(ty):
                candidate = Plus(self.sub(ctx.ctx, budget - 2)[0], U())
            case ty:
                candidate = Plus(Id(), ty)
        return self._mapped(ctx, candidate)

    def pi_term(self, ctx: CtxExpr, budget: int) -> tuple[TmExpr, TyExpr]:
        """A term whose type normalizes to a function type"""
        for _ in range(ATTEMPTS):
            found = self.tm(ctx, budget)
            if found is not None and isinstance(self._norm(found[1]), NPi):
                return found
        dom = self.ty(ctx, max(1, budget - 2))
        return Lam(dom, Q()), Pi(dom, Inst(dom, P()))

    def _norm(self, ty: TyExpr) -> NTy | None:
        try:
            return norm(ty, self.fuel)
        except FuelExhaustedError:
            return None

    def _some_tm(self, ctx: CtxExpr, budget: int) -> tuple[CtxExpr, TmExpr, TyExpr]:
        """A term in ctx, or in ctx extended by U when ctx has none"""
        for _ in range(ATTEMPTS):
            found = self.tm(ctx, budget)
            if found is not None:
                return ctx, found[0], found[1]
        ctx = Ext(ctx, U())
        return ctx, Q(), Inst(U(), P())

    def _code(self, ctx: CtxExpr, budget: int) -> tuple[CtxExpr, TmExpr]:
        for _ in range(ATTEMPTS):
            found = self.tm_u(ctx, budget)
            if found is not None:
                return ctx, found
        return Ext(ctx, U()), Q()

    def equation(self, rule: RuleId, budget: int = 4) -> EquationInstance:
        """Both sides of one instance of the law, well-formed in a random
        context"""
        for _ in range(ATTEMPTS):
            instance = self._equation(rule, budget)
            if self.checker.accepts(Empty(), instance.ctx) and \
                    self.checker.accepts(instance.ctx, instance.lhs) and \
                    self.checker.accepts(instance.ctx, instance.rhs):
                return instance
            self.logger.debug(f"Discarded an ill-formed {rule.value} instance")
        self.logger.error(f"Could not build a well-formed {rule.value} instance")
        raise GeneratorError(f"no well-formed {rule.value} instance after {ATTEMPTS} attempts")

    def _equation(self, rule: RuleId, budget: int) -> EquationInstance:
        ctx = self.ctx(self.rng.randint(0, 2), budget)
        d, mid = self.sub(ctx, budget)
        g, cod = self.sub(mid, budget)
        match rule:
            case RuleId.ASS:
                h, _ = self.sub(cod, budget)
                lhs, rhs = Comp(h, Comp(g, d)), Comp(Comp(h, g), d)
            case RuleId.IDL:
                lhs, rhs = Comp(Id(), d), d
            case RuleId.IDR:
                lhs, rhs = Comp(d, Id()), d
            case RuleId.EPS_ETA:
                closed = [InU(i) for i in range(self.sig.x_card)]
                if closed and self.rng.random() < 0.5:
                    c = self.rng.choice(closed)
                    lhs, rhs = TInst(c, Comp(Eps(), d)), TInst(c, Eps())
                else:
                    lhs, rhs = Comp(Eps(), d), Eps()
            case RuleId.TY_COMP:
                a = self.ty(cod, budget)
                lhs, rhs = Inst(a, Comp(g, d)), Inst(Inst(a, g), d)
            case RuleId.TY_ID:
                a = self.ty(ctx, budget)
                lhs, rhs = Inst(a, Id()), a
            case RuleId.TM_COMP:
                found = self.tm(cod, budget)
                t = Q() if found is None else found[0]
                lhs, rhs = TInst(t, Comp(g, d)), TInst(TInst(t, g), d)
            case RuleId.TM_ID:
                ctx, t, _ = self._some_tm(ctx, budget)
                lhs, rhs = TInst(t, Id()), t
            case RuleId.PLUS_COMP:
                a = self.ty(cod, budget)
                ctx = Ext(ctx, Inst(a, Comp(g, d)))
                lhs, rhs = Plus(Comp(g, d), a), Comp(Plus(g, a), Plus(d, Inst(a, g)))
            case RuleId.PLUS_ID:
                a = self.ty(ctx, budget)
                ctx = Ext(ctx, a)
                lhs, rhs = Plus(Id(), a), Id()
            case RuleId.P_COMP_PLUS:
                a = self.ty(mid, budget)
                ctx = Ext(ctx, Inst(a, d))
                lhs, rhs = Comp(P(), Plus(d, a)), Comp(d, P())
            case RuleId.Q_INST_PLUS:
                a = self.ty(mid, budget)
                ctx = Ext(ctx, Inst(a, d))
                lhs, rhs = TInst(Q(), Plus(d, a)), Q()
            case RuleId.SING_COMP:
                _, t, a = self._some_tm(mid, budget)
                lhs, rhs = Comp(Sing(t), d), Comp(Plus(d, a), Sing(TInst(t, d)))
            case RuleId.P_COMP_SING:
                ctx, t, _ = self._some_tm(ctx, budget)
                lhs, rhs = Comp(P(), Sing(t)), Id()
            case RuleId.Q_INST_SING:
                ctx, t, _ = self._some_tm(ctx, budget)
                lhs, rhs = TInst(Q(), Sing(t)), t
            case RuleId.EXT_ETA:
                a = self.ty(ctx, budget)
                ctx = Ext(ctx, a)
                lhs, rhs = Id(), Comp(Plus(P(), a), Sing(Q()))
            case RuleId.U_SUB:
                lhs, rhs = Inst(U(), d), U()
            case RuleId.EL_SUB:
                mid, t = self._code(mid, budget)
                lhs, rhs = Inst(El(t), d), El(TInst(t, d))
            case RuleId.PI_SUB:
                a = self.ty(mid, budget)
                b = self.ty(Ext(mid, a), budget)
                lhs, rhs = Inst(Pi(a, b), d), Pi(Inst(a, d), Inst(b, Plus(d, a)))
            case RuleId.LAM_SUB:
                a = self.ty(mid, budget)
                _, b, _ = self._some_tm(Ext(mid, a), budget)
                lhs, rhs = TInst(Lam(a, b), d), Lam(Inst(a, d), TInst(b, Plus(d, a)))
            case RuleId.PI_BETA:
                a = self.ty(ctx, budget)
                _, b, _ = self._some_tm(Ext(ctx, a), budget)
                ctx = Ext(ctx, a)
                lhs, rhs = App(Lam(a, b)), b
            case RuleId.PI_ETA:
                f, f_ty = self.pi_term(ctx, budget)
                a = quote(norm(f_ty, self.fuel).dom)
                lhs, rhs = Lam(a, App(f)), f
            case _:
                raise GeneratorError(f"no sampler for {rule}")
        return EquationInstance(rule, ctx, lhs, rhs)

    def diagram_bindings(self, diagram_id: str, budget: int = 4) -> dict[str, Expr]:
        """Well-formed bindings for a coherence diagram, with the context
        they live in under "ctx". Substitutions chain h, then d, then g."""
        names = DIAGRAM_BINDINGS[diagram_id]
        ctx = self.ctx(self.rng.randint(0, 2), budget)
        bindings: dict[str, Expr] = {}
        cod = ctx
        for name in ("h", "d", "g"):
            if name in names:
                bindings[name], cod = self.sub(cod, budget)
        if "t" in names:
            for _ in range(ATTEMPTS):
                t = self.tm_u(cod, budget)
                if t is not None:
                    break
            else:
                raise GeneratorError(f"no code in {diagram_id}'s target context")
            bindings["t"] = t
        if "A" in names:
            bindings["A"] = self.ty(cod, budget)
        if "B" in names:
            bindings["B"] = self.ty(Ext(cod, bindings["A"]), budget)
        bindings["ctx"] = ctx
        return bindings


class GeneratorError(Exception):
    """No well-formed sample could be built"""
    pass
