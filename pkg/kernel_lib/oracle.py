from dataclasses import dataclass, field
from itertools import zip_longest
from logging import Logger
from typing import Iterator

from kernel_lib.concrete import show
from kernel_lib.laws import LAWS, Direction, Law, Meta, RuleId, instantiate, match, pattern_metas
from kernel_lib.rewrite import DEFAULT_FUEL, Truth
from kernel_lib.syntax import (
    App, Comp, CtxExpr, El, Eps, Expr, Ext, Id, InEl, Inst, InU, Lam, P,
    Pi, Plus, Q, Signature, Sing, SubExpr, TInst, TmExpr, TyExpr, U, replace_at,
    size, subterms,
)
from kernel_lib.wellformed import Checker, IllFormedError


@dataclass(frozen=True)
class SearchConfig:
    max_expr_size: int = 10
    max_depth: int = 2
    rule_set: frozenset[RuleId] = field(default_factory=lambda: frozenset(RuleId))

    def __post_init__(self) -> None:
        if self.max_expr_size < 1 or self.max_depth < 1:
            raise SearchConfigError("size and depth bounds must be positive")


@dataclass(frozen=True)
class SearchOutcome:
    found: bool
    depth: int
    visited: int

    @property
    def verdict(self) -> Truth:
        """The search never refutes: a miss is UNKNOWN"""
        return Truth.TRUE if self.found else Truth.UNKNOWN


@dataclass(frozen=True)
class Pools:
    """Candidates for metavariables that only one side of a law binds"""
    subs: tuple[SubExpr, ...]
    tys: tuple[TyExpr, ...]
    tms: tuple[TmExpr, ...]

    @classmethod
    def of(cls, *exprs: Expr) -> "Pools":
        found: dict[str, set[Expr]] = {"sub": {Id(), P(), Eps()}, "ty": {U()}, "tm": {Q()}}
        for e in exprs:
            for _, sub in subterms(e):
                if sub.SORT in found:
                    found[sub.SORT].add(sub)
        ordered = {sort: tuple(sorted(items, key=node_key)) for sort, items in found.items()}
        return cls(ordered["sub"], ordered["ty"], ordered["tm"])

    def candidates(self, sort: str) -> tuple[Expr, ...]:
        return {"sub": self.subs, "ty": self.tys, "tm": self.tms}[sort]


def node_key(e: Expr) -> tuple[int, str]:
    return size(e), show(e)


def _completions(law: Law, target: Expr, env: dict[str, Expr], pools: Pools) -> Iterator[dict[str, Expr]]:
    missing: list[Meta] = []
    for meta in pattern_metas(target):
        if meta.name not in env and meta not in missing:
            missing.append(meta)
    envs = [dict(env)]
    for meta in missing:
        envs = [e | {meta.name: c} for e in envs for c in pools.candidates(meta.sort)]
    for e in envs:
        if law.admits(e):
            yield e


class Oracle:
    """Breadth-first search over single law applications, at any position
    and in either direction. With a context, only types well-formed in it
    enter the frontier."""

    def __init__(self, logger: Logger, sig: Signature, fuel: int = DEFAULT_FUEL) -> None:
        self.logger = logger
        self.sig = sig
        self.checker = Checker(logger, sig, fuel)

    def neighbours(self, e: Expr, cfg: SearchConfig, pools: Pools) -> set[Expr]:
        found: set[Expr] = set()
        laws = [law for law in LAWS if law.rule in cfg.rule_set]
        for position, sub in subterms(e):
            for law in laws:
                for direction in (Direction.FWD, Direction.BWD):
                    source, target = law.sides(direction)
                    env = match(source, sub)
                    if env is None:
                        continue
                    for full in _completions(law, target, env, pools):
                        result = replace_at(e, position, instantiate(target, full))
                        if result != e and size(result) <= cfg.max_expr_size:
                            found.add(result)
        return found

    def _admissible(self, e: Expr, ctx: CtxExpr | None) -> bool:
        return ctx is None or self.checker.accepts(ctx, e)

    def layers(self, e: Expr, cfg: SearchConfig, pools: Pools, ctx: CtxExpr | None = None) -> Iterator[set[Expr]]:
        """Successive rings of the search ball around e, up to max_depth"""
        seen = {e}
        frontier = [e]
        yield {e}
        for _ in range(cfg.max_depth):
            ring: set[Expr] = set()
            for node in frontier:
                for nxt in self.neighbours(node, cfg, pools):
                    if nxt not in seen and self._admissible(nxt, ctx):
                        ring.add(nxt)
            seen |= ring
            frontier = sorted(ring, key=node_key)
            yield ring
            if not ring:
                return

    def ball(self, e: Expr, cfg: SearchConfig, pools: Pools | None = None, ctx: CtxExpr | None = None) -> frozenset[Expr]:
        pools = Pools.of(e) if pools is None else pools
        reached: set[Expr] = set()
        for ring in self.layers(e, cfg, pools, ctx):
            reached |= ring
        return frozenset(reached)

    def search(self, a: Expr, b: Expr, cfg: SearchConfig, ctx: CtxExpr | None = None,
               pools: Pools | None = None) -> SearchOutcome:
        """Grows both balls one ring at a time and stops when they meet.
        Both sides use the same radius, so the answer is symmetric."""
        pools = Pools.of(a, b) if pools is None else pools
        left, right = self.layers(a, cfg, pools, ctx), self.layers(b, cfg, pools, ctx)
        seen_a: set[Expr] = set()
        seen_b: set[Expr] = set()
        depth = 0
        for ring_a, ring_b in zip_longest(left, right, fillvalue=set()):
            seen_a |= ring_a
            seen_b |= ring_b
            if seen_a & seen_b:
                self.logger.debug(f"Found {show(a)} = {show(b)} at depth {depth}")
                return SearchOutcome(True, depth, len(seen_a) + len(seen_b))
            depth += 1
        self.logger.debug(f"No path {show(a)} = {show(b)} within depth {cfg.max_depth}")
        return SearchOutcome(False, cfg.max_depth, len(seen_a) + len(seen_b))


def oracle_eq(oracle: Oracle, a: TyExpr, b: TyExpr, cfg: SearchConfig, ctx: CtxExpr | None = None) -> Truth:
    return oracle.search(a, b, cfg, ctx).verdict


# Enumeration

class Enumerator:
    """All well-formed syntax of an exact size in a context, built from
    well-formed parts and validated by the checker. Results are memoized
    per (context, size) and ordered by size then printed form."""

    def __init__(self, logger: Logger, sig: Signature, fuel: int = DEFAULT_FUEL) -> None:
        self.logger = logger
        self.sig = sig
        self.checker = Checker(logger, sig, fuel)
        self._tys: dict[tuple[CtxExpr, int], tuple[TyExpr, ...]] = {}
        self._tms: dict[tuple[CtxExpr, int], tuple[tuple[TmExpr, TyExpr], ...]] = {}
        self._subs: dict[tuple[CtxExpr, int], tuple[tuple[SubExpr, CtxExpr], ...]] = {}

    def _keep_ty(self, ctx: CtxExpr, ty: TyExpr) -> bool:
        try:
            self.checker.check_ty(ctx, ty)
        except IllFormedError:
            return False
        return True

    def _infer_tm(self, ctx: CtxExpr, tm: TmExpr) -> TyExpr | None:
        try:
            return self.checker.infer_tm(tm, ctx)
        except IllFormedError:
            return None

    def _infer_sub(self, ctx: CtxExpr, sub: SubExpr) -> CtxExpr | None:
        try:
            return self.checker.infer_sub(sub, ctx)
        except IllFormedError:
            return None

    def tys(self, ctx: CtxExpr, n: int) -> tuple[TyExpr, ...]:
        key = (ctx, n)
        if key in self._tys:
            return self._tys[key]
        found: set[TyExpr] = set()
        if n == 1:
            found.add(U())
        if n >= 2:
            found.update(El(t) for t, _ in self.tms(ctx, n - 1) if self._keep_ty(ctx, El(t)))
        for k in range(1, n - 1):
            for dom in self.tys(ctx, k):
                found.update(Pi(dom, cod) for cod in self.tys(Ext(ctx, dom), n - 1 - k))
            for g, cod in self.subs(ctx, k):
                found.update(Inst(a, g) for a in self.tys(cod, n - 1 - k))
        result = tuple(sorted(found, key=node_key))
        self._tys[key] = result
        return result

    def tms(self, ctx: CtxExpr, n: int) -> tuple[tuple[TmExpr, TyExpr], ...]:
        key = (ctx, n)
        if key in self._tms:
            return self._tms[key]
        candidates: list[TmExpr] = []
        if n == 1:
            candidates.append(Q())
            candidates.extend(InU(i) for i in range(self.sig.x_card))
            candidates.extend(InEl(i, j) for i in range(self.sig.x_card) for j in range(self.sig.y_card[i]))
        if n >= 2 and isinstance(ctx, Ext):
            candidates.extend(App(t) for t, _ in self.tms(ctx.ctx, n - 1))
        for k in range(1, n - 1):
            for g, cod in self.subs(ctx, k):
                candidates.extend(TInst(t, g) for t, _ in self.tms(cod, n - 1 - k))
            for dom in self.tys(ctx, k):
                candidates.extend(Lam(dom, b) for b, _ in self.tms(Ext(ctx, dom), n - 1 - k))
        found: dict[TmExpr, TyExpr] = {}
        for tm in candidates:
            if tm in found:
                continue
            ty = self._infer_tm(ctx, tm)
            if ty is not None:
                found[tm] = ty
        result = tuple(sorted(found.items(), key=lambda item: node_key(item[0])))
        self._tms[key] = result
        return result

    def subs(self, ctx: CtxExpr, n: int) -> tuple[tuple[SubExpr, CtxExpr], ...]:
        key = (ctx, n)
        if key in self._subs:
            return self._subs[key]
        candidates: list[SubExpr] = []
        if n == 1:
            candidates.extend([Id(), Eps(), P()])
        if n >= 2:
            candidates.extend(Sing(t) for t, _ in self.tms(ctx, n - 1))
        for k in range(1, n - 1):
            for g, mid in self.subs(ctx, k):
                candidates.extend(Comp(f, g) for f, _ in self.subs(mid, n - 1 - k))
            if isinstance(ctx, Ext):
                for g, cod in self.subs(ctx.ctx, k):
                    candidates.extend(Plus(g, a) for a in self.tys(cod, n - 1 - k))
        found: dict[SubExpr, CtxExpr] = {}
        for sub in candidates:
            if sub in found:
                continue
            cod = self._infer_sub(ctx, sub)
            if cod is not None:
                found[sub] = cod
        result = tuple(sorted(found.items(), key=lambda item: node_key(item[0])))
        self._subs[key] = result
        return result

    def up_to(self, ctx: CtxExpr, max_size: int) -> tuple[TyExpr, ...]:
        result: list[TyExpr] = []
        for n in range(1, max_size + 1):
            result.extend(self.tys(ctx, n))
        self.logger.debug(f"Enumerated {len(result)} types up to size {max_size}")
        return tuple(result)


def enumerate_tys(enumerator: Enumerator, ctx: CtxExpr, max_size: int) -> tuple[TyExpr, ...]:
    """Every well-formed type in ctx with at most max_size nodes, ordered by
    size and then printed form"""
    return enumerator.up_to(ctx, max_size)


class SearchConfigError(Exception):
    """Search bounds are not positive"""
    pass
