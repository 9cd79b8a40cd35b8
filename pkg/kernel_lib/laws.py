from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Callable, TypeAlias

from kernel_lib.syntax import (
    App, Comp, El, Eps, Expr, Id, Inst, Lam, P, Pi, Plus, Position, Q, Sing,
    TInst, U, is_closed_constant, replace_at, subtree_at,
)


class RuleId(Enum):
    """The named equations of the calculus"""
    ASS = "Ass"
    IDL = "Idl"
    IDR = "Idr"
    EPS_ETA = "EpsEta"
    TY_COMP = "TyComp"
    TY_ID = "TyId"
    TM_COMP = "TmComp"
    TM_ID = "TmId"
    PLUS_COMP = "PlusComp"
    PLUS_ID = "PlusId"
    P_COMP_PLUS = "PCompPlus"
    Q_INST_PLUS = "QInstPlus"
    SING_COMP = "SingComp"
    P_COMP_SING = "PCompSing"
    Q_INST_SING = "QInstSing"
    EXT_ETA = "ExtEta"
    U_SUB = "USub"
    EL_SUB = "ElSub"
    PI_SUB = "PiSub"
    LAM_SUB = "LamSub"
    PI_BETA = "PiBeta"
    PI_ETA = "PiEta"


class Direction(Enum):
    FWD = "fwd"
    BWD = "bwd"

    def flip(self) -> "Direction":
        return Direction.BWD if self is Direction.FWD else Direction.FWD


@dataclass(frozen=True)
class Meta:
    """A pattern variable of the given sort"""
    name: str
    sort: str


Pattern: TypeAlias = Expr | Meta
Bindings: TypeAlias = tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class Law:
    """One oriented reading of a named equation: lhs = rhs, forward is
    left to right. Guards restrict the instances the equation covers."""

    rule: RuleId
    lhs: Pattern
    rhs: Pattern
    guard: Callable[[dict[str, Expr]], bool] | None = None

    def sides(self, direction: Direction) -> tuple[Pattern, Pattern]:
        if direction is Direction.FWD:
            return self.lhs, self.rhs
        return self.rhs, self.lhs

    @property
    def metavars(self) -> tuple[Meta, ...]:
        seen: dict[str, Meta] = {}
        for side in (self.lhs, self.rhs):
            for meta in pattern_metas(side):
                seen.setdefault(meta.name, meta)
        return tuple(seen.values())

    def admits(self, env: dict[str, Expr]) -> bool:
        return self.guard is None or self.guard(env)


def _sub(name: str) -> Meta:
    return Meta(name, "sub")

def _ty(name: str) -> Meta:
    return Meta(name, "ty")

def _tm(name: str) -> Meta:
    return Meta(name, "tm")


f, g, h, d = _sub("f"), _sub("g"), _sub("h"), _sub("d")
A, B = _ty("A"), _ty("B")
a, b, c, t = _tm("a"), _tm("b"), _tm("c"), _tm("t")

LAWS: tuple[Law, ...] = (
    Law(RuleId.ASS, Comp(f, Comp(g, h)), Comp(Comp(f, g), h)),
    Law(RuleId.IDL, Comp(Id(), f), f),
    Law(RuleId.IDR, Comp(f, Id()), f),
    Law(RuleId.EPS_ETA, Comp(Eps(), f), Eps()),
    Law(RuleId.EPS_ETA, TInst(c, f), TInst(c, Eps()), lambda env: is_closed_constant(env["c"])),
    Law(RuleId.TY_COMP, Inst(A, Comp(g, d)), Inst(Inst(A, g), d)),
    Law(RuleId.TY_ID, Inst(A, Id()), A),
    Law(RuleId.TM_COMP, TInst(t, Comp(g, d)), TInst(TInst(t, g), d)),
    Law(RuleId.TM_ID, TInst(t, Id()), t),
    Law(RuleId.PLUS_COMP, Plus(Comp(g, d), A), Comp(Plus(g, A), Plus(d, Inst(A, g)))),
    Law(RuleId.PLUS_ID, Plus(Id(), A), Id()),
    Law(RuleId.P_COMP_PLUS, Comp(P(), Plus(g, A)), Comp(g, P())),
    Law(RuleId.Q_INST_PLUS, TInst(Q(), Plus(g, A)), Q()),
    Law(RuleId.SING_COMP, Comp(Sing(a), g), Comp(Plus(g, A), Sing(TInst(a, g)))),
    Law(RuleId.P_COMP_SING, Comp(P(), Sing(a)), Id()),
    Law(RuleId.Q_INST_SING, TInst(Q(), Sing(a)), a),
    Law(RuleId.EXT_ETA, Id(), Comp(Plus(P(), A), Sing(Q()))),
    Law(RuleId.U_SUB, Inst(U(), g), U()),
    Law(RuleId.EL_SUB, Inst(El(t), g), El(TInst(t, g))),
    Law(RuleId.PI_SUB, Inst(Pi(A, B), g), Pi(Inst(A, g), Inst(B, Plus(g, A)))),
    Law(RuleId.LAM_SUB, TInst(Lam(A, b), g), Lam(Inst(A, g), TInst(b, Plus(g, A)))),
    Law(RuleId.PI_BETA, App(Lam(A, b)), b),
    Law(RuleId.PI_ETA, Lam(A, App(_tm("f"))), _tm("f")),
)


def variants(rule: RuleId) -> tuple[Law, ...]:
    return tuple(law for law in LAWS if law.rule is rule)


def law_for(rule: RuleId, names: set[str] | frozenset[str]) -> Law:
    """The variant of a rule whose metavariables are exactly `names`"""
    for law in variants(rule):
        if {m.name for m in law.metavars} == set(names):
            return law
    raise LawMismatchError(f"{rule.value} has no variant binding {sorted(names)}")


def pattern_metas(pattern: Pattern) -> list[Meta]:
    if isinstance(pattern, Meta):
        return [pattern]
    found: list[Meta] = []
    for child in pattern.children():
        found.extend(pattern_metas(child))
    return found


def match(pattern: Pattern, expr: Expr, env: dict[str, Expr] | None = None) -> dict[str, Expr] | None:
    """Binds the metavariables of `pattern` so that it equals `expr`"""
    env = {} if env is None else env
    if isinstance(pattern, Meta):
        if expr.SORT != pattern.sort:
            return None
        bound = env.get(pattern.name)
        if bound is None:
            env[pattern.name] = expr
            return env
        return env if bound == expr else None
    if type(pattern) is not type(expr):
        return None
    for field in fields(pattern):
        left, right = getattr(pattern, field.name), getattr(expr, field.name)
        if isinstance(left, (Expr, Meta)):
            if match(left, right, env) is None:
                return None
        elif left != right:
            return None
    return env


def instantiate(pattern: Pattern, env: dict[str, Expr]) -> Expr:
    if isinstance(pattern, Meta):
        try:
            return env[pattern.name]
        except KeyError:
            raise LawMismatchError(f"metavariable {pattern.name} is unbound")
    if not pattern.CHILDREN:
        return pattern
    return replace(pattern, **{name: instantiate(getattr(pattern, name), env) for name in pattern.CHILDREN})


def ordered_bindings(law: Law, env: dict[str, Expr]) -> Bindings:
    """Bindings in the law's metavariable order"""
    return tuple((m.name, env[m.name]) for m in law.metavars if m.name in env)


def apply_law(expr: Expr, position: Position, law: Law, direction: Direction, env: dict[str, Expr]) -> Expr:
    """Rewrites the subtree at `position` along one instance of the law"""
    source, target = law.sides(direction)
    if not law.admits(env):
        raise LawMismatchError(f"{law.rule.value}: guard rejects the bindings")
    expected = instantiate(source, env)
    found = subtree_at(expr, position)
    if found != expected:
        raise LawMismatchError(f"{law.rule.value} {direction.value}: subtree does not match the law")
    return replace_at(expr, position, instantiate(target, env))


class LawMismatchError(Exception):
    """A law instance does not apply where it was claimed to"""
    pass
