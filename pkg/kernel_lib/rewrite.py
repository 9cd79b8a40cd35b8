from dataclasses import dataclass, fields
from enum import Enum

from kernel_lib.laws import (
    Bindings, Direction, LAWS, Law, Meta, RuleId, instantiate, law_for, match,
    ordered_bindings,
)
from kernel_lib.syntax import (
    App, Comp, CtxExpr, Eps, Expr, Inst, Lam, Plus, Position, SubExpr, TInst,
    TmExpr, TyExpr, is_closed_constant, replace_at,
)


DEFAULT_FUEL = 10000


class Truth(Enum):
    """Three-valued answer of the deciding operations"""
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @classmethod
    def of(cls, value: bool) -> "Truth":
        return cls.TRUE if value else cls.FALSE

    @classmethod
    def all_of(cls, *values: "Truth") -> "Truth":
        if any(v is cls.FALSE for v in values):
            return cls.FALSE
        if any(v is cls.UNKNOWN for v in values):
            return cls.UNKNOWN
        return cls.TRUE

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Redex:
    """One machine step: the law instance fired at a position"""
    position: Position
    rule: RuleId
    direction: Direction = Direction.FWD
    bindings: Bindings = ()

    @property
    def env(self) -> dict[str, Expr]:
        return dict(self.bindings)

    def shifted(self, prefix: Position) -> "Redex":
        return Redex(prefix + self.position, self.rule, self.direction, self.bindings)


def _laws(rule: RuleId) -> list[Law]:
    return [law for law in LAWS if law.rule is rule]


_IDENTITY = (RuleId.IDL, RuleId.IDR, RuleId.TY_ID, RuleId.TM_ID, RuleId.PLUS_ID, RuleId.EPS_ETA)
_PUSHING = (
    RuleId.ASS, RuleId.P_COMP_PLUS, RuleId.P_COMP_SING, RuleId.Q_INST_PLUS, RuleId.Q_INST_SING,
    RuleId.U_SUB, RuleId.EL_SUB, RuleId.PI_SUB, RuleId.LAM_SUB, RuleId.PLUS_COMP,
    RuleId.TY_COMP, RuleId.TM_COMP,
)
_BETA_ETA = (RuleId.PI_BETA, RuleId.PI_ETA)

# Fixed priority: identity and terminal laws, pushing laws, then beta/eta.
MACHINE_RULES: tuple[tuple[Law, Direction], ...] = tuple(
    [(law, Direction.FWD) for rule in _IDENTITY + _PUSHING + _BETA_ETA for law in _laws(rule)]
    + [(law, Direction.BWD) for law in _laws(RuleId.TM_COMP)]
)

_COMP_RULES = [law for rule in (RuleId.IDL, RuleId.IDR, RuleId.EPS_ETA, RuleId.ASS,
                                RuleId.P_COMP_PLUS, RuleId.P_COMP_SING) for law in _laws(rule)]
_CANCELLING = [law for law in _COMP_RULES if law.rule is not RuleId.ASS]


def _reduces_at_root(comp: Comp, laws: list[Law]) -> bool:
    for law in laws:
        env = match(law.lhs, comp)
        if env is not None and law.admits(env):
            return True
    return False


def _strategy_allows(law: Law, direction: Direction, env: dict[str, Expr]) -> bool:
    """Splitting a composite under an instantiation waits until the composite
    is irreducible; merging two instantiations happens only when their
    composite cancels."""
    if law.rule in (RuleId.TM_COMP, RuleId.TY_COMP):
        comp = Comp(env["g"], env["d"])
        if direction is Direction.FWD:
            return not _reduces_at_root(comp, _COMP_RULES)
        return _reduces_at_root(comp, _CANCELLING)
    return True


_APP_SUB = TInst(App(Meta("t", "tm")), Plus(Meta("g", "sub"), Meta("A", "ty")))


def app_sub_chain(t: TmExpr, g: SubExpr, a: TyExpr) -> list[Redex]:
    """(app t)[g+ : A] = app (t[g]) as beta backwards, lam[] backwards and
    eta, positions relative to the instantiation"""
    source = TInst(App(t), Plus(g, a))
    chain = [
        ((), RuleId.PI_BETA, Direction.BWD, {"A": Inst(a, g), "b": source}),
        ((0,), RuleId.LAM_SUB, Direction.BWD, {"A": a, "b": App(t), "g": g}),
        ((0, 0), RuleId.PI_ETA, Direction.FWD, {"A": a, "f": t}),
    ]
    return [Redex(position, rule, direction, ordered_bindings(law_for(rule, set(env)), env))
            for position, rule, direction, env in chain]


def _fire(node: Expr) -> tuple[Expr, list[Redex]] | None:
    for law, direction in MACHINE_RULES:
        source, target = law.sides(direction)
        env = match(source, node)
        if env is None or not law.admits(env):
            continue
        if not _strategy_allows(law, direction, env):
            continue
        reduct = instantiate(target, env)
        if reduct == node:
            continue
        return reduct, [Redex((), law.rule, direction, ordered_bindings(law, env))]
    env = match(_APP_SUB, node)
    if env is not None:
        return App(TInst(env["t"], env["g"])), app_sub_chain(env["t"], env["g"], env["A"])
    return None


def _find(e: Expr, position: Position) -> tuple[Position, Expr, list[Redex]] | None:
    fired = _fire(e)
    if fired is not None:
        return (position,) + fired
    for index, child in enumerate(e.children()):
        found = _find(child, position + (index,))
        if found is not None:
            return found
    return None


def step(e: Expr) -> tuple[Expr, list[Redex]] | None:
    """Rewrites the leftmost-outermost redex, or returns None on a normal
    form. A derived step is recorded as the law applications it stands for."""
    found = _find(e, ())
    if found is None:
        return None
    position, reduct, redexes = found
    return replace_at(e, position, reduct), [r.shifted(position) for r in redexes]


def trace(e: Expr, fuel: int = DEFAULT_FUEL) -> tuple[Expr, list[Redex]]:
    """Runs the machine to a normal form, recording every law application"""
    steps: list[Redex] = []
    while True:
        result = step(e)
        if result is None:
            return e, steps
        if len(steps) >= fuel:
            raise FuelExhaustedError(fuel)
        e, redexes = result
        steps.extend(redexes)


def canon(e: Expr, fuel: int = DEFAULT_FUEL) -> Expr:
    return trace(e, fuel)[0]


def canon_tm(t: TmExpr, fuel: int = DEFAULT_FUEL) -> TmExpr:
    return canon(t, fuel)


def same(x: Expr, y: Expr, fuel: int = DEFAULT_FUEL) -> bool:
    """Equality of machine normal forms up to eta for functions and up to
    the weakening c = c[eps] of closed constants.
    Raises FuelExhaustedError when an eta comparison does not normalize."""
    if x == y:
        return True
    if is_closed_constant(x) and isinstance(y, TInst) and y.tm == x and isinstance(y.sub, Eps):
        return True
    if is_closed_constant(y) and isinstance(x, TInst) and x.tm == y and isinstance(x.sub, Eps):
        return True
    if isinstance(x, Lam) and not isinstance(y, Lam) and y.SORT == "tm":
        return same(x.body, canon(App(y), fuel), fuel)
    if isinstance(y, Lam) and not isinstance(x, Lam) and x.SORT == "tm":
        return same(canon(App(x), fuel), y.body, fuel)
    if type(x) is not type(y):
        return False
    for field in fields(x):
        left, right = getattr(x, field.name), getattr(y, field.name)
        if isinstance(left, Expr):
            if not same(left, right, fuel):
                return False
        elif left != right:
            return False
    return True


def convertible(t: TmExpr, u: TmExpr, fuel: int = DEFAULT_FUEL) -> Truth:
    try:
        return Truth.of(same(canon(t, fuel), canon(u, fuel), fuel))
    except FuelExhaustedError:
        return Truth.UNKNOWN


def conv_tm(ctx: CtxExpr, ty: TyExpr, t: TmExpr, u: TmExpr, fuel: int = DEFAULT_FUEL) -> Truth:
    """Decides t = u : ty in ctx. Both terms must already check against ty
    in ctx; the comparison itself is untyped."""
    return convertible(t, u, fuel)


class FuelExhaustedError(Exception):
    """The machine ran out of fuel before reaching a normal form"""

    def __init__(self, fuel: int) -> None:
        super().__init__(f"no normal form within {fuel} steps")
        self.fuel = fuel
