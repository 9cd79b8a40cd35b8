import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from kernel_lib.concrete import ParseError, parse, show
from kernel_lib.laws import (
    Bindings, Direction, LAWS, LawMismatchError, RuleId, apply_law, law_for,
)
from kernel_lib.models import DEFAULT_CAP, agreement, small_signatures
from kernel_lib.normal import NEl, NPi, NTy, NU, decide_ty_eq, inst_nty, norm, quote
from kernel_lib.rewrite import DEFAULT_FUEL, FuelExhaustedError, Redex, Truth, app_sub_chain, trace
from kernel_lib.syntax import (
    App, Comp, CtxExpr, El, Empty, Eps, Expr, Id, Inst, Lam, P, Pi, Plus,
    Position, PositionError, Q, Signature, Sing, SubExpr, TInst, TmExpr, TyExpr,
    U, is_closed_constant,
)


class DerivedLaw(Enum):
    """Laws provable from the named equations; replay expands them"""
    QUOTE_INST = "QuoteInst"
    INST_COMP = "InstComp"
    INST_ID = "InstId"
    TY_COMP_PLUS = "TyCompPlus"
    TY_ID_PLUS = "TyIdPlus"


DERIVED_SORTS: dict[DerivedLaw, tuple[tuple[str, str], ...]] = {
    DerivedLaw.QUOTE_INST: (("A", "ty"), ("g", "sub")),
    DerivedLaw.INST_COMP: (("A", "ty"), ("g", "sub"), ("d", "sub")),
    DerivedLaw.INST_ID: (("A", "ty"),),
    DerivedLaw.TY_COMP_PLUS: (("B", "ty"), ("g", "sub"), ("d", "sub"), ("A", "ty")),
    DerivedLaw.TY_ID_PLUS: (("B", "ty"), ("A", "ty")),
}


@dataclass(frozen=True)
class EqStep:
    rule: RuleId | DerivedLaw
    position: Position
    direction: Direction
    bindings: Bindings = ()

    @property
    def env(self) -> dict[str, Expr]:
        return dict(self.bindings)

    @classmethod
    def from_redex(cls, redex: Redex, prefix: Position = ()) -> "EqStep":
        return cls(redex.rule, prefix + redex.position, redex.direction, redex.bindings)

    def shifted(self, prefix: Position) -> "EqStep":
        return EqStep(self.rule, prefix + self.position, self.direction, self.bindings)

    def inverse(self) -> "EqStep":
        return EqStep(self.rule, self.position, self.direction.flip(), self.bindings)


def _step(rule: RuleId | DerivedLaw, position: Position = (), direction: Direction = Direction.FWD, **bindings: Expr) -> EqStep:
    return EqStep(rule, position, direction, tuple(bindings.items()))


def shift(steps: Iterable[EqStep], prefix: Position) -> list[EqStep]:
    return [s.shifted(prefix) for s in steps]


def invert(steps: Iterable[EqStep]) -> list[EqStep]:
    return [s.inverse() for s in reversed(list(steps))]


def trace_steps(e: Expr, fuel: int = DEFAULT_FUEL, prefix: Position = ()) -> list[EqStep]:
    """The machine run on e as certificate steps, from e to its normal form"""
    return [EqStep.from_redex(r, prefix) for r in trace(e, fuel)[1]]


@dataclass(frozen=True)
class Cert:
    """A derivation source = target as a sequence of law applications"""
    source: Expr
    target: Expr
    steps: tuple[EqStep, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    failed_step: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


# Replay

def _expand(step: EqStep, fuel: int) -> list[EqStep]:
    """Base-law steps of a derived step, relative to the step's position"""
    env = step.env
    match step.rule:
        case DerivedLaw.QUOTE_INST:
            n = _normal_of(env["A"], fuel)
            forward = invert(nat_steps(n, env["g"], fuel))
        case DerivedLaw.INST_COMP:
            n = _normal_of(env["A"], fuel)
            g, d = env["g"], env["d"]
            forward = (nat_steps(n, Comp(g, d), fuel)
                       + [_step(RuleId.TY_COMP, A=quote(n), g=g, d=d)]
                       + shift(invert(nat_steps(n, g, fuel)), (0,))
                       + invert(nat_steps(inst_nty(n, g, fuel), d, fuel)))
        case DerivedLaw.INST_ID:
            n = _normal_of(env["A"], fuel)
            forward = nat_steps(n, Id(), fuel) + [_step(RuleId.TY_ID, A=quote(n))]
        case DerivedLaw.TY_COMP_PLUS:
            b, g, d, a = env["B"], env["g"], env["d"], env["A"]
            forward = [_step(RuleId.PLUS_COMP, (1,), g=g, d=d, A=a),
                       _step(RuleId.TY_COMP, A=b, g=Plus(g, a), d=Plus(d, Inst(a, g)))]
        case DerivedLaw.TY_ID_PLUS:
            forward = [_step(RuleId.PLUS_ID, (1,), A=env["A"]), _step(RuleId.TY_ID, A=env["B"])]
        case _:
            raise LawMismatchError(f"{step.rule} is not a derived law")
    if step.direction is Direction.BWD:
        forward = invert(forward)
    return shift(forward, step.position)


def _normal_of(a: TyExpr, fuel: int) -> NTy:
    n = norm(a, fuel)
    if quote(n) != a:
        raise LawMismatchError("binding A is not a normal type")
    return n


def replay_step(e: Expr, step: EqStep, fuel: int = DEFAULT_FUEL) -> Expr:
    if isinstance(step.rule, DerivedLaw):
        names = {name for name, _ in DERIVED_SORTS[step.rule]}
        if set(step.env) != names:
            raise LawMismatchError(f"{step.rule.value} binds {sorted(names)}")
        for inner in _expand(step, fuel):
            e = replay_step(e, inner, fuel)
        return e
    law = law_for(step.rule, set(step.env))
    return apply_law(e, step.position, law, step.direction, step.env)


def replay(source: Expr, steps: Iterable[EqStep], fuel: int = DEFAULT_FUEL) -> Expr:
    e = source
    for step in steps:
        e = replay_step(e, step, fuel)
    return e


def check_cert(c: Cert, fuel: int = DEFAULT_FUEL) -> ReplayReport:
    e = c.source
    for index, step in enumerate(c.steps):
        try:
            e = replay_step(e, step, fuel)
        except (LawMismatchError, PositionError, FuelExhaustedError) as err:
            return ReplayReport(False, index, str(err))
    if e != c.target:
        return ReplayReport(False, len(c.steps), f"replay ends at {show(e)}, not at the target")
    return ReplayReport(True)


# Normalization certificates

def nat_steps(n: NTy, g: SubExpr, fuel: int = DEFAULT_FUEL) -> list[EqStep]:
    """Steps from quote(n instantiated along g) to quote(n)[g]"""
    match n:
        case NU():
            return [_step(RuleId.U_SUB, (), Direction.BWD, g=g)]
        case NEl(t):
            return (shift(invert(trace_steps(TInst(t, g), fuel)), (0,))
                    + [_step(RuleId.EL_SUB, (), Direction.BWD, t=t, g=g)])
        case NPi(dom, cod):
            qd = quote(dom)
            return (shift(nat_steps(cod, Plus(g, qd), fuel), (1,))
                    + shift(nat_steps(dom, g, fuel), (0,))
                    + [_step(RuleId.PI_SUB, (), Direction.BWD, A=qd, B=quote(cod), g=g)])
    raise TypeError(f"not a normal type: {n!r}")


def nat_cert(n: NTy, g: SubExpr, fuel: int = DEFAULT_FUEL) -> Cert:
    return Cert(quote(inst_nty(n, g, fuel)), Inst(quote(n), g), nat_steps(n, g, fuel))


def compl_steps(a: TyExpr, fuel: int = DEFAULT_FUEL) -> list[EqStep]:
    """Steps from quote(norm a) to a"""
    match a:
        case U():
            return []
        case El(t):
            return shift(invert(trace_steps(t, fuel)), (0,))
        case Pi(dom, cod):
            return shift(compl_steps(dom, fuel), (0,)) + shift(compl_steps(cod, fuel), (1,))
        case Inst(inner, sub):
            return nat_steps(norm(inner, fuel), sub, fuel) + shift(compl_steps(inner, fuel), (0,))
    raise TypeError(f"not a type: {a!r}")


def compl_cert(a: TyExpr, fuel: int = DEFAULT_FUEL) -> Cert:
    return Cert(quote(norm(a, fuel)), a, compl_steps(a, fuel))


def bridge_steps(x: Expr, y: Expr, fuel: int = DEFAULT_FUEL, position: Position = ()) -> list[EqStep]:
    """Steps between normal forms that agree up to eta and the weakening
    of closed constants"""
    if x == y:
        return []
    if is_closed_constant(x) and isinstance(y, TInst) and y.tm == x and isinstance(y.sub, Eps):
        return [_step(RuleId.TM_ID, position, Direction.BWD, t=x),
                _step(RuleId.EPS_ETA, position, c=x, f=Id())]
    if is_closed_constant(y) and isinstance(x, TInst):
        return invert(bridge_steps(y, x, fuel, position))
    if isinstance(x, Lam) and not isinstance(y, Lam):
        app = App(y)
        body = position + (1,)
        return (bridge_steps(x.body, trace(app, fuel)[0], fuel, body)
                + invert(trace_steps(app, fuel, body))
                + [_step(RuleId.PI_ETA, position, A=x.dom, f=y)])
    if isinstance(y, Lam) and not isinstance(x, Lam):
        return invert(bridge_steps(y, x, fuel, position))
    if type(x) is not type(y) or len(x.children()) != len(y.children()):
        raise NotConvertibleError(f"{show(x)} and {show(y)} have different shapes")
    steps: list[EqStep] = []
    for index, (left, right) in enumerate(zip(x.children(), y.children())):
        steps.extend(bridge_steps(left, right, fuel, position + (index,)))
    if replay(x, steps, fuel) != y:
        raise NotConvertibleError(f"{show(x)} and {show(y)} differ outside their sub-expressions")
    return steps


def conversion_cert(a: TyExpr, b: TyExpr, fuel: int = DEFAULT_FUEL) -> Cert:
    """A derivation a = b for types that decide_ty_eq identifies"""
    verdict = decide_ty_eq(a, b, fuel)
    if verdict is not Truth.TRUE:
        raise NotConvertibleError(f"{show(a)} = {show(b)} is {verdict}")
    steps = (invert(compl_steps(a, fuel))
             + bridge_steps(quote(norm(a, fuel)), quote(norm(b, fuel)), fuel)
             + compl_steps(b, fuel))
    return Cert(a, b, steps)


# Derived laws and the eta composites

def app_sub_cert(t: TmExpr, g: SubExpr, a: TyExpr) -> Cert:
    """(app t)[g+] = app (t[g]) through beta, lam[] and eta"""
    steps = [EqStep.from_redex(r) for r in app_sub_chain(t, g, a)]
    return Cert(TInst(App(t), Plus(g, a)), App(TInst(t, g)), steps)


def eta_type_cert(b: TyExpr, a: TyExpr) -> Cert:
    """B = B[id] = B[p+ ; <q>] = B[p+][<q>]"""
    lift = Plus(P(), a)
    steps = [
        _step(RuleId.TY_ID, (), Direction.BWD, A=b),
        _step(RuleId.EXT_ETA, (1,), A=a),
        _step(RuleId.TY_COMP, A=b, g=lift, d=Sing(Q())),
    ]
    return Cert(b, Inst(Inst(b, lift), Sing(Q())), steps)


def eta_cert(f: TmExpr, a: TyExpr) -> Cert:
    """f = lam (f[p] applied to q)"""
    lift = Plus(P(), a)
    steps = [
        _step(RuleId.PI_ETA, (), Direction.BWD, A=a, f=f),
        _step(RuleId.TM_ID, (1,), Direction.BWD, t=App(f)),
        _step(RuleId.EXT_ETA, (1, 1), A=a),
        _step(RuleId.TM_COMP, (1,), t=App(f), g=lift, d=Sing(Q())),
    ] + shift(app_sub_cert(f, P(), a).steps, (1, 0))
    return Cert(f, Lam(a, TInst(App(TInst(f, P())), Sing(Q()))), steps)


# Coherence diagrams

@dataclass(frozen=True)
class Diagram:
    """Both legs of a 2-cell, as derivations between the same corners"""
    source: Expr
    target: Expr
    left: tuple[EqStep, ...]
    right: tuple[EqStep, ...]

    def legs(self) -> tuple[Cert, Cert]:
        return Cert(self.source, self.target, self.left), Cert(self.source, self.target, self.right)


def _u_id(env: dict[str, Expr], fuel: int) -> Diagram:
    return Diagram(Inst(U(), Id()), U(),
                   (_step(RuleId.TY_ID, A=U()),),
                   (_step(RuleId.U_SUB, g=Id()),))


def _u_comp(env: dict[str, Expr], fuel: int) -> Diagram:
    g, d = env["g"], env["d"]
    return Diagram(Inst(U(), Comp(g, d)), U(),
                   (_step(RuleId.TY_COMP, A=U(), g=g, d=d), _step(RuleId.U_SUB, (0,), g=g), _step(RuleId.U_SUB, g=d)),
                   (_step(RuleId.U_SUB, g=Comp(g, d)),))


def _el_id(env: dict[str, Expr], fuel: int) -> Diagram:
    t = env["t"]
    return Diagram(Inst(El(t), Id()), El(t),
                   (_step(RuleId.TY_ID, A=El(t)),),
                   (_step(RuleId.EL_SUB, t=t, g=Id()), _step(RuleId.TM_ID, (0,), t=t)))


def _el_comp(env: dict[str, Expr], fuel: int) -> Diagram:
    t, g, d = env["t"], env["g"], env["d"]
    return Diagram(Inst(El(t), Comp(g, d)), El(TInst(TInst(t, g), d)),
                   (_step(RuleId.EL_SUB, t=t, g=Comp(g, d)), _step(RuleId.TM_COMP, (0,), t=t, g=g, d=d)),
                   (_step(RuleId.TY_COMP, A=El(t), g=g, d=d), _step(RuleId.EL_SUB, (0,), t=t, g=g),
                    _step(RuleId.EL_SUB, t=TInst(t, g), g=d)))


def _pi_comp(env: dict[str, Expr], fuel: int) -> Diagram:
    a, b, g, d = env["A"], env["B"], env["g"], env["d"]
    target = Pi(Inst(Inst(a, g), d), Inst(Inst(b, Plus(g, a)), Plus(d, Inst(a, g))))
    return Diagram(Inst(Pi(a, b), Comp(g, d)), target,
                   (_step(RuleId.TY_COMP, A=Pi(a, b), g=g, d=d), _step(RuleId.PI_SUB, (0,), A=a, B=b, g=g),
                    _step(RuleId.PI_SUB, A=Inst(a, g), B=Inst(b, Plus(g, a)), g=d)),
                   (_step(RuleId.PI_SUB, A=a, B=b, g=Comp(g, d)), _step(RuleId.TY_COMP, (0,), A=a, g=g, d=d),
                    _step(DerivedLaw.TY_COMP_PLUS, (1,), B=b, g=g, d=d, A=a)))


def _pi_id(env: dict[str, Expr], fuel: int) -> Diagram:
    a, b = env["A"], env["B"]
    return Diagram(Inst(Pi(a, b), Id()), Pi(a, b),
                   (_step(RuleId.TY_ID, A=Pi(a, b)),),
                   (_step(RuleId.PI_SUB, A=a, B=b, g=Id()), _step(RuleId.TY_ID, (0,), A=a),
                    _step(DerivedLaw.TY_ID_PLUS, (1,), B=b, A=a)))


def _quote_comp(env: dict[str, Expr], fuel: int) -> Diagram:
    n, g, d = norm(env["A"], fuel), env["g"], env["d"]
    qn, mid = quote(n), inst_nty(n, g, fuel)
    return Diagram(Inst(qn, Comp(g, d)), quote(inst_nty(mid, d, fuel)),
                   tuple([_step(RuleId.TY_COMP, A=qn, g=g, d=d)]
                         + shift(invert(nat_steps(n, g, fuel)), (0,))
                         + invert(nat_steps(mid, d, fuel))),
                   tuple(invert(nat_steps(n, Comp(g, d), fuel))
                         + [_step(DerivedLaw.INST_COMP, A=qn, g=g, d=d)]))


def _quote_id(env: dict[str, Expr], fuel: int) -> Diagram:
    qn = quote(norm(env["A"], fuel))
    n = norm(qn, fuel)
    return Diagram(Inst(qn, Id()), qn,
                   (_step(RuleId.TY_ID, A=qn),),
                   tuple(invert(nat_steps(n, Id(), fuel)) + [_step(DerivedLaw.INST_ID, A=qn)]))


def _ass(env: dict[str, Expr], fuel: int) -> Diagram:
    a, g, d, h = env["A"], env["g"], env["d"], env["h"]
    return Diagram(Inst(a, Comp(g, Comp(d, h))), Inst(Inst(Inst(a, g), d), h),
                   (_step(RuleId.ASS, (1,), f=g, g=d, h=h), _step(RuleId.TY_COMP, A=a, g=Comp(g, d), d=h),
                    _step(RuleId.TY_COMP, (0,), A=a, g=g, d=d)),
                   (_step(RuleId.TY_COMP, A=a, g=g, d=Comp(d, h)), _step(RuleId.TY_COMP, A=Inst(a, g), g=d, d=h)))


def _idl(env: dict[str, Expr], fuel: int) -> Diagram:
    a, g = env["A"], env["g"]
    return Diagram(Inst(a, Comp(Id(), g)), Inst(a, g),
                   (_step(RuleId.TY_COMP, A=a, g=Id(), d=g), _step(RuleId.TY_ID, (0,), A=a)),
                   (_step(RuleId.IDL, (1,), f=g),))


def _idr(env: dict[str, Expr], fuel: int) -> Diagram:
    a, g = env["A"], env["g"]
    return Diagram(Inst(a, Comp(g, Id())), Inst(a, g),
                   (_step(RuleId.TY_COMP, A=a, g=g, d=Id()), _step(RuleId.TY_ID, A=Inst(a, g))),
                   (_step(RuleId.IDR, (1,), f=g),))


def _idl_idr(env: dict[str, Expr], fuel: int) -> Diagram:
    a, g = env["A"], env["g"]
    ident = Comp(Id(), Id())
    up = [
        _step(RuleId.TY_ID, (), Direction.BWD, A=Inst(a, Comp(g, Id()))),
        _step(RuleId.TY_COMP, (), Direction.BWD, A=a, g=Comp(g, Id()), d=Id()),
        _step(RuleId.ASS, (1,), Direction.BWD, f=g, g=Id(), h=Id()),
    ]
    through_ass = [
        _step(RuleId.TY_COMP, A=a, g=g, d=ident),
        _step(RuleId.TY_COMP, A=Inst(a, g), g=Id(), d=Id()),
        _step(RuleId.TY_ID, A=Inst(Inst(a, g), Id())),
        _step(RuleId.TY_ID, A=Inst(a, g)),
    ]
    through_idl = [
        _step(RuleId.IDL, (1, 1), f=Id()),
        _step(RuleId.TY_COMP, A=a, g=g, d=Id()),
        _step(RuleId.TY_ID, A=Inst(a, g)),
    ]
    return Diagram(Inst(a, Comp(g, Id())), Inst(a, g), tuple(up + through_ass), tuple(up + through_idl))


DIAGRAMS: dict[str, Callable[[dict[str, Expr], int], Diagram]] = {
    "UId": _u_id,
    "UComp": _u_comp,
    "ElId": _el_id,
    "ElComp": _el_comp,
    "PiComp": _pi_comp,
    "PiId": _pi_id,
    "QuoteComp": _quote_comp,
    "QuoteId": _quote_id,
    "Ass": _ass,
    "Idl": _idl,
    "Idr": _idr,
    "IdlIdr": _idl_idr,
}

PENTAGON = ("Ass", "Idl", "Idr")

DIAGRAM_BINDINGS: dict[str, tuple[str, ...]] = {
    "UId": (),
    "UComp": ("g", "d"),
    "ElId": ("t",),
    "ElComp": ("t", "g", "d"),
    "PiComp": ("A", "B", "g", "d"),
    "PiId": ("A", "B"),
    "QuoteComp": ("A", "g", "d"),
    "QuoteId": ("A",),
    "Ass": ("A", "g", "d", "h"),
    "Idl": ("A", "g"),
    "Idr": ("A", "g"),
    "IdlIdr": ("A", "g"),
}


@dataclass(frozen=True)
class DiagramReport:
    diagram: str
    left: ReplayReport
    right: ReplayReport
    endpoints_agree: bool
    model: Truth

    @property
    def passed(self) -> bool:
        return bool(self.left) and bool(self.right) and self.endpoints_agree and self.model is not Truth.FALSE


@dataclass(frozen=True)
class SuiteReport:
    diagrams: tuple[DiagramReport, ...]
    corners: tuple[tuple[str, Truth], ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.diagrams) and all(v is Truth.TRUE for _, v in self.corners)


def build_diagram(diagram_id: str, bindings: dict[str, Expr], fuel: int = DEFAULT_FUEL) -> Diagram:
    try:
        builder = DIAGRAMS[diagram_id]
    except KeyError:
        raise UnknownDiagramError(f"no diagram named '{diagram_id}'")
    missing = [name for name in DIAGRAM_BINDINGS[diagram_id] if name not in bindings]
    if missing:
        raise UnknownDiagramError(f"{diagram_id} needs bindings for {', '.join(missing)}")
    return builder(bindings, fuel)


def coherence_2cell(diagram_id: str, bindings: dict[str, Expr], fuel: int = DEFAULT_FUEL,
                    signatures: Iterable[Signature] | None = None, cap: int = DEFAULT_CAP) -> DiagramReport:
    """Replays both legs of a diagram, compares their endpoints and checks
    that the finite-set model identifies the corners. `bindings` may carry
    a context under "ctx" for the model check; it defaults to the empty one."""
    diagram = build_diagram(diagram_id, bindings, fuel)
    left, right = diagram.legs()
    left_report, right_report = check_cert(left, fuel), check_cert(right, fuel)
    endpoints = left.source == right.source and left.target == right.target
    ctx: CtxExpr = bindings.get("ctx", Empty())
    sigs = small_signatures() if signatures is None else signatures
    model = agreement(ctx, diagram.source, diagram.target, sigs, cap, fuel)
    return DiagramReport(diagram_id, left_report, right_report, endpoints, model)


def pentagon_suite(bindings: dict[str, Expr], fuel: int = DEFAULT_FUEL,
                   signatures: Iterable[Signature] | None = None, cap: int = DEFAULT_CAP) -> SuiteReport:
    sigs = None if signatures is None else tuple(signatures)
    reports = tuple(coherence_2cell(name, bindings, fuel, sigs, cap) for name in PENTAGON)
    a, g, d, h = bindings["A"], bindings["g"], bindings["d"], bindings["h"]
    flat = Inst(Inst(Inst(a, g), d), h)
    corners = (
        ("A[g ; (d ; h)] = A[g][d][h]", decide_ty_eq(Inst(a, Comp(g, Comp(d, h))), flat, fuel)),
        ("A[(g ; d) ; h] = A[g][d][h]", decide_ty_eq(Inst(a, Comp(Comp(g, d), h)), flat, fuel)),
        ("A[g ; d][h] = A[g][d ; h]", decide_ty_eq(Inst(Inst(a, Comp(g, d)), h), Inst(Inst(a, g), Comp(d, h)), fuel)),
        ("A[id ; g] = A[g]", decide_ty_eq(Inst(a, Comp(Id(), g)), Inst(a, g), fuel)),
        ("A[g ; id] = A[g]", decide_ty_eq(Inst(a, Comp(g, Id())), Inst(a, g), fuel)),
    )
    return SuiteReport(reports, corners)


def idl_implies_idr(bindings: dict[str, Expr], fuel: int = DEFAULT_FUEL) -> tuple[Cert, Cert]:
    """Two derivations of the right identity triangle that use the left
    identity and associativity but never the right identity law"""
    return build_diagram("IdlIdr", bindings, fuel).legs()


# Text format

def show_position(position: Position) -> str:
    return ".".join(str(i) for i in position) if position else "root"


def _rule_name(rule: RuleId | DerivedLaw) -> str:
    return rule.value


def dump_cert(c: Cert) -> str:
    lines = [f"source: {show(c.source)}", f"target: {show(c.target)}"]
    for s in c.steps:
        parts = [f"step {_rule_name(s.rule)} at {show_position(s.position)} {s.direction.value}"]
        parts += [f"{name}={show(value)}" for name, value in s.bindings]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


_RULES_BY_NAME: dict[str, RuleId | DerivedLaw] = {r.value: r for r in RuleId} | {r.value: r for r in DerivedLaw}
_STEP = re.compile(r"step\s+(\S+)\s+at\s+(\S+)\s+(fwd|bwd)(.*)$")
_BINDING = re.compile(r"([A-Za-z_]\w*)=(.*?)(?=\s+[A-Za-z_]\w*=|\s*$)")


def _binding_sorts(rule: RuleId | DerivedLaw) -> dict[str, str]:
    if isinstance(rule, DerivedLaw):
        return dict(DERIVED_SORTS[rule])
    return {m.name: m.sort for law in LAWS if law.rule is rule for m in law.metavars}


def _parse_position(text: str, line: int) -> Position:
    if text == "root":
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise CertFormatError(f"bad position '{text}'", line, 1)


def load_cert(text: str) -> Cert:
    source = target = None
    steps: list[EqStep] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            if line.startswith("source:"):
                source = parse(line[len("source:"):], first_line=number)
            elif line.startswith("target:"):
                target = parse(line[len("target:"):], first_line=number)
            elif line.startswith("step"):
                steps.append(_parse_step(line, number))
            else:
                raise CertFormatError("expected 'source:', 'target:' or 'step'", number, 1)
        except CertFormatError:
            raise
        except ParseError as err:
            raise CertFormatError(err.message, number, err.column)
    if source is None or target is None:
        raise CertFormatError("certificate needs a source and a target line", 1, 1)
    return Cert(source, target, tuple(steps))


def _parse_step(line: str, number: int) -> EqStep:
    m = _STEP.match(line)
    if m is None:
        raise CertFormatError("malformed step line", number, 1)
    name, position, direction, rest = m.groups()
    rule = _RULES_BY_NAME.get(name)
    if rule is None:
        raise CertFormatError(f"unknown law '{name}'", number, m.start(1) + 1)
    sorts = _binding_sorts(rule)
    bindings = []
    for b in _BINDING.finditer(rest):
        key, value = b.group(1), b.group(2)
        if key not in sorts:
            raise CertFormatError(f"{name} has no metavariable '{key}'", number, m.start(4) + b.start(1) + 1)
        bindings.append((key, parse(value, sorts[key])))
    return EqStep(rule, _parse_position(position, number), Direction(direction), tuple(bindings))


class NotConvertibleError(Exception):
    """The two expressions are not identified by the decision procedure"""
    pass

class UnknownDiagramError(Exception):
    """No such coherence diagram, or its bindings are incomplete"""
    pass

class CertFormatError(ParseError):
    """Certificate text is malformed"""
    pass
