from dataclasses import dataclass

from kernel_lib.rewrite import DEFAULT_FUEL, FuelExhaustedError, Truth, canon, convertible
from kernel_lib.syntax import El, Inst, Pi, Plus, SubExpr, TInst, TmExpr, TyExpr, U


class NTy:
    """Types with every instantiation eliminated"""
    pass


@dataclass(frozen=True)
class NU(NTy):
    pass


@dataclass(frozen=True)
class NEl(NTy):
    """The stored term is a machine normal form"""
    tm: TmExpr


@dataclass(frozen=True)
class NPi(NTy):
    dom: NTy
    cod: NTy


def nel(t: TmExpr, fuel: int = DEFAULT_FUEL) -> NEl:
    return NEl(canon(t, fuel))


def quote(n: NTy) -> TyExpr:
    match n:
        case NU():
            return U()
        case NEl(t):
            return El(t)
        case NPi(dom, cod):
            return Pi(quote(dom), quote(cod))
    raise TypeError(f"not a normal type: {n!r}")


def inst_nty(n: NTy, g: SubExpr, fuel: int = DEFAULT_FUEL) -> NTy:
    """Instantiates a normal type along g; the codomain of a function type is
    instantiated along the lift of g over the quoted domain."""
    match n:
        case NU():
            return n
        case NEl(t):
            return nel(TInst(t, g), fuel)
        case NPi(dom, cod):
            return NPi(inst_nty(dom, g, fuel), inst_nty(cod, Plus(g, quote(dom)), fuel))
    raise TypeError(f"not a normal type: {n!r}")


def norm(a: TyExpr, fuel: int = DEFAULT_FUEL) -> NTy:
    """The normal form of a type. Raises FuelExhaustedError when an embedded
    term does not normalize within the fuel."""
    match a:
        case U():
            return NU()
        case El(t):
            return nel(t, fuel)
        case Pi(dom, cod):
            return NPi(norm(dom, fuel), norm(cod, fuel))
        case Inst(ty, sub):
            return inst_nty(norm(ty, fuel), sub, fuel)
    raise TypeError(f"not a type: {a!r}")


def cover_eq(n: NTy, m: NTy, fuel: int = DEFAULT_FUEL) -> Truth:
    match n, m:
        case NU(), NU():
            return Truth.TRUE
        case NEl(t0), NEl(t1):
            return convertible(t0, t1, fuel)
        case NPi(dom0, cod0), NPi(dom1, cod1):
            doms = cover_eq(dom0, dom1, fuel)
            if doms is Truth.FALSE:
                return doms
            return Truth.all_of(doms, cover_eq(cod0, cod1, fuel))
    return Truth.FALSE


def decide_ty_eq(a: TyExpr, b: TyExpr, fuel: int = DEFAULT_FUEL) -> Truth:
    try:
        n, m = norm(a, fuel), norm(b, fuel)
    except FuelExhaustedError:
        return Truth.UNKNOWN
    return cover_eq(n, m, fuel)
