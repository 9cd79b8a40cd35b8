from random import Random

from kernel_lib.generators import Generator
from kernel_lib.normal import NEl, NPi, NU, cover_eq, decide_ty_eq, inst_nty, norm, quote
from kernel_lib.rewrite import Truth
from kernel_lib.syntax import (
    Comp, El, Id, Inst, InU, P, Pi, Q, Sing, TInst, U, arrow,
)


def test_weakening_u():
    assert norm(Inst(U(), P())) == NU()
    assert norm(Inst(Inst(U(), P()), Id())) == NU()


def test_el_keeps_a_normal_code():
    assert norm(Inst(El(Q()), P())) == NEl(TInst(Q(), P()))
    assert norm(El(TInst(TInst(Q(), P()), Sing(InU(0))))) == NEl(Q())


def test_pi_lifts_its_substitution():
    assert norm(Inst(Pi(U(), El(Q())), P())) == NPi(NU(), NEl(Q()))
    assert inst_nty(NPi(NU(), NEl(Q())), P()) == NPi(NU(), NEl(Q()))


def test_quote():
    assert quote(NPi(NU(), NEl(Q()))) == Pi(U(), El(Q()))


def test_distinct_heads_differ():
    assert cover_eq(NU(), NEl(InU(0))) is Truth.FALSE
    assert decide_ty_eq(U(), arrow(U(), U())) is Truth.FALSE
    assert decide_ty_eq(Pi(U(), U()), Pi(El(InU(0)), U())) is Truth.FALSE


def test_equal_types():
    assert decide_ty_eq(Inst(U(), P()), U()) is Truth.TRUE
    assert decide_ty_eq(arrow(U(), U()), Pi(U(), U())) is Truth.TRUE


def test_undecided_within_fuel():
    slow = El(TInst(TInst(Q(), P()), Sing(InU(0))))
    assert decide_ty_eq(slow, El(Q()), fuel=1) is Truth.UNKNOWN
    assert decide_ty_eq(slow, El(Q())) is Truth.TRUE


def test_generated_types(logger, sig):
    generator = Generator(logger, sig, Random(11))
    for _ in range(100):
        base = generator.ctx(generator.rng.randint(0, 2))
        d, mid = generator.sub(base, 3)
        g, top = generator.sub(mid, 3)
        a = generator.ty(top, 7)
        n = norm(a)
        assert norm(quote(n)) == n
        assert decide_ty_eq(a, a) is Truth.TRUE
        assert cover_eq(inst_nty(n, Id()), n) is Truth.TRUE
        assert cover_eq(inst_nty(n, Comp(g, d)), inst_nty(inst_nty(n, g), d)) is Truth.TRUE
