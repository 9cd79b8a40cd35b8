import pytest

from kernel_lib.wellformed import Checker, IllFormedError, SubOk, TmOk, TyOk
from kernel_lib.syntax import (
    App, El, Empty, Eps, Ext, Id, InEl, Inst, InU, Lam, P, Pi, Plus, Q, Sing, TInst,
    U, arrow, id_combinator,
)


@pytest.fixture
def checker(logger, sig):
    return Checker(logger, sig)


def test_codes_of_the_base_family(checker):
    ctx = Ext(Empty(), U())
    assert checker.check_ty(ctx, El(Q())) == TyOk(ctx, El(Q()))
    assert checker.check_tm(Empty(), El(InU(0)), InEl(0, 0)) == TmOk(Empty(), El(InU(0)), InEl(0, 0))


def test_q_needs_a_variable(checker):
    with pytest.raises(IllFormedError) as err:
        checker.check_ty(Empty(), El(Q()))
    assert err.value.subtree == Q()


def test_indices_checked_against_signature(checker):
    assert checker.infer_tm(InU(0), Empty()) == U()
    assert not checker.accepts(Empty(), InU(1))
    assert not checker.accepts(Empty(), InEl(0, 1))
    assert not checker.accepts(Ext(Empty(), U()), InU(0))


def test_constants_weaken_through_eps(checker):
    ctx = Ext(Empty(), U())
    assert checker.infer_tm(TInst(InU(0), Eps()), ctx) == Inst(U(), Eps())


def test_identity_combinator(checker):
    ty = checker.infer_tm(id_combinator(), Empty())
    assert ty == Pi(U(), arrow(El(Q()), El(Q())))


def test_application_in_extended_context(checker):
    assert checker.infer_tm(App(Lam(U(), Q())), Ext(Empty(), U())) == U()
    with pytest.raises(IllFormedError):
        checker.infer_tm(App(Lam(U(), Q())), Ext(Empty(), El(InU(0))))
    with pytest.raises(IllFormedError):
        checker.infer_tm(App(InU(0)), Ext(Empty(), U()))


def test_substitution_codomains(checker):
    one = Ext(Empty(), U())
    two = Ext(one, U())
    assert checker.infer_sub(P(), one) == Empty()
    assert checker.infer_sub(Id(), two) == two
    assert checker.infer_sub(Plus(P(), U()), two) == one
    assert checker.infer_sub(Sing(Q()), one) == Ext(one, Inst(U(), P()))
    with pytest.raises(IllFormedError):
        checker.infer_sub(Plus(Id(), U()), Empty())
    assert checker.check_sub(two, P()) == SubOk(two, one, P())


def test_lift_domain_must_match(checker):
    two = Ext(Ext(Empty(), U()), El(Q()))
    assert not checker.accepts(two, Plus(Id(), U()))
    assert checker.accepts(two, Plus(Id(), El(Q())))


def test_contexts(checker):
    assert checker.accepts(Empty(), Ext(Ext(Empty(), U()), El(Q())))
    assert not checker.accepts(Empty(), Ext(Empty(), El(Q())))


def test_application_under_lift_checks_against_pushed_type(checker):
    base = Ext(Ext(Ext(Empty(), Pi(U(), U())), U()), U())
    pushed = TInst(App(Q()), Plus(P(), U()))
    applied = App(TInst(Q(), P()))
    assert checker.infer_tm(pushed, base) == Inst(U(), Plus(P(), U()))
    assert checker.infer_tm(applied, base) == U()
    ctx = Ext(base, El(pushed))
    assert checker.check_tm(ctx, Inst(El(applied), P()), Q()) == TmOk(ctx, Inst(El(applied), P()), Q())
