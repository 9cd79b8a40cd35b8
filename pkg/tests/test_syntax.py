import pytest

from kernel_lib.syntax import (
    App, Comp, El, Id, Inst, InU, Lam, P, Pi, Plus, PositionError, Q,
    Signature, SignatureError, Sing, TInst, U, arrow, apply_to,
    id_combinator, is_closed_constant, replace_at, size, sub_ext, subterms,
    subtree_at,
)


def test_signature_parse():
    sig = Signature.parse("x=2;y=2,1")
    assert sig == Signature(2, (2, 1))
    assert str(sig) == "x=2;y=2,1"
    assert Signature.parse(" x=0 ") == Signature(0, ())


@pytest.mark.parametrize("text", ["x=2;y=1", "y=1", "x=1;z=1", "x=a;y=1", "x=1;y=-1"])
def test_signature_rejects(text):
    with pytest.raises(SignatureError):
        Signature.parse(text)


def test_signature_membership(sig21):
    assert sig21.has_base(1) and not sig21.has_base(2)
    assert sig21.has_fibre(0, 1)
    assert not sig21.has_fibre(1, 1)


def test_size_counts_nodes():
    assert size(U()) == 1
    assert size(Pi(U(), El(Q()))) == 4
    assert size(Inst(U(), Comp(P(), Id()))) == 5


def test_subterms_are_preorder():
    walk = list(subterms(Comp(P(), Plus(Id(), U()))))
    assert [position for position, _ in walk] == [(), (0,), (1,), (1, 0), (1, 1)]
    assert walk[3][1] == Id()


def test_positions_address_subtrees():
    e = Inst(El(Q()), Sing(InU(0)))
    assert subtree_at(e, (0, 0)) == Q()
    assert replace_at(e, (1, 0), InU(1)) == Inst(El(Q()), Sing(InU(1)))
    assert replace_at(e, (), U()) == U()
    with pytest.raises(PositionError):
        subtree_at(e, (0, 1))
    with pytest.raises(PositionError):
        replace_at(e, (2,), U())


def test_combinators():
    assert arrow(U(), U()) == Pi(U(), Inst(U(), P()))
    assert apply_to(Q(), InU(0)) == TInst(App(Q()), Sing(InU(0)))
    assert sub_ext(Id(), U(), Q()) == Comp(Plus(Id(), U()), Sing(Q()))
    assert id_combinator() == Lam(U(), Lam(El(Q()), Q()))


def test_closed_constants():
    assert is_closed_constant(InU(0))
    assert not is_closed_constant(TInst(InU(0), Id()))
