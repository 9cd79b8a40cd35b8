from random import Random

import pytest

from kernel_lib.generators import Generator
from kernel_lib.laws import RuleId
from kernel_lib.models import (
    FinSetModel, FunctionTable, ModelTooLargeError, NormalFormModel, agreement,
    check_model_equations, consistency_probe, interpret, show_env, show_value,
    small_signatures,
)
from kernel_lib.normal import norm
from kernel_lib.rewrite import Truth
from kernel_lib.syntax import (
    El, Empty, Ext, Inst, InU, Lam, P, Pi, Q, Signature, TInst, U, id_combinator,
)


@pytest.fixture
def model(logger, sig21):
    return FinSetModel(logger, sig21)


def test_contexts_enumerate_environments(logger):
    m = FinSetModel(logger, Signature(2, (1, 1)))
    assert m.eval_ctx(Empty()) == ((),)
    assert m.eval_ctx(Ext(Empty(), U())) == (((), 0), ((), 1))
    assert len(FinSetModel(logger, Signature(1, (3,))).eval_ctx(Ext(Empty(), El(InU(0))))) == 3


def test_universe_and_fibres(model):
    assert model.eval_ty(U())(()) == (0, 1)
    assert model.eval_ty(El(InU(0)))(()) == (0, 1)
    assert model.eval_ty(El(InU(1)))(()) == (0,)
    assert model.eval_tm(TInst(InU(1), P()))(((), 0)) == 1


def test_dependent_function_space(logger):
    m = FinSetModel(logger, Signature(2, (1, 2)))
    tables = m.eval_ty(Pi(U(), El(Q())))(())
    assert len(tables) == 2
    assert FunctionTable(((0, 0), (1, 1))) in tables


def test_identity_combinator_tabulates(model):
    value = model.eval_tm(id_combinator())(())
    inner = FunctionTable(((0, 0), (1, 1)))
    assert value == FunctionTable(((0, inner), (1, FunctionTable(((0, 0),)))))
    assert value(0)(1) == 1
    assert show_value(value) == "{0 -> {0 -> 0, 1 -> 1}, 1 -> {0 -> 0}}"


def test_table_equality_ignores_order():
    assert FunctionTable(((0, 1), (1, 0))) == FunctionTable(((1, 0), (0, 1)))
    assert len({FunctionTable(((0, 1), (1, 0))), FunctionTable(((1, 0), (0, 1)))}) == 1


def test_environments_print_left_to_right():
    assert show_env(((((), 1), 0))) == "(1, 0)"
    assert show_env(()) == "()"


def test_agreement_of_types(model):
    ctx = Ext(Empty(), U())
    assert model.agree(ctx, Inst(U(), P()), U()) is Truth.TRUE
    assert model.agree(Empty(), U(), El(InU(1))) is Truth.FALSE


def test_cap_bounds_enumeration(logger):
    small = FinSetModel(logger, Signature(2, (2, 2)), cap=3)
    with pytest.raises(ModelTooLargeError):
        small.eval_ty(Pi(U(), El(Q())))(())
    assert small.agree(Empty(), Pi(U(), El(Q())), Pi(U(), El(Q()))) is Truth.UNKNOWN


def test_small_signatures():
    sigs = small_signatures()
    assert len(sigs) == 13
    assert Signature(0, ()) in sigs and Signature(2, (2, 2)) in sigs


def test_agreement_skips_ill_formed_signatures():
    assert agreement(Empty(), El(InU(1)), El(InU(1)), [Signature(1, (1,))]) is Truth.UNKNOWN
    assert agreement(Empty(), El(InU(1)), El(InU(1)), small_signatures()) is Truth.TRUE
    assert agreement(Empty(), El(InU(0)), El(InU(1)), small_signatures()) is Truth.FALSE


@pytest.mark.parametrize("rule", list(RuleId))
def test_laws_hold_in_the_model(logger, sig21, rule):
    generator = Generator(logger, sig21, Random(5))
    samples = [generator.equation(rule) for _ in range(5)]
    report = check_model_equations(FinSetModel(logger, sig21), samples)
    assert report.checked == 5
    assert report.passed


@pytest.mark.parametrize("x_card", [0, 1, 3])
def test_consistency_probe(logger, x_card):
    report = consistency_probe(FinSetModel(logger, Signature(x_card, (1,) * x_card)))
    assert report.passed
    assert report.cardinality == x_card
    assert len(report.closed_codes) == x_card


def test_normal_form_model_agrees_with_norm():
    a = Inst(Pi(U(), El(Q())), P())
    assert interpret(NormalFormModel(), a) == norm(a)
    assert interpret(NormalFormModel(), Lam(U(), Q())) == Lam(U(), Q())
