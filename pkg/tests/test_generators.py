from random import Random

import pytest

from kernel_lib.certificates import DIAGRAM_BINDINGS
from kernel_lib.generators import Generator
from kernel_lib.laws import RuleId
from kernel_lib.syntax import Empty
from kernel_lib.wellformed import Checker


def test_same_seed_same_syntax(logger, sig):
    first = Generator(logger, sig, Random(42))
    second = Generator(logger, sig, Random(42))
    for _ in range(20):
        ctx = first.ctx()
        assert ctx == second.ctx()
        assert first.ty(ctx, 6) == second.ty(ctx, 6)


def test_generated_syntax_is_well_formed(logger, sig, generator):
    checker = Checker(logger, sig)
    for _ in range(50):
        ctx = generator.ctx(generator.rng.randint(0, 2))
        assert checker.accepts(Empty(), ctx)
        assert checker.accepts(ctx, generator.ty(ctx, 6))
        sub, cod = generator.sub(ctx, 4)
        assert checker.infer_sub(sub, ctx) == cod
        found = generator.tm(ctx, 5)
        if found is not None:
            assert checker.infer_tm(found[0], ctx) == found[1]


@pytest.mark.parametrize("rule", list(RuleId))
def test_equation_instances(logger, sig, generator, rule):
    checker = Checker(logger, sig)
    instance = generator.equation(rule)
    assert instance.rule is rule
    assert checker.accepts(instance.ctx, instance.lhs)
    assert checker.accepts(instance.ctx, instance.rhs)


@pytest.mark.parametrize("diagram_id", sorted(DIAGRAM_BINDINGS))
def test_diagram_bindings_cover_the_diagram(generator, diagram_id):
    bindings = generator.diagram_bindings(diagram_id)
    assert set(DIAGRAM_BINDINGS[diagram_id]) | {"ctx"} == set(bindings)


def test_function_terms(generator):
    ctx = generator.ctx(1)
    f, ty = generator.pi_term(ctx, 5)
    assert generator.checker.infer_tm(f, ctx) == ty
