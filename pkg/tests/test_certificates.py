from random import Random

import pytest

from kernel_lib.certificates import (
    DIAGRAMS, PENTAGON, Cert, CertFormatError, DerivedLaw, EqStep, NotConvertibleError,
    UnknownDiagramError, app_sub_cert, bridge_steps, check_cert, coherence_2cell, compl_cert,
    conversion_cert, dump_cert, eta_cert, eta_type_cert, idl_implies_idr, load_cert,
    nat_cert, pentagon_suite, replay, show_position,
)
from kernel_lib.generators import Generator
from kernel_lib.laws import Direction, RuleId
from kernel_lib.normal import NEl, NPi, NU
from kernel_lib.rewrite import Truth
from kernel_lib.syntax import (
    App, Comp, El, Empty, Eps, Ext, Id, Inst, InU, Lam, P, Pi, Plus, Q, Signature, Sing, TInst, U,
)


SMALL = (Signature(1, (1,)), Signature(2, (2, 1)))


def test_normal_type_needs_no_steps():
    assert compl_cert(U()).steps == ()
    assert check_cert(compl_cert(Pi(U(), U())))


def test_identity_instance_certificate():
    cert = compl_cert(Inst(U(), Id()))
    assert (cert.source, cert.target) == (U(), Inst(U(), Id()))
    assert cert.steps == (EqStep(RuleId.U_SUB, (), Direction.BWD, (("g", Id()),)),)
    assert check_cert(cert)


def test_nested_instances():
    cert = compl_cert(Inst(Inst(U(), P()), Id()))
    assert len(cert.steps) == 2
    assert check_cert(cert)


def test_el_certificate_replays_machine_in_reverse():
    a = El(TInst(TInst(Q(), P()), Sing(InU(0))))
    cert = compl_cert(a)
    assert cert.source == El(Q())
    assert len(cert.steps) == 3
    assert check_cert(cert)


def test_naturality_certificate():
    n = NPi(NU(), NEl(Q()))
    cert = nat_cert(n, P())
    assert cert.target == Inst(Pi(U(), El(Q())), P())
    assert check_cert(cert)


def test_completeness_on_generated_types(generator):
    for _ in range(100):
        ctx = generator.ctx(generator.rng.randint(0, 2))
        a = generator.ty(ctx, 8)
        cert = compl_cert(a)
        assert cert.target == a
        assert check_cert(cert), dump_cert(cert)


def test_wrong_target_reported_after_last_step():
    report = check_cert(Cert(U(), Pi(U(), U()), ()))
    assert not report
    assert report.failed_step == 0


def test_wrong_step_reported_at_its_index():
    steps = (EqStep(RuleId.U_SUB, (), Direction.BWD, (("g", Id()),)),
             EqStep(RuleId.TY_ID, (0,), Direction.FWD, (("A", U()),)))
    report = check_cert(Cert(U(), U(), steps))
    assert report.failed_step == 1
    assert "does not match" in report.reason


def test_wrong_position_reported():
    steps = (EqStep(RuleId.TY_ID, (3,), Direction.FWD, (("A", U()),)),)
    assert check_cert(Cert(U(), U(), steps)).failed_step == 0


def test_conversion_certificate():
    cert = conversion_cert(Inst(Pi(U(), El(Q())), P()), Pi(Inst(U(), Id()), El(Q())))
    assert check_cert(cert)
    with pytest.raises(NotConvertibleError):
        conversion_cert(U(), El(InU(0)))


def test_bridge_eta_and_constants():
    assert replay(Lam(U(), App(Q())), bridge_steps(Lam(U(), App(Q())), Q())) == Q()
    assert replay(InU(0), bridge_steps(InU(0), TInst(InU(0), Eps()))) == TInst(InU(0), Eps())
    assert replay(TInst(InU(0), Eps()), bridge_steps(TInst(InU(0), Eps()), InU(0))) == InU(0)


def test_eta_certificates():
    assert check_cert(eta_type_cert(U(), El(InU(0))))
    cert = eta_cert(Q(), U())
    assert cert.target == Lam(U(), TInst(App(TInst(Q(), P())), Sing(Q())))
    assert check_cert(cert)


@pytest.mark.parametrize("bindings", [
    {"g": P(), "d": P(), "ctx": Ext(Ext(Empty(), U()), U())},
    {"g": Id(), "d": Eps(), "ctx": Empty()},
])
def test_u_composite_diagram(bindings):
    report = coherence_2cell("UComp", bindings, signatures=SMALL)
    assert report.passed
    assert report.model is Truth.TRUE


def test_u_identity_diagram():
    report = coherence_2cell("UId", {})
    assert report.left and report.right
    assert report.endpoints_agree
    assert report.model is Truth.TRUE


def test_pi_composite_uses_lift_composition():
    bindings = {"A": U(), "B": El(Q()), "g": P(), "d": P(), "ctx": Ext(Ext(Empty(), U()), U())}
    report = coherence_2cell("PiComp", bindings, signatures=SMALL)
    assert report.passed


def test_quote_diagrams():
    a = Inst(Pi(U(), El(Q())), Id())
    assert coherence_2cell("QuoteId", {"A": a}, signatures=SMALL).passed
    assert coherence_2cell("QuoteComp", {"A": a, "g": Id(), "d": Id()}, signatures=SMALL).passed


def test_pentagon_with_identities():
    suite = pentagon_suite({"A": U(), "g": Id(), "d": Id(), "h": Id()}, signatures=SMALL)
    assert suite.passed
    assert [r.diagram for r in suite.diagrams] == list(PENTAGON)
    assert len(suite.corners) == 5


def test_right_identity_from_left_identity():
    left, right = idl_implies_idr({"A": El(InU(0)), "g": Eps()})
    assert check_cert(left) and check_cert(right)
    assert (left.source, left.target) == (right.source, right.target)
    for cert in (left, right):
        assert all(s.rule is not RuleId.IDR for s in cert.steps)


def test_unknown_diagram():
    with pytest.raises(UnknownDiagramError):
        coherence_2cell("Hexagon", {})
    with pytest.raises(UnknownDiagramError):
        coherence_2cell("UComp", {"g": Id()})


@pytest.mark.parametrize("diagram_id", sorted(DIAGRAMS))
def test_diagrams_on_generated_bindings(logger, sig, diagram_id):
    generator = Generator(logger, sig, Random(3))
    for _ in range(4):
        bindings = generator.diagram_bindings(diagram_id)
        report = coherence_2cell(diagram_id, bindings, signatures=(sig,))
        assert report.passed, f"{diagram_id}: {report}"


def test_derived_steps_replay():
    source = Inst(El(Q()), Plus(Comp(P(), P()), U()))
    target = Inst(Inst(El(Q()), Plus(P(), U())), Plus(P(), Inst(U(), P())))
    forward = EqStep(DerivedLaw.TY_COMP_PLUS, (), Direction.FWD,
                     (("B", El(Q())), ("g", P()), ("d", P()), ("A", U())))
    assert replay(source, [forward]) == target
    assert replay(target, [forward.inverse()]) == source
    lifted = EqStep(DerivedLaw.TY_ID_PLUS, (), Direction.FWD, (("B", U()), ("A", U())))
    assert replay(Inst(U(), Plus(Id(), U())), [lifted]) == U()


def test_derived_step_needs_a_normal_type():
    step = EqStep(DerivedLaw.INST_ID, (), Direction.FWD, (("A", Inst(U(), Id())),))
    report = check_cert(Cert(Inst(U(), Id()), U(), (step,)))
    assert report.failed_step == 0


def test_text_format():
    cert = compl_cert(Inst(U(), Id()))
    assert dump_cert(cert) == "source: U\ntarget: U[id]\nstep USub at root bwd g=id\n"
    assert load_cert(dump_cert(cert)) == cert


def test_text_format_keeps_bindings_with_spaces():
    cert = conversion_cert(Inst(Pi(U(), El(Q())), P()), Pi(U(), El(Q())))
    assert load_cert(dump_cert(cert)) == cert


def test_positions_print_dotted():
    assert show_position(()) == "root"
    assert show_position((1, 0, 1)) == "1.0.1"


def test_text_format_errors():
    with pytest.raises(CertFormatError) as err:
        load_cert("source: U\ntarget: U\nstep Foo at root fwd\n")
    assert err.value.line == 3
    with pytest.raises(CertFormatError):
        load_cert("source: U\ntarget: U\nstep TyId at x.y fwd A=U\n")
    with pytest.raises(CertFormatError):
        load_cert("source: U\ntarget: U\nstep TyId at root fwd B=U\n")
    with pytest.raises(CertFormatError):
        load_cert("source: U\n")
    with pytest.raises(CertFormatError) as err:
        load_cert("source: U\ntarget: Pi(U\n")
    assert err.value.line == 2


def test_application_under_lift_certificates():
    pushed = TInst(App(Q()), Plus(P(), U()))
    applied = App(TInst(Q(), P()))
    assert check_cert(app_sub_cert(Q(), P(), U()))
    cert = compl_cert(El(pushed))
    assert cert.source == El(applied)
    assert [s.rule for s in cert.steps] == [RuleId.PI_ETA, RuleId.LAM_SUB, RuleId.PI_BETA]
    assert check_cert(cert)
    assert check_cert(conversion_cert(El(pushed), El(applied)))
