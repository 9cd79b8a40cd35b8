import io
import json
import logging

import pytest
from rich.console import Console

from kernel import Kernel, build_parser, command_from
from kernel_lib import certificates as certs
from kernel_lib.certificates import check_cert, load_cert
from kernel_lib.commands import (
    EXIT_FAILED, EXIT_OK, EXIT_USAGE, Cert, Check, Coherence, CommandRunner, Eq, Eval,
    Fuzz, Norm, Settings,
)
from kernel_lib.syntax import Signature


@pytest.fixture
def output():
    return io.StringIO()


@pytest.fixture
def runner(logger, output):
    console = Console(file=output, color_system=None, width=100, highlight=False)
    return CommandRunner(logger, Settings(), console)


@pytest.fixture
def write(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def test_norm_prints_normal_form_and_certificate(runner, output, write, tmp_path):
    source = write("a.tt", "context: <> |> U\nU[p][id]\n")
    out = str(tmp_path / "a.cert")
    assert runner.run(Norm(source, out)) == EXIT_OK
    lines = output.getvalue().splitlines()
    assert lines[0] == "U"
    assert lines[1] == "certificate: 2 steps, valid"
    assert check_cert(load_cert((tmp_path / "a.cert").read_text()))


def test_norm_rejects_ill_formed_input(runner, write):
    assert runner.run(Norm(write("a.tt", "context: <>\nU[p]\n"))) == EXIT_FAILED


def test_check_identity_combinator(runner, output, write):
    assert runner.run(Check(write("id.tt", "lam(U, lam(El(q), q))\n"))) == EXIT_OK
    assert output.getvalue().strip() == "lam(U, lam(El(q), q)) : Pi(U, Pi(El(q), El(q)[p]))"


def test_check_rejects_with_subtree(runner, output, write):
    assert runner.run(Check(write("q.tt", "q\n"))) == EXIT_FAILED
    assert output.getvalue().startswith("rejected:")


def test_parse_and_file_errors(runner, output, write, tmp_path):
    assert runner.run(Check(write("bad.tt", "Pi(U\n"))) == EXIT_USAGE
    assert output.getvalue().startswith("parse error: line 1")
    assert runner.run(Check(str(tmp_path / "missing.tt"))) == EXIT_USAGE


def test_eq_verdicts(runner, output, write, tmp_path):
    u = write("u.tt", "U\n")
    weak = write("weak.tt", "context: <> |> U\nU[p]\n")
    fn = write("fn.tt", "Pi(U, U)\n")
    cert = str(tmp_path / "eq.cert")
    assert runner.run(Eq(weak, u, cert)) == EXIT_OK
    assert runner.run(Eq(u, fn)) == EXIT_FAILED
    assert output.getvalue().splitlines()[:2] == ["true", "false"]
    assert check_cert(load_cert((tmp_path / "eq.cert").read_text()))


def test_eq_needs_matching_sorts(runner, write):
    assert runner.run(Eq(write("u.tt", "U\n"), write("q.tt", "q\n"))) == EXIT_USAGE


def test_eval_tabulates_identity(logger, output, write):
    console = Console(file=output, color_system=None, width=100, highlight=False)
    runner = CommandRunner(logger, Settings(sig=Signature(2, (2, 1))), console)
    assert runner.run(Eval(write("id.tt", "lam(U, lam(El(q), q))\n"))) == EXIT_OK
    assert "{0 -> {0 -> 0, 1 -> 1}, 1 -> {0 -> 0}}" in output.getvalue()


def test_eval_over_cap(logger, output, write):
    console = Console(file=output, color_system=None, width=100, highlight=False)
    runner = CommandRunner(logger, Settings(sig=Signature(2, (2, 2)), cap=3), console)
    assert runner.run(Eval(write("pi.tt", "Pi(U, El(q))\n"))) == EXIT_FAILED
    assert "too large" in output.getvalue()


def test_cert_replay(runner, output, write):
    good = write("good.cert", "source: U\ntarget: U[id]\nstep USub at root bwd g=id\n")
    bad = write("bad.cert", "source: U\ntarget: U[p]\nstep USub at root bwd g=id\n")
    assert runner.run(Cert(good)) == EXIT_OK
    assert runner.run(Cert(bad)) == EXIT_FAILED
    assert runner.run(Cert(write("worse.cert", "source: U\nstep Nope at root fwd\n"))) == EXIT_USAGE
    lines = output.getvalue().splitlines()
    assert lines[0] == "valid: 1 steps"
    assert lines[1].startswith("invalid at step 1:")


def test_coherence_report(runner, tmp_path):
    report = tmp_path / "coherence.json"
    assert runner.run(Coherence("UComp", seed=1, count=3, report=str(report))) == EXIT_OK
    summary = json.loads(report.read_text())
    assert summary["diagrams"]["UComp"]["passed"] == 3


def test_coherence_unknown_diagram(runner):
    assert runner.run(Coherence("Hexagon")) == EXIT_USAGE


def test_fuzz_report(runner, tmp_path):
    report = tmp_path / "fuzz.json"
    assert runner.run(Fuzz(seed=1, count=5, size=5, report=str(report))) == EXIT_OK
    summary = json.loads(report.read_text())
    assert set(summary["properties"]) == {"completeness", "stability", "functoriality", "model"}
    assert summary["properties"]["completeness"]["passed"] == 5


@pytest.mark.slow
def test_coherence_all(runner):
    assert runner.run(Coherence("all", seed=0, count=5)) == EXIT_OK


def test_command_line():
    parser = build_parser()
    args = parser.parse_args(["--sig", "x=2;y=2,1", "eval", "f.tt"])
    assert command_from(args) == Eval("f.tt")
    assert Signature.parse(args.sig) == Signature(2, (2, 1))
    args = parser.parse_args(["coherence", "all", "--count", "3"])
    assert command_from(args) == Coherence("all", 0, 3, None)
    args = parser.parse_args(["fuzz"])
    assert command_from(args) == Fuzz()


def test_kernel_front_end(output, write):
    console = Console(file=output, color_system=None, width=100, highlight=False)
    kernel = Kernel(Settings(), logging.WARNING, console)
    assert kernel.run(Norm(write("u.tt", "U[id]\n"))) == EXIT_OK
    assert output.getvalue().splitlines()[0] == "U"


def test_eq_checks_declared_contexts(runner, output, write):
    good = write("good.tt", "context: <> |> U\nEl(q)\n")
    bad = write("bad.tt", "context: <>\nEl(q[id])\n")
    assert runner.run(Eq(good, bad)) == EXIT_FAILED
    assert output.getvalue().startswith("rejected:")


def test_eq_without_certificate(runner, output, write, tmp_path, monkeypatch):
    def refuse(a, b, fuel):
        raise certs.NotConvertibleError("different shapes")
    monkeypatch.setattr(certs, "conversion_cert", refuse)
    cert = tmp_path / "eq.cert"
    assert runner.run(Eq(write("u.tt", "U[p]\n"), write("v.tt", "U\n"), str(cert))) == EXIT_FAILED
    assert output.getvalue().splitlines() == ["true", "no certificate: different shapes"]
    assert not cert.exists()


def test_check_substitution(runner, output, write):
    assert runner.run(Check(write("p.tt", "context: <> |> U |> U\np\n"))) == EXIT_OK
    assert output.getvalue().strip() == "p : <> |> U |> U -> <> |> U"


@pytest.mark.parametrize("make", [
    lambda report: Fuzz(seed=3, count=4, size=6, report=report),
    lambda report: Coherence("all", seed=3, count=2, report=report),
])
def test_reports_repeat_for_a_seed(logger, tmp_path, make):
    texts = []
    for name in ("first.json", "second.json"):
        output = io.StringIO()
        console = Console(file=output, color_system=None, width=100, highlight=False)
        report = tmp_path / name
        assert CommandRunner(logger, Settings(), console).run(make(str(report))) == EXIT_OK
        texts.append((report.read_bytes(), output.getvalue()))
    assert texts[0] == texts[1]
