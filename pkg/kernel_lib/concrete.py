import re
from dataclasses import dataclass

from kernel_lib.syntax import (
    App, Comp, CtxExpr, El, Empty, Eps, Expr, Ext, Id, InEl, Inst, InU, Lam, P,
    Pi, Plus, Q, Sing, SubExpr, TInst, TmExpr, TyExpr, U,
)


# Printing

def show(e: Expr) -> str:
    match e.SORT:
        case "ctx":
            return show_ctx(e)
        case "sub":
            return show_sub(e)
        case "ty":
            return show_ty(e)
    return show_tm(e)


def show_ctx(ctx: CtxExpr) -> str:
    match ctx:
        case Empty():
            return "<>"
        case Ext(prefix, ty):
            return f"{show_ctx(prefix)} |> {show_ty(ty)}"
    raise TypeError(f"not a context: {ctx!r}")


def _show_sub_post(sub: SubExpr) -> str:
    if isinstance(sub, Comp):
        return f"({show_sub(sub)})"
    return show_sub(sub)


def show_sub(sub: SubExpr) -> str:
    match sub:
        case Id():
            return "id"
        case Eps():
            return "eps"
        case P():
            return "p"
        case Sing(tm):
            return f"<{show_tm(tm)}>"
        case Plus(g, ty):
            return f"{_show_sub_post(g)}+ : {show_ty(ty)}"
        case Comp(f, g):
            return f"{_show_sub_post(f)} ; {show_sub(g)}"
    raise TypeError(f"not a substitution: {sub!r}")


def show_ty(ty: TyExpr) -> str:
    match ty:
        case U():
            return "U"
        case El(tm):
            return f"El({show_tm(tm)})"
        case Pi(dom, cod):
            return f"Pi({show_ty(dom)}, {show_ty(cod)})"
        case Inst(inner, sub):
            return f"{show_ty(inner)}[{show_sub(sub)}]"
    raise TypeError(f"not a type: {ty!r}")


def show_tm(tm: TmExpr) -> str:
    match tm:
        case Q():
            return "q"
        case TInst(inner, sub):
            return f"{show_tm(inner)}[{show_sub(sub)}]"
        case Lam(dom, body):
            return f"lam({show_ty(dom)}, {show_tm(body)})"
        case App(inner):
            return f"app({show_tm(inner)})"
        case InU(i):
            return f"inU({i})"
        case InEl(i, j):
            return f"inEl({i}, {j})"
    raise TypeError(f"not a term: {tm!r}")


# Parsing

_TOKEN = re.compile(r"\s*(?:(<>|\|>|[<>()\[\],;+:])|([A-Za-z_][A-Za-z_0-9]*)|(\d+)|(\S))")

_TY_HEADS = {"U", "El", "Pi"}
_TM_HEADS = {"q", "lam", "app", "inU", "inEl"}
_SUB_HEADS = {"id", "eps", "p", "<"}


@dataclass(frozen=True)
class Token:
    text: str
    kind: str
    line: int
    column: int


def tokenize(text: str, first_line: int = 1) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = first_line, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        line += text.count("\n", pos, start)
        newline = text.rfind("\n", 0, start)
        if newline >= 0:
            line_start = newline + 1
        column = start - line_start + 1
        if m.group(4) is not None:
            raise ParseError(f"unexpected character '{m.group(4)}'", line, column)
        if m.group(1) is not None:
            tokens.append(Token(m.group(1), "sym", line, column))
        elif m.group(2) is not None:
            tokens.append(Token(m.group(2), "name", line, column))
        else:
            tokens.append(Token(m.group(3), "int", line, column))
        pos = m.end()
    end_line = line + text.count("\n", pos)
    tail = text.rfind("\n")
    tokens.append(Token("", "end", end_line, len(text) - (tail + 1) + 1))
    return tokens


class Parser:
    """Recursive-descent parser for the concrete syntax with one token of
    lookahead"""

    def __init__(self, text: str, first_line: int = 1) -> None:
        self.tokens = tokenize(text, first_line)
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None) -> None:
        tok = self.peek if tok is None else tok
        raise ParseError(message, tok.line, tok.column)

    def expect(self, text: str) -> Token:
        tok = self.peek
        if tok.text != text or tok.kind == "end":
            self.fail(f"expected '{text}', found {self._describe(tok)}")
        return self.advance()

    def _describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "end" else f"'{tok.text}'"

    def index(self) -> int:
        tok = self.peek
        if tok.kind != "int":
            self.fail(f"expected an index, found {self._describe(tok)}")
        return int(self.advance().text)

    def finish(self) -> None:
        if self.peek.kind != "end":
            self.fail(f"unexpected {self._describe(self.peek)} after expression")

    def ctx(self) -> CtxExpr:
        self.expect("<>")
        ctx: CtxExpr = Empty()
        while self.peek.text == "|>" and self.peek.kind == "sym":
            self.advance()
            ctx = Ext(ctx, self.ty())
        return ctx

    def sub(self) -> SubExpr:
        left = self.sub_post()
        if self.peek.text == ";" and self.peek.kind == "sym":
            self.advance()
            return Comp(left, self.sub())
        return left

    def sub_post(self) -> SubExpr:
        sub = self.sub_atom()
        while self.peek.text == "+" and self.peek.kind == "sym":
            self.advance()
            self.expect(":")
            sub = Plus(sub, self.ty())
        return sub

    def sub_atom(self) -> SubExpr:
        tok = self.advance()
        match tok.text:
            case "id" if tok.kind == "name":
                return Id()
            case "eps" if tok.kind == "name":
                return Eps()
            case "p" if tok.kind == "name":
                return P()
            case "<" if tok.kind == "sym":
                tm = self.tm()
                self.expect(">")
                return Sing(tm)
            case "(" if tok.kind == "sym":
                sub = self.sub()
                self.expect(")")
                return sub
        self.fail(f"expected a substitution, found {self._describe(tok)}", tok)

    def ty(self) -> TyExpr:
        ty = self.ty_atom()
        while self.peek.text == "[" and self.peek.kind == "sym":
            self.advance()
            sub = self.sub()
            self.expect("]")
            ty = Inst(ty, sub)
        return ty

    def ty_atom(self) -> TyExpr:
        tok = self.advance()
        match tok.text:
            case "U" if tok.kind == "name":
                return U()
            case "El" if tok.kind == "name":
                self.expect("(")
                tm = self.tm()
                self.expect(")")
                return El(tm)
            case "Pi" if tok.kind == "name":
                self.expect("(")
                dom = self.ty()
                self.expect(",")
                cod = self.ty()
                self.expect(")")
                return Pi(dom, cod)
            case "(" if tok.kind == "sym":
                ty = self.ty()
                self.expect(")")
                return ty
        self.fail(f"expected a type, found {self._describe(tok)}", tok)

    def tm(self) -> TmExpr:
        tm = self.tm_atom()
        while self.peek.text == "[" and self.peek.kind == "sym":
            self.advance()
            sub = self.sub()
            self.expect("]")
            tm = TInst(tm, sub)
        return tm

    def tm_atom(self) -> TmExpr:
        tok = self.advance()
        match tok.text:
            case "q" if tok.kind == "name":
                return Q()
            case "lam" if tok.kind == "name":
                self.expect("(")
                dom = self.ty()
                self.expect(",")
                body = self.tm()
                self.expect(")")
                return Lam(dom, body)
            case "app" if tok.kind == "name":
                self.expect("(")
                tm = self.tm()
                self.expect(")")
                return App(tm)
            case "inU" if tok.kind == "name":
                self.expect("(")
                i = self.index()
                self.expect(")")
                return InU(i)
            case "inEl" if tok.kind == "name":
                self.expect("(")
                i = self.index()
                self.expect(",")
                j = self.index()
                self.expect(")")
                return InEl(i, j)
            case "(" if tok.kind == "sym":
                tm = self.tm()
                self.expect(")")
                return tm
        self.fail(f"expected a term, found {self._describe(tok)}", tok)

    def sort_hint(self) -> str:
        """The sort announced by the first token that is not a parenthesis"""
        for tok in self.tokens[self.pos:]:
            if tok.text == "(" and tok.kind == "sym":
                continue
            if tok.text == "<>" and tok.kind == "sym":
                return "ctx"
            if tok.text in _TY_HEADS and tok.kind == "name":
                return "ty"
            if tok.text in _TM_HEADS and tok.kind == "name":
                return "tm"
            if tok.text in _SUB_HEADS:
                return "sub"
            break
        self.fail(f"cannot tell the sort of an expression starting with {self._describe(self.peek)}")

    def expr(self) -> Expr:
        match self.sort_hint():
            case "ctx":
                return self.ctx()
            case "ty":
                return self.ty()
            case "tm":
                return self.tm()
        return self.sub()


def _parse_with(text: str, rule: str, first_line: int = 1) -> Expr:
    parser = Parser(text, first_line)
    result = getattr(parser, rule)()
    parser.finish()
    return result


def parse_ctx(text: str) -> CtxExpr:
    return _parse_with(text, "ctx")


def parse_sub(text: str) -> SubExpr:
    return _parse_with(text, "sub")


def parse_ty(text: str) -> TyExpr:
    return _parse_with(text, "ty")


def parse(text: str, sort: str | None = None, first_line: int = 1) -> Expr:
    """Parses one expression; without a sort, the first token decides"""
    rules = {"ctx": "ctx", "sub": "sub", "ty": "ty", "tm": "tm", None: "expr"}
    return _parse_with(text, rules[sort], first_line)


@dataclass(frozen=True)
class Source:
    """An input file: an optional declared context and one expression"""
    ctx: CtxExpr | None
    expr: Expr


def load_source(text: str) -> Source:
    ctx: CtxExpr | None = None
    body: list[str] = []
    first_line = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            if first_line is not None:
                body.append("")
            continue
        if line.lstrip().startswith("context:"):
            if ctx is not None:
                raise ParseError("context declared twice", number, 1)
            head = line.index("context:") + len("context:")
            ctx = _parse_with(" " * head + line[head:], "ctx", number)
            continue
        if first_line is None:
            first_line = number
        body.append(line)
    if first_line is None:
        raise ParseError("no expression found", max(1, len(text.splitlines())), 1)
    return Source(ctx, parse("\n".join(body), first_line=first_line))


class ParseError(Exception):
    """Concrete syntax could not be read"""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column
