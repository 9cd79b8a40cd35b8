from dataclasses import dataclass, replace
from typing import ClassVar, Iterator, TypeAlias


Position: TypeAlias = tuple[int, ...]


@dataclass(frozen=True)
class Signature:
    """The generating data of the base family: |X| and, for every x in X,
    the cardinality of Y x. Elements are addressed by integer index."""

    x_card: int
    y_card: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "y_card", tuple(self.y_card))
        if self.x_card < 0 or any(k < 0 for k in self.y_card):
            raise SignatureError(f"negative cardinality in x={self.x_card} y={list(self.y_card)}")
        if len(self.y_card) != self.x_card:
            raise SignatureError(f"expected {self.x_card} family sizes, got {len(self.y_card)}")

    def has_base(self, i: int) -> bool:
        return 0 <= i < self.x_card

    def has_fibre(self, i: int, j: int) -> bool:
        return self.has_base(i) and 0 <= j < self.y_card[i]

    def __str__(self) -> str:
        return f"x={self.x_card};y={','.join(str(k) for k in self.y_card)}"

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Reads the command-line form `x=<n>;y=<k0>,<k1>,...`"""
        fields: dict[str, str] = {}
        for part in text.replace(" ", "").split(";"):
            key, sep, value = part.partition("=")
            if not sep or key not in ("x", "y"):
                raise SignatureError(f"malformed signature component '{part}'")
            fields[key] = value
        if "x" not in fields:
            raise SignatureError("signature needs an x component")
        try:
            x_card = int(fields["x"])
            ys = fields.get("y", "")
            y_card = tuple(int(k) for k in ys.split(",")) if ys else ()
        except ValueError:
            raise SignatureError(f"non-integer cardinality in '{text}'")
        return cls(x_card, y_card)


class Expr:
    """Common base of the four syntactic sorts. Subclasses are frozen
    dataclasses; CHILDREN lists the fields holding sub-expressions, in the
    order used by positions."""

    SORT: ClassVar[str] = ""
    CHILDREN: ClassVar[tuple[str, ...]] = ()

    def children(self) -> tuple["Expr", ...]:
        return tuple(getattr(self, name) for name in self.CHILDREN)

    def with_child(self, index: int, new: "Expr") -> "Expr":
        return replace(self, **{self.CHILDREN[index]: new})


class CtxExpr(Expr):
    SORT = "ctx"


class SubExpr(Expr):
    SORT = "sub"


class TyExpr(Expr):
    SORT = "ty"


class TmExpr(Expr):
    SORT = "tm"


# Contexts

@dataclass(frozen=True)
class Empty(CtxExpr):
    pass


@dataclass(frozen=True)
class Ext(CtxExpr):
    ctx: CtxExpr
    ty: TyExpr
    CHILDREN = ("ctx", "ty")


# Substitutions

@dataclass(frozen=True)
class Id(SubExpr):
    pass


@dataclass(frozen=True)
class Comp(SubExpr):
    """f after g"""
    f: SubExpr
    g: SubExpr
    CHILDREN = ("f", "g")


@dataclass(frozen=True)
class Eps(SubExpr):
    pass


@dataclass(frozen=True)
class P(SubExpr):
    pass


@dataclass(frozen=True)
class Plus(SubExpr):
    """Lift of g over the type ty of the codomain's last entry"""
    g: SubExpr
    ty: TyExpr
    CHILDREN = ("g", "ty")


@dataclass(frozen=True)
class Sing(SubExpr):
    tm: TmExpr
    CHILDREN = ("tm",)


# Types

@dataclass(frozen=True)
class U(TyExpr):
    pass


@dataclass(frozen=True)
class El(TyExpr):
    tm: TmExpr
    CHILDREN = ("tm",)


@dataclass(frozen=True)
class Pi(TyExpr):
    dom: TyExpr
    cod: TyExpr
    CHILDREN = ("dom", "cod")


@dataclass(frozen=True)
class Inst(TyExpr):
    ty: TyExpr
    sub: SubExpr
    CHILDREN = ("ty", "sub")


# Terms

@dataclass(frozen=True)
class Q(TmExpr):
    pass


@dataclass(frozen=True)
class TInst(TmExpr):
    tm: TmExpr
    sub: SubExpr
    CHILDREN = ("tm", "sub")


@dataclass(frozen=True)
class Lam(TmExpr):
    dom: TyExpr
    body: TmExpr
    CHILDREN = ("dom", "body")


@dataclass(frozen=True)
class App(TmExpr):
    tm: TmExpr
    CHILDREN = ("tm",)


@dataclass(frozen=True)
class InU(TmExpr):
    i: int


@dataclass(frozen=True)
class InEl(TmExpr):
    i: int
    j: int


def is_closed_constant(e: Expr) -> bool:
    return isinstance(e, (InU, InEl))


def size(e: Expr) -> int:
    """Number of AST nodes"""
    return 1 + sum(size(c) for c in e.children())


def subterms(e: Expr, prefix: Position = ()) -> Iterator[tuple[Position, Expr]]:
    """Preorder walk yielding (position, subtree)"""
    yield prefix, e
    for index, child in enumerate(e.children()):
        yield from subterms(child, prefix + (index,))


def subtree_at(e: Expr, position: Position) -> Expr:
    for index in position:
        kids = e.children()
        if index >= len(kids):
            raise PositionError(f"position {position} leaves the tree at index {index}")
        e = kids[index]
    return e


def replace_at(e: Expr, position: Position, new: Expr) -> Expr:
    if not position:
        return new
    head, rest = position[0], position[1:]
    kids = e.children()
    if head >= len(kids):
        raise PositionError(f"position {position} leaves the tree at index {head}")
    return e.with_child(head, replace_at(kids[head], rest, new))


# Derived combinators

def sub_ext(g: SubExpr, ty: TyExpr, a: TmExpr) -> SubExpr:
    """The substitution pair (g, a) as g+ after <a>"""
    return Comp(Plus(g, ty), Sing(a))


def arrow(a: TyExpr, b: TyExpr) -> TyExpr:
    return Pi(a, Inst(b, P()))


def apply_to(f: TmExpr, a: TmExpr) -> TmExpr:
    return TInst(App(f), Sing(a))


def id_combinator() -> TmExpr:
    return Lam(U(), Lam(El(Q()), Q()))


class SignatureError(Exception):
    """Signature cardinalities are inconsistent"""
    pass

class PositionError(Exception):
    """A position does not address a subtree"""
    pass
