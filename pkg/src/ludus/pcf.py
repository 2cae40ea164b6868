"""PCF: surface syntax, typing, and game-semantic evaluation.

A closed PCF program is parsed, type checked, and compiled to a strategy
expression: a tree of atomic strategies glued by pairing, currying, and
promote-then-concatenate composition.  Typing contexts become product games,
variable access and function application become retagged derelictions, and
`ifz` routes through the zero test and the boolean brancher.  Elaboration
produces both an executable strategy and the symbolic table describing it;
evaluation drives the strategy's output naturals game, hides all internal
moves, and counts the yes-answers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from .tags import EMPTY_TAG, InnerElement, Move, bang_tag, box, split_bang
from .core import (
    GameExpr,
    NO,
    OMEGA,
    Position,
    Q,
    Q_HAT,
    YES,
    EMPTY_POSITION,
    _retag,
    is_position,
    mk_move,
)
from .strategy import Strategy, PlayTrace, hide_strategy, play
from .constructions import (
    NAT,
    UNIT,
    _MirrorStrategy,
    arrow_c,
    case_strat,
    concat_strat,
    count_yes,
    curry_arrow_strat,
    external_shape,
    fix_strat,
    numeral_env,
    pairing_strat,
    pred_strat,
    product_c,
    promotion_strat,
    succ_strat,
    zero_strat,
    zeroq_strat,
)
from .stalg import (
    CB,
    Entry,
    EntryTable,
    HH,
    OB,
    OK,
    QI_HAT,
    QT,
    QT_HAT,
    StAlgorithm,
    _AI3,
    _AP2,
    _AT3H,
    _consumed,
    _depth_after,
    _groups_closed,
    _initial_query,
    _is_elem,
    _relay_entries,
    _run2,
    _singleton_states,
    cls,
    initial_inners,
    lit,
    stalg_case,
    stalg_concat,
    stalg_curry,
    stalg_fix,
    stalg_pairing,
    stalg_pred,
    stalg_promotion,
    stalg_succ,
    stalg_zero,
    stalg_zeroq,
)

DEFAULT_FUEL = 100_000


# ---------------------------------------------------------------------------
# Types and terms
# ---------------------------------------------------------------------------

class PcfType:
    pass


@dataclass(frozen=True)
class Nat(PcfType):
    def __str__(self) -> str:
        return "N"


@dataclass(frozen=True)
class Arrow(PcfType):
    dom: PcfType
    cod: PcfType

    def __str__(self) -> str:
        d = str(self.dom)
        if isinstance(self.dom, Arrow):
            d = f"({d})"
        return f"{d}->{self.cod}"


@dataclass(frozen=True)
class Prod(PcfType):
    l: PcfType
    r: PcfType

    def __str__(self) -> str:
        return f"({self.l}*{self.r})"


NAT_T = Nat()


class PcfTerm:
    pos: Optional[Tuple[int, int]]


@dataclass(frozen=True)
class Var(PcfTerm):
    name: str
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Lam(PcfTerm):
    name: str
    type: PcfType
    body: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class App(PcfTerm):
    f: PcfTerm
    a: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Zero(PcfTerm):
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Succ(PcfTerm):
    t: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Pred(PcfTerm):
    t: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class IfZ(PcfTerm):
    c: PcfTerm
    then: PcfTerm
    els: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Fix(PcfTerm):
    t: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Num(PcfTerm):
    n: int
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Pair(PcfTerm):
    l: PcfTerm
    r: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Proj1(PcfTerm):
    t: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Proj2(PcfTerm):
    t: PcfTerm
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class PcfSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line, self.col = line, col


_KEYWORDS = {"zero", "succ", "pred", "fix", "ifz", "then", "else"}

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<arrow>->)|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<punct>[\\.:()])"
)


@dataclass
class _Tok:
    kind: str  # 'arrow' | 'num' | 'ident' | keyword | one of \\ . : ( ) | 'eof'
    text: str
    line: int
    col: int


def _lex(src: str) -> List[_Tok]:
    toks: List[_Tok] = []
    line, col, i = 1, 1, 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if m is None:
            raise PcfSyntaxError(f"unexpected character {src[i]!r}", line, col)
        text = m.group(0)
        if m.lastgroup == "ws":
            for ch in text:
                if ch == "\n":
                    line, col = line + 1, 1
                else:
                    col += 1
        else:
            kind = m.lastgroup
            if kind == "ident" and text in _KEYWORDS:
                kind = text
            elif kind == "punct":
                kind = text
            toks.append(_Tok(kind, text, line, col))
            col += len(text)
        i = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: List[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            raise PcfSyntaxError(f"expected {kind!r}, found {t.text or 'end of input'!r}",
                                 t.line, t.col)
        return self.next()

    def err(self, msg: str):
        t = self.peek()
        raise PcfSyntaxError(msg, t.line, t.col)

    # type ::= 'N' | type '->' type | '(' type ')'   with -> right-assoc
    def type_(self) -> PcfType:
        left = self.type_atom()
        if self.peek().kind == "arrow":
            self.next()
            return Arrow(left, self.type_())
        return left

    def type_atom(self) -> PcfType:
        t = self.peek()
        if t.kind == "ident" and t.text == "N":
            self.next()
            return NAT_T
        if t.kind == "(":
            self.next()
            ty = self.type_()
            self.expect(")")
            return ty
        self.err(f"expected a type, found {t.text or 'end of input'!r}")

    # term ::= '\' ident ':' type '.' term | appterm
    def term(self) -> PcfTerm:
        t = self.peek()
        if t.kind == "\\":
            self.next()
            name = self.expect("ident").text
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            body = self.term()
            return Lam(name, ty, body, pos=(t.line, t.col))
        return self.appterm()

    _ATOM_STARTS = {"ident", "zero", "num", "succ", "pred", "fix", "ifz", "("}

    def appterm(self) -> PcfTerm:
        t = self.peek()
        e = self.atom()
        while self.peek().kind in self._ATOM_STARTS:
            e = App(e, self.atom(), pos=(t.line, t.col))
        return e

    def atom(self) -> PcfTerm:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return Var(t.text, pos=(t.line, t.col))
        if t.kind == "zero":
            self.next()
            return Zero(pos=(t.line, t.col))
        if t.kind == "num":
            self.next()
            return Num(int(t.text), pos=(t.line, t.col))
        if t.kind == "succ":
            self.next()
            return Succ(self.atom(), pos=(t.line, t.col))
        if t.kind == "pred":
            self.next()
            return Pred(self.atom(), pos=(t.line, t.col))
        if t.kind == "fix":
            self.next()
            return Fix(self.atom(), pos=(t.line, t.col))
        if t.kind == "ifz":
            self.next()
            c = self.term()
            self.expect("then")
            th = self.term()
            self.expect("else")
            el = self.term()
            return IfZ(c, th, el, pos=(t.line, t.col))
        if t.kind == "(":
            self.next()
            e = self.term()
            self.expect(")")
            return e
        self.err(f"expected a term, found {t.text or 'end of input'!r}")


def parse(text: str) -> PcfTerm:
    p = _Parser(_lex(text))
    e = p.term()
    p.expect("eof")
    return e


def parse_type(text: str) -> PcfType:
    p = _Parser(_lex(text))
    ty = p.type_()
    p.expect("eof")
    return ty


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------

class PcfTypeError(TypeError):
    def __init__(self, msg: str, term: PcfTerm):
        pos = getattr(term, "pos", None)
        loc = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(f"{loc}{msg}")
        self.term = term


Ctx = List[Tuple[str, PcfType]]


def typecheck(ctx: Ctx, t: PcfTerm) -> PcfType:
    if isinstance(t, Var):
        for name, ty in reversed(ctx):
            if name == t.name:
                return ty
        raise PcfTypeError(f"unbound variable {t.name!r}", t)
    if isinstance(t, Lam):
        return Arrow(t.type, typecheck(ctx + [(t.name, t.type)], t.body))
    if isinstance(t, App):
        tf = typecheck(ctx, t.f)
        ta = typecheck(ctx, t.a)
        if not isinstance(tf, Arrow):
            raise PcfTypeError(f"applied term has type {tf}, not a function", t.f)
        if tf.dom != ta:
            raise PcfTypeError(
                f"argument has type {ta}, expected {tf.dom}", t.a)
        return tf.cod
    if isinstance(t, (Zero, Num)):
        return NAT_T
    if isinstance(t, (Succ, Pred)):
        ty = typecheck(ctx, t.t)
        if ty != NAT_T:
            raise PcfTypeError(f"operand has type {ty}, expected N", t.t)
        return NAT_T
    if isinstance(t, IfZ):
        tc = typecheck(ctx, t.c)
        if tc != NAT_T:
            raise PcfTypeError(f"scrutinee has type {tc}, expected N", t.c)
        t1 = typecheck(ctx, t.then)
        t2 = typecheck(ctx, t.els)
        if t1 != t2:
            raise PcfTypeError(
                f"branches have different types {t1} and {t2}", t.els)
        return t1
    if isinstance(t, Fix):
        ty = typecheck(ctx, t.t)
        if not (isinstance(ty, Arrow) and ty.dom == ty.cod):
            raise PcfTypeError(
                f"fixpoint operand has type {ty}, expected A->A", t.t)
        return ty.dom
    if isinstance(t, Pair):
        return Prod(typecheck(ctx, t.l), typecheck(ctx, t.r))
    if isinstance(t, (Proj1, Proj2)):
        ty = typecheck(ctx, t.t)
        if not isinstance(ty, Prod):
            raise PcfTypeError(f"projected term has type {ty}, not a product", t.t)
        return ty.l if isinstance(t, Proj1) else ty.r
    raise PcfTypeError(f"unknown term {t!r}", t)


# ---------------------------------------------------------------------------
# Types and contexts as games
# ---------------------------------------------------------------------------

def type_game(ty: PcfType) -> GameExpr:
    if isinstance(ty, Nat):
        return NAT
    if isinstance(ty, Arrow):
        return arrow_c(type_game(ty.dom), type_game(ty.cod))
    if isinstance(ty, Prod):
        return product_c(type_game(ty.l), type_game(ty.r))
    raise TypeError(f"not a PCF type: {ty!r}")


def ctx_game(ctx: Ctx) -> GameExpr:
    g: GameExpr = UNIT
    for _, ty in ctx:
        g = product_c(g, type_game(ty))
    return g


# ---------------------------------------------------------------------------
# Retagged derelictions: projections and application
# ---------------------------------------------------------------------------
#
# Both atoms mirror every move across the arrow, changing only the inner
# tags, and manage the domain's thread tags like the plain dereliction does:
# mirroring outward to the environment strips one thread layer, mirroring
# inward adds one.


def _mirror_strat(g: GameExpr, name: str,
                  flip: Callable[[InnerElement], InnerElement],
                  inward: Callable[[InnerElement], bool],
                  outer: Optional[Callable[[Move], Optional[Move]]] = None,
                  ) -> Strategy:
    def t(m: Move) -> Optional[Move]:
        if outer is not None:
            return outer(m)
        if inward(m.inner):
            return Move(flip(m.inner), bang_tag(EMPTY_TAG, m.outer))
        sb = split_bang(m.outer)
        if sb is None or sb[0] is not EMPTY_TAG:
            return None
        return Move(flip(m.inner), sb[1])

    return _MirrorStrategy(g, name, t)


def _mirror_table(g: GameExpr, name: str,
                  flip: Callable[[InnerElement], InnerElement],
                  inward: Callable[[InnerElement], bool]) -> StAlgorithm:
    """A dereliction-shaped table with a custom element flip: inward moves
    gain the canonical thread prefix, outward moves lose theirs."""
    elemIn = cls("elem", 2, inward)
    elemOut = cls("elem", 2, lambda i: not inward(i))
    entries = [
        Entry((_AI3, _AP2, cls("elem", 2)),
              lambda run: flip(run[-1].sym), 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        # inward spelling: emit the thread prefix, then relay
        Entry((_AT3H, _AP2, elemIn), OB, 3),
        Entry((elemIn, lit(OB, 3), lit(QT, 3)), CB, 3),
        Entry((lit(OB, 3), lit(QT, 3), lit(CB, 3), lit(QT, 3)), HH, 3),
        Entry((lit(CB, 3), lit(QT, 3), lit(HH, 3), lit(QT, 3)), QT_HAT, 2),
        # outward spelling: strip the thread prefix, then relay
        Entry((_AT3H, _AP2, elemOut), QT_HAT, 2),
        Entry((elemOut, lit(QT_HAT, 2), lit(OB, 2)), QT, 2),
        Entry((lit(OB, 2), lit(QT, 2), lit(CB, 2)), QT, 2,
              guard=lambda run: _consumed(run) == 2),
        Entry((lit(CB, 2), lit(QT, 2), lit(HH, 2)), QT, 2,
              guard=lambda run: _consumed(run) == 3),
        Entry((_AT3H,), QI_HAT, 2),
        *_relay_entries(),
    ]
    return EntryTable(g, name, _singleton_states(initial_inners(g)),
                      _initial_query(g), entries)


def _proj_flip(path: Tuple[str, ...]) -> Callable[[InnerElement], InnerElement]:
    k = len(path) + 1

    def flip(i: InnerElement) -> InnerElement:
        if i.tags[-1] == "E":
            return _retag(i, 1, path + ("W",))
        return _retag(i, k, ("E",))

    return flip


def _proj_inward(i: InnerElement) -> bool:
    return i.tags[-1] == "E"


def projection(dom: GameExpr, path: Tuple[str, ...], cod: GameExpr,
               name: str = "proj") -> Tuple[Strategy, StAlgorithm]:
    """The component of a product context at `path` (innermost tag first),
    as a strategy and table on  dom => cod."""
    g = arrow_c(dom, cod)
    flip = _proj_flip(path)
    return (_mirror_strat(g, name, flip, _proj_inward),
            _mirror_table(g, name, flip, _proj_inward))


def _ev_kind(i: InnerElement) -> str:
    t = i.tags
    if t[-1] == "E":
        return "out"    # external codomain
    if t[-2] == "E":
        return "arg"    # argument component of the banged pair
    if t[-3] == "E":
        return "fcod"   # function component, its codomain
    return "fdom"       # function component, its domain request


def _ev_flip(i: InnerElement) -> InnerElement:
    k = _ev_kind(i)
    if k == "out":
        return _retag(i, 1, ("E", "W", "W"))
    if k == "arg":
        return _retag(i, 2, ("W", "W", "W"))
    if k == "fcod":
        return _retag(i, 3, ("E",))
    return _retag(i, 3, ("E", "W"))


def _ev_outer(m: Move) -> Optional[Move]:
    """The evaluation mirror: the function runs in the canonical thread; each
    of its argument requests opens an argument instance in the boxed image of
    the request's own thread tag."""
    k = _ev_kind(m.inner)
    r = _ev_flip(m.inner)
    if k == "out":
        return Move(r, bang_tag(EMPTY_TAG, m.outer))
    if k == "fcod":
        sb = split_bang(m.outer)
        if sb is None or sb[0] is not EMPTY_TAG:
            return None
        return Move(r, sb[1])
    if k == "fdom":
        sb = split_bang(m.outer)
        if sb is None or sb[0] is not EMPTY_TAG:
            return None
        sb2 = split_bang(sb[1])
        if sb2 is None:
            return None
        return Move(r, bang_tag(box(sb2[0]), sb2[1]))
    # arg: unbox the instance thread back into the function's request
    sb = split_bang(m.outer)
    if sb is None or sb[0].kind != "box":
        return None
    return Move(r, bang_tag(EMPTY_TAG, bang_tag(sb[0].a, sb[1])))


def _src_kind(kind: str):
    def p(run) -> bool:
        s = _run2(run)
        return _is_elem(s) and _ev_kind(s) == kind
    return p


def _ev_table(g: GameExpr, name: str) -> StAlgorithm:
    elemIn = cls("elem", 2, lambda i: _ev_kind(i) in ("out", "arg"))
    elemOut = cls("elem", 2, lambda i: _ev_kind(i) in ("fcod", "fdom"))
    src = _src_kind
    entries = [
        Entry((_AI3, _AP2, cls("elem", 2)),
              lambda run: _ev_flip(run[-1].sym), 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        # inward: emit the canonical thread prefix, then read the input word
        Entry((_AT3H, _AP2, elemIn), OB, 3),
        Entry((elemIn, lit(OB, 3), lit(QT, 3)), CB, 3),
        Entry((lit(OB, 3), lit(QT, 3), lit(CB, 3), lit(QT, 3)), HH, 3),
        Entry((lit(CB, 3), lit(QT, 3), lit(HH, 3), lit(QT, 3)), QT_HAT, 2),
        # outward: silently consume the canonical thread prefix
        Entry((_AT3H, _AP2, elemOut), QT_HAT, 2),
        Entry((elemOut, lit(QT_HAT, 2), lit(OB, 2)), QT, 2),
        Entry((lit(OB, 2), lit(QT, 2), lit(CB, 2)), QT, 2,
              guard=lambda run: _consumed(run) == 2),
        Entry((lit(CB, 2), lit(QT, 2), lit(HH, 2)), QT, 2,
              guard=lambda run: _consumed(run) == 3 and src("fcod")(run)),
        # function request: re-box the request's thread around the remainder
        Entry((lit(CB, 2), lit(QT, 2), lit(HH, 2)), OB, 3,
              guard=lambda run: _consumed(run) == 3 and src("fdom")(run)),
        Entry((lit(CB, 2), lit(CB, 3), cls("tagq", 3)), CB, 3,
              guard=lambda run: (src("fdom")(run)
                                 and _groups_closed(run) == 2
                                 and _depth_after(run) == 0)),
        # argument instance: unbox its thread into the request's
        Entry((lit(QT_HAT, 2), lit(OB, 2)), QT, 2, guard=src("arg")),
        Entry((cls("digit", 3), cls("tagq", 3), lit(QT, 2), lit(CB, 2)),
              QT, 2,
              guard=lambda run: (src("arg")(run)
                                 and _groups_closed(run) == 1
                                 and _depth_after(run) == 0)),
        Entry((_AT3H,), QI_HAT, 2),
        *_relay_entries(),
    ]
    return EntryTable(g, name, _singleton_states(initial_inners(g)),
                      _initial_query(g), entries)


def evaluation(ga: GameExpr, gb: GameExpr) -> Tuple[Strategy, StAlgorithm]:
    """Application:  !((A => B) & A)  -o  B, as a retagged dereliction."""
    g = arrow_c(product_c(arrow_c(ga, gb), ga), gb)
    strat = _MirrorStrategy(g, "ev", _ev_outer)
    return strat, _ev_table(g, "ev")


# ---------------------------------------------------------------------------
# Strategy expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atomic:
    name: str
    strat: Callable[[], Strategy] = field(compare=False)
    alg: Callable[[], StAlgorithm] = field(compare=False)

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class CurryE:
    e: "StrategyExpr"


@dataclass(frozen=True)
class PairE:
    l: "StrategyExpr"
    r: "StrategyExpr"


@dataclass(frozen=True)
class ComposeE:
    """Promote the left component, then concatenate with the right."""
    l: "StrategyExpr"
    r: "StrategyExpr"


StrategyExpr = object  # Atomic | CurryE | PairE | ComposeE


def _atom(name: str, strat: Callable[[], Strategy],
          alg: Callable[[], StAlgorithm]) -> Atomic:
    return Atomic(name, strat, alg)


def _pair_atom(pair: Tuple[Strategy, StAlgorithm], name: str) -> Atomic:
    s, a = pair
    return _atom(name, lambda: s, lambda: a)


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------

def compile(t: PcfTerm) -> StrategyExpr:
    """Compile a closed, well-typed term to a strategy expression over the
    game  !unit -o <type>."""
    typecheck([], t)
    return _compile(t, [])


def _compile(t: PcfTerm, ctx: Ctx) -> StrategyExpr:
    gG = ctx_game(ctx)
    if isinstance(t, Var):
        for k in range(len(ctx) - 1, -1, -1):
            if ctx[k][0] == t.name:
                path = ("E",) + ("W",) * (len(ctx) - 1 - k)
                gi = type_game(ctx[k][1])
                return _pair_atom(projection(gG, path, gi, f"proj({t.name})"),
                                  f"proj({t.name})")
        raise PcfTypeError(f"unbound variable {t.name!r}", t)
    if isinstance(t, Lam):
        return CurryE(_compile(t.body, ctx + [(t.name, t.type)]))
    if isinstance(t, App):
        ta = typecheck(ctx, t.a)
        tb = typecheck(ctx, t)
        ga, gb = type_game(ta), type_game(tb)
        ev = _pair_atom(evaluation(ga, gb), f"ev[{ta}->{tb}]")
        return ComposeE(PairE(_compile(t.f, ctx), _compile(t.a, ctx)), ev)
    if isinstance(t, Zero):
        return _atom("zero", lambda: zero_strat(gG), lambda: stalg_zero(gG))
    if isinstance(t, Num):
        e: StrategyExpr = _compile(Zero(), ctx)
        succ = _atom("succ", succ_strat, stalg_succ)
        for _ in range(t.n):
            e = ComposeE(e, succ)
        return e
    if isinstance(t, Succ):
        return ComposeE(_compile(t.t, ctx), _atom("succ", succ_strat, stalg_succ))
    if isinstance(t, Pred):
        return ComposeE(_compile(t.t, ctx), _atom("pred", pred_strat, stalg_pred))
    if isinstance(t, IfZ):
        ga = type_game(typecheck(ctx, t.then))
        b = ComposeE(_compile(t.c, ctx),
                     _atom("zero?", zeroq_strat, stalg_zeroq))
        branches = PairE(_compile(t.then, ctx), _compile(t.els, ctx))
        case = _atom("case", lambda: case_strat(ga), lambda: stalg_case(ga))
        return ComposeE(PairE(branches, b), case)
    if isinstance(t, Fix):
        ga = type_game(typecheck(ctx, t))
        fx = _atom("fix", lambda: fix_strat(ga), lambda: stalg_fix(ga))
        return ComposeE(_compile(t.t, ctx), fx)
    if isinstance(t, Pair):
        return PairE(_compile(t.l, ctx), _compile(t.r, ctx))
    if isinstance(t, (Proj1, Proj2)):
        ty = typecheck(ctx, t.t)
        side = "W" if isinstance(t, Proj1) else "E"
        gp = type_game(ty)
        gi = type_game(ty.l if isinstance(t, Proj1) else ty.r)
        pr = _pair_atom(projection(gp, (side,), gi, f"proj{side}"),
                        f"proj{side}")
        return ComposeE(_compile(t.t, ctx), pr)
    raise PcfTypeError(f"cannot compile {t!r}", t)


def elaborate(e: StrategyExpr) -> Tuple[Strategy, StAlgorithm]:
    """Interpret a strategy expression as a strategy and its table."""
    if isinstance(e, Atomic):
        return e.strat(), e.alg()
    if isinstance(e, CurryE):
        s, a = elaborate(e.e)
        return curry_arrow_strat(s), stalg_curry(a)
    if isinstance(e, PairE):
        sl, al = elaborate(e.l)
        sr, ar = elaborate(e.r)
        return pairing_strat(sl, sr), stalg_pairing(al, ar)
    if isinstance(e, ComposeE):
        sl, al = elaborate(e.l)
        sr, ar = elaborate(e.r)
        return (concat_strat(promotion_strat(sl), sr),
                stalg_concat(stalg_promotion(al), ar))
    raise TypeError(f"not a strategy expression: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def run_closed(t: PcfTerm, fuel: int = DEFAULT_FUEL
               ) -> Tuple[Optional[int], PlayTrace, Strategy]:
    """Evaluate a closed term of type N: elaborate, hide every internal
    move, and probe the output naturals game."""
    ty = typecheck([], t)
    if ty != NAT_T:
        raise PcfTypeError(f"program has type {ty}, expected N", t)
    strat, _ = elaborate(compile(t))
    hidden = hide_strategy(strat, OMEGA)
    tr = play(hidden, numeral_env(None), fuel=fuel)
    if tr.status == "completed":
        return count_yes(tr.position), tr, hidden
    if tr.status == "fuel-exhausted":
        return None, tr, hidden
    raise RuntimeError(f"evaluation broke down: {tr.status} ({tr.message})")


def eval(t: PcfTerm, fuel: int = DEFAULT_FUEL) -> Optional[int]:
    return run_closed(t, fuel)[0]


# ---------------------------------------------------------------------------
# Numeral positions
# ---------------------------------------------------------------------------

def decode_numeral(s: Position) -> Optional[int]:
    """Read a complete external position of the naturals game as a number."""
    n = len(s)
    if n < 2 or n % 2 != 0:
        return None
    if not is_position(NAT, s):
        return None
    if s.move(0).inner != InnerElement(Q_HAT, ()):
        return None
    for i in range(1, n - 1, 2):
        if s.move(i).inner.substance != YES:
            return None
        if s.move(i + 1).inner.substance != Q:
            return None
    if s.move(n - 1).inner.substance != NO:
        return None
    return (n - 2) // 2


def encode_numeral(n: int) -> Position:
    s = EMPTY_POSITION.snoc(mk_move(Q_HAT, ()), None)
    for k in range(n):
        s = s.snoc(mk_move(YES, ()), 2 * k)
        s = s.snoc(mk_move(Q, ()), 2 * k + 1)
    return s.snoc(mk_move(NO, ()), 2 * n)
