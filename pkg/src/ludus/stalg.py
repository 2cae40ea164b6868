"""Symbolic table algorithms over the instruction game.

A strategy can be *described* instead of computed: a finite table maps a
query-filtered state plus a short window of instruction moves to the next
instruction move.  The instruction game has four slots — three input slots
holding the last three P-view moves (third-last = 0, second-last = 1,
last = 2) and one output slot (3).  Each slot pairs a one-question symbol
game (naming an inner element, or blank) with a spelling game for the outer
tag word.  `realize` drives a table symbolically: it encodes the view
window, runs one element round and one spelling round against the table,
decodes the result, and resolves a justifier selector.

Tables for the atomic strategies are shipped explicitly; combinators act on
tables directly (re-tagging symbols move-for-move, or — for promotion —
replaying the underlying table inside a wrapper program), so realizing a
combined table agrees with combining the realized strategies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .tags import (
    EMPTY_TAG,
    InnerElement,
    MalformedTag,
    Move,
    Tag,
    parse_outer,
    tag_str,
)
from .core import (
    BLANK,
    Bang,
    Bool2,
    Concat,
    Curry,
    FF,
    GameExpr,
    Hidden,
    InstrAlphabet,
    LazyNat,
    Lolli,
    NO,
    PairingG,
    Product,
    Promotion,
    Q,
    QI_HAT,
    QT,
    QT_HAT,
    Q_HAT,
    TAG_ANSWERS,
    TT,
    TagGame,
    Tensor,
    Terminal,
    Uncurry,
    YES,
    _concat_route,
    _concat_wrap,
    _curry_peel,
    _curry_wrap,
    _pair_routes,
    _pair_wrap,
    _promo_thread,
    _promo_wrap,
    _retag,
    _uncurry_peel,
    _uncurry_wrap,
    enabled_star,
    inner_elements,
    is_move,
    p_view_indices,
)
from .strategy import Strategy, resolve_selector
from .constructions import (
    BOOL,
    NAT,
    UNIT,
    _memo_game,
    _partner_justifier,
    arrow_c,
    bang_c,
    case_game,
    external_shape,
    fix_game,
    lolli_c,
    product_c,
    tensor_c,
)

OK = "ok"
DIGITS = ("#", "l", "[", "]")
OB, CB, HH, LL = "[", "]", "#", "l"


class IMove(NamedTuple):
    """One instruction move: a symbol played in slot `comp` (0..3).  The
    symbol is an inner element, the blank, an element question, a tag
    question, or a tag answer."""

    sym: object
    comp: int

    def __repr__(self) -> str:
        return f"{_sym_str(self.sym)}@{self.comp}"


def _sym_str(sym) -> str:
    if isinstance(sym, InnerElement):
        return repr(sym)
    return str(sym)


def _is_elem(sym) -> bool:
    return isinstance(sym, InnerElement)


def _is_tagq(sym) -> bool:
    return sym in (QT_HAT, QT)


def _is_tagans(sym) -> bool:
    return sym in TAG_ANSWERS


def _is_digit(sym) -> bool:
    return sym in DIGITS


# ---------------------------------------------------------------------------
# The instruction game and move encodings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InstrGame:
    """The instruction game of a base game: three input slots and one output
    slot, each a symbol game paired with a spelling game."""

    base: GameExpr
    shape: GameExpr


def _slot_game(g: GameExpr) -> GameExpr:
    return _memo_game(("instr-slot", id(g)),
                      lambda: Product(InstrAlphabet(g), TagGame()))


def instr_game(g: GameExpr) -> InstrGame:
    gm = _slot_game(g)
    trip = product_c(product_c(gm, gm), gm)
    return InstrGame(g, arrow_c(trip, gm))


class MoveEncoding(NamedTuple):
    """A move spelled out: its inner element plus the characters of its
    outer tag word (the answers of one spelling round)."""

    inner: InnerElement
    digits: Tuple[str, ...]


def encode_move(g: GameExpr, m: Move) -> MoveEncoding:
    if not is_move(g, m):
        raise ValueError(f"{m!r} is not a move of the game")
    return MoveEncoding(m.inner, tuple(tag_str(m.outer)))


def decode_move(g: GameExpr, enc: MoveEncoding) -> Optional[Move]:
    """Inverse of encode_move; None on anything that does not encode a move
    of g."""
    if not isinstance(enc, MoveEncoding) or not isinstance(enc.inner, InnerElement):
        return None
    if enc.inner not in inner_elements(g):
        return None
    if not all(d in DIGITS for d in enc.digits):
        return None
    try:
        outer = parse_outer("".join(enc.digits))
    except (MalformedTag, ValueError):
        return None
    m = Move(enc.inner, outer)
    return m if is_move(g, m) else None


def mview(run: Iterable[IMove], d: int, comp: Optional[int] = None) -> Tuple[IMove, ...]:
    """The bracket subsequence of the spelling answers in `run` whose
    nesting depth is at most d (an opening bracket has the depth at which
    it opens, a closing bracket the depth it returns to)."""
    out = []
    level = 0
    for im in run:
        if comp is not None and im.comp != comp:
            continue
        if im.sym == OB:
            if level <= d:
                out.append(im)
            level += 1
        elif im.sym == CB:
            level -= 1
            if level <= d:
                out.append(im)
    return tuple(out)


# ---------------------------------------------------------------------------
# St-algorithms
# ---------------------------------------------------------------------------

class StAlgorithm:
    """A symbolic description of a strategy: a state space (query-filtered
    view contents), a query predicate on inner elements, and a finite
    lookup from (state, instruction run) to the next instruction move."""

    game: GameExpr
    name: str
    view_scope: int
    mate_scope: int

    def query(self, inner: InnerElement) -> bool:
        raise NotImplementedError

    def has_state(self, state: tuple) -> bool:
        raise NotImplementedError

    def lookup(self, state: tuple, run: Tuple[IMove, ...]):
        """The instruction move following `run`, as (IMove, selector), or
        None when the table is undefined there."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<stalg {self.name}>"


def query_state(alg: StAlgorithm, view_moves: Iterable[Move]) -> tuple:
    """The state at a P-view: the query-selected inner elements in order."""
    return tuple(m.inner for m in view_moves if alg.query(m.inner))


def instr_next(alg: StAlgorithm, state: tuple, run: Sequence[IMove]):
    """One step of the table."""
    return alg.lookup(state, tuple(run))


# -- entry tables -----------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    """One pattern slot: a literal instruction move, or a symbol class
    ("elem", "tagq", "tagans", "digit", "any") in a fixed component."""

    kind: str
    comp: int
    sym: object = None
    pred: Optional[Callable[[object], bool]] = None

    def matches(self, im: IMove) -> bool:
        if im.comp != self.comp:
            return False
        s = im.sym
        if self.kind == "lit":
            return s == self.sym
        if self.kind == "elem":
            ok = _is_elem(s)
        elif self.kind == "tagq":
            ok = _is_tagq(s)
        elif self.kind == "tagans":
            ok = _is_tagans(s)
        elif self.kind == "digit":
            ok = _is_digit(s)
        elif self.kind == "any":
            ok = True
        else:
            return False
        return ok and (self.pred is None or bool(self.pred(s)))


def lit(sym, comp: int) -> Atom:
    return Atom("lit", comp, sym=sym)


def cls(kind: str, comp: int, pred=None) -> Atom:
    return Atom(kind, comp, pred=pred)


@dataclass(frozen=True)
class Entry:
    """pattern (matched against the run's suffix, first listed entry wins)
    -> output symbol in slot `comp`; element outputs carry the justifier
    selector of the eventual response."""

    pattern: Tuple[Atom, ...]
    out: object  # literal symbol, or callable(run) -> symbol
    comp: int
    sel: Optional[str] = None
    guard: Optional[Callable[[Tuple[IMove, ...]], bool]] = None

    def out_sym(self, run: Tuple[IMove, ...]):
        return self.out(run) if callable(self.out) else self.out


class EntryTable(StAlgorithm):
    """A finite entry list shared by the algorithm's states.  Keys are the
    maximal run suffixes needed to disambiguate; the scope is the longest
    key the table ever consults."""

    def __init__(self, game: GameExpr, name: str,
                 states: FrozenSet[tuple],
                 query: Callable[[InnerElement], bool],
                 entries: List[Entry],
                 mate_scope: int = 0,
                 view_scope: Optional[int] = None):
        self.game = game
        self.name = name
        self.states = states
        self._query = query
        self.entries = list(entries)
        self.mate_scope = mate_scope
        self.view_scope = (view_scope if view_scope is not None
                           else max((len(e.pattern) for e in entries), default=0))

    def query(self, inner: InnerElement) -> bool:
        return self._query(inner)

    def has_state(self, state: tuple) -> bool:
        return state in self.states

    def lookup(self, state: tuple, run: Tuple[IMove, ...]):
        if not self.has_state(state):
            return None
        n = len(run)
        for e in self.entries:
            k = len(e.pattern)
            if k > n:
                continue
            if not all(a.matches(run[n - k + i]) for i, a in enumerate(e.pattern)):
                continue
            if e.guard is not None and not e.guard(run):
                continue
            sym = e.out_sym(run)
            if sym is None:
                return None
            return IMove(sym, e.comp), e.sel
        return None


def format_table(alg: StAlgorithm) -> List[str]:
    """Render a table, one line per entry:
    `state | key-sequence -> move @ justifier-selector`."""
    if not isinstance(alg, EntryTable):
        return [f"{alg.name}: combined table ({type(alg).__name__}), "
                f"view scope {alg.view_scope}, mate scope {alg.mate_scope}"]
    states = " ".join(sorted(
        "(" + ",".join(_sym_str(i) for i in st) + ")" for st in alg.states))
    lines = []
    for e in alg.entries:
        key = " ".join(_atom_str(a) for a in e.pattern)
        out = _sym_str(e.out) if not callable(e.out) else "<fn>"
        sel = e.sel or "-"
        grd = " ?" if e.guard is not None else ""
        lines.append(f"{states} | {key}{grd} -> {out}@{e.comp} @ {sel}")
    return lines


def _atom_str(a: Atom) -> str:
    if a.kind == "lit":
        return f"{_sym_str(a.sym)}@{a.comp}"
    return f"<{a.kind}>@{a.comp}"


# ---------------------------------------------------------------------------
# Realization
# ---------------------------------------------------------------------------

_I3 = IMove(QI_HAT, 3)
_T3H = IMove(QT_HAT, 3)
_T3 = IMove(QT, 3)


class _InstrRunner:
    """Answers the table's probes from the encoded view window and collects
    its output: one element round, then one fresh spelling round."""

    def __init__(self, alg: StAlgorithm, state: tuple,
                 encs: List[Optional[MoveEncoding]], fuel: int):
        self.alg = alg
        self.state = state
        self.encs = encs
        self.fuel = fuel
        self.cursors = [0, 0, 0]

    def _answer(self, probe: IMove) -> Optional[IMove]:
        sym, c = probe.sym, probe.comp
        if not 0 <= c <= 2:
            return None
        enc = self.encs[c]
        if sym == QI_HAT:
            return IMove(enc.inner if enc is not None else BLANK, c)
        if sym == QT_HAT:
            self.cursors[c] = 0
        elif sym != QT:
            return None
        d = enc.digits if enc is not None else ()
        k = self.cursors[c]
        self.cursors[c] += 1
        return IMove(d[k] if k < len(d) else OK, c)

    def element_run(self):
        run = [_I3]
        while True:
            if self.fuel <= 0:
                return None, None
            self.fuel -= 1
            r = self.alg.lookup(self.state, tuple(run))
            if r is None:
                return None, None
            im, sel = r
            if im.comp == 3:
                if not _is_elem(im.sym):
                    return None, None  # blank output: undefined
                return im.sym, sel
            ans = self._answer(im)
            if ans is None:
                return None, None
            run += [im, ans]

    def tag_run(self) -> Optional[List[str]]:
        self.cursors = [0, 0, 0]
        run = [_T3H]
        word: List[str] = []
        while True:
            if self.fuel <= 0:
                return None
            self.fuel -= 1
            r = self.alg.lookup(self.state, tuple(run))
            if r is None:
                return None
            im, _ = r
            if im.comp == 3:
                if im.sym == OK:
                    return word
                if not _is_digit(im.sym):
                    return None
                word.append(im.sym)
                run += [im, _T3]
            else:
                ans = self._answer(im)
                if ans is None:
                    return None
                run += [im, ans]


class RealizedStrategy(Strategy):
    """The strategy a table describes: state from the query-filtered P-view,
    window from the last three view moves, response from the element and
    spelling rounds."""

    def __init__(self, alg: StAlgorithm, fuel: int = 10_000):
        self.alg = alg
        self.game = alg.game
        self.name = f"st({alg.name})"
        self.fuel = fuel

    def next_move(self, s):
        g, alg = self.game, self.alg
        vis = p_view_indices(g, s)
        vm = [s.move(i) for i in vis]
        state = tuple(m.inner for m in vm if alg.query(m.inner))
        if not alg.has_state(state):
            return None
        encs: List[Optional[MoveEncoding]] = [None, None, None]
        tail = vm[-3:]
        for k, m in enumerate(tail):
            encs[3 - len(tail) + k] = MoveEncoding(m.inner, tuple(tag_str(m.outer)))
        runner = _InstrRunner(alg, state, encs, self.fuel)
        inner, sel = runner.element_run()
        if inner is None:
            return None
        word = runner.tag_run()
        if word is None:
            return None
        r = decode_move(g, MoveEncoding(inner, tuple(word)))
        if r is None:
            return None
        if sel is None or sel == "partner":
            j = _partner_justifier(g, s, r)
        else:
            j = resolve_selector(g, s, sel)
        if j is None and not enabled_star(g, r):
            return None
        return r, j


def realize(alg: StAlgorithm, fuel: int = 10_000) -> Strategy:
    return RealizedStrategy(alg, fuel)


# ---------------------------------------------------------------------------
# Standardness
# ---------------------------------------------------------------------------

def is_standard(alg: StAlgorithm) -> bool:
    """A table is standard when (1) element rounds never touch spellings,
    (2) input spellings are only read from the last view slot (2), and
    (3) the blank symbol does not occur.  Combined tables are standard when
    their components are."""
    if isinstance(alg, EntryTable):
        return _entries_standard(alg.entries)
    if isinstance(alg, MappedTable):
        return all(is_standard(child) for child, _, _ in alg.sides.values())
    if isinstance(alg, PromotedTable):
        return is_standard(alg.base)
    return False


def _tagish_atom(a: Atom) -> bool:
    return (a.kind in ("tagq", "tagans", "digit")
            or (a.kind == "lit" and (_is_tagq(a.sym) or _is_tagans(a.sym))))


def _entries_standard(entries: List[Entry]) -> bool:
    for e in entries:
        if any(a.kind == "lit" and a.sym == BLANK for a in e.pattern):
            return False
        if not callable(e.out) and e.out == BLANK:
            return False
        # input spellings may only be read from slot 2
        for a in e.pattern:
            if a.comp in (0, 1) and _tagish_atom(a):
                return False
        if e.comp in (0, 1) and not callable(e.out) and _is_tagq(e.out):
            return False
        # element rounds stay symbol-only
        if (e.pattern and e.pattern[0].kind == "lit"
                and e.pattern[0].sym == QI_HAT and e.pattern[0].comp == 3):
            if any(_tagish_atom(a) for a in e.pattern):
                return False
            if not callable(e.out) and (_is_tagq(e.out) or _is_tagans(e.out)):
                return False
    return True


# ---------------------------------------------------------------------------
# Builder helpers
# ---------------------------------------------------------------------------

def initial_inners(g: GameExpr) -> FrozenSet[InnerElement]:
    """Inner elements of the opening moves of g."""
    if isinstance(g, Terminal):
        return frozenset()
    if isinstance(g, (Bool2, LazyNat)):
        return frozenset({InnerElement(Q_HAT, ())})
    if isinstance(g, Lolli):
        return frozenset(_retag(i, 0, ("E",)) for i in initial_inners(g.r))
    if isinstance(g, (Tensor, Product)):
        return (frozenset(_retag(i, 0, ("W",)) for i in initial_inners(g.l))
                | frozenset(_retag(i, 0, ("E",)) for i in initial_inners(g.r)))
    if isinstance(g, (Bang, Hidden)):
        return initial_inners(g.g)
    raise TypeError(f"no initial inner elements for {g!r}")


def _singleton_states(inners: Iterable[InnerElement]) -> FrozenSet[tuple]:
    return frozenset((i,) for i in inners)


def _initial_query(g: GameExpr) -> Callable[[InnerElement], bool]:
    init = initial_inners(g)
    return lambda i: i in init


_QH_E = InnerElement(Q_HAT, ("E",))
_QH_W = InnerElement(Q_HAT, ("W",))
_Q_E = InnerElement(Q, ("E",))
_Q_W = InnerElement(Q, ("W",))
_YES_W = InnerElement(YES, ("W",))
_NO_W = InnerElement(NO, ("W",))
_YES_E = InnerElement(YES, ("E",))
_NO_E = InnerElement(NO, ("E",))
_TT_E = InnerElement(TT, ("E",))
_FF_E = InnerElement(FF, ("E",))

_AI3 = lit(QI_HAT, 3)
_AT3H = lit(QT_HAT, 3)
_AP2 = lit(QI_HAT, 2)
_AP1 = lit(QI_HAT, 1)
_AP0 = lit(QI_HAT, 0)


def _consumed(run, comp: int = 2) -> int:
    return sum(1 for im in run if im.comp == comp and _is_tagans(im.sym))


def _depth_after(run, comp: int = 2) -> int:
    d = 0
    for im in run:
        if im.comp == comp:
            if im.sym == OB:
                d += 1
            elif im.sym == CB:
                d -= 1
    return d


def _groups_closed(run, comp: int = 2) -> int:
    d = n = 0
    for im in run:
        if im.comp == comp:
            if im.sym == OB:
                d += 1
            elif im.sym == CB:
                d -= 1
                if d == 0:
                    n += 1
    return n


def _run2(run) -> object:
    return run[2].sym if len(run) > 2 else None


def _run4(run) -> object:
    return run[4].sym if len(run) > 4 else None


def _spell_chain(prefix: Tuple[Atom, ...], word: str) -> List[Entry]:
    """Entries spelling the constant `word` in the output slot once the
    anchored prefix pattern has been seen."""
    n = len(word)
    if n == 0:
        return [Entry(prefix, OK, 3)]
    es = [Entry(prefix, word[0], 3)]
    for k in range(1, n + 1):
        out = word[k] if k < n else OK
        if k == 1:
            pat = (prefix[-1], lit(word[0], 3), lit(QT, 3))
        else:
            # each emitted character is acknowledged before the next
            pat = (lit(word[k - 2], 3), lit(QT, 3), lit(word[k - 1], 3),
                   lit(QT, 3))
        es.append(Entry(pat, out, 3))
    return es


# generic spelling relays: copy slot-2 digits into the output slot
def _relay_entries(close_out=OK) -> List[Entry]:
    return [
        Entry((cls("tagq", 2), lit(OK, 2)), close_out, 3),
        Entry((cls("tagq", 2), cls("digit", 2)), lambda run: run[-1].sym, 3),
        Entry((cls("digit", 3), cls("tagq", 3)), QT, 2),
    ]


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def stalg_zero(a: GameExpr = UNIT) -> StAlgorithm:
    g = arrow_c(a, NAT)
    entries = [
        Entry((_AI3,), _NO_E, 3, sel="partner"),
        Entry((_AT3H,), OK, 3),
    ]
    return EntryTable(g, "zero", _singleton_states(initial_inners(g)),
                      _initial_query(g), entries, view_scope=1)


def stalg_succ() -> StAlgorithm:
    g = arrow_c(NAT, NAT)
    qhE2, qE2 = lit(_QH_E, 2), lit(_Q_E, 2)
    yesW0, noW0 = lit(_YES_W, 0), lit(_NO_W, 0)
    ansW2 = cls("elem", 2, lambda i: i.tags == ("W",) and i.substance in (YES, NO))
    entries = [
        # element round
        Entry((_AI3, _AP2, qE2, _AP0, yesW0), _Q_W, 3, sel="partner"),
        Entry((_AI3, _AP2, qE2, _AP0, noW0), _NO_E, 3, sel="partner"),
        Entry((_AI3, _AP2, qhE2), _QH_W, 3, sel="partner"),
        Entry((_AI3, _AP2, ansW2), _YES_E, 3, sel="partner"),
        Entry((_AI3, _AP2, qE2), QI_HAT, 0),
        Entry((_AI3,), QI_HAT, 2),
        # spelling rounds: input questions carry the canonical thread []#
        *_spell_chain((_AT3H, _AP2, qhE2), "[]#"),
        *_spell_chain((_AT3H, _AP2, qE2, _AP0, yesW0), "[]#"),
        Entry((_AT3H, _AP2, qE2, _AP0, noW0), OK, 3),
        Entry((_AT3H, _AP2, ansW2), OK, 3),
        Entry((_AT3H, _AP2, qE2), QI_HAT, 0),
        Entry((_AT3H,), QI_HAT, 2),
    ]
    return EntryTable(g, "succ", frozenset({(_QH_E,)}), _initial_query(g),
                      entries, view_scope=11)


def stalg_pred() -> StAlgorithm:
    g = arrow_c(NAT, NAT)
    qhE2, qE2 = lit(_QH_E, 2), lit(_Q_E, 2)
    yesW2, noW2 = lit(_YES_W, 2), lit(_NO_W, 2)
    qhW1, qW1 = lit(_QH_W, 1), lit(_Q_W, 1)
    entries = [
        # element round: the first input yes is swallowed
        Entry((_AI3, _AP2, yesW2, _AP1, qhW1), _Q_W, 3, sel="partner"),
        Entry((_AI3, _AP2, yesW2, _AP1, qW1), _YES_E, 3, sel="partner"),
        Entry((_AI3, _AP2, qhE2), _QH_W, 3, sel="partner"),
        Entry((_AI3, _AP2, yesW2), QI_HAT, 1),
        Entry((_AI3, _AP2, noW2), _NO_E, 3, sel="partner"),
        Entry((_AI3, _AP2, qE2), _Q_W, 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        # spelling rounds
        *_spell_chain((_AT3H, _AP2, qhE2), "[]#"),
        *_spell_chain((_AT3H, _AP2, yesW2, _AP1, qhW1), "[]#"),
        Entry((_AT3H, _AP2, yesW2, _AP1, qW1), OK, 3),
        Entry((_AT3H, _AP2, yesW2), QI_HAT, 1),
        Entry((_AT3H, _AP2, noW2), OK, 3),
        *_spell_chain((_AT3H, _AP2, qE2), "[]#"),
        Entry((_AT3H,), QI_HAT, 2),
    ]
    return EntryTable(g, "pred", frozenset({(_QH_E,)}), _initial_query(g),
                      entries, view_scope=9)


def stalg_zeroq() -> StAlgorithm:
    g = arrow_c(NAT, BOOL)
    qhE2 = lit(_QH_E, 2)
    yesW2, noW2 = lit(_YES_W, 2), lit(_NO_W, 2)
    entries = [
        Entry((_AI3, _AP2, qhE2), _QH_W, 3, sel="partner"),
        Entry((_AI3, _AP2, noW2), _TT_E, 3, sel="partner"),
        Entry((_AI3, _AP2, yesW2), _FF_E, 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        *_spell_chain((_AT3H, _AP2, qhE2), "[]#"),
        Entry((_AT3H, _AP2, noW2), OK, 3),
        Entry((_AT3H, _AP2, yesW2), OK, 3),
        Entry((_AT3H,), QI_HAT, 2),
    ]
    return EntryTable(g, "zero?", frozenset({(_QH_E,)}), _initial_query(g),
                      entries)


def _flip_side(i: InnerElement) -> InnerElement:
    return _retag(i, 1, ("E" if i.tags[-1] == "W" else "W",))


def stalg_copycat(a: GameExpr = NAT) -> StAlgorithm:
    g = lolli_c(a, a)
    entries = [
        Entry((_AI3, _AP2, cls("elem", 2)),
              lambda run: _flip_side(run[-1].sym), 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        Entry((_AT3H,), QT_HAT, 2),
        *_relay_entries(),
    ]
    return EntryTable(g, "copycat", _singleton_states(initial_inners(g)),
                      _initial_query(g), entries, view_scope=3)


def stalg_dereliction(a: GameExpr = NAT) -> StAlgorithm:
    g = arrow_c(a, a)
    elemE2 = cls("elem", 2, lambda i: i.tags[-1] == "E")
    elemW2 = cls("elem", 2, lambda i: i.tags[-1] == "W")
    entries = [
        # element round: flip the side
        Entry((_AI3, _AP2, cls("elem", 2)),
              lambda run: _flip_side(run[-1].sym), 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        # spelling inward: prefix the canonical thread, then relay
        Entry((_AT3H, _AP2, elemE2), OB, 3),
        Entry((elemE2, lit(OB, 3), lit(QT, 3)), CB, 3),
        Entry((lit(OB, 3), lit(QT, 3), lit(CB, 3), lit(QT, 3)), HH, 3),
        Entry((lit(CB, 3), lit(QT, 3), lit(HH, 3), lit(QT, 3)), QT_HAT, 2),
        # spelling outward: strip the thread prefix, then relay
        Entry((_AT3H, _AP2, elemW2), QT_HAT, 2),
        Entry((elemW2, lit(QT_HAT, 2), lit(OB, 2)), QT, 2),
        Entry((lit(OB, 2), lit(QT, 2), lit(CB, 2)), QT, 2,
              guard=lambda run: _consumed(run) == 2),
        Entry((lit(CB, 2), lit(QT, 2), lit(HH, 2)), QT, 2,
              guard=lambda run: _consumed(run) == 3),
        Entry((_AT3H,), QI_HAT, 2),
        *_relay_entries(),
    ]
    return EntryTable(g, "dereliction", _singleton_states(initial_inners(g)),
                      _initial_query(g), entries)


def stalg_case(a: GameExpr = NAT) -> StAlgorithm:
    g = case_game(a)
    openers = initial_inners(g)
    initE2 = cls("elem", 2, lambda i: i in openers)
    nonInitE2 = cls("elem", 2,
                    lambda i: i.tags[-1] == "E" and i not in openers
                    and i.tags[-2:] != ("W", "E"))
    boolEW2 = cls("elem", 2, lambda i: i.substance in (TT, FF)
                  and i.tags[-2:] == ("E", "W"))
    elemWW2 = cls("elem", 2, lambda i: i.tags[-2:] == ("W", "W"))
    elemWW0 = cls("elem", 0, lambda i: i.tags[-2:] == ("W", "W"))

    def src(kind):
        def p(run):
            s = _run2(run)
            if not _is_elem(s):
                return False
            probe = IMove(s, 2)
            return {"init": initE2, "noninit": nonInitE2,
                    "bool": boolEW2, "ww": elemWW2}[kind].matches(probe)
        return p

    entries = [
        # --- element round ---
        Entry((_AI3, _AP2, boolEW2, _AP0, cls("elem", 0)),
              lambda run: _retag(run[-1].sym, 1,
                                 (("W" if run[-3].sym.substance == TT else "E"),
                                  "W", "W")), 3, sel="partner"),
        Entry((_AI3, _AP2, nonInitE2, _AP0, elemWW0),
              lambda run: _retag(run[-3].sym, 1,
                                 (run[-1].sym.tags[-3], "W", "W")),
              3, sel="partner"),
        Entry((_AI3, _AP2, initE2), InnerElement(Q_HAT, ("E", "W")), 3,
              sel="partner"),
        Entry((_AI3, _AP2, boolEW2), QI_HAT, 0),
        Entry((_AI3, _AP2, nonInitE2), QI_HAT, 0),
        Entry((_AI3, _AP2, elemWW2),
              lambda run: _retag(run[-1].sym, 3, ("E",)), 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        # --- spelling rounds ---
        # opening: its question's thread boxes the opening's word: [[e]]#
        Entry((_AT3H, _AP2, initE2), OB, 3),
        Entry((initE2, lit(OB, 3), lit(QT, 3)), OB, 3),
        Entry((lit(OB, 3), lit(QT, 3), lit(OB, 3), lit(QT, 3)), QT_HAT, 2),
        Entry((cls("tagq", 2), lit(OK, 2)), CB, 3, guard=src("init")),
        Entry((lit(OK, 2), lit(CB, 3), lit(QT, 3)), CB, 3, guard=src("init")),
        Entry((lit(CB, 3), lit(QT, 3), lit(CB, 3), lit(QT, 3)), HH, 3,
              guard=src("init")),
        Entry((lit(CB, 3), lit(QT, 3), lit(HH, 3), lit(QT, 3)), OK, 3,
              guard=src("init")),
        # boolean answer and mirrored moves: prefix []#, then re-derive the
        # element to choose the source of the remainder
        Entry((_AT3H, _AP2, boolEW2), OB, 3),
        Entry((_AT3H, _AP2, nonInitE2), OB, 3),
        Entry((boolEW2, lit(OB, 3), lit(QT, 3)), CB, 3),
        Entry((nonInitE2, lit(OB, 3), lit(QT, 3)), CB, 3),
        Entry((lit(OB, 3), lit(QT, 3), lit(CB, 3), lit(QT, 3)), HH, 3),
        Entry((lit(CB, 3), lit(QT, 3), lit(HH, 3), lit(QT, 3)), QI_HAT, 2),
        Entry((lit(QI_HAT, 2), boolEW2), QT_HAT, 2),
        Entry((lit(QI_HAT, 2), nonInitE2), QT_HAT, 2),
        # boolean answer: extract e from inside its thread [[e]]#
        Entry((lit(QT_HAT, 2), lit(OB, 2)), QT, 2, guard=src("bool")),
        Entry((lit(OB, 2), lit(QT, 2), lit(OB, 2)), QT, 2,
              guard=lambda run: src("bool")(run) and _consumed(run) == 2),
        Entry((lit(QT, 2), lit(CB, 2)), OK, 3,
              guard=lambda run: src("bool")(run) and _depth_after(run) == 1
              and _consumed(run) > 2),
        # branch move: strip the []# prefix, then relay
        Entry((_AT3H, _AP2, elemWW2), QT_HAT, 2),
        Entry((elemWW2, lit(QT_HAT, 2), lit(OB, 2)), QT, 2),
        Entry((lit(OB, 2), lit(QT, 2), lit(CB, 2)), QT, 2,
              guard=lambda run: src("ww")(run) and _consumed(run) == 2),
        Entry((lit(CB, 2), lit(QT, 2), lit(HH, 2)), QT, 2,
              guard=lambda run: src("ww")(run) and _consumed(run) == 3),
        Entry((_AT3H,), QI_HAT, 2),
        *_relay_entries(),
    ]
    return EntryTable(g, "case", _singleton_states(initial_inners(g)),
                      _initial_query(g), entries, mate_scope=1)


def stalg_fix(a: GameExpr = NAT) -> StAlgorithm:
    g = fix_game(a)
    elemE2 = cls("elem", 2, lambda i: i.tags[-1] == "E")
    elemEW2 = cls("elem", 2, lambda i: i.tags[-2:] == ("E", "W"))
    elemWW2 = cls("elem", 2, lambda i: i.tags[-2:] == ("W", "W"))
    elemE0 = cls("elem", 0, lambda i: i.tags[-1] == "E")
    elemWW0 = cls("elem", 0, lambda i: i.tags[-2:] == ("W", "W"))

    def src(kind):
        def p(run):
            s = _run2(run)
            if not _is_elem(s):
                return False
            probe = IMove(s, 2)
            return {"e": elemE2, "ew": elemEW2, "ww": elemWW2}[kind].matches(probe)
        return p

    def from_ww(run):
        s = _run4(run)
        return _is_elem(s) and elemWW0.matches(IMove(s, 0))

    entries = [
        # --- element round ---
        Entry((_AI3, _AP2, elemEW2, _AP0, elemE0),
              lambda run: _retag(run[-3].sym, 2, ("E",)), 3, sel="partner"),
        Entry((_AI3, _AP2, elemEW2, _AP0, elemWW0),
              lambda run: _retag(run[-3].sym, 2, ("W", "W")), 3, sel="partner"),
        Entry((_AI3, _AP2, elemEW2), QI_HAT, 0),
        Entry((_AI3, _AP2, elemWW2),
              lambda run: _retag(run[-1].sym, 2, ("E", "W")), 3, sel="partner"),
        Entry((_AI3, _AP2, elemE2),
              lambda run: _retag(run[-1].sym, 1, ("E", "W")), 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        # --- spelling rounds ---
        # outer move: open a fresh instance thread []#e
        Entry((_AT3H, _AP2, elemE2), OB, 3),
        Entry((elemE2, lit(OB, 3), lit(QT, 3)), CB, 3),
        Entry((lit(OB, 3), lit(QT, 3), lit(CB, 3), lit(QT, 3)), HH, 3),
        Entry((lit(CB, 3), lit(QT, 3), lit(HH, 3), lit(QT, 3)), QT_HAT, 2),
        # instance-domain move [x]#[y]#f: nest as [[x]#[y]]#f
        Entry((_AT3H, _AP2, elemWW2), OB, 3),
        Entry((elemWW2, lit(OB, 3), lit(QT, 3)), QT_HAT, 2),
        Entry((lit(CB, 2), lit(CB, 3), cls("tagq", 3)), CB, 3,
              guard=lambda run: src("ww")(run) and _depth_after(run) == 0
              and _groups_closed(run) == 2),
        # instance-output move: re-derive the element to pick the transform
        Entry((_AT3H, _AP2, elemEW2), QI_HAT, 0),
        Entry((elemEW2, _AP0, elemE0), QT_HAT, 2),
        Entry((elemEW2, _AP0, elemWW0), QT_HAT, 2),
        # ... []#f -> f (skip the empty instance prefix)
        Entry((elemE0, lit(QT_HAT, 2), lit(OB, 2)), QT, 2),
        Entry((lit(OB, 2), lit(QT, 2), lit(CB, 2)), QT, 2,
              guard=lambda run: src("ew")(run) and not from_ww(run)
              and _consumed(run) == 2),
        Entry((lit(CB, 2), lit(QT, 2), lit(HH, 2)), QT, 2,
              guard=lambda run: src("ew")(run) and not from_ww(run)
              and _consumed(run) == 3),
        # ... [[x]#[y]]#f -> [x]#[y]#f (drop the outer bracket pair)
        Entry((elemWW0, lit(QT_HAT, 2), lit(OB, 2)), QT, 2),
        Entry((lit(QT, 2), lit(CB, 2)), QT, 2,
              guard=lambda run: src("ew")(run) and from_ww(run)
              and _depth_after(run) == 0 and _groups_closed(run) == 1),
        Entry((_AT3H,), QI_HAT, 2),
        *_relay_entries(),
    ]
    return EntryTable(g, "fix", _singleton_states(initial_inners(g)),
                      _initial_query(g), entries, mate_scope=1)


def stalg_count_nonzeros() -> StAlgorithm:
    """Count-the-nonzero-answers: each repeat question re-opens the input in
    a fresh thread, whose tag extends the previous thread by one letter.
    The fresh tag is read off the *third-last* view slot, so this table is
    deliberately not standard."""
    g = arrow_c(NAT, NAT)
    qhE2, qE2 = lit(_QH_E, 2), lit(_Q_E, 2)
    yesW2, noW2 = lit(_YES_W, 2), lit(_NO_W, 2)
    entries = [
        # element round
        Entry((_AI3, _AP2, qhE2), _QH_W, 3, sel="partner"),
        Entry((_AI3, _AP2, yesW2), _YES_E, 3, sel="partner"),
        Entry((_AI3, _AP2, noW2), _NO_E, 3, sel="partner"),
        Entry((_AI3, _AP2, qE2), _QH_W, 3, sel="partner"),
        Entry((_AI3,), QI_HAT, 2),
        # spelling rounds
        *_spell_chain((_AT3H, _AP2, qhE2), "[]#"),
        Entry((_AT3H, _AP2, yesW2), OK, 3),
        Entry((_AT3H, _AP2, noW2), OK, 3),
        # fresh thread: copy slot 0's thread, inserting one letter before
        # its closing bracket
        Entry((_AT3H, _AP2, qE2), QT_HAT, 0),
        Entry((lit(QT_HAT, 0), lit(OB, 0)), OB, 3),
        Entry((cls("tagq", 0), lit(CB, 0)), LL, 3),
        Entry((lit(CB, 0), lit(LL, 3), cls("tagq", 3)), CB, 3),
        Entry((cls("tagq", 0), lit(OK, 0)), OK, 3),
        Entry((cls("tagq", 0), cls("digit", 0)), lambda run: run[-1].sym, 3),
        Entry((cls("digit", 3), cls("tagq", 3)), QT, 0,
              guard=lambda run: any(im.comp == 0 and _is_tagans(im.sym)
                                    for im in run)),
        Entry((_AT3H,), QI_HAT, 2),
    ]
    return EntryTable(g, "count-nonzeros", frozenset({(_QH_E,)}),
                      _initial_query(g), entries, mate_scope=1)


# ---------------------------------------------------------------------------
# Table combinators
# ---------------------------------------------------------------------------

def _require_standard(alg: StAlgorithm) -> None:
    if not is_standard(alg):
        raise ValueError(f"combinators require standard tables, got {alg.name}")


class MappedTable(StAlgorithm):
    """A combined table acting by per-symbol translation: composite symbols
    are stripped to a component's symbols before its lookup, and the
    component's output symbol is wrapped back.  Spelling moves pass through
    unchanged."""

    def __init__(self, game: GameExpr, name: str,
                 sides: Dict[str, Tuple[StAlgorithm, Callable, Callable]],
                 dispatch: Callable[[tuple], Optional[str]]):
        self.game = game
        self.name = name
        self.sides = sides
        self._dispatch = dispatch
        self.view_scope = max(c.view_scope for c, _, _ in sides.values())
        self.mate_scope = max(c.mate_scope for c, _, _ in sides.values())

    def _strip(self, side: str, inner: InnerElement) -> Optional[InnerElement]:
        _, strip, _ = self.sides[side]
        try:
            return strip(inner)
        except (IndexError, TypeError):
            return None

    def query(self, inner: InnerElement) -> bool:
        for side, (child, _, _) in self.sides.items():
            s = self._strip(side, inner)
            if s is not None and child.query(s):
                return True
        return False

    def _child_state(self, side: str, state: tuple) -> Optional[tuple]:
        child = self.sides[side][0]
        out = []
        for e in state:
            s = self._strip(side, e)
            if s is not None and child.query(s):
                out.append(s)
        return tuple(out)

    def has_state(self, state: tuple) -> bool:
        side = self._dispatch(state)
        if side is None:
            return False
        return self.sides[side][0].has_state(self._child_state(side, state))

    def lookup(self, state: tuple, run: Tuple[IMove, ...]):
        side = self._dispatch(state)
        if side is None:
            return None
        child, _, wrap = self.sides[side]
        cs = self._child_state(side, state)
        if not child.has_state(cs):
            return None
        trun = []
        for im in run:
            if im.comp <= 2 and _is_elem(im.sym):
                s = self._strip(side, im.sym)
                trun.append(IMove(s if s is not None else BLANK, im.comp))
            else:
                trun.append(im)
        r = child.lookup(cs, tuple(trun))
        if r is None:
            return None
        im, sel = r
        if im.comp == 3 and _is_elem(im.sym):
            try:
                im = IMove(wrap(im.sym), 3)
            except (IndexError, TypeError):
                return None
        return im, sel


def stalg_tensor(a: StAlgorithm, b: StAlgorithm) -> StAlgorithm:
    """Tables side by side over a tensor of arrow games."""
    _require_standard(a)
    _require_standard(b)
    gl, gr = a.game, b.game
    if not (isinstance(gl, Lolli) and isinstance(gr, Lolli)):
        raise TypeError("tensor of tables needs linear-arrow games")
    g = _memo_game(
        ("tensor-strat", id(gl), id(gr)),
        lambda: Lolli(tensor_c(gl.l, gr.l), tensor_c(gl.r, gr.r)),
    )

    def strip_for(comp):
        def strip(i):
            if len(i.tags) >= 2 and i.tags[-2] == comp:
                return _retag(i, 2, (i.tags[-1],))
            return None
        return strip

    def wrap_for(comp):
        return lambda i: _retag(i, 1, (comp, i.tags[-1]))

    def dispatch(state):
        if not state or len(state[0].tags) < 2:
            return None
        c = state[0].tags[-2]
        return c if c in ("W", "E") else None

    sides = {"W": (a, strip_for("W"), wrap_for("W")),
             "E": (b, strip_for("E"), wrap_for("E"))}
    return MappedTable(g, f"({a.name} (x) {b.name})", sides, dispatch)


def stalg_pairing(a: StAlgorithm, b: StAlgorithm,
                  wc: Optional[GameExpr] = None) -> StAlgorithm:
    """Tables paired over a shared domain; one component active per play."""
    _require_standard(a)
    _require_standard(b)
    ca, wa = external_shape(a.game)
    cb, wb = external_shape(b.game)
    g = _memo_game(
        ("pair-strat", id(a.game), id(b.game)),
        lambda: PairingG(a.game, b.game, wa, wb, wc if wc is not None else ca),
    )

    def strip_for(side):
        def strip(i):
            for sd, _, mm in _pair_routes(g, Move(i, EMPTY_TAG)):
                if sd == side:
                    return mm.inner
            return None
        return strip

    def wrap_for(side):
        return lambda i: _pair_wrap(g, side, Move(i, EMPTY_TAG)).inner

    def dispatch(state):
        if not state:
            return None
        sds = {sd for sd, _, _ in _pair_routes(g, Move(state[0], EMPTY_TAG))}
        return sds.pop() if len(sds) == 1 else None

    sides = {"L": (a, strip_for("L"), wrap_for("L")),
             "R": (b, strip_for("R"), wrap_for("R"))}
    return MappedTable(g, f"<{a.name},{b.name}>", sides, dispatch)


def stalg_concat(aj: StAlgorithm, ak: StAlgorithm) -> StAlgorithm:
    """Concatenation of tables over a shared middle board."""
    _require_standard(aj)
    _require_standard(ak)
    wa, _ = external_shape(aj.game)
    wb, wc = external_shape(ak.game)
    g = _memo_game(
        ("concat-strat", id(aj.game), id(ak.game)),
        lambda: Concat(aj.game, ak.game, wa, wb, wc),
    )

    def strip_for(side):
        def strip(i):
            sd, _, mm = _concat_route(g, Move(i, EMPTY_TAG))
            return mm.inner if sd == side else None
        return strip

    def wrap_for(side):
        return lambda i: _concat_wrap(g, side, Move(i, EMPTY_TAG)).inner

    def dispatch(state):
        for e in state:
            if _concat_route(g, Move(e, EMPTY_TAG))[0] == "J":
                return "J"
        return "K"

    sides = {"J": (aj, strip_for("J"), wrap_for("J")),
             "K": (ak, strip_for("K"), wrap_for("K"))}
    return MappedTable(g, f"({aj.name} ++ {ak.name})", sides, dispatch)


def stalg_curry(a: StAlgorithm) -> StAlgorithm:
    """Curry a table over a two-part domain (tensor, or a banged product)."""
    _require_standard(a)
    dom, wc = external_shape(a.game)
    if isinstance(dom, Tensor):
        g = _memo_game(("curry-strat", id(a.game)),
                       lambda: Curry(a.game, dom.l, dom.r, wc))
    elif isinstance(dom, Bang) and isinstance(dom.g, Product):
        g = _memo_game(
            ("curry-arrow-strat", id(a.game)),
            lambda: Curry(a.game, bang_c(dom.g.l), bang_c(dom.g.r), wc))
    else:
        raise TypeError("currying needs a two-part domain")
    sides = {"g": (a,
                   lambda i: _curry_peel(g, Move(i, EMPTY_TAG)).inner,
                   lambda i: _curry_wrap(g, Move(i, EMPTY_TAG)).inner)}
    return MappedTable(g, f"curry({a.name})", sides, lambda state: "g")


def stalg_uncurry(a: StAlgorithm) -> StAlgorithm:
    _require_standard(a)
    wa, cod = external_shape(a.game)
    if not isinstance(cod, Lolli):
        raise TypeError("uncurrying needs an arrow codomain")
    g = _memo_game(("uncurry-strat", id(a.game)),
                   lambda: Uncurry(a.game, wa, cod.l, cod.r))
    sides = {"g": (a,
                   lambda i: _uncurry_peel(g, Move(i, EMPTY_TAG)).inner,
                   lambda i: _uncurry_wrap(g, Move(i, EMPTY_TAG)).inner)}
    return MappedTable(g, f"uncurry({a.name})", sides, lambda state: "g")


class PromotedTable(StAlgorithm):
    """Promotion of a table: element rounds relay the base's probes with the
    thread marker stripped; spelling rounds read the last view move's tag,
    split off its thread, replay the base's rounds against the projection,
    and re-wrap the base's answer into the same thread."""

    def __init__(self, base: StAlgorithm):
        _require_standard(base)
        self.base = base
        wa, wb = external_shape(base.game)
        self.game = _memo_game(("promo-strat", id(base.game)),
                               lambda: Promotion(base.game, wa, wb))
        self.name = f"{base.name}!"
        self.view_scope = base.view_scope
        self.mate_scope = base.mate_scope

    @staticmethod
    def _strip(inner: InnerElement) -> InnerElement:
        if inner.tags and inner.tags[-1] == "S":
            return _retag(inner, 1, ())
        return inner

    def _wrap(self, inner: InnerElement) -> InnerElement:
        lab = inner_elements(self.base.game).get(inner)
        if lab is not None and lab.pr > 0:
            return _retag(inner, 0, ("S",))
        return inner

    def query(self, inner: InnerElement) -> bool:
        return self.base.query(self._strip(inner))

    def _child_state(self, state: tuple) -> tuple:
        return tuple(self._strip(e) for e in state)

    def has_state(self, state: tuple) -> bool:
        return self.base.has_state(self._child_state(state))

    def lookup(self, state: tuple, run: Tuple[IMove, ...]):
        cs = self._child_state(state)
        if not self.base.has_state(cs) or not run:
            return None
        if run[0] == _I3:
            gen = self._element_program(cs)
        elif run[0] == _T3H:
            gen = self._tag_program(cs)
        else:
            return None
        try:
            out = next(gen)
        except StopIteration:
            return None
        k = 1
        while k < len(run):
            if run[k] != out[0]:
                return None
            if k + 1 >= len(run):
                return None
            try:
                out = gen.send(run[k + 1])
            except StopIteration:
                return None
            k += 2
        return out

    def _element_program(self, cs: tuple):
        brun = [_I3]
        while True:
            r = self.base.lookup(cs, tuple(brun))
            if r is None:
                return
            im, sel = r
            if im.comp == 3:
                if not _is_elem(im.sym):
                    return
                yield IMove(self._wrap(im.sym), 3), sel
                return
            ans = yield (im, sel)
            if ans is None or ans.comp != im.comp:
                return
            sym = self._strip(ans.sym) if _is_elem(ans.sym) else ans.sym
            brun += [im, IMove(sym, ans.comp)]

    def _tag_program(self, cs: tuple):
        # 1. the last view move's element and full tag word
        ans = yield (IMove(QI_HAT, 2), None)
        if ans is None or not _is_elem(ans.sym):
            return
        i2 = ans.sym
        w2: List[str] = []
        ans = yield (IMove(QT_HAT, 2), None)
        while ans is not None and _is_digit(ans.sym):
            w2.append(ans.sym)
            ans = yield (IMove(QT, 2), None)
        if ans is None or ans.sym != OK:
            return
        try:
            m2 = Move(i2, parse_outer("".join(w2)))
        except (MalformedTag, ValueError):
            return
        th = _promo_thread(m2)
        if th is None:
            return
        f, peeled = th
        pi2 = peeled.inner
        pw2 = tuple(tag_str(peeled.outer))
        # 2. replay the base's element round to recover its answer symbol
        brun = [_I3]
        sym_b = None
        while sym_b is None:
            r = self.base.lookup(cs, tuple(brun))
            if r is None:
                return
            im, _ = r
            if im.comp == 3:
                if not _is_elem(im.sym):
                    return
                sym_b = im.sym
                break
            if im.comp == 2 and im.sym == QI_HAT:
                brun += [im, IMove(pi2, 2)]
                continue
            ans = yield (im, None)
            if ans is None or ans.comp != im.comp:
                return
            sym = self._strip(ans.sym) if _is_elem(ans.sym) else ans.sym
            brun += [im, IMove(sym, ans.comp)]
        # 3. replay the base's spelling round against the projected word
        brun = [_T3H]
        cursor = 0
        bword: List[str] = []
        done = False
        while not done:
            r = self.base.lookup(cs, tuple(brun))
            if r is None:
                return
            im, _ = r
            if im.comp == 3:
                if im.sym == OK:
                    done = True
                elif _is_digit(im.sym):
                    bword.append(im.sym)
                    brun += [im, _T3]
                else:
                    return
            elif im.comp == 2 and im.sym == QI_HAT:
                brun += [im, IMove(pi2, 2)]
            elif im.comp == 2 and _is_tagq(im.sym):
                if im.sym == QT_HAT:
                    cursor = 0
                d = pw2[cursor] if cursor < len(pw2) else OK
                cursor += 1
                brun += [im, IMove(d, 2)]
            else:
                ans = yield (im, None)
                if ans is None or ans.comp != im.comp:
                    return
                sym = self._strip(ans.sym) if _is_elem(ans.sym) else ans.sym
                brun += [im, IMove(sym, ans.comp)]
        # 4. wrap the base's answer into thread f and spell the result
        try:
            rb = Move(sym_b, parse_outer("".join(bword)))
            w = _promo_wrap(self.game, rb, f)
        except (MalformedTag, ValueError):
            return
        for d in tag_str(w.outer):
            ans = yield (IMove(d, 3), None)
            if ans is None or ans != _T3:
                return
        yield (IMove(OK, 3), None)


def stalg_promotion(a: StAlgorithm) -> StAlgorithm:
    return PromotedTable(a)


# ---------------------------------------------------------------------------
# Specialization and first recursion
# ---------------------------------------------------------------------------

def specialize(algs: Sequence[StAlgorithm], phi: StAlgorithm,
               m: int = 0) -> StAlgorithm:
    """Fix the first arguments of phi to the closed values described by
    `algs`, leaving m arguments free.  m=0 is plain composition; m=1 routes
    the remaining argument past the fixed ones by currying, composing, and
    uncurrying.  The result's table is produced uniformly from the inputs."""
    if not algs:
        return phi
    sig = algs[0]
    for nxt in algs[1:]:
        sig = stalg_pairing(sig, nxt)
    if m == 0:
        return stalg_concat(stalg_promotion(sig), phi)
    if m == 1:
        lam = stalg_curry(phi)
        return stalg_uncurry(stalg_concat(stalg_promotion(sig), lam))
    raise NotImplementedError("specialization with m >= 2 free arguments")


def first_recursion(alg_phi: StAlgorithm) -> StAlgorithm:
    """The fixed point of a functional described by a table, again as a
    table: promote phi and feed it to the fixed-point combinator."""
    _, cod = external_shape(alg_phi.game)
    if not isinstance(cod, Lolli):
        raise TypeError("first recursion needs a functional table")
    a = cod.r
    return stalg_concat(stalg_promotion(alg_phi), stalg_fix(a))
