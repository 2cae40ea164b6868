"""Atomic strategies and the constructions on strategies.

Atomic strategies (copycat, dereliction, successor, predecessor, constant
zero, numerals, zero-test, case, fixpoint) are innocent next-move rules over
the last O-move and the P-view.  The combinators (tensor, pairing, promotion,
concatenation, currying, composition) delegate to their component strategies
by projecting the ambient position into component positions, reusing the
routing and re-tagging rules of the game constructions.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Optional, Tuple

from .tags import (
    EMPTY_TAG,
    InnerElement,
    Move,
    Tag,
    bang_tag,
    box,
    parse_outer,
    sep,
    split_bang,
)
from .core import (
    Bang,
    Bool2,
    Concat,
    Curry,
    EMPTY_POSITION,
    FF,
    GameExpr,
    Hidden,
    LazyNat,
    Lolli,
    NO,
    OMEGA,
    PairingG,
    Position,
    Product,
    Promotion,
    Q,
    Q_HAT,
    TT,
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
    arrow,
    enabled,
    enabled_star,
    label,
    lolli,
    mk_move,
    p_view_indices,
    view_node,
    view_node_list,
    view_node_riter,
)
from .strategy import (
    BuiltinStrategy,
    Response,
    Strategy,
    hide_strategy,
    resume_slot,
)

NAT = LazyNat()
BOOL = Bool2()
UNIT = Terminal()

_T0 = bang_tag(EMPTY_TAG, EMPTY_TAG)  # the canonical thread tag  []#


# ---------------------------------------------------------------------------
# Shared game nodes (games compare by identity, so builders memoize)
# ---------------------------------------------------------------------------

_game_memo: Dict[tuple, GameExpr] = {}
_memo_keepalive: List[GameExpr] = []


def _memo_game(key: tuple, build: Callable[[], GameExpr]) -> GameExpr:
    g = _game_memo.get(key)
    if g is None:
        g = _game_memo[key] = build()
        _memo_keepalive.append(g)
    return g


def bang_c(a: GameExpr) -> GameExpr:
    return _memo_game(("!", id(a)), lambda: Bang(a))


def lolli_c(a: GameExpr, b: GameExpr) -> Lolli:
    return _memo_game(("-o", id(a), id(b)), lambda: lolli(a, b))


def arrow_c(a: GameExpr, b: GameExpr) -> Lolli:
    return _memo_game(("=>", id(a), id(b)), lambda: arrow(a, b))


def tensor_c(a: GameExpr, b: GameExpr) -> GameExpr:
    return _memo_game(("*", id(a), id(b)), lambda: Tensor(a, b))


def product_c(a: GameExpr, b: GameExpr) -> GameExpr:
    return _memo_game(("&", id(a), id(b)), lambda: Product(a, b))


_shape_cache: Dict[int, Tuple[GameExpr, GameExpr]] = {}


def external_shape(g: GameExpr) -> Tuple[GameExpr, GameExpr]:
    """Witnesses (domain, codomain) of the linear-arrow shape of H(g)."""
    r = _shape_cache.get(id(g))
    if r is not None:
        return r
    if isinstance(g, Lolli):
        r = (g.l, g.r)
    elif isinstance(g, Concat):
        r = (g.wa, g.wc)
    elif isinstance(g, Promotion):
        r = (g.wa, bang_c(g.wb))
    elif isinstance(g, PairingG):
        r = (g.wc, product_c(g.wa, g.wb))
    elif isinstance(g, Curry):
        r = (g.wa, lolli_c(g.wb, g.wc))
    elif isinstance(g, Uncurry):
        r = (tensor_c(g.wa, g.wb), g.wc)
    elif isinstance(g, Hidden):
        r = external_shape(g.g)
    else:
        raise TypeError(f"no linear-arrow shape for {g!r}")
    _shape_cache[id(g)] = r
    _memo_keepalive.append(g)
    return r


# ---------------------------------------------------------------------------
# Copycat-like strategies
# ---------------------------------------------------------------------------

def _partner_justifier(g: GameExpr, s: Position, r: Move) -> Optional[int]:
    """Pointer for a mirrored response: the partner of the last O-move's
    justifier when it enables r, else the nearest enabler in the P-view."""
    i = len(s) - 1
    j = s.just(i)
    cand = i if j is None else (j + 1 if label(g, s.move(j)).op == "O" else j - 1)
    if 0 <= cand <= i and enabled(g, s.move(cand), r):
        return cand
    # enablers sit near one end of the view or the other, so probe both ends
    # lazily: the chain's back iterator and cached head avoid materializing
    # the (possibly long) view when a probe hits within a few steps
    node = view_node(g, s, "P")
    if node is None:
        return None
    total = node.length
    head = node.head
    back: List[int] = []
    it = view_node_riter(node)
    full: Optional[List[int]] = None
    lo, hi = 0, total - 1
    while lo <= hi:
        while len(back) <= total - 1 - hi:
            back.append(next(it))
        idx = back[total - 1 - hi]
        if enabled(g, s.move(idx), r):
            return idx
        if lo != hi:
            if lo < len(head):
                idx = head[lo]
            else:
                if full is None:
                    full = view_node_list(node)
                idx = full[lo]
            if enabled(g, s.move(idx), r):
                return idx
        lo, hi = lo + 1, hi - 1
    return None


class _MirrorStrategy(Strategy):
    """Respond to each O-move with a transformed mirror image."""

    def __init__(self, game: GameExpr, name: str, transform: Callable[[Move], Optional[Move]]):
        self.game = game
        self.name = name
        self._t = transform

    def next_move(self, s: Position) -> Response:
        r = self._t(s.move(len(s) - 1))
        if r is None:
            return None
        j = _partner_justifier(self.game, s, r)
        if j is None and not enabled_star(self.game, r):
            return None
        return r, j


def copycat(a: GameExpr) -> Strategy:
    """The identity on a normalized game, as a strategy on a -o a."""
    g = lolli_c(a, a)

    def t(m: Move) -> Optional[Move]:
        side = m.inner.tags[-1]
        return Move(_retag(m.inner, 1, ("E" if side == "W" else "W",)), m.outer)

    return _MirrorStrategy(g, "copycat", t)


def dereliction(a: GameExpr) -> Strategy:
    """The identity on a => a, playing the domain in the canonical thread."""
    g = arrow_c(a, a)

    def t(m: Move) -> Optional[Move]:
        if m.inner.tags[-1] == "E":
            return Move(_retag(m.inner, 1, ("W",)), bang_tag(EMPTY_TAG, m.outer))
        sb = split_bang(m.outer)
        if sb is None or sb[0] is not EMPTY_TAG:
            return None
        return Move(_retag(m.inner, 1, ("E",)), sb[1])

    return _MirrorStrategy(g, "dereliction", t)


# ---------------------------------------------------------------------------
# Arithmetic atoms on lazy naturals
# ---------------------------------------------------------------------------

def succ_strat() -> Strategy:
    g = arrow_c(NAT, NAT)

    def fn(g: GameExpr, s: Position) -> Response:
        m = s.move(len(s) - 1)
        sub, side = m.inner.substance, m.inner.tags[-1]
        vis = p_view_indices(g, s)
        if side == "E" and sub == Q_HAT:
            return mk_move(Q_HAT, ("W",), _T0), len(s) - 1
        if side == "W" and sub in (YES, NO):
            # one extra yes up front: both input answers emit yes
            return mk_move(YES, ("E",)), vis[-3]
        if side == "E" and sub == Q:
            third = s.move(vis[-3])
            if third.inner.substance == YES:  # input still running: ask again
                return Move(InnerElement(Q, ("W",)), third.outer), vis[-3]
            return mk_move(NO, ("E",)), len(s) - 1  # input ended: stop
        return None

    return BuiltinStrategy(g, "succ", fn)


def pred_strat() -> Strategy:
    g = arrow_c(NAT, NAT)

    def fn(g: GameExpr, s: Position) -> Response:
        m = s.move(len(s) - 1)
        sub, side = m.inner.substance, m.inner.tags[-1]
        vis = p_view_indices(g, s)
        if side == "E" and sub == Q_HAT:
            return mk_move(Q_HAT, ("W",), _T0), len(s) - 1
        if side == "W":
            third = s.move(vis[-3])
            tsub, tside = third.inner.substance, third.inner.tags[-1]
            if sub == YES:
                if tsub == Q_HAT and tside == "E":
                    # swallow the first yes of the input
                    return Move(InnerElement(Q, ("W",)), m.outer), len(s) - 1
                if tsub == YES and tside == "W":
                    return mk_move(YES, ("E",)), vis[0]
                return mk_move(YES, ("E",)), vis[-3]  # answers a repeat question
            if sub == NO:
                if tsub == YES and tside == "W":
                    return mk_move(NO, ("E",)), vis[0]
                return mk_move(NO, ("E",)), vis[-3]
        if side == "E" and sub == Q:
            third = s.move(vis[-3])
            return Move(InnerElement(Q, ("W",)), third.outer), vis[-3]
        return None

    return BuiltinStrategy(g, "pred", fn)


def zero_strat(a: GameExpr = UNIT) -> Strategy:
    """The constantly-zero strategy on a => lazy naturals."""
    g = arrow_c(a, NAT)

    def fn(g: GameExpr, s: Position) -> Response:
        m = s.move(len(s) - 1)
        if m.inner.tags[-1] == "E" and m.inner.substance == Q_HAT:
            return mk_move(NO, ("E",)), len(s) - 1
        return None

    return BuiltinStrategy(g, "zero", fn)


def numeral_strat(n: int, a: GameExpr = UNIT) -> Strategy:
    """The n-th numeral: answer yes n times, then no."""
    g = arrow_c(a, NAT)

    def fn(g: GameExpr, s: Position) -> Response:
        m = s.move(len(s) - 1)
        if m.inner.tags[-1] != "E" or m.inner.substance not in (Q_HAT, Q):
            return None
        vis = p_view_indices(g, s)
        given = sum(1 for k in vis if s.move(k).inner.substance == YES)
        return mk_move(YES if given < n else NO, ("E",)), len(s) - 1

    return BuiltinStrategy(g, f"numeral({n})", fn)


def zeroq_strat() -> Strategy:
    """Zero test: naturals => booleans."""
    g = arrow_c(NAT, BOOL)

    def fn(g: GameExpr, s: Position) -> Response:
        m = s.move(len(s) - 1)
        sub, side = m.inner.substance, m.inner.tags[-1]
        if side == "E" and sub == Q_HAT:
            return mk_move(Q_HAT, ("W",), _T0), len(s) - 1
        if side == "W":
            vis = p_view_indices(g, s)
            if sub == NO:
                return mk_move(TT, ("E",)), vis[-3]
            if sub == YES:
                return mk_move(FF, ("E",)), vis[-3]
        return None

    return BuiltinStrategy(g, "zero?", fn)


def count_nonzeros_strat() -> Strategy:
    """Interrogate the input once per output question, each time in a fresh
    thread whose tag grows by one letter, and echo each thread's first
    answer.  The thread tags make the strategy's behaviour depend on its own
    question history, not just the last answer."""
    g = arrow_c(NAT, NAT)
    qh_w = InnerElement(Q_HAT, ("W",))

    def fn(g: GameExpr, s: Position) -> Response:
        m = s.move(len(s) - 1)
        sub, side = m.inner.substance, m.inner.tags[-1]
        vis = p_view_indices(g, s)
        if side == "E" and sub == Q_HAT:
            return mk_move(Q_HAT, ("W",), _T0), len(s) - 1
        if side == "W" and sub == YES:
            return mk_move(YES, ("E",)), vis[-3]
        if side == "W" and sub == NO:
            return mk_move(NO, ("E",)), vis[-3]
        if side == "E" and sub == Q:
            n = sum(1 for k in vis if s.move(k).inner == qh_w)
            return Move(qh_w, parse_outer("[" + "l" * n + "]#")), vis[0]
        return None

    return BuiltinStrategy(g, "count-nonzeros", fn)


# ---------------------------------------------------------------------------
# Case and fixpoint
# ---------------------------------------------------------------------------

def case_game(a: GameExpr) -> Lolli:
    return arrow_c(product_c(product_c(a, a), BOOL), a)


def case_strat(a: GameExpr) -> Strategy:
    """Branch on a boolean: play the opening, ask the boolean, then copycat
    the chosen component of the paired arguments."""
    g = case_game(a)

    def fn(g: GameExpr, s: Position) -> Response:
        i = len(s) - 1
        m, j = s.entry(i)
        tags = m.inner.tags
        if tags[-1] == "E":
            if j is None:
                # The boolean lives in its own thread, tagged with the bracket
                # of the opening's outer word so it can never clash with the
                # branch thread (whose tag is the empty word).
                r = mk_move(Q_HAT, ("E", "W"), bang_tag(box(m.outer), EMPTY_TAG))
                return r, i
            # mirror into the chosen branch
            vis = p_view_indices(g, s)
            branch = None
            for k in range(len(s)):
                mk_ = s.move(k)
                if s.just(k) == vis[0] and mk_.inner.tags[-2:] == ("W", "W"):
                    branch = mk_.inner.tags[-3]
                    break
            if branch is None:
                return None
            r = Move(_retag(m.inner, 1, (branch, "W", "W")), bang_tag(EMPTY_TAG, m.outer))
            return r, _partner_justifier(g, s, r)
        if tags[-2:] == ("E", "W") and m.inner.substance in (TT, FF):
            oj = s.just(j)  # j points at our boolean question; its justifier opens
            opening = s.move(oj) if oj is not None else None
            if opening is None:
                return None
            branch = "W" if m.inner.substance == TT else "E"
            r = Move(_retag(opening.inner, 1, (branch, "W", "W")),
                     bang_tag(EMPTY_TAG, opening.outer))
            return r, oj
        if tags[-2:] == ("W", "W"):
            sb = split_bang(m.outer)
            if sb is None or sb[0] is not EMPTY_TAG:
                return None
            r = Move(_retag(m.inner, 3, ("E",)), sb[1])
            return r, _partner_justifier(g, s, r)
        return None

    return BuiltinStrategy(g, "case", fn)


def fix_game(a: GameExpr) -> Lolli:
    return arrow_c(arrow_c(a, a), a)


def fix_strat(a: GameExpr) -> Strategy:
    """Fixpoint: copycat pairing the output with a tower of instances of the
    argument function, one thread per unfolding."""
    g = fix_game(a)

    def fn(g: GameExpr, s: Position) -> Response:
        m = s.move(len(s) - 1)
        tags = m.inner.tags
        if tags[-1] == "E":
            r = Move(_retag(m.inner, 1, ("E", "W")), bang_tag(EMPTY_TAG, m.outer))
        elif tags[-2:] == ("W", "W"):
            sb = split_bang(m.outer)
            if sb is None:
                return None
            x, rest = sb
            sb2 = split_bang(rest)
            if sb2 is None:
                return None
            y, f = sb2
            r = Move(_retag(m.inner, 2, ("E", "W")),
                     bang_tag(sep(box(x), box(y)), f))
        elif tags[-2:] == ("E", "W"):
            sb = split_bang(m.outer)
            if sb is None:
                return None
            t, f = sb
            if t is EMPTY_TAG:
                r = Move(_retag(m.inner, 2, ("E",)), f)
            elif t.kind == "sep" and t.a.kind == "box" and t.b.kind == "box":
                r = Move(_retag(m.inner, 2, ("W", "W")),
                         bang_tag(t.a.a, bang_tag(t.b.a, f)))
            else:
                return None
        else:
            return None
        return r, _partner_justifier(g, s, r)

    return BuiltinStrategy(g, "fix", fn)


# ---------------------------------------------------------------------------
# Delegating combinators
# ---------------------------------------------------------------------------

class _DelegState:
    __slots__ = ("pos", "inv", "fwd", "side", "broken")

    def __init__(self):
        self.pos: Dict[object, Position] = {}
        self.inv: Dict[object, List[int]] = {}
        self.fwd: List[Tuple[object, Optional[int]]] = []
        self.side = None
        self.broken = False


class _DelegStrategy(Strategy):
    """Shared machinery: project the position into component positions
    incrementally (cached along the engine's append-only positions)."""

    def __init__(self):
        self._cache: dict = {}

    def _feed(self, st: _DelegState, i: int, m: Move, j: Optional[int]) -> None:
        raise NotImplementedError

    def _respond(self, st: _DelegState, s: Position) -> Response:
        raise NotImplementedError

    def next_move(self, s: Position) -> Response:
        slot = resume_slot(self._cache, s, _DelegState)
        st: _DelegState = slot.state
        self._s_now = s
        for i in range(slot.n, len(s)):
            if not st.broken:
                m, j = s.entry(i)
                try:
                    self._feed(st, i, m, j)
                except (KeyError, IndexError, AttributeError):
                    st.broken = True
        slot.n = len(s)
        slot.pin = s
        if st.broken:
            return None
        return self._respond(st, s)

    def _same_side_just(self, st: _DelegState, side, j: Optional[int]) -> Optional[int]:
        """Child justifier for a fed move: the nearest move on `side` along
        the ambient justifier chain (a pointer may route through the other
        component's private internal moves)."""
        while j is not None:
            s0, i0 = st.fwd[j]
            if s0 == side:
                return i0
            j = self._s_now.just(j)
        return None

    def _child_append(self, st: _DelegState, key, i: int, m: Move, cj: Optional[int]) -> None:
        p = st.pos.get(key, EMPTY_POSITION)
        st.pos[key] = p.snoc(m, cj)
        st.inv.setdefault(key, []).append(i)
        st.fwd.append((key, len(p)))


class TensorStrategy(_DelegStrategy):
    """sigma (x) tau on (A (x) B) -o (C (x) D), each component independent."""

    def __init__(self, sigma: Strategy, tau: Strategy):
        super().__init__()
        gl, gr = sigma.game, tau.game
        if not (isinstance(gl, Lolli) and isinstance(gr, Lolli)):
            raise TypeError("tensor of strategies needs linear-arrow games")
        self.sigma, self.tau = sigma, tau
        self.game = _memo_game(
            ("tensor-strat", id(gl), id(gr)),
            lambda: Lolli(tensor_c(gl.l, gr.l), tensor_c(gl.r, gr.r)),
        )
        self.name = f"({sigma.name} (x) {tau.name})"

    def _feed(self, st: _DelegState, i: int, m: Move, j: Optional[int]) -> None:
        comp = m.inner.tags[-2]
        mm = Move(_retag(m.inner, 2, (m.inner.tags[-1],)), m.outer)
        cj = None
        if j is not None:
            c0, i0 = st.fwd[j]
            if c0 == comp:
                cj = i0
        self._child_append(st, comp, i, mm, cj)

    def _respond(self, st: _DelegState, s: Position) -> Response:
        comp = s.move(len(s) - 1).inner.tags[-2]
        child = self.sigma if comp == "W" else self.tau
        r = child.next_move(st.pos.get(comp, EMPTY_POSITION))
        if r is None:
            return None
        rm, rj = r
        out = Move(_retag(rm.inner, 1, (comp, rm.inner.tags[-1])), rm.outer)
        return out, (st.inv[comp][rj] if rj is not None else None)


class PairStrategy(_DelegStrategy):
    """<sigma, tau> on the pairing game; one component active per play."""

    def __init__(self, sigma: Strategy, tau: Strategy, wc: Optional[GameExpr] = None):
        super().__init__()
        ca, wa = external_shape(sigma.game)
        cb, wb = external_shape(tau.game)
        self.sigma, self.tau = sigma, tau
        self.game = _memo_game(
            ("pair-strat", id(sigma.game), id(tau.game)),
            lambda: PairingG(sigma.game, tau.game, wa, wb, wc if wc is not None else ca),
        )
        self.name = f"<{sigma.name},{tau.name}>"

    def _feed(self, st: _DelegState, i: int, m: Move, j: Optional[int]) -> None:
        routes = _pair_routes(self.game, m)
        if st.side is None:
            sides = {sd for sd, _, _ in routes}
            if len(sides) == 1:
                st.side = sides.pop()
            else:
                st.broken = True
                return
        mm = None
        for sd, _, cm in routes:
            if sd == st.side:
                mm = cm
                break
        if mm is None:
            st.broken = True
            return
        self._child_append(st, st.side, i, mm, st.fwd[j][1] if j is not None else None)

    def _respond(self, st: _DelegState, s: Position) -> Response:
        if st.side is None:
            return None
        child = self.sigma if st.side == "L" else self.tau
        r = child.next_move(st.pos.get(st.side, EMPTY_POSITION))
        if r is None:
            return None
        rm, rj = r
        out = _pair_wrap(self.game, st.side, rm)
        return out, (st.inv[st.side][rj] if rj is not None else None)


class PromotionStrategy(_DelegStrategy):
    """phi-dagger: one copy of phi per thread of the banged codomain."""

    def __init__(self, phi: Strategy):
        super().__init__()
        wa, wb = external_shape(phi.game)
        self.phi = phi
        self.game = _memo_game(
            ("promo-strat", id(phi.game)),
            lambda: Promotion(phi.game, wa, wb),
        )
        self.name = f"{phi.name}!"

    def _feed(self, st: _DelegState, i: int, m: Move, j: Optional[int]) -> None:
        tr = _promo_thread(m)
        if tr is None:
            st.broken = True
            return
        f, mm = tr
        cj = None
        if j is not None:
            f0, i0 = st.fwd[j]
            if f0 is f:
                cj = i0
        self._child_append(st, f, i, mm, cj)

    def _respond(self, st: _DelegState, s: Position) -> Response:
        tr = _promo_thread(s.move(len(s) - 1))
        if tr is None:
            return None
        f, _ = tr
        r = self.phi.next_move(st.pos.get(f, EMPTY_POSITION))
        if r is None:
            return None
        rm, rj = r
        out = _promo_wrap(self.game, rm, f)
        return out, (st.inv[f][rj] if rj is not None else None)


class ConcatStrategy(_DelegStrategy):
    """sigma ++ tau: run both sides in lock-step over the shared middle board
    (the engine's dummy moves carry each side's middle moves to the other)."""

    def __init__(self, sigma: Strategy, tau: Strategy):
        super().__init__()
        wa, _ = external_shape(sigma.game)
        wb, wc = external_shape(tau.game)
        self.sigma, self.tau = sigma, tau
        self.game = _memo_game(
            ("concat-strat", id(sigma.game), id(tau.game)),
            lambda: Concat(sigma.game, tau.game, wa, wb, wc),
        )
        self.name = f"({sigma.name} ++ {tau.name})"

    def _feed(self, st: _DelegState, i: int, m: Move, j: Optional[int]) -> None:
        side, _, mm = _concat_route(self.game, m)
        cj = self._same_side_just(st, side, j)
        if cj is None and j is not None:
            # pointer lost inside the other component: recover the enabler
            child = self.sigma if side == "J" else self.tau
            pos = st.pos.get(side, EMPTY_POSITION)
            if not enabled_star(child.game, mm):
                for k in range(len(pos) - 1, -1, -1):
                    if enabled(child.game, pos.move(k), mm):
                        cj = k
                        break
        self._child_append(st, side, i, mm, cj)

    def _respond(self, st: _DelegState, s: Position) -> Response:
        side, _, _ = _concat_route(self.game, s.move(len(s) - 1))
        child = self.sigma if side == "J" else self.tau
        r = child.next_move(st.pos.get(side, EMPTY_POSITION))
        if r is None:
            return None
        rm, rj = r
        out = _concat_wrap(self.game, side, rm)
        return out, (st.inv[side][rj] if rj is not None else None)


class CurryStrategy(_DelegStrategy):
    def __init__(self, phi: Strategy):
        super().__init__()
        dom, wc = external_shape(phi.game)
        if not isinstance(dom, Tensor):
            raise TypeError("currying needs a tensor domain")
        self.phi = phi
        self.game = _memo_game(
            ("curry-strat", id(phi.game)),
            lambda: Curry(phi.game, dom.l, dom.r, wc),
        )
        self.name = f"curry({phi.name})"

    def _feed(self, st: _DelegState, i: int, m: Move, j: Optional[int]) -> None:
        self._child_append(st, "g", i, _curry_peel(self.game, m),
                           st.fwd[j][1] if j is not None else None)

    def _respond(self, st: _DelegState, s: Position) -> Response:
        r = self.phi.next_move(st.pos.get("g", EMPTY_POSITION))
        if r is None:
            return None
        rm, rj = r
        return _curry_wrap(self.game, rm), (st.inv["g"][rj] if rj is not None else None)


class UncurryStrategy(_DelegStrategy):
    def __init__(self, phi: Strategy):
        super().__init__()
        wa, cod = external_shape(phi.game)
        if not isinstance(cod, Lolli):
            raise TypeError("uncurrying needs an arrow codomain")
        self.phi = phi
        self.game = _memo_game(
            ("uncurry-strat", id(phi.game)),
            lambda: Uncurry(phi.game, wa, cod.l, cod.r),
        )
        self.name = f"uncurry({phi.name})"

    def _feed(self, st: _DelegState, i: int, m: Move, j: Optional[int]) -> None:
        self._child_append(st, "g", i, _uncurry_peel(self.game, m),
                           st.fwd[j][1] if j is not None else None)

    def _respond(self, st: _DelegState, s: Position) -> Response:
        r = self.phi.next_move(st.pos.get("g", EMPTY_POSITION))
        if r is None:
            return None
        rm, rj = r
        return _uncurry_wrap(self.game, rm), (st.inv["g"][rj] if rj is not None else None)


def tensor_strat(sigma: Strategy, tau: Strategy) -> Strategy:
    return TensorStrategy(sigma, tau)


def pairing_strat(sigma: Strategy, tau: Strategy, wc: Optional[GameExpr] = None) -> Strategy:
    return PairStrategy(sigma, tau, wc)


def promotion_strat(phi: Strategy) -> Strategy:
    return PromotionStrategy(phi)


def concat_strat(sigma: Strategy, tau: Strategy) -> Strategy:
    return ConcatStrategy(sigma, tau)


def compose_strat(sigma: Strategy, tau: Strategy) -> Strategy:
    """sigma ; tau with all interaction hidden."""
    return hide_strategy(concat_strat(sigma, tau), OMEGA)


class CurryArrowStrategy(CurryStrategy):
    """Currying over a banged product domain: !(A & B) -o C played as
    !A -o (!B -o C).  The move routing of currying is tag-generic, so only
    the domain check and the component witnesses differ."""

    def __init__(self, phi: Strategy):
        _DelegStrategy.__init__(self)
        dom, wc = external_shape(phi.game)
        if not (isinstance(dom, Bang) and isinstance(dom.g, Product)):
            raise TypeError("generalized currying needs a banged product domain")
        self.phi = phi
        self.game = _memo_game(
            ("curry-arrow-strat", id(phi.game)),
            lambda: Curry(phi.game, bang_c(dom.g.l), bang_c(dom.g.r), wc),
        )
        self.name = f"curry({phi.name})"


def curry_strat(phi: Strategy) -> Strategy:
    return CurryStrategy(phi)


def curry_arrow_strat(phi: Strategy) -> Strategy:
    return CurryArrowStrategy(phi)


def uncurry_strat(phi: Strategy) -> Strategy:
    return UncurryStrategy(phi)


# ---------------------------------------------------------------------------
# Driving numeral-shaped strategies
# ---------------------------------------------------------------------------

def numeral_env(n: Optional[int] = None):
    """Environment probing a strategy of shape (!N x ...) -o N: it opens the
    output, keeps asking after each yes, and answers the strategy's own input
    questions according to the numeral n (per input thread)."""
    counts: Dict[Tag, int] = {}

    def env(g: GameExpr, s: Position) -> Response:
        if len(s) == 0:
            return mk_move(Q_HAT, ("E",)), None
        m = s.move(len(s) - 1)
        sub, tags = m.inner.substance, m.inner.tags
        if tags[-1] == "E":
            if sub == YES:
                return Move(InnerElement(Q, ("E",)), m.outer), len(s) - 1
            return None  # no: the value is complete
        if sub in (Q_HAT, Q) and "W" in tags:
            c = counts.get(m.outer, 0)
            if n is not None and c < n:
                counts[m.outer] = c + 1
                return Move(InnerElement(YES, m.inner.tags), m.outer), len(s) - 1
            return Move(InnerElement(NO, m.inner.tags), m.outer), len(s) - 1
        return None

    return env


def count_yes(s: Position) -> int:
    return sum(
        1
        for i in range(len(s))
        if s.move(i).inner.substance == YES and s.move(i).inner.tags[-1] == "E"
    )


def eval_numeral(sigma: Strategy, n: Optional[int] = None,
                 fuel: int = 100_000):
    """Run sigma against the numeral environment; return (value, status).
    The value is None unless the play completed."""
    from .strategy import play

    tr = play(sigma, numeral_env(n), fuel=fuel)
    if tr.status != "completed":
        return None, tr.status
    return count_yes(tr.position), tr.status


def numeral_pipeline(n: int) -> Strategy:
    """The n-th numeral built as zero followed by n promoted successors."""
    acc = zero_strat(UNIT)
    for _ in range(n):
        acc = compose_strat(promotion_strat(acc), succ_strat())
    return acc
