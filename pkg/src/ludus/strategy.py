"""Strategies, the play engine, axiom checks, hiding, and bounded equality.

A strategy is an intensional next-move function over odd-length positions of
its game.  The play engine alternates environment O-moves with strategy
P-moves and supplies the forced dummy O-move after every internal P-move, so
user-supplied strategies and environments only ever see external choices.
Hiding on strategies replays the underlying strategy through its internal
moves and exposes only the visible part.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from .core import (
    Budget,
    Depth,
    EMPTY_POSITION,
    GameExpr,
    Move,
    OMEGA,
    PairingG,
    Position,
    _pair_cat,
    default_budget,
    dummy,
    enabled,
    enabled_star,
    hide_game,
    is_legal,
    is_move,
    label,
    move_record,
    p_view_indices,
    satisfies_dummy_discipline,
    successors,
    tag_str,
)

Response = Optional[Tuple[Move, Optional[int]]]
Environment = Callable[[GameExpr, Position], Response]


class Strategy:
    """Base class: a deterministic next-move function on a fixed game."""

    game: GameExpr
    name: str = "strategy"

    def next_move(self, s: Position) -> Response:
        raise NotImplementedError

    def responses(self, s: Position) -> List[Tuple[Move, Optional[int]]]:
        """All responses offered at s (more than one signals nondeterminism)."""
        r = self.next_move(s)
        return [] if r is None else [r]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class BuiltinStrategy(Strategy):
    """A named rule computing the response from the position directly."""

    def __init__(self, game: GameExpr, name: str, fn: Callable[[GameExpr, Position], Response]):
        self.game = game
        self.name = name
        self._fn = fn

    def next_move(self, s: Position) -> Response:
        return self._fn(self.game, s)


SELECTORS = ("last-o", "third-last-in-view", "opening")


def view_window_key(g: GameExpr, s: Position, window: int = 3) -> Tuple[Tuple[str, Tuple[str, ...]], ...]:
    """The last `window` inner elements of the P-view of s."""
    vis = p_view_indices(g, s)
    tail = vis[-window:]
    return tuple((s.move(i).inner.substance, s.move(i).inner.tags) for i in tail)


def resolve_selector(g: GameExpr, s: Position, sel: str) -> Optional[int]:
    if sel == "last-o":
        return len(s) - 1
    vis = p_view_indices(g, s)
    if sel == "opening":
        return vis[0] if vis else None
    if sel == "third-last-in-view":
        return vis[-3] if len(vis) >= 3 else None
    raise ValueError(f"unknown justifier selector {sel!r}")


class FiniteTable(Strategy):
    """A finite map from view-window keys to responses with justifier selectors."""

    def __init__(self, game: GameExpr, name: str, entries: Dict[tuple, list], window: int = 3):
        self.game = game
        self.name = name
        self.window = window
        # entries: key -> list of (Move, selector); >1 entry = nondeterminism
        self.entries = {
            k: v if isinstance(v, list) else [v] for k, v in entries.items()
        }

    def responses(self, s: Position) -> List[Tuple[Move, Optional[int]]]:
        key = view_window_key(self.game, s, self.window)
        out = []
        for m, sel in self.entries.get(key, []):
            j = resolve_selector(self.game, s, sel)
            if j is not None:
                out.append((m, j))
        return out

    def next_move(self, s: Position) -> Response:
        rs = self.responses(s)
        return rs[0] if rs else None


# ---------------------------------------------------------------------------
# Play engine
# ---------------------------------------------------------------------------

@dataclass
class PlayTrace:
    position: Position
    status: str  # completed | o-stuck | p-undefined | fuel-exhausted
    message: Optional[str] = None


class FuelExhausted(Exception):
    """Raised inside a play when the shared move budget runs out."""


# While a play is running this holds its remaining move budget, so strategies
# that simulate an underlying interaction (hiding) charge their internal moves
# to the same budget; a diverging internal loop then exhausts fuel instead of
# hanging.  Saved and restored around each play, so plays may nest.
_fuel_box: Optional[List[float]] = None


def _burn(n: int = 1) -> None:
    if _fuel_box is not None:
        _fuel_box[0] -= n
        if _fuel_box[0] < 0:
            raise FuelExhausted


def dummy_pointer(g: GameExpr, s: Position) -> Optional[int]:
    """Pointer of the forced dummy after the internal P-move ending s."""
    i = len(s) - 1
    pj = s.just(i)
    if pj is None:
        return None
    if label(g, s.move(pj)).pr > 0:
        return pj - 1
    return i


def _extension_ok(g: GameExpr, s: Position, m: Move, j: Optional[int], op: str) -> Optional[str]:
    if not is_move(g, m):
        return f"{m!r} is not a move of the game"
    lab = label(g, m)
    if lab.op != op:
        return f"{m!r} has the wrong player ({lab.op}, expected {op})"
    if op == "O" and lab.pr > 0:
        return "internal O-moves are supplied by the engine only"
    if j is None:
        if not enabled_star(g, m):
            return f"{m!r} is not an opening move"
    else:
        if not 0 <= j < len(s):
            return f"justifier {j} out of range"
        if not enabled(g, s.move(j), m):
            return f"{s.move(j)!r} does not enable {m!r}"
    return None


def play(sigma: Strategy, env: Environment, fuel: int = 10_000,
         check: bool = True, deep_check: bool = False) -> PlayTrace:
    """Drive sigma against env; the engine supplies dummy O-moves itself."""
    global _fuel_box
    g = sigma.game
    s = EMPTY_POSITION
    prev_box = _fuel_box
    _fuel_box = box = [float(fuel)]
    try:
        while box[0] > 0:
            box[0] -= 1
            if len(s) % 2 == 0:
                if len(s) > 0:
                    lm = s.move(len(s) - 1)
                    if label(g, lm).pr > 0:
                        dm = dummy(g, lm)
                        if dm is None:
                            return PlayTrace(s, "o-stuck", "internal move without dummy")
                        s = s.snoc(dm, dummy_pointer(g, s))
                        continue
                r = env(g, s)
                if r is None:
                    return PlayTrace(s, "completed")
                m, j = r
                if check:
                    why = _extension_ok(g, s, m, j, "O")
                    if why is not None:
                        return PlayTrace(s, "o-stuck", why)
                s = s.snoc(m, j)
            else:
                r = sigma.next_move(s)
                if r is None:
                    return PlayTrace(s, "p-undefined")
                m, j = r
                if check:
                    why = _extension_ok(g, s, m, j, "P")
                    if why is not None:
                        raise ValueError(f"strategy {sigma.name} proposed an illegal move: {why}")
                s = s.snoc(m, j)
            if deep_check and not (is_legal(g, s) and satisfies_dummy_discipline(g, s)):
                raise ValueError(f"engine produced a non-position at length {len(s)}")
        return PlayTrace(s, "fuel-exhausted")
    except FuelExhausted:
        return PlayTrace(s, "fuel-exhausted")
    finally:
        _fuel_box = prev_box


def scripted_env(moves: List[Tuple[Move, Optional[int]]]) -> Environment:
    """An environment playing a fixed list of (move, justifier) pairs."""
    state = {"i": 0}

    def env(g: GameExpr, s: Position) -> Response:
        if state["i"] >= len(moves):
            return None
        r = moves[state["i"]]
        state["i"] += 1
        return r

    return env


def trace_records(g: GameExpr, s: Position) -> List[dict]:
    return [move_record(g, s, i) for i in range(len(s))]


# ---------------------------------------------------------------------------
# Bounded enumeration of O-options (shared by the checkers)
# ---------------------------------------------------------------------------

def o_options(g: GameExpr, s: Position, budget: Optional[Budget] = None,
              fresh_cap: int = 2) -> List[Tuple[Move, Optional[int]]]:
    """Candidate external O-extensions of the even-length position s.

    After an internal P-move only the forced dummy is offered.  Candidate
    moves that differ from one another only in a fresh thread tag are capped
    at `fresh_cap` representatives to tame exponential-thread symmetry.
    """
    if len(s) % 2:
        return []
    budget = budget or default_budget()
    n = len(s)
    if n > 0 and label(g, s.move(n - 1)).pr > 0:
        dm = dummy(g, s.move(n - 1))
        return [(dm, dummy_pointer(g, s))] if dm is not None else []
    cands: List[Tuple[Move, Optional[int]]] = []
    seen = set()
    for m in successors(g, None, budget):
        lab = label(g, m)
        if lab.op == "O" and lab.pr == 0 and (m, None) not in seen:
            seen.add((m, None))
            cands.append((m, None))
    for k in range(n):
        for m in successors(g, s.move(k), budget):
            lab = label(g, m)
            if lab.op == "O" and lab.pr == 0 and (m, k) not in seen:
                seen.add((m, k))
                cands.append((m, k))
    used_words = {tag_str(s.move(i).outer) for i in range(n)}
    groups: Dict[tuple, int] = {}
    out = []
    for m, k in cands:
        w = tag_str(m.outer)
        if w in used_words:
            out.append((m, k))
            continue
        gk = (m.inner, k)
        c = groups.get(gk, 0)
        if c < fresh_cap:
            groups[gk] = c + 1
            out.append((m, k))
    return out


def _position_ok_fast(g: GameExpr, s: Position) -> bool:
    if not (is_legal(g, s) and satisfies_dummy_discipline(g, s)):
        return False
    if isinstance(g, PairingG):
        # exclusivity: one component of a pairing is active per play
        cats = {_pair_cat(s.move(i)) for i in range(len(s))}
        if cats & {"A", "S"} and cats & {"B", "N"}:
            return False
    return True


# ---------------------------------------------------------------------------
# Axiom checking
# ---------------------------------------------------------------------------

def _pending_question(g: GameExpr, s: Position) -> Optional[int]:
    """Index of the last unanswered question in the P-view of s."""
    vis = p_view_indices(g, s)
    stack: List[int] = []
    for i in vis:
        m, j = s.entry(i)
        if label(g, m).qa == "Q":
            stack.append(i)
        elif j in stack:
            while stack and stack[-1] != j:
                stack.pop()
            if stack:
                stack.pop()
    return stack[-1] if stack else None


def _view_signature(g: GameExpr, s: Position) -> tuple:
    """Hashable rendering of the P-view of s (moves plus internal pointers)."""
    vis = p_view_indices(g, s)
    pos = {orig: k for k, orig in enumerate(vis)}
    out = []
    for i in vis:
        m, j = s.entry(i)
        out.append((m.inner, tag_str(m.outer), pos.get(j) if j is not None else None))
    return tuple(out)


def check_axioms(sigma: Strategy, depth: int = 10, budget: Optional[Budget] = None,
                 fresh_cap: int = 2) -> dict:
    """Explore sigma's play tree to `depth` moves and report axiom violations.

    Checks: responses land in positions and extend them consistently (s1),
    at most one response per position (s2), responses depend on the P-view
    only (innocence), and P-answers resolve the pending question
    (well-bracketing).
    """
    g = sigma.game
    budget = budget or default_budget()
    report = {"s1": True, "s2": True, "innocence": True, "bracketing": True,
              "violations": [], "positions": 0}
    views: Dict[tuple, Optional[tuple]] = {}

    def violate(axiom: str, msg: str):
        report[axiom] = False
        if len(report["violations"]) < 20:
            report["violations"].append((axiom, msg))

    frontier: List[Position] = [EMPTY_POSITION]
    while frontier:
        u = frontier.pop()
        if len(u) >= depth:
            continue
        for m, j in o_options(g, u, budget, fresh_cap):
            u1 = u.snoc(m, j)
            if not _position_ok_fast(g, u1):
                continue
            report["positions"] += 1
            rs = sigma.responses(u1)
            if len(rs) > 1:
                violate("s2", f"{len(rs)} responses at {u1!r}")
            key = _view_signature(g, u1)
            if not rs:
                if key in views and views[key] is not None:
                    violate("innocence", f"response missing at view {key}")
                views[key] = None
                continue
            rm, rj = rs[0]
            u2 = u1.snoc(rm, rj)
            if not _position_ok_fast(g, u2):
                violate("s1", f"response {rm!r}@{rj} leaves the positions at {u1!r}")
                continue
            vis = p_view_indices(g, u1)
            vpos = {orig: k for k, orig in enumerate(vis)}
            sig = (rm.inner, tag_str(rm.outer), vpos.get(rj))
            prev = views.get(key, "unseen")
            if prev == "unseen":
                views[key] = sig
            elif prev != sig:
                violate("innocence", f"two responses at one view: {prev} vs {sig}")
            if label(g, rm).qa == "A":
                pend = _pending_question(g, u1)
                if pend != rj:
                    violate("bracketing",
                            f"answer {rm!r} points at {rj}, pending question is {pend}")
            if len(u2) < depth:
                frontier.append(u2)
    return report


def same_game(a: GameExpr, b: GameExpr) -> bool:
    """Structural equality of game expressions (games normally compare by
    identity; hiding can produce equal trees at distinct nodes)."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    fields = getattr(a, "__dataclass_fields__", None)
    if not fields:
        return True  # leaf games carry no parameters
    for f in fields:
        x, y = getattr(a, f), getattr(b, f)
        if isinstance(x, GameExpr):
            if not same_game(x, y):
                return False
        elif x != y:
            return False
    return True


def equal_up_to(sigma: Strategy, tau: Strategy, depth: int = 10,
                budget: Optional[Budget] = None, fresh_cap: int = 2) -> bool:
    """Bounded extensional equality: identical responses on every reachable
    odd-length position up to `depth` moves, explored from both sides."""
    if not same_game(sigma.game, tau.game):
        raise ValueError("equal_up_to requires strategies on the same game")
    return (_half_equal(sigma, tau, depth, budget, fresh_cap)
            and _half_equal(tau, sigma, depth, budget, fresh_cap))


def _half_equal(sigma: Strategy, tau: Strategy, depth: int,
                budget: Optional[Budget], fresh_cap: int) -> bool:
    g = sigma.game
    budget = budget or default_budget()
    frontier: List[Position] = [EMPTY_POSITION]
    while frontier:
        u = frontier.pop()
        if len(u) >= depth:
            continue
        for m, j in o_options(g, u, budget, fresh_cap):
            u1 = u.snoc(m, j)
            if not _position_ok_fast(g, u1):
                continue
            ra = sigma.next_move(u1)
            try:
                rb = tau.next_move(u1)
            except (KeyError, ValueError):
                rb = None
            if ra != rb:
                return False
            if ra is None:
                continue
            u2 = u1.snoc(*ra)
            if not _position_ok_fast(g, u2):
                return False
            if len(u2) < depth:
                frontier.append(u2)
    return True


# ---------------------------------------------------------------------------
# Hiding on strategies
# ---------------------------------------------------------------------------

class _Slot:
    __slots__ = ("n", "state", "pin")


def resume_slot(cache: dict, s: Position, fresh) -> "_Slot":
    """Incremental-state slot keyed by the identity of s's backing list.

    Positions extended in place keep their backing list, so a slot whose
    consumed length does not exceed len(s) can resume; otherwise start over.
    The slot pins the position to keep the backing list's id stable.
    """
    key = s.key()[0]
    slot = cache.get(key)
    if slot is None or slot.n > len(s):
        slot = _Slot()
        slot.n = 0
        slot.state = fresh()
        slot.pin = s
        cache[key] = slot
    return slot


class _HideState:
    __slots__ = ("u", "vmap", "inv")

    def __init__(self):
        self.u = EMPTY_POSITION
        self.vmap: Dict[int, int] = {}
        self.inv: Dict[int, int] = {}


class HiddenStrategy(Strategy):
    """The d-hiding of a strategy: simulate it and expose visible moves."""

    def __init__(self, base: Strategy, d: Depth):
        self.base = base
        self.d = d
        self.game = hide_game(base.game, d)
        self.name = f"hide({base.name},{d})"
        self._cache: dict = {}

    def _visible(self, m: Move) -> bool:
        lab = label(self.base.game, m)
        return lab.pr == 0 or lab.pr > self.d

    def next_move(self, s: Position) -> Response:
        g0 = self.base.game
        slot = resume_slot(self._cache, s, _HideState)
        st: _HideState = slot.state
        i = slot.n
        while True:
            if len(st.u) % 2 == 0:
                # next visible O-move comes from s
                if i >= len(s):
                    return None  # even-length query: nothing to do
                m, j = s.entry(i)
                uj: Optional[int] = None
                if j is not None:
                    want = st.vmap[j]
                    if enabled(g0, st.u.move(want), m):
                        uj = want
                    else:
                        uj = None
                        for k in range(len(st.u) - 1, -1, -1):
                            if enabled(g0, st.u.move(k), m) and self._external_of(st.u, k) == want:
                                uj = k
                                break
                        if uj is None:
                            return None
                _burn()
                st.u = st.u.snoc(m, uj)
                st.vmap[i] = len(st.u) - 1
                st.inv[len(st.u) - 1] = i
                i += 1
                slot.n = i
                slot.pin = s
                continue
            r = self.base.next_move(st.u)
            if r is None:
                return None
            rm, rj = r
            if self._visible(rm):
                if i < len(s):
                    # must agree with the recorded visible P-move
                    if s.move(i) != rm:
                        return None
                    st.u = st.u.snoc(rm, rj)
                    st.vmap[i] = len(st.u) - 1
                    st.inv[len(st.u) - 1] = i
                    i += 1
                    slot.n = i
                    slot.pin = s
                    continue
                k = rj
                while k is not None and not self._visible(st.u.move(k)):
                    k = st.u.just(k)
                return rm, (st.inv[k] if k is not None else None)
            # internal P-move: append it and the forced dummy
            _burn(2)
            st.u = st.u.snoc(rm, rj)
            dm = dummy(g0, rm)
            if dm is None:
                return None
            st.u = st.u.snoc(dm, dummy_pointer(g0, st.u))

    def _external_of(self, u: Position, k: int) -> Optional[int]:
        while k is not None and not self._visible(u.move(k)):
            k = u.just(k)
        return k


def hide_strategy(sigma: Strategy, d: Depth) -> Strategy:
    if d == 0:
        return sigma
    if isinstance(sigma, HiddenStrategy):
        if sigma.d == OMEGA or d == OMEGA:
            return HiddenStrategy(sigma.base, OMEGA)
        return HiddenStrategy(sigma.base, sigma.d + d)
    if sigma.game is hide_game(sigma.game, d):  # already normalized
        return sigma
    return HiddenStrategy(sigma, d)
