"""Dynamic games: move structure, constructions on games, views, and hiding.

A game is an immutable expression tree.  Leaves are the built-in games
(terminal, booleans, lazy naturals, the tag game, instruction alphabets);
inner nodes are the constructions (tensor, linear arrow, product, pairing,
exponential, promotion, concatenation, currying, uncurrying) plus a hiding
wrapper.  All per-move queries (labels, enabling, dummies, candidate
successors) are computed by structural recursion over the tree, peeling one
inner tag per composite node.

Moves carry an inner element (substance plus a stack of W/E/N/S inner tags,
innermost first) and an outer tag tree.  Pointers in sequences are indices.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from .tags import (
    EMPTY_TAG,
    InnerElement,
    Move,
    NatVal,
    Tag,
    bang_tag,
    box,
    ede,
    encode_nat_seq,
    leaf,
    mk_move,
    sep,
    split_bang,
    tag_str,
)

OMEGA = float("inf")
Depth = Union[int, float]


class Label(NamedTuple):
    op: str  # "O" | "P"
    qa: str  # "Q" | "A"
    pr: int  # priority; 0 = external


# ---------------------------------------------------------------------------
# Game expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GameExpr:
    pass


@dataclass(frozen=True, eq=False)
class Terminal(GameExpr):
    """The empty game: no moves, only the empty position."""


@dataclass(frozen=True, eq=False)
class Bool2(GameExpr):
    """One question, two answers (tt / ff)."""


@dataclass(frozen=True, eq=False)
class LazyNat(GameExpr):
    """Lazy natural numbers: q^ (yes q)^n no."""


@dataclass(frozen=True, eq=False)
class TagGame(GameExpr):
    """Spelling of outer-tag words, one alphabet symbol per answer."""


@dataclass(frozen=True, eq=False)
class InstrAlphabet(GameExpr):
    """One question answered by a symbol naming an inner element of `base`,
    or by the blank symbol."""

    base: GameExpr


@dataclass(frozen=True, eq=False)
class Tensor(GameExpr):
    l: GameExpr
    r: GameExpr


@dataclass(frozen=True, eq=False)
class Lolli(GameExpr):
    """Linear arrow l -o r; `l` must be normalized (use the `lolli` factory)."""

    l: GameExpr
    r: GameExpr


@dataclass(frozen=True, eq=False)
class Product(GameExpr):
    l: GameExpr
    r: GameExpr


@dataclass(frozen=True, eq=False)
class PairingG(GameExpr):
    """Pairing of l (over C -o A) and r (over C -o B) sharing the domain C."""

    l: GameExpr
    r: GameExpr
    wa: GameExpr
    wb: GameExpr
    wc: GameExpr


@dataclass(frozen=True, eq=False)
class Bang(GameExpr):
    g: GameExpr


@dataclass(frozen=True, eq=False)
class Promotion(GameExpr):
    """g over !A -o B, duplicated along threads of the codomain."""

    g: GameExpr
    wa: GameExpr
    wb: GameExpr


@dataclass(frozen=True, eq=False)
class Concat(GameExpr):
    """Concatenation of j (over A -o B) and k (over B -o C)."""

    j: GameExpr
    k: GameExpr
    wa: GameExpr
    wb: GameExpr
    wc: GameExpr


@dataclass(frozen=True, eq=False)
class Curry(GameExpr):
    """g over (A (x) B) -o C, re-tagged to A -o (B -o C)."""

    g: GameExpr
    wa: GameExpr
    wb: GameExpr
    wc: GameExpr


@dataclass(frozen=True, eq=False)
class Uncurry(GameExpr):
    """g over A -o (B -o C), re-tagged to (A (x) B) -o C."""

    g: GameExpr
    wa: GameExpr
    wb: GameExpr
    wc: GameExpr


@dataclass(frozen=True, eq=False)
class Hidden(GameExpr):
    g: GameExpr
    d: Depth


# --- factories -------------------------------------------------------------

def mu(g: GameExpr) -> int:
    """Maximal priority occurring in g."""
    if isinstance(g, (Terminal, Bool2, LazyNat, TagGame, InstrAlphabet)):
        return 0
    if isinstance(g, (Tensor, Lolli, Product)):
        return max(mu(g.l), mu(g.r))
    if isinstance(g, PairingG):
        return max(mu(g.l), mu(g.r))
    if isinstance(g, Bang):
        return mu(g.g)
    if isinstance(g, (Promotion, Curry, Uncurry)):
        return mu(g.g)
    if isinstance(g, Concat):
        return max(mu(g.j), mu(g.k)) + 1
    if isinstance(g, Hidden):
        m = mu(g.g)
        return int(m - g.d) if m > g.d else 0
    raise TypeError(g)


def is_normalized(g: GameExpr) -> bool:
    return mu(g) == 0


def hide_game(g: GameExpr, d: Depth) -> GameExpr:
    """The game with internal moves of priority <= d eliminated."""
    if d == 0 or is_normalized(g):
        return g
    if isinstance(g, Hidden):
        return hide_game(g.g, g.d + d)
    if d >= mu(g):
        d = OMEGA
    return Hidden(g, d)


def lolli(a: GameExpr, b: GameExpr) -> Lolli:
    return Lolli(hide_game(a, OMEGA), b)


def arrow(a: GameExpr, b: GameExpr) -> Lolli:
    """A => B, i.e. !A -o B."""
    return Lolli(Bang(hide_game(a, OMEGA)), b)


# ---------------------------------------------------------------------------
# Built-in move vocabulary
# ---------------------------------------------------------------------------

Q_HAT = "q^"       # initial question (booleans, lazy naturals)
Q = "q"            # repeat question (lazy naturals)
YES, NO = "yes", "no"
TT, FF = "tt", "ff"
QT_HAT = "q^T"     # tag-game questions
QT = "qT"
TAG_ANSWERS = ("#", "l", "[", "]", "ok")  # "ok" terminates the spelling
QI_HAT = "q^I"     # instruction-alphabet question
BLANK = "box"      # the blank instruction symbol


def sym_substance(inner: InnerElement) -> str:
    return "s:" + inner.substance + ":" + "".join(inner.tags)


def sym_inner(inner: InnerElement) -> InnerElement:
    return InnerElement(sym_substance(inner), ())


def sym_decode(substance: str) -> InnerElement:
    if not substance.startswith("s:"):
        raise ValueError(f"not a symbol move: {substance!r}")
    body, _, tags = substance[2:].rpartition(":")
    return InnerElement(body, tuple(tags))


# ---------------------------------------------------------------------------
# Enumeration budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    """Bound on fresh thread tags offered during move enumeration."""

    entry_max: int = 3
    len_max: int = 2

    def tags(self) -> Tuple[Tag, ...]:
        return _budget_tags(self.entry_max, self.len_max)


_budget_tag_cache: Dict[Tuple[int, int], Tuple[Tag, ...]] = {}


def _budget_tags(entry_max: int, len_max: int) -> Tuple[Tag, ...]:
    key = (entry_max, len_max)
    got = _budget_tag_cache.get(key)
    if got is None:
        words = []
        seen = set()

        def go(seq):
            w = encode_nat_seq(seq)
            if w not in seen:
                seen.add(w)
                words.append(leaf(w))
            if len(seq) < len_max:
                for a in range(entry_max + 1):
                    go(seq + (a,))

        go(())
        got = _budget_tag_cache[key] = tuple(words)
    return got


def default_budget() -> Budget:
    raw = os.environ.get("LUDUS_TAG_BUDGET")
    if raw:
        e, l = raw.split(",")
        return Budget(int(e), int(l))
    return Budget()


# ---------------------------------------------------------------------------
# Inner-element tables and labels
# ---------------------------------------------------------------------------

_inner_cache: Dict[int, Dict[InnerElement, Label]] = {}
_inner_keepalive: List[GameExpr] = []


def _retag(inner: InnerElement, drop: int, push: Tuple[str, ...]) -> InnerElement:
    tags = inner.tags[: len(inner.tags) - drop] + push if drop else inner.tags + push
    return InnerElement(inner.substance, tags)


def inner_elements(g: GameExpr) -> Dict[InnerElement, Label]:
    got = _inner_cache.get(id(g))
    if got is not None:
        return got
    out: Dict[InnerElement, Label] = {}
    if isinstance(g, Terminal):
        pass
    elif isinstance(g, Bool2):
        out[InnerElement(Q_HAT, ())] = Label("O", "Q", 0)
        out[InnerElement(TT, ())] = Label("P", "A", 0)
        out[InnerElement(FF, ())] = Label("P", "A", 0)
    elif isinstance(g, LazyNat):
        out[InnerElement(Q_HAT, ())] = Label("O", "Q", 0)
        out[InnerElement(Q, ())] = Label("O", "Q", 0)
        out[InnerElement(YES, ())] = Label("P", "A", 0)
        out[InnerElement(NO, ())] = Label("P", "A", 0)
    elif isinstance(g, TagGame):
        out[InnerElement(QT_HAT, ())] = Label("O", "Q", 0)
        out[InnerElement(QT, ())] = Label("O", "Q", 0)
        for a in TAG_ANSWERS:
            out[InnerElement(a, ())] = Label("P", "A", 0)
    elif isinstance(g, InstrAlphabet):
        out[InnerElement(QI_HAT, ())] = Label("O", "Q", 0)
        out[InnerElement(BLANK, ())] = Label("P", "A", 0)
        for inner in inner_elements(g.base):
            out[sym_inner(inner)] = Label("P", "A", 0)
    elif isinstance(g, (Tensor, Product)):
        for i, lab in inner_elements(g.l).items():
            out[_retag(i, 0, ("W",))] = lab
        for i, lab in inner_elements(g.r).items():
            out[_retag(i, 0, ("E",))] = lab
    elif isinstance(g, Lolli):
        for i, lab in inner_elements(g.l).items():
            out[_retag(i, 0, ("W",))] = Label("P" if lab.op == "O" else "O", lab.qa, lab.pr)
        for i, lab in inner_elements(g.r).items():
            out[_retag(i, 0, ("E",))] = lab
    elif isinstance(g, Bang):
        out.update(inner_elements(g.g))
    elif isinstance(g, PairingG):
        for i, lab in inner_elements(g.l).items():
            if lab.pr > 0:
                out[_retag(i, 0, ("S",))] = lab
            elif i.tags and i.tags[-1] == "W":
                out[i] = lab  # shared domain move
            else:  # (a, E) -> ((a, W), E)
                out[_retag(i, 1, ("W", "E"))] = lab
        for i, lab in inner_elements(g.r).items():
            if lab.pr > 0:
                out[_retag(i, 0, ("N",))] = lab
            elif i.tags and i.tags[-1] == "W":
                out[i] = lab
            else:  # (b, E) -> ((b, E), E)
                out[_retag(i, 0, ("E",))] = lab
    elif isinstance(g, Promotion):
        for i, lab in inner_elements(g.g).items():
            if lab.pr > 0:
                out[_retag(i, 0, ("S",))] = lab
            else:
                out[i] = lab
    elif isinstance(g, Concat):
        m = max(mu(g.j), mu(g.k)) + 1
        for i, lab in inner_elements(g.j).items():
            if lab.pr == 0 and i.tags and i.tags[-1] == "W":
                out[i] = lab
            elif lab.pr == 0:  # shared middle move of j, now internal
                out[_retag(i, 0, ("S",))] = Label(lab.op, lab.qa, lab.pr + m)
            else:
                out[_retag(i, 0, ("S",))] = lab
        for i, lab in inner_elements(g.k).items():
            if lab.pr == 0 and i.tags and i.tags[-1] == "E":
                out[i] = lab
            elif lab.pr == 0:
                out[_retag(i, 0, ("N",))] = Label(lab.op, lab.qa, lab.pr + m)
            else:
                out[_retag(i, 0, ("N",))] = lab
    elif isinstance(g, Curry):
        for i, lab in inner_elements(g.g).items():
            if lab.pr > 0:
                out[_retag(i, 0, ("N",))] = lab
            elif len(i.tags) >= 2 and i.tags[-2:] == ("W", "W"):
                out[_retag(i, 1, ())] = lab  # ((a,W),W) -> (a,W)
            elif len(i.tags) >= 2 and i.tags[-2:] == ("E", "W"):
                out[_retag(i, 2, ("W", "E"))] = lab  # ((b,E),W) -> ((b,W),E)
            else:  # (c,E) -> ((c,E),E)
                out[_retag(i, 0, ("E",))] = lab
    elif isinstance(g, Uncurry):
        for i, lab in inner_elements(g.g).items():
            if lab.pr > 0:
                out[_retag(i, 0, ("S",))] = lab
            elif len(i.tags) >= 2 and i.tags[-2:] == ("W", "E"):
                out[_retag(i, 2, ("E", "W"))] = lab  # ((b,W),E) -> ((b,E),W)
            elif len(i.tags) >= 2 and i.tags[-2:] == ("E", "E"):
                out[_retag(i, 1, ())] = lab  # ((c,E),E) -> (c,E)
            else:  # (a,W) -> ((a,W),W)
                out[_retag(i, 0, ("W",))] = lab
    elif isinstance(g, Hidden):
        d = g.d
        for i, lab in inner_elements(g.g).items():
            if lab.pr == 0 or lab.pr > d:
                out[i] = Label(lab.op, lab.qa, int(lab.pr - d) if lab.pr > d else 0)
    else:
        raise TypeError(g)
    _inner_cache[id(g)] = out
    _inner_keepalive.append(g)
    return out


def label(g: GameExpr, m: Move) -> Label:
    lab = inner_elements(g).get(m.inner)
    if lab is None:
        raise KeyError(f"{m!r} is not a move of this game")
    return lab


def label_opt(g: GameExpr, m: Move) -> Optional[Label]:
    return inner_elements(g).get(m.inner)


# ---------------------------------------------------------------------------
# Routing composite moves into children
# ---------------------------------------------------------------------------

def _side_move(m: Move) -> Tuple[str, Move]:
    """Split off the outermost inner tag (tensor/product/lolli routing)."""
    tags = m.inner.tags
    side = tags[-1]
    return side, Move(InnerElement(m.inner.substance, tags[:-1]), m.outer)


def _pair_routes(g: PairingG, m: Move) -> List[Tuple[str, GameExpr, Move]]:
    """Routes of a pairing move: [(side, child-game, child-move)]."""
    tags = m.inner.tags
    last = tags[-1] if tags else None
    if last == "S":
        return [("L", g.l, Move(_retag(m.inner, 1, ()), m.outer))]
    if last == "N":
        return [("R", g.r, Move(_retag(m.inner, 1, ()), m.outer))]
    if last == "W":  # shared domain move: belongs to both components
        return [("L", g.l, m), ("R", g.r, m)]
    if last == "E":
        if len(tags) >= 2 and tags[-2] == "W":  # ((a,W),E) -> (a,E) in L
            return [("L", g.l, Move(_retag(m.inner, 2, ("E",)), m.outer))]
        return [("R", g.r, Move(_retag(m.inner, 1, ()), m.outer))]  # ((b,E),E) -> (b,E)
    return []


def _concat_route(g: Concat, m: Move) -> Tuple[str, GameExpr, Move]:
    tags = m.inner.tags
    last = tags[-1] if tags else None
    if last == "S":
        return "J", g.j, Move(_retag(m.inner, 1, ()), m.outer)
    if last == "N":
        return "K", g.k, Move(_retag(m.inner, 1, ()), m.outer)
    if last == "W":
        return "J", g.j, m
    return "K", g.k, m


def _curry_peel(g: Curry, m: Move) -> Move:
    tags = m.inner.tags
    last = tags[-1] if tags else None
    if last == "N":
        return Move(_retag(m.inner, 1, ()), m.outer)
    if last == "W":  # (a,W) -> ((a,W),W)
        return Move(_retag(m.inner, 0, ("W",)), m.outer)
    if len(tags) >= 2 and tags[-2] == "W":  # ((b,W),E) -> ((b,E),W)
        return Move(_retag(m.inner, 2, ("E", "W")), m.outer)
    return Move(_retag(m.inner, 1, ()), m.outer)  # ((c,E),E) -> (c,E)


def _uncurry_peel(g: Uncurry, m: Move) -> Move:
    tags = m.inner.tags
    last = tags[-1] if tags else None
    if last == "S":
        return Move(_retag(m.inner, 1, ()), m.outer)
    if last == "E":  # (c,E) -> ((c,E),E)
        return Move(_retag(m.inner, 0, ("E",)), m.outer)
    if len(tags) >= 2 and tags[-2] == "W":  # ((a,W),W) -> (a,W)
        return Move(_retag(m.inner, 1, ()), m.outer)
    return Move(_retag(m.inner, 2, ("W", "E")), m.outer)  # ((b,E),W) -> ((b,W),E)


def _promo_category(m: Move) -> str:
    tags = m.inner.tags
    last = tags[-1] if tags else None
    if last == "S":
        return "S"
    if last == "W":
        return "W"
    return "E"


def _promo_peel(g: Promotion, m: Move) -> Optional[Move]:
    """Thread-local view of a promotion move inside g.g (W-moves unchanged)."""
    cat = _promo_category(m)
    if cat == "W":
        return m
    sb = split_bang(m.outer)
    if sb is None:
        return None
    f, e = sb
    if cat == "E":
        return Move(m.inner, e)
    return Move(_retag(m.inner, 1, ()), e)


def _promo_thread(m: Move) -> Optional[Tuple[Tag, Move]]:
    """Thread tag of a promotion move and its projection into that thread."""
    cat = _promo_category(m)
    sb = split_bang(m.outer)
    if sb is None:
        return None
    f, e = sb
    if cat == "W":
        # outer is [[f']#[g']]#e ; thread f', projected outer [g']#e
        x = f
        if x.kind != "sep" or x.a.kind != "box" or x.b.kind != "box":
            return None
        return x.a.a, Move(m.inner, sep(x.b, e))
    if cat == "E":
        return f, Move(m.inner, e)
    return f, Move(_retag(m.inner, 1, ()), e)


def _promo_wrap(g: Promotion, r: Move, f: Tag) -> Move:
    """Re-tag a thread-local move of g.g into thread f of the promotion."""
    lab = label(g.g, r)
    if lab.pr == 0 and r.inner.tags and r.inner.tags[-1] == "W":
        sb = split_bang(r.outer)
        if sb is None:
            return r
        # thread-local [g']#h becomes the nested [[f]#[g']]#h
        return Move(r.inner, bang_tag(sep(box(f), box(sb[0])), sb[1]))
    if lab.pr == 0:
        return Move(r.inner, bang_tag(f, r.outer))
    return Move(_retag(r.inner, 0, ("S",)), bang_tag(f, r.outer))


def _concat_wrap(g: Concat, side: str, r: Move) -> Move:
    child = g.j if side == "J" else g.k
    lab = label(child, r)
    keep = "W" if side == "J" else "E"
    push = "S" if side == "J" else "N"
    if lab.pr == 0 and r.inner.tags and r.inner.tags[-1] == keep:
        return r
    return Move(_retag(r.inner, 0, (push,)), r.outer)


def _curry_wrap(g: Curry, r: Move) -> Move:
    lab = label(g.g, r)
    tags = r.inner.tags
    if lab.pr > 0:
        return Move(_retag(r.inner, 0, ("N",)), r.outer)
    if len(tags) >= 2 and tags[-2:] == ("W", "W"):
        return Move(_retag(r.inner, 1, ()), r.outer)
    if len(tags) >= 2 and tags[-2:] == ("E", "W"):
        return Move(_retag(r.inner, 2, ("W", "E")), r.outer)
    return Move(_retag(r.inner, 0, ("E",)), r.outer)


def _uncurry_wrap(g: Uncurry, r: Move) -> Move:
    lab = label(g.g, r)
    tags = r.inner.tags
    if lab.pr > 0:
        return Move(_retag(r.inner, 0, ("S",)), r.outer)
    if len(tags) >= 2 and tags[-2:] == ("W", "E"):
        return Move(_retag(r.inner, 2, ("E", "W")), r.outer)
    if len(tags) >= 2 and tags[-2:] == ("E", "E"):
        return Move(_retag(r.inner, 1, ()), r.outer)
    return Move(_retag(r.inner, 0, ("W",)), r.outer)


def _pair_wrap(g: PairingG, side: str, r: Move) -> Move:
    child = g.l if side == "L" else g.r
    lab = label(child, r)
    if lab.pr > 0:
        return Move(_retag(r.inner, 0, ("S" if side == "L" else "N",)), r.outer)
    if r.inner.tags and r.inner.tags[-1] == "W":
        return r
    if side == "L":  # (a,E) -> ((a,W),E)
        return Move(_retag(r.inner, 1, ("W", "E")), r.outer)
    return Move(_retag(r.inner, 0, ("E",)), r.outer)  # (b,E) -> ((b,E),E)


# ---------------------------------------------------------------------------
# Move membership
# ---------------------------------------------------------------------------

def is_move(g: GameExpr, m: Move) -> bool:
    if isinstance(g, (Terminal, Bool2, LazyNat, TagGame, InstrAlphabet)):
        return m.inner in inner_elements(g) and m.outer is EMPTY_TAG
    if isinstance(g, (Tensor, Lolli, Product)):
        if not m.inner.tags:
            return False
        side, mm = _side_move(m)
        if side == "W":
            return is_move(g.l, mm)
        if side == "E":
            return is_move(g.r, mm)
        return False
    if isinstance(g, Bang):
        sb = split_bang(m.outer)
        return sb is not None and is_move(g.g, Move(m.inner, sb[1]))
    if isinstance(g, PairingG):
        return any(is_move(c, mm) for _, c, mm in _pair_routes(g, m))
    if isinstance(g, Promotion):
        cat = _promo_category(m)
        pm = _promo_peel(g, m)
        if pm is None or not is_move(g.g, pm):
            return False
        lab = label(g.g, pm)
        if cat == "W":
            return lab.pr == 0 and _promo_thread(m) is not None
        if cat == "E":
            return lab.pr == 0 and pm.inner.tags[-1:] == ("E",)
        return lab.pr > 0
    if isinstance(g, Concat):
        side, child, mm = _concat_route(g, m)
        if not is_move(child, mm):
            return False
        lab = label(child, mm)
        last = m.inner.tags[-1] if m.inner.tags else None
        if last in ("S", "N"):
            return True
        # untagged moves must be external on the outer side
        return lab.pr == 0
    if isinstance(g, Curry):
        return bool(m.inner.tags) and is_move(g.g, _curry_peel(g, m))
    if isinstance(g, Uncurry):
        return bool(m.inner.tags) and is_move(g.g, _uncurry_peel(g, m))
    if isinstance(g, Hidden):
        if not is_move(g.g, m):
            return False
        pr = label(g.g, m).pr
        return pr == 0 or pr > g.d
    raise TypeError(g)


# ---------------------------------------------------------------------------
# Enabling
# ---------------------------------------------------------------------------

def enabled_star(g: GameExpr, m: Move) -> bool:
    """Whether m is an opening (initial) move of g."""
    if isinstance(g, (Bool2, LazyNat)):
        return m.inner.substance == Q_HAT
    if isinstance(g, TagGame):
        return m.inner.substance == QT_HAT
    if isinstance(g, InstrAlphabet):
        return m.inner.substance == QI_HAT
    if isinstance(g, Terminal):
        return False
    if isinstance(g, Tensor) or isinstance(g, Product):
        side, mm = _side_move(m)
        return enabled_star(g.l if side == "W" else g.r, mm)
    if isinstance(g, Lolli):
        side, mm = _side_move(m)
        return side == "E" and enabled_star(g.r, mm)
    if isinstance(g, Bang):
        sb = split_bang(m.outer)
        return sb is not None and enabled_star(g.g, Move(m.inner, sb[1]))
    if isinstance(g, PairingG):
        tags = m.inner.tags
        if not tags or tags[-1] != "E":
            return False
        return any(enabled_star(c, mm) for _, c, mm in _pair_routes(g, m))
    if isinstance(g, Promotion):
        if _promo_category(m) != "E":
            return False
        pm = _promo_peel(g, m)
        return pm is not None and enabled_star(g.g, pm)
    if isinstance(g, Concat):
        tags = m.inner.tags
        if not tags or tags[-1] != "E":
            return False
        return enabled_star(g.k, m)
    if isinstance(g, Curry):
        tags = m.inner.tags
        return len(tags) >= 2 and tags[-2:] == ("E", "E") and enabled_star(g.g, _curry_peel(g, m))
    if isinstance(g, Uncurry):
        tags = m.inner.tags
        return bool(tags) and tags[-1] == "E" and enabled_star(g.g, _uncurry_peel(g, m))
    if isinstance(g, Hidden):
        return enabled_star(g.g, m) and is_move(g, m)
    raise TypeError(g)


def _enabled_builtin(g: GameExpr, a: str, b: str) -> bool:
    if isinstance(g, Bool2):
        return a == Q_HAT and b in (TT, FF)
    if isinstance(g, LazyNat):
        return (a in (Q_HAT, Q) and b in (YES, NO)) or (a == YES and b == Q)
    if isinstance(g, TagGame):
        if a in (QT_HAT, QT):
            return b in TAG_ANSWERS
        return a in ("#", "l", "[", "]") and b == QT
    if isinstance(g, InstrAlphabet):
        return a == QI_HAT and b != QI_HAT
    return False


def enabled(g: GameExpr, m: Move, n: Move) -> bool:
    """Whether m enables n in g (both assumed moves of g)."""
    if isinstance(g, (Terminal, Bool2, LazyNat, TagGame, InstrAlphabet)):
        return _enabled_builtin(g, m.inner.substance, n.inner.substance)
    if isinstance(g, (Tensor, Product)):
        sm, mm = _side_move(m)
        sn, nn = _side_move(n)
        return sm == sn and enabled(g.l if sm == "W" else g.r, mm, nn)
    if isinstance(g, Lolli):
        sm, mm = _side_move(m)
        sn, nn = _side_move(n)
        if sm == sn:
            return enabled(g.l if sm == "W" else g.r, mm, nn)
        if sm == "E" and sn == "W":
            return enabled_star(g.r, mm) and enabled_star(g.l, nn)
        return False
    if isinstance(g, Bang):
        sm, sn = split_bang(m.outer), split_bang(n.outer)
        if sm is None or sn is None or sm[0] is not sn[0]:
            return False
        return enabled(g.g, Move(m.inner, sm[1]), Move(n.inner, sn[1]))
    if isinstance(g, PairingG):
        rm = _pair_routes(g, m)
        rn = _pair_routes(g, n)
        for sm_, cm, mm in rm:
            for sn_, cn, nn in rn:
                if cm is cn and enabled(cm, mm, nn):
                    return True
        return False
    if isinstance(g, Promotion):
        cm, cn = _promo_category(m), _promo_category(n)
        if cm == "W" and cn == "W":
            return enabled(g.g, m, n)
        if cm == "E" and cn == "W":
            pm = _promo_peel(g, m)
            nb = Move(_retag(n.inner, 1, ()), n.outer)  # strip the W tag
            if pm is not None and enabled_star(g.g, pm) and enabled_star(g.wa, nb):
                return True
        if "W" in (cm, cn):
            # mixed with a domain move: compare inside the common thread
            tm, tn = _promo_thread(m), _promo_thread(n)
            return (
                tm is not None
                and tn is not None
                and tm[0] is tn[0]
                and enabled(g.g, tm[1], tn[1])
            )
        pm, pn = _promo_peel(g, m), _promo_peel(g, n)
        if pm is None or pn is None:
            return False
        return enabled(g.g, pm, pn)
    if isinstance(g, Concat):
        sm_, cm, mm = _concat_route(g, m)
        sn_, cn, nn = _concat_route(g, n)
        if sm_ == sn_:
            return enabled(cm, mm, nn)
        if sm_ == "K" and sn_ == "J":
            # the middle-initial of k (now internal) enables middle-initials of j
            mt, nt = m.inner.tags, n.inner.tags
            if mt[-1:] != ("N",) or nt[-1:] != ("S",):
                return False
            if mm.inner.tags[-1:] != ("W",) or nn.inner.tags[-1:] != ("E",):
                return False
            bm = Move(_retag(mm.inner, 1, ()), mm.outer)
            bn = Move(_retag(nn.inner, 1, ()), nn.outer)
            return enabled_star(g.wb, bm) and enabled_star(g.wb, bn)
        return False
    if isinstance(g, Curry):
        return enabled(g.g, _curry_peel(g, m), _curry_peel(g, n))
    if isinstance(g, Uncurry):
        return enabled(g.g, _uncurry_peel(g, m), _uncurry_peel(g, n))
    if isinstance(g, Hidden):
        return _hidden_enabled(g, m, n)
    raise TypeError(g)


def _strip_bang(m: Move) -> Move:
    """Drop one thread-tag layer from the outer tag if present."""
    sb = split_bang(m.outer)
    return Move(m.inner, sb[1]) if sb is not None else m


# ---------------------------------------------------------------------------
# Dummies
# ---------------------------------------------------------------------------

def dummy(g: GameExpr, m: Move) -> Optional[Move]:
    """The dummy O-image of an internal P-move, if any."""
    if isinstance(g, (Terminal, Bool2, LazyNat, TagGame, InstrAlphabet)):
        return None
    if isinstance(g, (Tensor, Product)):
        side, mm = _side_move(m)
        r = dummy(g.l if side == "W" else g.r, mm)
        return None if r is None else Move(_retag(r.inner, 0, (side,)), r.outer)
    if isinstance(g, Lolli):
        side, mm = _side_move(m)
        if side != "E":
            return None
        r = dummy(g.r, mm)
        return None if r is None else Move(_retag(r.inner, 0, ("E",)), r.outer)
    if isinstance(g, Bang):
        sb = split_bang(m.outer)
        if sb is None:
            return None
        r = dummy(g.g, Move(m.inner, sb[1]))
        return None if r is None else Move(r.inner, bang_tag(sb[0], r.outer))
    if isinstance(g, PairingG):
        last = m.inner.tags[-1] if m.inner.tags else None
        if last == "S":
            r = dummy(g.l, Move(_retag(m.inner, 1, ()), m.outer))
            return None if r is None else Move(_retag(r.inner, 0, ("S",)), r.outer)
        if last == "N":
            r = dummy(g.r, Move(_retag(m.inner, 1, ()), m.outer))
            return None if r is None else Move(_retag(r.inner, 0, ("N",)), r.outer)
        return None
    if isinstance(g, Promotion):
        if _promo_category(m) != "S":
            return None
        sb = split_bang(m.outer)
        r = dummy(g.g, Move(_retag(m.inner, 1, ()), sb[1]))
        return None if r is None else Move(_retag(r.inner, 0, ("S",)), bang_tag(sb[0], r.outer))
    if isinstance(g, Concat):
        last = m.inner.tags[-1] if m.inner.tags else None
        if last == "S":
            mm = Move(_retag(m.inner, 1, ()), m.outer)
            r = dummy(g.j, mm)
            if r is not None:
                return Move(_retag(r.inner, 0, ("S",)), r.outer)
            if mm.inner.tags[-1:] == ("E",):
                # middle-side move: the dummy is the matching move on the k side
                return Move(_retag(mm.inner, 1, ("W", "N")), mm.outer)
            return None
        if last == "N":
            mm = Move(_retag(m.inner, 1, ()), m.outer)
            r = dummy(g.k, mm)
            if r is not None:
                return Move(_retag(r.inner, 0, ("N",)), r.outer)
            if mm.inner.tags[-1:] == ("W",):
                return Move(_retag(mm.inner, 1, ("E", "S")), mm.outer)
            return None
        return None
    if isinstance(g, Curry):
        if m.inner.tags[-1:] != ("N",):
            return None
        r = dummy(g.g, Move(_retag(m.inner, 1, ()), m.outer))
        return None if r is None else Move(_retag(r.inner, 0, ("N",)), r.outer)
    if isinstance(g, Uncurry):
        if m.inner.tags[-1:] != ("S",):
            return None
        r = dummy(g.g, Move(_retag(m.inner, 1, ()), m.outer))
        return None if r is None else Move(_retag(r.inner, 0, ("S",)), r.outer)
    if isinstance(g, Hidden):
        lab = label_opt(g.g, m)
        if lab is None or lab.pr <= g.d:
            return None
        return dummy(g.g, m)
    raise TypeError(g)


# ---------------------------------------------------------------------------
# Candidate successors (bounded enumeration)
# ---------------------------------------------------------------------------

def successors(g: GameExpr, m: Optional[Move], budget: Optional[Budget] = None) -> List[Move]:
    """Moves enabled by m (or opening moves when m is None), bounded by the
    thread-tag budget for fresh exponential threads."""
    budget = budget or default_budget()
    if isinstance(g, Terminal):
        return []
    if isinstance(g, Bool2):
        if m is None:
            return [mk_move(Q_HAT)]
        if m.inner.substance == Q_HAT:
            return [mk_move(TT), mk_move(FF)]
        return []
    if isinstance(g, LazyNat):
        if m is None:
            return [mk_move(Q_HAT)]
        s = m.inner.substance
        if s in (Q_HAT, Q):
            return [mk_move(NO), mk_move(YES)]
        if s == YES:
            return [mk_move(Q)]
        return []
    if isinstance(g, TagGame):
        if m is None:
            return [mk_move(QT_HAT)]
        s = m.inner.substance
        if s in (QT_HAT, QT):
            return [mk_move(a) for a in TAG_ANSWERS]
        if s in ("#", "l", "[", "]"):
            return [mk_move(QT)]
        return []
    if isinstance(g, InstrAlphabet):
        if m is None:
            return [mk_move(QI_HAT)]
        if m.inner.substance == QI_HAT:
            return [mk_move(BLANK)] + [Move(sym_inner(i), EMPTY_TAG) for i in inner_elements(g.base)]
        return []
    if isinstance(g, (Tensor, Product)):
        if m is None:
            return [_push(x, "W") for x in successors(g.l, None, budget)] + [
                _push(x, "E") for x in successors(g.r, None, budget)
            ]
        side, mm = _side_move(m)
        return [_push(x, side) for x in successors(g.l if side == "W" else g.r, mm, budget)]
    if isinstance(g, Lolli):
        if m is None:
            return [_push(x, "E") for x in successors(g.r, None, budget)]
        side, mm = _side_move(m)
        out = [_push(x, side) for x in successors(g.l if side == "W" else g.r, mm, budget)]
        if side == "E" and enabled_star(g.r, mm):
            out += [_push(x, "W") for x in successors(g.l, None, budget)]
        return out
    if isinstance(g, Bang):
        if m is None:
            return [
                Move(x.inner, bang_tag(f, x.outer))
                for f in budget.tags()
                for x in successors(g.g, None, budget)
            ]
        sb = split_bang(m.outer)
        if sb is None:
            return []
        f, e = sb
        return [
            Move(x.inner, bang_tag(f, x.outer))
            for x in successors(g.g, Move(m.inner, e), budget)
        ]
    if isinstance(g, PairingG):
        if m is None:
            return [_pair_wrap(g, "L", x) for x in successors(g.l, None, budget)] + [
                _pair_wrap(g, "R", x) for x in successors(g.r, None, budget)
            ]
        out = []
        for side, child, mm in _pair_routes(g, m):
            out += [_pair_wrap(g, side, x) for x in successors(child, mm, budget)]
        return _dedupe(out)
    if isinstance(g, Promotion):
        if m is None:
            return [
                Move(x.inner, bang_tag(f, x.outer))
                for f in budget.tags()
                for x in successors(g.g, None, budget)
            ]
        cat = _promo_category(m)
        if cat == "W":
            return [x for x in successors(g.g, m, budget) if label(g.g, x).pr == 0 and x.inner.tags[-1:] == ("W",)]
        sb = split_bang(m.outer)
        if sb is None:
            return []
        f = sb[0]
        pm = _promo_peel(g, m)
        return [_promo_wrap(g, x, f) for x in successors(g.g, pm, budget)]
    if isinstance(g, Concat):
        if m is None:
            return [_concat_wrap(g, "K", x) for x in successors(g.k, None, budget)]
        side, child, mm = _concat_route(g, m)
        out = [_concat_wrap(g, side, x) for x in successors(child, mm, budget)]
        if (
            side == "K"
            and m.inner.tags[-1:] == ("N",)
            and mm.inner.tags[-1:] == ("W",)
            and enabled_star(g.wb, Move(_retag(mm.inner, 1, ()), mm.outer))
        ):
            out += [_concat_wrap(g, "J", x) for x in successors(g.j, None, budget)]
        return out
    if isinstance(g, Curry):
        if m is None:
            return [_curry_wrap(g, x) for x in successors(g.g, None, budget)]
        return [_curry_wrap(g, x) for x in successors(g.g, _curry_peel(g, m), budget)]
    if isinstance(g, Uncurry):
        if m is None:
            return [_uncurry_wrap(g, x) for x in successors(g.g, None, budget)]
        return [_uncurry_wrap(g, x) for x in successors(g.g, _uncurry_peel(g, m), budget)]
    if isinstance(g, Hidden):
        return _hidden_successors(g, m, budget)
    raise TypeError(g)


def _push(m: Move, t: str) -> Move:
    return Move(_retag(m.inner, 0, (t,)), m.outer)


def _dedupe(ms: List[Move]) -> List[Move]:
    seen = set()
    out = []
    for m in ms:
        if m not in seen:
            seen.add(m)
            out.append(m)
    return out


def _hidden_visible(g: Hidden, m: Move) -> bool:
    lab = label_opt(g.g, m)
    return lab is not None and (lab.pr == 0 or lab.pr > g.d)


def _hidden_successors(g: Hidden, m: Optional[Move], budget: Budget) -> List[Move]:
    direct = successors(g.g, m, budget)
    if m is None:
        return [x for x in direct if _hidden_visible(g, x)]
    out = []
    seen = set()
    frontier = []
    for x in direct:
        if _hidden_visible(g, x):
            if x not in seen:
                seen.add(x)
                out.append(x)
        else:
            frontier.append(x)
    # search even-length chains through hidden moves
    cap = 2 * max(mu(g.g), 1) + 2
    visited = set(frontier)
    hops = 1
    while frontier and hops < cap:
        nxt = []
        for x in frontier:
            for y in successors(g.g, x, budget):
                if _hidden_visible(g, y):
                    # only even-length eliminated chains count
                    if hops % 2 == 0 and y not in seen:
                        seen.add(y)
                        out.append(y)
                elif y not in visited:
                    visited.add(y)
                    nxt.append(y)
        frontier = nxt
        hops += 1
    return out


def _hidden_enabled(g: Hidden, m: Move, n: Move) -> bool:
    """m |- x1 |- ... |- x_{2k} |- n in g.g through eliminated moves (k >= 0)."""
    if enabled(g.g, m, n):
        return True
    budget = default_budget()
    cap = 2 * max(mu(g.g), 1) + 2
    level = {m}
    seen = set(level)
    hops = 0
    while level and hops < cap:
        nxt = set()
        for x in level:
            for y in successors(g.g, x, budget):
                if _hidden_visible(g, y):
                    continue
                if (hops + 1) % 2 == 0 and enabled(g.g, y, n):
                    return True
                if y not in seen:
                    seen.add(y)
                    nxt.add(y)
        level = nxt
        hops += 1
    return False


# ---------------------------------------------------------------------------
# Positions (append-friendly justified sequences)
# ---------------------------------------------------------------------------

class Position:
    """An immutable justified sequence with O(1) snoc and random access.

    Prefix positions share the underlying list; branching copies it.
    """

    __slots__ = ("_items", "n")

    def __init__(self, items: Optional[list] = None, n: int = 0):
        self._items = items if items is not None else []
        self.n = n

    def __len__(self) -> int:
        return self.n

    def snoc(self, move: Move, just: Optional[int]) -> "Position":
        items = self._items
        if len(items) == self.n:
            items.append((move, just))
            return Position(items, self.n + 1)
        branch = items[: self.n]
        branch.append((move, just))
        return Position(branch, self.n + 1)

    def entry(self, i: int) -> Tuple[Move, Optional[int]]:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return self._items[i]

    def move(self, i: int) -> Move:
        return self.entry(i)[0]

    def just(self, i: int) -> Optional[int]:
        return self.entry(i)[1]

    def entries(self) -> List[Tuple[Move, Optional[int]]]:
        return self._items[: self.n]

    def prefix(self, n: int) -> "Position":
        if not 0 <= n <= self.n:
            raise IndexError(n)
        return Position(self._items, n)

    def key(self):
        return (id(self._items), self.n)

    @classmethod
    def from_entries(cls, entries: Iterable[Tuple[Move, Optional[int]]]) -> "Position":
        p = cls()
        for m, j in entries:
            p = p.snoc(m, j)
        return p

    def __eq__(self, other):
        return isinstance(other, Position) and self.entries() == other.entries()

    def __hash__(self):
        return hash(tuple(self.entries()))

    def __repr__(self):
        return "Position(" + ", ".join(f"{m!r}@{j}" for m, j in self.entries()) + ")"


EMPTY_POSITION = Position()


def project(s: Position, keep: Sequence[bool], move_map=None) -> Position:
    """J-subsequence: keep the flagged entries, composing pointers through the
    eliminated ones; optionally rewrite the kept moves."""
    newidx: Dict[int, int] = {}
    out = Position()
    for i in range(len(s)):
        if not keep[i]:
            continue
        m, j = s.entry(i)
        while j is not None and not keep[j]:
            j = s.just(j)
        nj = newidx[j] if j is not None else None
        newidx[i] = len(out)
        out = out.snoc(move_map(i, m) if move_map else m, nj)
    return out


# ---------------------------------------------------------------------------
# Views, external justifiers, hiding on sequences
# ---------------------------------------------------------------------------

class ViewNode:
    """A view as a persistent chain: this node's indices are the parent's
    followed by ``tail``.  ``head`` caches the first few indices of the whole
    chain so both ends can be probed without materializing it."""

    __slots__ = ("parent", "tail", "length", "head")

    def __init__(self, parent: Optional["ViewNode"], tail: Tuple[int, ...]):
        self.parent = parent
        self.tail = tail
        if parent is None:
            self.length = len(tail)
            self.head = tail[:_VIEW_HEAD_LEN]
        else:
            self.length = parent.length + len(tail)
            h = parent.head
            self.head = h if len(h) >= _VIEW_HEAD_LEN else (h + tail)[:_VIEW_HEAD_LEN]


_VIEW_HEAD_LEN = 16
# Keyed by id() of a Position's backing list; the slot keeps a strong
# reference to the list so the id cannot be recycled while cached.
_VIEW_CACHE: Dict[int, Tuple[list, Dict[Tuple[int, str, int], ViewNode]]] = {}
_VIEW_CACHE_SLOTS = 512


def view_node(g: GameExpr, s: Position, op: str, upto: Optional[int] = None) -> Optional[ViewNode]:
    """The P-view (op="P") or O-view (op="O") chain of s[:upto].

    Incremental: the view of a prefix is reused, so over an append-only play
    the total cost is linear in the play's length."""
    n = len(s) if upto is None else upto
    if n == 0:
        return None
    items = s._items
    slot = _VIEW_CACHE.get(id(items))
    if slot is None or slot[0] is not items:
        if len(_VIEW_CACHE) >= _VIEW_CACHE_SLOTS:
            _VIEW_CACHE.clear()
        slot = (items, {})
        _VIEW_CACHE[id(items)] = slot
    memo = slot[1]
    gid = id(g)
    pending: List[Tuple[int, Tuple[int, ...]]] = []
    node: Optional[ViewNode] = None
    cur = n
    while cur > 0:
        got = memo.get((gid, op, cur))
        if got is not None:
            node = got
            break
        m, j = items[cur - 1]
        if label(g, m).op == op:
            pending.append((cur, (cur - 1,)))
            cur -= 1
        else:
            if j is None:
                pending.append((cur, (cur - 1,)))
                break
            pending.append((cur, (j, cur - 1)))
            cur = j
    while pending:
        k, tail = pending.pop()
        node = ViewNode(node, tail)
        memo[(gid, op, k)] = node
    return node


def view_node_list(node: Optional[ViewNode]) -> List[int]:
    parts = []
    while node is not None:
        parts.append(node.tail)
        node = node.parent
    out: List[int] = []
    for t in reversed(parts):
        out.extend(t)
    return out


def view_node_riter(node: Optional[ViewNode]) -> Iterator[int]:
    """Yield the chain's indices from back to front."""
    while node is not None:
        yield from reversed(node.tail)
        node = node.parent


def p_view_indices(g: GameExpr, s: Position, upto: Optional[int] = None) -> List[int]:
    """Indices of s surviving in the P-view of s[:upto]."""
    return view_node_list(view_node(g, s, "P", upto))


def o_view_indices(g: GameExpr, s: Position, upto: Optional[int] = None) -> List[int]:
    return view_node_list(view_node(g, s, "O", upto))


def view_position(g: GameExpr, s: Position, indices: List[int]) -> Position:
    """The view as a j-sequence (pointers kept when both ends survive)."""
    keep = [False] * len(s)
    for i in indices:
        keep[i] = True
    newidx = {i: k for k, i in enumerate(sorted(indices))}
    out = Position()
    for i in sorted(indices):
        m, j = s.entry(i)
        nj = newidx.get(j) if j is not None else None
        out = out.snoc(m, nj)
    return out


def external_justifier(g: GameExpr, s: Position, i: int, d: Depth) -> Optional[int]:
    """Follow the pointer chain from i past moves of priority in (0, d]."""
    j = s.just(i)
    while j is not None:
        pr = label(g, s.move(j)).pr
        if pr == 0 or pr > d:
            return j
        j = s.just(j)
    return None


def hide_jseq(g: GameExpr, s: Position, d: Depth) -> Position:
    """Delete moves of priority in (0, d], re-pointing via external justifiers.

    The result is a sequence of hide_game(g, d)."""
    keep = []
    for i in range(len(s)):
        pr = label(g, s.move(i)).pr
        keep.append(pr == 0 or pr > d)
    return project(s, keep)


# ---------------------------------------------------------------------------
# Legality
# ---------------------------------------------------------------------------

def is_jsequence(g: GameExpr, s: Position) -> bool:
    for i in range(len(s)):
        m, j = s.entry(i)
        if not is_move(g, m):
            return False
        if j is None:
            if not enabled_star(g, m):
                return False
        else:
            if not 0 <= j < i:
                return False
            if not enabled(g, s.move(j), m):
                return False
    return True


def _depths_to_check(g: GameExpr) -> List[Depth]:
    return list(range(mu(g) + 1)) + [OMEGA]


def is_legal(g: GameExpr, s: Position) -> bool:
    if not is_jsequence(g, s):
        return False
    labs = [label(g, s.move(i)) for i in range(len(s))]
    # alternation, starting with O
    for i in range(len(s)):
        want = "O" if i % 2 == 0 else "P"
        if labs[i].op != want:
            return False
    # IE-switch: a priority change only happens after an O-move
    for i in range(1, len(s)):
        if labs[i].pr != labs[i - 1].pr and labs[i - 1].op != "O":
            return False
    # generalized visibility
    for d in _depths_to_check(g):
        keep = [lab.pr == 0 or lab.pr > d for lab in labs]
        for i in range(len(s)):
            if not keep[i] or s.just(i) is None:
                continue
            ej = external_justifier(g, s, i, d)
            if ej is None:
                continue
            # view of the d-hidden prefix before position i
            survivors = [k for k in range(i) if keep[k]]
            sub = _project_with_map(s, survivors)
            hidden_g = hide_game(g, d)
            pos_of = {orig: k for k, orig in enumerate(survivors)}
            if labs[i].op == "P":
                view = p_view_indices(hidden_g, sub)
                if pos_of.get(ej) not in view:
                    return False
            else:
                # O-visibility is relative to the current thread: with several
                # initial occurrences in play, O's view tracks only the moves
                # hereditarily justified by the same initial occurrence.
                ej_sub = pos_of.get(ej)
                if ej_sub is None:
                    return False
                root = _thread_root(sub, ej_sub)
                thread = [k for k in range(len(sub)) if _thread_root(sub, k) == root]
                tsub = _project_with_map(sub, thread)
                tpos = {orig: k for k, orig in enumerate(thread)}
                view = o_view_indices(hidden_g, tsub)
                if tpos.get(ej_sub) not in view:
                    return False
    return True


def _thread_root(s: Position, k: int) -> int:
    """Index of the initial occurrence hereditarily justifying s[k]."""
    while True:
        j = s.just(k)
        if j is None:
            return k
        k = j


def _project_with_map(s: Position, survivors: List[int]) -> Position:
    keep = [False] * len(s)
    for i in survivors:
        keep[i] = True
    return project(s, keep)


def satisfies_dummy_discipline(g: GameExpr, s: Position) -> bool:
    """Every internal O-move is the dummy of its predecessor, pointing at the
    move preceding its predecessor's justifier chain as required."""
    for i in range(len(s)):
        m, j = s.entry(i)
        lab = label(g, m)
        if lab.op != "O" or lab.pr == 0:
            continue
        if i == 0:
            return False
        pm, pj = s.entry(i - 1)
        plab = label(g, pm)
        if plab.op != "P" or plab.pr == 0:
            return False
        if dummy(g, pm) != m:
            return False
        if pj is None:
            return False
        olab = label(g, s.move(pj))
        if olab.pr > 0:  # predecessor justified by an internal O-move o'
            if j != pj - 1:
                return False
        else:
            if j != i - 1:
                return False
    return True


# ---------------------------------------------------------------------------
# Position membership
# ---------------------------------------------------------------------------

def is_position(g: GameExpr, s: Position) -> bool:
    return is_legal(g, s) and satisfies_dummy_discipline(g, s) and _position_ok(g, s)


def _content_ok(g: GameExpr, s: Position) -> bool:
    """Projection-level membership: enabling plus constructor content.

    Component projections of a position need not alternate (the opponent may
    switch components), so sequence-level axioms (alternation, visibility,
    dummy discipline) are enforced only on the full position; projections are
    checked for justified-sequence structure and constructor state.
    """
    return is_jsequence(g, s) and _position_ok(g, s)


def _position_ok(g: GameExpr, s: Position) -> bool:
    """Constructor-specific closure conditions (legality already checked)."""
    n = len(s)
    if isinstance(g, Terminal):
        return n == 0
    if isinstance(g, Bool2):
        if n == 0:
            return True
        if s.move(0).inner.substance != Q_HAT:
            return False
        if n == 1:
            return True
        return n == 2 and s.move(1).inner.substance in (TT, FF) and s.just(1) == 0
    if isinstance(g, LazyNat):
        word = [s.move(i).inner.substance for i in range(n)]
        for i in range(1, n):
            if s.just(i) != i - 1:
                return False
        for i, c in enumerate(word):
            if i == 0:
                if c != Q_HAT:
                    return False
                continue
            prev = word[i - 1]
            if prev in (Q_HAT, Q):
                if c not in (YES, NO):
                    return False
            elif prev == YES:
                if c != Q:
                    return False
            else:  # prev == NO: play over
                return False
        return True
    if isinstance(g, TagGame):
        for i in range(1, n):
            if s.just(i) != i - 1:
                return False
        word = [s.move(i).inner.substance for i in range(n)]
        spelled = []
        for i, c in enumerate(word):
            if i % 2 == 0:
                if c != (QT_HAT if i == 0 else QT):
                    return False
            else:
                if c not in TAG_ANSWERS:
                    return False
                if c != "ok":
                    spelled.append(c)
                elif i != n - 1:
                    return False
        w = "".join(spelled)
        if n and word[-1] == "ok":
            from .tags import is_wellformed_outer

            return is_wellformed_outer(w)
        return is_wf_prefix(w)
    if isinstance(g, InstrAlphabet):
        if n == 0:
            return True
        if s.move(0).inner.substance != QI_HAT:
            return False
        if n == 1:
            return True
        return n == 2 and s.just(1) == 0
    if isinstance(g, (Tensor, Lolli)):
        sides = [s.move(i).inner.tags[-1] for i in range(n)]
        sl = project(s, [x == "W" for x in sides], lambda i, m: _side_move(m)[1])
        sr = project(s, [x == "E" for x in sides], lambda i, m: _side_move(m)[1])
        return _content_ok(g.l, sl) and _content_ok(g.r, sr)
    if isinstance(g, Product):
        sides = [s.move(i).inner.tags[-1] for i in range(n)]
        if "W" in sides and "E" in sides:
            return False
        sl = project(s, [x == "W" for x in sides], lambda i, m: _side_move(m)[1])
        sr = project(s, [x == "E" for x in sides], lambda i, m: _side_move(m)[1])
        return _content_ok(g.l, sl) and _content_ok(g.r, sr)
    if isinstance(g, PairingG):
        cats = [_pair_cat(s.move(i)) for i in range(n)]
        if "B" not in cats:
            sl = project(
                s,
                [c in ("C", "A", "S") for c in cats],
                lambda i, m: _pair_routes(g, m)[0][2],
            )
            if _content_ok(g.l, sl):
                return True
        if "A" not in cats:
            sr = project(
                s,
                [c in ("C", "B", "N") for c in cats],
                lambda i, m: _pair_routes(g, m)[-1][2],
            )
            if _content_ok(g.r, sr):
                return True
        return False
    if isinstance(g, Bang):
        threads: Dict[Tag, List[int]] = {}
        for i in range(n):
            sb = split_bang(s.move(i).outer)
            if sb is None:
                return False
            threads.setdefault(sb[0], []).append(i)
        for f, idxs in threads.items():
            keep = [False] * n
            for i in idxs:
                keep[i] = True
            sf = project(s, keep, lambda i, m: _strip_bang(m))
            if not _content_ok(g.g, sf):
                return False
        return _distinct_ede(threads.keys())
    if isinstance(g, Promotion):
        threads: Dict[Tag, List[int]] = {}
        proj: Dict[int, Move] = {}
        for i in range(n):
            t = _promo_thread(s.move(i))
            if t is None:
                return False
            threads.setdefault(t[0], []).append(i)
            proj[i] = t[1]
        for f, idxs in threads.items():
            keep = [False] * n
            for i in idxs:
                keep[i] = True
            sf = project(s, keep, lambda i, m: proj[i])
            if not _content_ok(g.g, sf):
                return False
        return _distinct_ede(threads.keys())
    if isinstance(g, Concat):
        cats = []
        for i in range(n):
            tags = s.move(i).inner.tags
            last = tags[-1] if tags else None
            cats.append(last if last in ("S", "N") else ("J" if last == "W" else "K"))
        sj = project(
            s,
            [c in ("J", "S") for c in cats],
            lambda i, m: _concat_route(g, m)[2],
        )
        sk = project(
            s,
            [c in ("K", "N") for c in cats],
            lambda i, m: _concat_route(g, m)[2],
        )
        if not (_content_ok(g.j, sj) and _content_ok(g.k, sk)):
            return False
        return _concat_middle_ok(g, s, cats)
    if isinstance(g, Curry):
        t = project(s, [True] * n, lambda i, m: _curry_peel(g, m))
        return _content_ok(g.g, t)
    if isinstance(g, Uncurry):
        t = project(s, [True] * n, lambda i, m: _uncurry_peel(g, m))
        return _content_ok(g.g, t)
    if isinstance(g, Hidden):
        return _hidden_position_ok(g, s)
    raise TypeError(g)


def _pair_cat(m: Move) -> str:
    tags = m.inner.tags
    last = tags[-1] if tags else None
    if last == "S" or last == "N":
        return last
    if last == "W":
        return "C"
    if len(tags) >= 2 and tags[-2] == "W":
        return "A"
    return "B"


def _distinct_ede(tags: Iterable[Tag]) -> bool:
    seen = []
    for t in tags:
        v = ede(t)
        if v in seen:
            return False
        seen.append(v)
    return True


def _concat_middle_ok(g: Concat, s: Position, cats: List[str]) -> bool:
    """The two middle-board copies must form a copycat-closed arrow position."""
    n = len(s)
    keep = [False] * n
    mids: Dict[int, Move] = {}
    for i in range(n):
        m = s.move(i)
        tags = m.inner.tags
        if cats[i] == "S" and len(tags) >= 2 and tags[-2] == "E":
            keep[i] = True
            mids[i] = Move(_retag(m.inner, 2, ("W",)), m.outer)
        elif cats[i] == "N" and len(tags) >= 2 and tags[-2] == "W":
            keep[i] = True
            mids[i] = Move(_retag(m.inner, 2, ("E",)), m.outer)
    bgame = Lolli(hide_game(g.wb, OMEGA), g.wb)
    bc = project(s, keep, lambda i, m: mids[i])
    if not _content_ok(bgame, bc):
        return False
    for k in range(0, len(bc) + 1, 2):
        pref = bc.prefix(k)
        sides = [pref.move(i).inner.tags[-1] for i in range(k)]
        w = project(pref, [x == "W" for x in sides], lambda i, m: _side_move(m)[1])
        e = project(pref, [x == "E" for x in sides], lambda i, m: _side_move(m)[1])
        if w != e:
            return False
    return True


def _hidden_position_ok(g: Hidden, s: Position, fuel: int = 200) -> bool:
    """Bounded search for a preimage position of g.g whose d-hiding is s."""
    found = _hidden_preimage(g, s, fuel)
    return found is not None


def _hidden_preimage(g: Hidden, s: Position, fuel: int = 200) -> Optional[Position]:
    budget = default_budget()
    base = g.g
    d = g.d

    def visible(m: Move) -> bool:
        lab = label_opt(base, m)
        return lab is not None and (lab.pr == 0 or lab.pr > d)

    # state: (next visible index, underlying position, map s-index -> t-index)
    def search(i: int, t: Position, vmap: Dict[int, int], fuel: int) -> Optional[Position]:
        if fuel <= 0:
            return None
        if i == len(s):
            return t
        m, j = s.entry(i)
        # option 1: play the next visible move now
        want_ext = vmap[j] if j is not None else None
        cands: List[Optional[int]] = []
        if j is None:
            if enabled_star(base, m):
                cands.append(None)
        else:
            for k in range(len(t)):
                if enabled(base, t.move(k), m):
                    # its external pointer must land on the required index
                    tj: Optional[int] = k
                    while tj is not None:
                        pr = label(base, t.move(tj)).pr
                        if pr == 0 or pr > d:
                            break
                        tj = t.just(tj)
                    if tj == want_ext:
                        cands.append(k)
        for k in cands:
            t2 = t.snoc(m, k)
            if is_legal(base, t2) and satisfies_dummy_discipline(base, t2):
                vmap2 = dict(vmap)
                vmap2[i] = len(t2) - 1
                r = search(i + 1, t2, vmap2, fuel - 1)
                if r is not None:
                    return r
        # option 2: insert a hidden (P, dummy-O) pair
        if len(t) % 2 == 0:
            return None  # hidden P-moves occur at odd (P) turns only
        opts = []
        for k in range(len(t)):
            for x in successors(base, t.move(k), budget):
                lab = label(base, x)
                if lab.op == "P" and 0 < lab.pr <= d:
                    opts.append((x, k))
        seen = set()
        for x, k in opts:
            if (x, k) in seen:
                continue
            seen.add((x, k))
            t2 = t.snoc(x, k)
            if not (is_legal(base, t2) and satisfies_dummy_discipline(base, t2)):
                continue
            dm = dummy(base, x)
            if dm is None:
                continue
            olab = label(base, t2.move(k))
            dj = (k - 1) if olab.pr > 0 else (len(t2) - 1)
            t3 = t2.snoc(dm, dj)
            if not (is_legal(base, t3) and satisfies_dummy_discipline(base, t3)):
                continue
            r = search(i, t3, vmap, fuel - 1)
            if r is not None:
                return r
        return None

    if not (is_legal(g, s) and satisfies_dummy_discipline(g, s)):
        return None
    return search(0, Position(), {}, fuel)


def is_wf_prefix(w: str) -> bool:
    """Whether w extends to a well-formed outer-tag word."""
    depth = 0
    prev = ""
    for c in w:
        if c == "[":
            if prev not in ("", "#", "["):
                return False
            depth += 1
        elif c == "]":
            if depth == 0:
                return False
            depth -= 1
        elif c == "l":
            if prev == "]":
                return False
        prev = c
    return True


# ---------------------------------------------------------------------------
# Trace serialization
# ---------------------------------------------------------------------------

def move_record(g: GameExpr, s: Position, i: int) -> dict:
    m, j = s.entry(i)
    lab = label(g, m)
    return {
        "index": i,
        "inner": {"substance": m.inner.substance, "tags": list(m.inner.tags)},
        "outer": tag_str(m.outer),
        "op": lab.op,
        "qa": lab.qa,
        "priority": lab.pr if lab.pr != OMEGA else "omega",
        "justifier": j,
    }
