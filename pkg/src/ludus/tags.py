"""Outer/inner tags, their codecs, and the fixed sequence-pairing bijection.

Outer tags are words over the four-symbol alphabet rendered as ``l``, ``#``,
``[``, ``]``.  They are stored as interned immutable trees (leaf / separator /
bracket nodes) so that wrapping a tag in one more bracket layer is O(1) and
tag equality is pointer equality; rendering to a string is a display concern.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Iterable, NamedTuple, Optional, Tuple, Union

OUTER_ALPHABET = "l#[]"
INNER_TAGS = ("W", "E", "N", "S")


class MalformedTag(ValueError):
    """Raised when a string is not a well-formed outer tag."""


# ---------------------------------------------------------------------------
# Effective tags (bracket-free): sequences over {l, #}
# ---------------------------------------------------------------------------

def encode_nat_seq(js: Iterable[int]) -> str:
    """en: (j1, ..., jl) -> l^j1 # l^j2 # ... # l^jl (empty input -> empty)."""
    js = tuple(js)
    if any(j < 0 for j in js):
        raise ValueError("naturals only")
    return "#".join("l" * j for j in js)


def decode_effective(gamma: str) -> Tuple[int, ...]:
    """de: split on '#', count 'l' per block; the empty tag maps to ()."""
    if gamma == "":
        return ()
    blocks = gamma.split("#")
    for b in blocks:
        if b.strip("l") != "":
            raise MalformedTag(f"not an effective tag: {gamma!r}")
    return tuple(len(b) for b in blocks)


# ---------------------------------------------------------------------------
# The fixed bijection between finite natural sequences and naturals
# ---------------------------------------------------------------------------

def cantor(x: int, y: int) -> int:
    return (x + y) * (x + y + 1) // 2 + x


def uncantor(z: int) -> Tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    t = w * (w + 1) // 2
    x = z - t
    return x, w - x


def pairing_wp(js: Iterable[int]) -> int:
    """wp(()) = 0;  wp(s . a) = cantor(wp(s), a) + 1."""
    n = 0
    for a in js:
        if a < 0:
            raise ValueError("naturals only")
        n = cantor(n, a) + 1
    return n


def unpair_wp(n: int) -> Tuple[int, ...]:
    out = []
    while n > 0:
        n, a = uncantor(n - 1)
        out.append(a)
    return tuple(reversed(out))


# Exact naturals that may exceed any feasible bit-length: values below
# _NV_THRESHOLD are plain ints; larger ones stay as symbolic pair nodes.
# Invariant: every CPair node denotes a value >= _NV_THRESHOLD, so an int
# never equals a CPair and equality stays exact and cheap.

_NV_THRESHOLD = 1 << 64


@dataclass(frozen=True)
class CPair:
    """Symbolic cantor(a, b) + 1 for values too large to materialize."""

    a: "NatVal"
    b: "NatVal"


NatVal = Union[int, CPair]


def nv_pair(x: NatVal, y: NatVal) -> NatVal:
    if isinstance(x, int) and isinstance(y, int):
        v = cantor(x, y) + 1
        if v < _NV_THRESHOLD:
            return v
    return CPair(x, y)


def nv_wp(seq: Iterable[NatVal]) -> NatVal:
    n: NatVal = 0
    for a in seq:
        n = nv_pair(n, a)
    return n


def nv_force(v: NatVal) -> int:
    if isinstance(v, int):
        return v
    return cantor(nv_force(v.a), nv_force(v.b)) + 1


# ---------------------------------------------------------------------------
# Outer tags as interned trees
# ---------------------------------------------------------------------------

_LEAF, _SEP, _BOX = "leaf", "sep", "box"


class Tag:
    """Interned outer-tag node; equality is identity."""

    __slots__ = ("kind", "a", "b", "_str", "_ede")

    def __init__(self, kind: str, a, b):
        self.kind = kind
        self.a = a
        self.b = b
        self._str: Optional[str] = None
        self._ede: Optional[Tuple[NatVal, ...]] = None

    def __repr__(self) -> str:
        return f"Tag({tag_str(self)!r})"


_intern: dict = {}


def leaf(sym: str) -> Tag:
    if sym.strip("l#") != "":
        raise MalformedTag(f"leaf over {{l,#}} only: {sym!r}")
    key = (_LEAF, sym)
    t = _intern.get(key)
    if t is None:
        t = _intern[key] = Tag(_LEAF, sym, None)
    return t


def _raw_sep(x: Tag, y: Tag) -> Tag:
    key = (_SEP, id(x), id(y))
    t = _intern.get(key)
    if t is None:
        t = _intern[key] = Tag(_SEP, x, y)
    return t


def sep(x: Tag, y: Tag) -> Tag:
    """Join two tags with a '#' connective, canonicalizing the tree.

    The canonical form is a right-nested chain of leaf/bracket items with no
    two adjacent leaves, so equal words always yield the identical node and
    tag equality is pointer equality.
    """
    while x.kind == _SEP:  # re-associate to the right
        x, y = x.a, sep(x.b, y)
    if x.kind == _LEAF:
        if y.kind == _LEAF:
            return leaf(x.a + "#" + y.a)
        if y.kind == _SEP and y.a.kind == _LEAF:
            return _raw_sep(leaf(x.a + "#" + y.a.a), y.b)
    return _raw_sep(x, y)


def box(x: Tag) -> Tag:
    key = (_BOX, id(x), None)
    t = _intern.get(key)
    if t is None:
        t = _intern[key] = Tag(_BOX, x, None)
    return t


EMPTY_TAG = leaf("")


def bang_tag(f: Tag, e: Tag) -> Tag:
    """The thread-tagged outer tag  [f]#e."""
    return sep(box(f), e)


def split_bang(t: Tag) -> Optional[Tuple[Tag, Tag]]:
    """Inverse of bang_tag on tags of that shape, else None."""
    if t.kind == _SEP and t.a.kind == _BOX:
        return t.a.a, t.b
    return None


def tag_str(t: Tag) -> str:
    """Flatten a tag tree to its word (iterative; trees may be very deep)."""
    if t._str is not None:
        return t._str
    out: list = []
    stack: list = [t]
    while stack:
        n = stack.pop()
        if isinstance(n, str):
            out.append(n)
        elif n._str is not None:
            out.append(n._str)
        elif n.kind == _LEAF:
            out.append(n.a)
        elif n.kind == _SEP:
            stack.append(n.b)
            stack.append("#")
            stack.append(n.a)
        else:  # box
            stack.append("]")
            stack.append(n.a)
            stack.append("[")
    s = "".join(out)
    t._str = s
    return s


def _top_level_groups(s: str):
    """Spans (open, close) of top-level bracket groups; raises if unbalanced."""
    groups = []
    depth = 0
    start = -1
    for i, c in enumerate(s):
        if c == "[":
            if depth == 0:
                start = i
            depth += 1
        elif c == "]":
            depth -= 1
            if depth < 0:
                raise MalformedTag(f"unbalanced brackets: {s!r}")
            if depth == 0:
                groups.append((start, i))
    if depth != 0:
        raise MalformedTag(f"unbalanced brackets: {s!r}")
    return groups


def parse_outer(s: str) -> Tag:
    """Parse the canonical tree of a well-formed outer tag word.

    Bracket-free words are single leaves.  Otherwise every top-level bracket
    group is an atom joined to its neighbours by exactly one '#' connective on
    each side; the remaining bracket-free chunks are leaves.
    """
    if s.strip(OUTER_ALPHABET) != "":
        raise MalformedTag(f"bad symbol in {s!r}")
    if "[" not in s and "]" not in s:
        return leaf(s)
    groups = _top_level_groups(s)
    items: list = []
    pos = 0
    for gi, (a, b) in enumerate(groups):
        pre = s[pos:a]
        if gi == 0:
            if pre:
                if not pre.endswith("#"):
                    raise MalformedTag(f"missing connective before bracket: {s!r}")
                items.append(leaf(pre[:-1]))
        else:
            if not pre.startswith("#"):
                raise MalformedTag(f"adjacent bracket groups: {s!r}")
            mid = pre[1:]
            if mid:
                if not mid.endswith("#"):
                    raise MalformedTag(f"missing connective before bracket: {s!r}")
                items.append(leaf(mid[:-1]))
        items.append(box(parse_outer(s[a + 1 : b])))
        pos = b + 1
    post = s[pos:]
    if post:
        if not post.startswith("#"):
            raise MalformedTag(f"missing connective after bracket: {s!r}")
        items.append(leaf(post[1:]))
    t = items[-1]
    for it in reversed(items[:-1]):
        t = sep(it, t)
    return t


def is_wellformed_outer(s: str) -> bool:
    try:
        parse_outer(s)
        return True
    except MalformedTag:
        return False


def ede(t: Tag) -> Tuple[NatVal, ...]:
    """Extended decoding of a tag tree to a sequence of exact naturals."""
    if t._ede is not None:
        return t._ede
    # Iterative post-order to survive very deep trees.
    stack = [(t, False)]
    while stack:
        n, ready = stack.pop()
        if n._ede is not None:
            continue
        if n.kind == _LEAF:
            n._ede = tuple(decode_effective(n.a))
        elif not ready:
            stack.append((n, True))
            if n.kind == _SEP:
                stack.append((n.b, False))
                stack.append((n.a, False))
            else:
                stack.append((n.a, False))
        else:
            if n.kind == _SEP:
                n._ede = n.a._ede + n.b._ede
            else:  # box
                n._ede = (nv_wp(n.a._ede),)
    return t._ede


def ext_decode(e: Union[str, Tag]) -> Tuple[int, ...]:
    """ede as a plain natural sequence (canonical parse; see parse_outer)."""
    t = parse_outer(e) if isinstance(e, str) else e
    return tuple(nv_force(v) for v in ede(t))


# ---------------------------------------------------------------------------
# Inner elements and moves
# ---------------------------------------------------------------------------

class InnerElement(NamedTuple):
    substance: str
    tags: Tuple[str, ...]  # innermost first; each one of W/E/N/S

    def __repr__(self) -> str:
        return self.substance + ("_" + "".join(self.tags) if self.tags else "")


class Move(NamedTuple):
    inner: InnerElement
    outer: Tag

    def __repr__(self) -> str:
        e = tag_str(self.outer)
        return f"[{self.inner!r}]" + (f"_{e}" if e else "")


def mk_move(substance: str, itags: Iterable[str] = (), outer: Tag = EMPTY_TAG) -> Move:
    itags = tuple(itags)
    for t in itags:
        if t not in INNER_TAGS:
            raise ValueError(f"bad inner tag {t!r}")
    return Move(InnerElement(substance, itags), outer)


def push_itag(m: Move, t: str) -> Move:
    """Append an outermost inner tag."""
    return Move(InnerElement(m.inner.substance, m.inner.tags + (t,)), m.outer)


def pop_itag(m: Move) -> Tuple[Move, str]:
    """Split off the outermost inner tag."""
    tags = m.inner.tags
    if not tags:
        raise ValueError(f"no inner tags on {m!r}")
    return Move(InnerElement(m.inner.substance, tags[:-1]), m.outer), tags[-1]
