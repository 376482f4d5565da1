"""Reduced words in a free group, boundary points of its Cayley tree and
bi-infinite geodesics through it.

Letters are generator/inverse symbols, words are freely reduced tuples of
letters, and boundary points are eventually periodic infinite reduced words
kept in a canonical (shortest preperiod, primitive period) form so that
equality is decidable by comparing fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import (
    EmptyWordError,
    EndpointProjectionError,
    EqualEndpointsError,
    OriginOffGeodesicError,
)

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class Letter:
    """One generator (sign +1) or inverse generator (sign -1), 1-based index."""

    index: int
    sign: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"letter index must be >= 1, got {self.index}")
        if self.sign not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {self.sign}")

    def inverse(self) -> "Letter":
        return Letter(self.index, -self.sign)

    # Sort generators before their inverses: a < A < b < B ...
    def sort_key(self) -> tuple[int, int]:
        return (self.index, 0 if self.sign == 1 else 1)

    def __str__(self) -> str:
        if self.index > len(_ALPHABET):
            return f"x{self.index}" + ("" if self.sign == 1 else "^-1")
        ch = _ALPHABET[self.index - 1]
        return ch if self.sign == 1 else ch.upper()


def generator(index: int) -> Letter:
    """The positive generator with the given 1-based index."""
    return Letter(index, 1)


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word; the constructor rejects adjacent cancellations."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        for u, v in zip(self.letters, self.letters[1:]):
            if u == v.inverse():
                raise ValueError(f"word is not freely reduced at {u}{v}")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, i):
        got = self.letters[i]
        return ReducedWord(got) if isinstance(i, slice) else got

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return concat(self, other)

    def __str__(self) -> str:
        return word_to_string(self)

    def is_empty(self) -> bool:
        return not self.letters

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(l.inverse() for l in reversed(self.letters)))

    def prefix(self, m: int) -> "ReducedWord":
        if not 0 <= m <= len(self.letters):
            raise ValueError(f"prefix length {m} out of range 0..{len(self.letters)}")
        return ReducedWord(self.letters[:m])

    def max_index(self) -> int:
        """Largest generator index used (0 for the empty word)."""
        return max((l.index for l in self.letters), default=0)

    def sort_key(self) -> tuple:
        """Total order: by length, then letterwise generator-before-inverse."""
        return (len(self.letters), tuple(l.sort_key() for l in self.letters))

    def is_cyclically_reduced(self) -> bool:
        if len(self.letters) < 2:
            return True
        return self.letters[0] != self.letters[-1].inverse()


EMPTY_WORD = ReducedWord()


def reduce(letters: Iterable[Letter]) -> ReducedWord:
    """Freely reduce an arbitrary letter sequence (stack cancellation)."""
    stack: list[Letter] = []
    for l in letters:
        if stack and stack[-1] == l.inverse():
            stack.pop()
        else:
            stack.append(l)
    return ReducedWord(tuple(stack))


def concat(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    """Product u*v in the free group, freely reduced."""
    i = 0
    limit = min(len(u), len(v))
    while i < limit and u.letters[len(u) - 1 - i] == v.letters[i].inverse():
        i += 1
    return ReducedWord(u.letters[: len(u) - i] + v.letters[i:])


def invert(w: ReducedWord) -> ReducedWord:
    return w.inverse()


def cyclic_reduce(w: ReducedWord) -> tuple[ReducedWord, ReducedWord]:
    """Split w = c * core * c^-1 with core cyclically reduced; returns (core, c)."""
    if w.is_empty():
        raise EmptyWordError("cannot cyclically reduce the empty word")
    letters = w.letters
    i = 0
    while len(letters) - 2 * i >= 2 and letters[i] == letters[-1 - i].inverse():
        i += 1
    return ReducedWord(letters[i : len(letters) - i]), ReducedWord(letters[:i])


def rotate(w: ReducedWord, shift: int) -> ReducedWord:
    """Cyclic rotation of a cyclically reduced word by `shift` positions."""
    if w.is_empty():
        raise EmptyWordError("cannot rotate the empty word")
    if not w.is_cyclically_reduced():
        raise ValueError("rotation requires a cyclically reduced word")
    s = shift % len(w)
    return ReducedWord(w.letters[s:] + w.letters[:s])


def word_to_string(w: ReducedWord) -> str:
    """ASCII form: lowercase generators, uppercase inverses (rank <= 26)."""
    if w.max_index() > len(_ALPHABET):
        raise ValueError("ASCII form only supports generator indices up to 26")
    return "".join(str(l) for l in w.letters)


def parse_letter(ch: str) -> Letter:
    low = ch.lower()
    if len(ch) != 1 or low not in _ALPHABET:
        raise ValueError(f"invalid letter character {ch!r}")
    return Letter(_ALPHABET.index(low) + 1, 1 if ch.islower() else -1)


def parse_word(s: str) -> ReducedWord:
    """Parse an ASCII word; raises ValueError if not freely reduced."""
    return ReducedWord(tuple(parse_letter(ch) for ch in s.strip()))


def _primitive_root(letters: tuple[Letter, ...]) -> tuple[Letter, ...]:
    """Shortest u with letters = u^m (as a plain sequence)."""
    n = len(letters)
    for p in range(1, n + 1):
        if n % p == 0 and letters == letters[:p] * (n // p):
            return letters[:p]
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class BoundaryPoint:
    """Eventually periodic point of the tree boundary, x = preperiod.(period)^inf.

    Canonical form is enforced on construction: the period is primitive and
    the preperiod is shortest (no trailing letter of the preperiod equals the
    last letter of the period).  Two points are equal as boundary points iff
    their canonical fields are equal, so dataclass equality/hash is exact.
    """

    preperiod: ReducedWord
    period: ReducedWord

    def __post_init__(self):
        if self.period.is_empty():
            raise EmptyWordError("boundary point needs a nonempty period")
        pre = list(self.preperiod.letters)
        per = list(_primitive_root(self.period.letters))
        while pre and pre[-1] == per[-1]:
            pre.pop()
            per = [per[-1]] + per[:-1]
        # Junction checks: the spelled infinite word must be reduced.
        if pre and pre[-1] == per[0].inverse():
            raise ValueError("preperiod/period junction cancels")
        if per[0] == per[-1].inverse():
            raise ValueError("period is not cyclically reduced")
        object.__setattr__(self, "preperiod", ReducedWord(tuple(pre)))
        object.__setattr__(self, "period", ReducedWord(tuple(per)))

    def letter_at(self, i: int) -> Letter:
        """Letter i (0-based) of the spelled infinite word."""
        if i < 0:
            raise ValueError("boundary point letters are indexed from 0")
        npre = len(self.preperiod)
        if i < npre:
            return self.preperiod.letters[i]
        return self.period.letters[(i - npre) % len(self.period)]

    def prefix(self, m: int) -> ReducedWord:
        """The length-m vertex on the ray from the identity to this point."""
        return ReducedWord(tuple(self.letter_at(i) for i in range(m)))

    def __str__(self) -> str:
        return boundary_point_to_string(self)


def boundary_point_to_string(x: BoundaryPoint) -> str:
    """Serialized form "prefix|(period)"; empty prefix gives "(period)"."""
    per = f"({word_to_string(x.period)})"
    return per if x.preperiod.is_empty() else f"{word_to_string(x.preperiod)}|{per}"


def parse_boundary_point(s: str) -> BoundaryPoint:
    """Parse "prefix|(period)" or "(period)"; the "prefix|" part is optional."""
    s = s.strip()
    head, sep, tail = s.partition("|")
    if not sep:
        head, tail = "", s
    if not (tail.startswith("(") and tail.endswith(")")):
        raise ValueError(f"period must be parenthesized in {s!r}")
    return BoundaryPoint(parse_word(head), parse_word(tail[1:-1]))


def periodic_point(w: ReducedWord) -> BoundaryPoint:
    """The attracting fixed point w^inf of a cyclically reduced word."""
    if not w.is_cyclically_reduced():
        raise ValueError("periodic point needs a cyclically reduced word")
    return BoundaryPoint(EMPTY_WORD, w)


def ray_point(preperiod: ReducedWord, period: ReducedWord) -> BoundaryPoint:
    """Boundary point preperiod.(period)^inf; arguments need not be canonical."""
    return BoundaryPoint(preperiod, period)


def translate(g: ReducedWord, x: BoundaryPoint) -> BoundaryPoint:
    """The boundary action g . x: spell g followed by x and cancel."""
    depth = 0
    rev = g.inverse()  # rev[j] cancels x's letter j when they match
    while depth < len(g) and x.letter_at(depth) == rev.letters[depth]:
        depth += 1
    head = g.letters[: len(g) - depth]
    npre = len(x.preperiod)
    if depth <= npre:
        pre = head + x.preperiod.letters[depth:]
        per = x.period
    else:
        pre = head
        per = rotate(x.period, depth - npre)
    return BoundaryPoint(ReducedWord(pre), per)


def gromov_product(x: BoundaryPoint, y: BoundaryPoint) -> float:
    """Length of the common prefix of x and y from the identity (inf if x == y)."""
    if x == y:
        return math.inf
    bound = (
        max(len(x.preperiod), len(y.preperiod))
        + math.lcm(len(x.period), len(y.period))
        + 1
    )
    for i in range(bound):
        if x.letter_at(i) != y.letter_at(i):
            return i
    raise AssertionError("distinct canonical points must differ within the bound")


def gromov_product_at(base: ReducedWord, x: BoundaryPoint, y: BoundaryPoint) -> float:
    """Gromov product of x and y seen from the vertex `base`."""
    g = base.inverse()
    return gromov_product(translate(g, x), translate(g, y))


def visual_distance(x: BoundaryPoint, y: BoundaryPoint, kappa: float = 1.0) -> float:
    """Visual metric exp(-kappa * (x|y)) on the boundary; 0 iff x == y."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    gp = gromov_product(x, y)
    return 0.0 if math.isinf(gp) else math.exp(-kappa * gp)


@dataclass(frozen=True)
class BiInfiniteGeodesic:
    """Parametrized geodesic line with distinct boundary endpoints.

    The branch vertex (longest common prefix of the endpoint rays) sits at
    parameter -origin_offset; `vertex(t)` walks from it toward `forward` on
    the positive side and toward `backward` on the negative side, so that
    `vertex(0)` is the marked origin of the line.
    """

    forward: BoundaryPoint
    backward: BoundaryPoint
    origin_offset: int = 0
    _branch: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        if self.forward == self.backward:
            raise EqualEndpointsError("geodesic endpoints must be distinct")
        object.__setattr__(
            self, "_branch", int(gromov_product(self.forward, self.backward))
        )

    def vertex(self, t: int) -> ReducedWord:
        """Group element at parameter t (vertex of the Cayley tree)."""
        s = self.origin_offset + t
        if s >= 0:
            return self.forward.prefix(self._branch + s)
        return self.backward.prefix(self._branch - s)

    def step_letter(self, t: int) -> Letter:
        """Letter labelling the edge vertex(t) -> vertex(t + 1)."""
        s = self.origin_offset + t
        if s >= 0:
            return self.forward.letter_at(self._branch + s)
        return self.backward.letter_at(self._branch - s - 1).inverse()

    def reparametrize(self, shift: int) -> "BiInfiniteGeodesic":
        """Move the origin: the new vertex(0) is the old vertex(shift)."""
        return BiInfiniteGeodesic(
            self.forward, self.backward, self.origin_offset + shift
        )


def geodesic_through(
    x: BoundaryPoint, y: BoundaryPoint, origin: ReducedWord = EMPTY_WORD
) -> BiInfiniteGeodesic:
    """The geodesic from y to x passing through `origin` as its marked l(0)."""
    if x == y:
        raise EqualEndpointsError("geodesic endpoints must be distinct")
    c = int(gromov_product(x, y))
    n = len(origin)
    if n >= c and origin == x.prefix(n):
        offset = n - c
    elif n >= c and origin == y.prefix(n):
        offset = -(n - c)
    else:
        raise OriginOffGeodesicError(
            f"vertex {word_to_string(origin)!r} is not on the geodesic"
        )
    return BiInfiniteGeodesic(x, y, offset)


def project_to_geodesic(
    line: BiInfiniteGeodesic, x: BoundaryPoint
) -> tuple[int, ReducedWord]:
    """Nearest-point projection of a boundary point to the geodesic.

    Returns (t, vertex) with t = (forward|x) - (backward|x), both products
    based at the marked origin l(0).  The endpoints themselves project to
    infinity and are rejected.
    """
    if x == line.forward or x == line.backward:
        raise EndpointProjectionError("cannot project an endpoint of the geodesic")
    base = line.vertex(0)
    t = int(
        gromov_product_at(base, line.forward, x)
        - gromov_product_at(base, line.backward, x)
    )
    return t, line.vertex(t)
