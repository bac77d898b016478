"""Slopes on a punctured torus, Farey adjacency, and geodesic walks.

A slope is a reduced fraction num/den in Q∪{1/0}; two slopes span an edge of
the Farey triangulation exactly when their determinant is ±1.  Layered solid
tori are driven by a walk through Farey triangles from the triangle of the
current boundary torus to a triangle containing the target filling slope.
The walk in the (tree-like) dual graph is found by interval descent: at each
triangle exactly one edge separates the triangle from the target, and we step
across it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterator, Optional


@dataclass(frozen=True, order=False)
class Slope:
    """A reduced slope num/den with den >= 0; the infinite slope is (1, 0)."""

    num: int
    den: int

    def __post_init__(self) -> None:
        num, den = self.num, self.den
        if num == 0 and den == 0:
            raise ValueError("slope (0, 0) is not allowed")
        g = gcd(abs(num), abs(den))
        num, den = num // g, den // g
        if den < 0:
            num, den = -num, -den
        if den == 0:
            num = 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def is_infinite(self) -> bool:
        return self.den == 0

    def value(self) -> Optional[Fraction]:
        """The slope as a Fraction, or None for 1/0."""
        if self.is_infinite:
            return None
        return Fraction(self.num, self.den)

    def __repr__(self) -> str:
        return f"{self.num}/{self.den}"


INFINITY = Slope(1, 0)


def det(a: Slope, b: Slope) -> int:
    """Determinant |a.num  b.num; a.den  b.den| of two slopes."""
    return a.num * b.den - a.den * b.num


def unimodular(a: Slope, b: Slope) -> bool:
    """True iff the slopes span an edge of the Farey triangulation."""
    return abs(det(a, b)) == 1


def mediant(a: Slope, b: Slope) -> Slope:
    """Farey mediant (sum of homogeneous coordinates)."""
    return Slope(a.num + b.num, a.den + b.den)


def _sub(a: Slope, b: Slope) -> Optional[Slope]:
    """Difference of homogeneous coordinates, or None if it degenerates."""
    num, den = a.num - b.num, a.den - b.den
    if num == 0 and den == 0:
        return None
    return Slope(num, den)


def _slope_sort_key(s: Slope) -> tuple:
    # Finite slopes by value, the infinite slope last.
    if s.is_infinite:
        return (1, 0)
    return (0, Fraction(s.num, s.den))


@dataclass(frozen=True)
class FareyTriangle:
    """Three pairwise-unimodular slopes, stored in canonical sorted order."""

    slopes: tuple[Slope, Slope, Slope]

    def __post_init__(self) -> None:
        if len(set(self.slopes)) != 3:
            raise ValueError(f"triangle needs three distinct slopes: {self.slopes}")
        ordered = tuple(sorted(self.slopes, key=_slope_sort_key))
        for i in range(3):
            for j in range(i + 1, 3):
                if not unimodular(ordered[i], ordered[j]):
                    raise ValueError(
                        f"slopes {ordered[i]} and {ordered[j]} are not Farey-adjacent"
                    )
        object.__setattr__(self, "slopes", ordered)

    def __contains__(self, s: Slope) -> bool:
        return s in self.slopes

    def edges(self) -> Iterator[tuple[Slope, Slope]]:
        a, b, c = self.slopes
        yield (a, b)
        yield (a, c)
        yield (b, c)

    def third(self, edge: tuple[Slope, Slope]) -> Slope:
        """The vertex of the triangle not on the given edge."""
        rest = [s for s in self.slopes if s not in edge]
        if len(rest) != 1 or not all(e in self.slopes for e in edge):
            raise ValueError(f"{edge} is not an edge of {self}")
        return rest[0]

    def __repr__(self) -> str:
        return "(" + ", ".join(map(repr, self.slopes)) + ")"


def triangle(*slopes: tuple[int, int]) -> FareyTriangle:
    """Convenience constructor from (num, den) pairs."""
    return FareyTriangle(tuple(Slope(n, d) for n, d in slopes))


STANDARD_START = triangle((1, 0), (-1, 1), (0, 1))


def neighbor_step(current: FareyTriangle, keep: tuple[Slope, Slope]) -> FareyTriangle:
    """The unique other Farey triangle across the edge `keep`.

    The dropped vertex is replaced by its reflection: the two triangles on an
    edge {a, b} have third vertices a+b and a-b in homogeneous coordinates.
    """
    a, b = keep
    dropped = current.third(keep)
    candidates = [mediant(a, b), _sub(a, b), _sub(b, a)]
    others = {c for c in candidates if c is not None and c != dropped}
    # Of the (at most two) distinct non-dropped candidates, exactly one forms
    # a Farey triangle with the edge; a+b and a-b can only coincide with
    # dropped or each other in degenerate cases excluded by unimodularity.
    for c in others:
        if unimodular(a, c) and unimodular(b, c):
            return FareyTriangle((a, b, c))
    raise ValueError(f"no neighbor across {keep} of {current}")


def _orient(x: Slope, y: Slope, z: Slope) -> int:
    """Cyclic orientation of three distinct points of Q∪{1/0} on the circle."""
    s = det(x, y) * det(y, z) * det(z, x)
    if s > 0:
        return 1
    if s < 0:
        return -1
    return 0


@dataclass(frozen=True)
class WalkStep:
    """One step of a Farey walk: drop `covered`, keep `kept`, add `added`."""

    covered: Slope
    added: Slope
    kept: tuple[Slope, Slope]


@dataclass
class FareyWalk:
    """A geodesic path of Farey triangles; triangles[0] is the start."""

    triangles: list[FareyTriangle]
    steps: list[WalkStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def start(self) -> FareyTriangle:
        return self.triangles[0]

    @property
    def end(self) -> FareyTriangle:
        return self.triangles[-1]


def walk_to_slope(start: FareyTriangle, target: Slope) -> FareyWalk:
    """Geodesic walk from `start` to the nearest triangle containing `target`.

    Interval descent: while the target is not a vertex of the current
    triangle, it lies beyond exactly one edge {u, v} (on the opposite side
    from the third vertex w, tested by the circular orientation of boundary
    points); step across that edge.  The dual graph is a tree, so the
    resulting non-backtracking path is the unique geodesic.
    """
    triangles = [start]
    steps: list[WalkStep] = []
    current = start
    while target not in current:
        crossing = None
        for u, v in current.edges():
            w = current.third((u, v))
            side_t = _orient(u, target, v)
            side_w = _orient(u, w, v)
            if side_t != 0 and side_t == -side_w:
                if crossing is not None:
                    raise AssertionError(
                        f"two separating edges at {current} toward {target}"
                    )
                crossing = (u, v, w)
        if crossing is None:
            raise AssertionError(f"no separating edge at {current} toward {target}")
        u, v, w = crossing
        nxt = neighbor_step(current, (u, v))
        added = nxt.third((u, v))
        steps.append(WalkStep(covered=w, added=added, kept=(u, v)))
        triangles.append(nxt)
        current = nxt
    return FareyWalk(triangles=triangles, steps=steps)
