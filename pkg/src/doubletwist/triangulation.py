"""Ideal triangulations: tetrahedra, face gluings, edge/vertex classes, I/O.

Conventions
-----------
* Vertices of a tetrahedron are 0,1,2,3.  Face ``f`` is the one opposite
  vertex ``f`` (so face 3 has vertices {0,1,2}).
* A gluing of face ``f`` of tet ``s`` is ``(t, p)`` with ``p`` a permutation
  of {0,1,2,3}: vertex ``v`` of ``s`` is identified with vertex ``p(v)`` of
  ``t``, and face ``f`` lands on face ``p(f)`` of ``t``.  The reverse gluing
  stored on ``(t, p(f))`` must be ``(s, p^{-1})``.
* Oriented triangulations have all gluing permutations odd.
* Edge letters: the three pairs of opposite edges are
  a = {01, 23},  b = {02, 13},  c = {03, 12};
  at every ideal vertex the three incident edge letters read (a, b, c)
  anticlockwise in the cusp cross-section.
* Table cells: ``"t(xyz)"`` in the column of face {i,j,k} (ascending) means
  that face of the row tet maps to vertices (x, y, z) of tet ``t`` in order.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

# ---------------------------------------------------------------------------
# permutations

_S4 = tuple(
    (a, b, c, d)
    for a in range(4)
    for b in range(4)
    for c in range(4)
    for d in range(4)
    if len({a, b, c, d}) == 4
)


@dataclass(frozen=True)
class Perm4:
    """A permutation of {0,1,2,3} given by its tuple of images."""

    images: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if tuple(sorted(self.images)) != (0, 1, 2, 3):
            raise ValueError(f"not a permutation of 0..3: {self.images}")

    def __call__(self, i: int) -> int:
        return self.images[i]

    def compose(self, other: "Perm4") -> "Perm4":
        """self after other: (self∘other)(i) = self(other(i))."""
        return Perm4(tuple(self.images[other.images[i]] for i in range(4)))

    def inverse(self) -> "Perm4":
        inv = [0] * 4
        for i, img in enumerate(self.images):
            inv[img] = i
        return Perm4(tuple(inv))

    @property
    def is_even(self) -> bool:
        inversions = sum(
            1
            for i in range(4)
            for j in range(i + 1, 4)
            if self.images[i] > self.images[j]
        )
        return inversions % 2 == 0

    def __repr__(self) -> str:
        return "".join(map(str, self.images))


IDENTITY = Perm4((0, 1, 2, 3))

# ---------------------------------------------------------------------------
# faces, edges, letters

FACE_VERTICES: tuple[tuple[int, int, int], ...] = tuple(
    tuple(v for v in range(4) if v != f) for f in range(4)
)
# Table column order: faces (012), (013), (023), (123) = opposite 3, 2, 1, 0.
TABLE_FACE_ORDER = (3, 2, 1, 0)

EDGE_PAIRS: tuple[tuple[int, int], ...] = (
    (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3),
)

LETTERS = ("a", "b", "c")

_EDGE_LETTER = {
    frozenset({0, 1}): "a", frozenset({2, 3}): "a",
    frozenset({0, 2}): "b", frozenset({1, 3}): "b",
    frozenset({0, 3}): "c", frozenset({1, 2}): "c",
}


def edge_letter(pair: tuple[int, int]) -> str:
    """The a/b/c dihedral-angle letter of a tetrahedron edge."""
    return _EDGE_LETTER[frozenset(pair)]


# Anticlockwise order of the germs (edges) at each vertex, chosen so the
# letters read (a, b, c) cyclically; (v, *VERTEX_GERMS[v]) is always an even
# permutation of (0,1,2,3).
VERTEX_GERMS: tuple[tuple[int, int, int], ...] = (
    (1, 2, 3),
    (0, 3, 2),
    (0, 1, 3),
    (0, 2, 1),
)


Gluing = tuple[int, Perm4]


class TriangulationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# table cells

_CELL_RE = re.compile(r"^(\d+)\(([0-3])([0-3])([0-3])\)$")


def format_cell(face: int, gluing: Optional[Gluing]) -> str:
    if gluing is None:
        return "-"
    target, perm = gluing
    imgs = "".join(str(perm(v)) for v in FACE_VERTICES[face])
    return f"{target}({imgs})"


def parse_cell(face: int, cell: str) -> Optional[Gluing]:
    if cell == "-":
        return None
    m = _CELL_RE.match(cell)
    if m is None:
        raise TriangulationError(f"malformed gluing cell {cell!r}")
    target = int(m.group(1))
    images = tuple(int(m.group(k)) for k in (2, 3, 4))
    if len(set(images)) != 3:
        raise TriangulationError(f"repeated vertex in cell {cell!r}")
    perm_images = [None] * 4
    for v, img in zip(FACE_VERTICES[face], images):
        perm_images[v] = img
    missing = ({0, 1, 2, 3} - set(images)).pop()
    perm_images[face] = missing
    return (target, Perm4(tuple(perm_images)))


# ---------------------------------------------------------------------------
# edge / vertex classes


@dataclass(frozen=True)
class EdgeClass:
    """One orbit of tetrahedron edges under the face identifications.

    ``members`` holds (tet, (i, j), sign) with i < j; the sign records the
    orbit's direction on this edge relative to the increasing vertex order
    (+1 if the orbit traverses i→j).  ``orientable`` is False when the orbit
    identifies an edge with itself reversed.
    """

    index: int
    members: tuple[tuple[int, tuple[int, int], int], ...]
    orientable: bool = True

    @property
    def degree(self) -> int:
        return len(self.members)

    def key(self) -> frozenset:
        return frozenset((tet, pair) for tet, pair, _ in self.members)


@dataclass(frozen=True)
class VertexClass:
    """One orbit of ideal vertices (a cusp, for boundary-free complexes)."""

    index: int
    corners: tuple[tuple[int, int], ...]  # (tet, vertex)


# ---------------------------------------------------------------------------
# the triangulation proper


class Triangulation:
    """An ideal triangulation with optional boundary faces.

    Values are immutable after construction; derived data (edge and vertex
    classes) is computed deterministically and cached.
    """

    def __init__(
        self,
        gluings: Sequence[Sequence[Optional[Gluing]]],
        edge_labels: Optional[dict[int, str]] = None,
        cusp_labels: Optional[dict[int, str]] = None,
        cusp_curves: Optional[dict[str, dict[int, tuple[int, int, int]]]] = None,
        validate: bool = True,
    ) -> None:
        self._gluings: tuple[tuple[Optional[Gluing], ...], ...] = tuple(
            tuple(row) for row in gluings
        )
        self.edge_labels: dict[int, str] = dict(edge_labels or {})
        self.cusp_labels: dict[int, str] = dict(cusp_labels or {})
        # curve name ("m" / "l") -> tet -> (a, b, c) signed corner counts
        self.cusp_curves: dict[str, dict[int, tuple[int, int, int]]] = {
            name: dict(rows) for name, rows in (cusp_curves or {}).items()
        }
        self._edge_classes: Optional[tuple[EdgeClass, ...]] = None
        self._vertex_classes: Optional[tuple[VertexClass, ...]] = None
        if validate:
            self._validate()

    # -- basic structure ----------------------------------------------------

    @property
    def size(self) -> int:
        return len(self._gluings)

    def gluing(self, tet: int, face: int) -> Optional[Gluing]:
        return self._gluings[tet][face]

    def gluing_rows(self) -> tuple[tuple[Optional[Gluing], ...], ...]:
        return self._gluings

    def boundary_faces(self) -> list[tuple[int, int]]:
        return [
            (tet, face)
            for tet in range(self.size)
            for face in range(4)
            if self._gluings[tet][face] is None
        ]

    def is_boundary_free(self) -> bool:
        return not self.boundary_faces()

    def is_orientable(self) -> bool:
        """Whether the tetrahedra admit orientations compatible with every
        gluing (odd permutations preserve a tet's sign, even ones flip it).

        Complexes built by this package use positively oriented labellings
        throughout (all gluings odd), but imported tables may orient some
        tets the other way and still describe an orientable manifold.
        """
        signs = [0] * self.size
        for start in range(self.size):
            if signs[start]:
                continue
            signs[start] = 1
            stack = [start]
            while stack:
                tet = stack.pop()
                for face in range(4):
                    gl = self._gluings[tet][face]
                    if gl is None:
                        continue
                    target, perm = gl
                    expected = -signs[tet] if perm.is_even else signs[tet]
                    if signs[target] == 0:
                        signs[target] = expected
                        stack.append(target)
                    elif signs[target] != expected:
                        return False
        return True

    def _validate(self) -> None:
        n = self.size
        for tet in range(n):
            if len(self._gluings[tet]) != 4:
                raise TriangulationError(f"tet {tet} needs exactly 4 face entries")
            for face in range(4):
                gl = self._gluings[tet][face]
                if gl is None:
                    continue
                target, perm = gl
                if not 0 <= target < n:
                    raise TriangulationError(
                        f"tet {tet} face {face}: dangling reference to tet {target}"
                    )
                if target == tet and perm(face) == face:
                    raise TriangulationError(
                        f"tet {tet} face {face} glued to itself"
                    )
                back = self._gluings[target][perm(face)]
                if back is None or back[0] != tet or back[1].images != perm.inverse().images:
                    raise TriangulationError(
                        f"non-involutive gluing between tet {tet} face {face} "
                        f"and tet {target} face {perm(face)}"
                    )
        if not self.is_orientable():
            raise TriangulationError("non-orientable gluing pattern")

    # -- orbits -------------------------------------------------------------

    def edge_classes(self) -> tuple[EdgeClass, ...]:
        if self._edge_classes is not None:
            return self._edge_classes
        seen: dict[tuple[int, tuple[int, int]], int] = {}
        raw_classes: list[tuple[list, bool]] = []
        for tet0 in range(self.size):
            for pair0 in EDGE_PAIRS:
                if (tet0, pair0) in seen:
                    continue
                members: dict[tuple[int, tuple[int, int]], int] = {}
                orientable = True
                stack = [(tet0, pair0, 1)]
                while stack:
                    tet, (i, j), sign = stack.pop()
                    pair = (i, j) if i < j else (j, i)
                    s = sign if i < j else -sign
                    if (tet, pair) in members:
                        if members[(tet, pair)] != s:
                            orientable = False
                        continue
                    members[(tet, pair)] = s
                    for face in range(4):
                        if face == i or face == j:
                            continue
                        gl = self._gluings[tet][face]
                        if gl is None:
                            continue
                        target, perm = gl
                        stack.append((target, (perm(i), perm(j)), s))
                idx = len(raw_classes)
                raw_classes.append((sorted(members.items()), orientable))
                for key in members:
                    seen[key] = idx
        raw_classes.sort(key=lambda entry: entry[0][0][0])
        self._edge_classes = tuple(
            EdgeClass(
                index=k,
                members=tuple(
                    (tet, pair, sign) for (tet, pair), sign in members
                ),
                orientable=orientable,
            )
            for k, (members, orientable) in enumerate(raw_classes)
        )
        return self._edge_classes

    def vertex_classes(self) -> tuple[VertexClass, ...]:
        if self._vertex_classes is not None:
            return self._vertex_classes
        seen: set[tuple[int, int]] = set()
        classes: list[tuple[tuple[int, int], ...]] = []
        for tet0 in range(self.size):
            for v0 in range(4):
                if (tet0, v0) in seen:
                    continue
                orbit: set[tuple[int, int]] = set()
                stack = [(tet0, v0)]
                while stack:
                    tet, v = stack.pop()
                    if (tet, v) in orbit:
                        continue
                    orbit.add((tet, v))
                    for face in range(4):
                        if face == v:
                            continue
                        gl = self._gluings[tet][face]
                        if gl is None:
                            continue
                        target, perm = gl
                        stack.append((target, perm(v)))
                classes.append(tuple(sorted(orbit)))
                seen |= orbit
        classes.sort(key=lambda c: c[0])
        self._vertex_classes = tuple(
            VertexClass(index=k, corners=c) for k, c in enumerate(classes)
        )
        return self._vertex_classes

    # -- derived incidence data ----------------------------------------------

    def edge_class_of(self, tet: int, pair: tuple[int, int]) -> EdgeClass:
        i, j = pair
        pair = (i, j) if i < j else (j, i)
        for cls in self.edge_classes():
            for t, p, _ in cls.members:
                if (t, p) == (tet, pair):
                    return cls
        raise KeyError((tet, pair))

    def label_of(self, tet: int, pair: tuple[int, int]) -> str:
        cls = self.edge_class_of(tet, pair)
        try:
            return self.edge_labels[cls.index]
        except KeyError:
            raise KeyError(f"edge class {cls.index} of {(tet, pair)} is unlabelled")

    def labelled_class(self, label: str) -> EdgeClass:
        for idx, name in self.edge_labels.items():
            if name == label:
                return self.edge_classes()[idx]
        raise KeyError(label)

    def degree_vector(self, cls: EdgeClass) -> tuple[tuple[int, int, int], ...]:
        """Per-tet (a, b, c) incidence counts of one edge class."""
        counts = [[0, 0, 0] for _ in range(self.size)]
        for tet, pair, _ in cls.members:
            counts[tet][LETTERS.index(edge_letter(pair))] += 1
        return tuple(tuple(row) for row in counts)

    # -- serialization -------------------------------------------------------

    def export_table(self) -> str:
        """One row per tet, four cells in face order (012), (013), (023), (123)."""
        lines = []
        for tet in range(self.size):
            cells = [
                format_cell(face, self._gluings[tet][face])
                for face in TABLE_FACE_ORDER
            ]
            lines.append(" ".join(cells))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_table(cls, text: str, **kwargs) -> "Triangulation":
        rows: list[list[Optional[Gluing]]] = []
        lines = [ln for ln in text.splitlines() if ln.strip()]
        for row_no, line in enumerate(lines):
            cells = line.split()
            if len(cells) != 4:
                raise TriangulationError(
                    f"row {row_no}: expected 4 cells, got {len(cells)}"
                )
            row: list[Optional[Gluing]] = [None] * 4
            for col, cell in enumerate(cells):
                face = TABLE_FACE_ORDER[col]
                try:
                    row[face] = parse_cell(face, cell)
                except TriangulationError as exc:
                    raise TriangulationError(f"row {row_no} column {col}: {exc}")
            rows.append(row)
        try:
            return cls(rows, **kwargs)
        except TriangulationError as exc:
            raise TriangulationError(f"invalid table: {exc}")

    def to_json(self) -> str:
        payload = {
            "tets": self.size,
            "gluings": [
                [
                    None if gl is None else [gl[0], list(gl[1].images)]
                    for gl in row
                ]
                for row in self._gluings
            ],
            "edge_labels": {str(k): v for k, v in sorted(self.edge_labels.items())},
            "cusp_labels": {str(k): v for k, v in sorted(self.cusp_labels.items())},
            "cusp_curves": {
                name: {str(tet): list(triple) for tet, triple in sorted(rows.items())}
                for name, rows in sorted(self.cusp_curves.items())
            },
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Triangulation":
        payload = json.loads(text)
        gluings = [
            [
                None if gl is None else (gl[0], Perm4(tuple(gl[1])))
                for gl in row
            ]
            for row in payload["gluings"]
        ]
        return cls(
            gluings,
            edge_labels={int(k): v for k, v in payload.get("edge_labels", {}).items()},
            cusp_labels={int(k): v for k, v in payload.get("cusp_labels", {}).items()},
            cusp_curves={
                name: {int(t): tuple(triple) for t, triple in rows.items()}
                for name, rows in payload.get("cusp_curves", {}).items()
            },
        )

    # -- identity ------------------------------------------------------------

    def same_gluings(self, other: "Triangulation") -> bool:
        return self._gluings == other._gluings

    def __repr__(self) -> str:
        kind = "closed-cusp" if self.is_boundary_free() else "with-boundary"
        return f"<Triangulation {self.size} tets, {kind}>"


# ---------------------------------------------------------------------------
# builder used by the construction routines


class TriangulationBuilder:
    """Mutable gluing table; ``build()`` validates and freezes."""

    def __init__(self, num_tets: int = 0) -> None:
        self.gluings: list[list[Optional[Gluing]]] = [
            [None] * 4 for _ in range(num_tets)
        ]

    @classmethod
    def from_triangulation(cls, t: Triangulation) -> "TriangulationBuilder":
        b = cls(t.size)
        b.gluings = [list(row) for row in t.gluing_rows()]
        return b

    @property
    def size(self) -> int:
        return len(self.gluings)

    def add_tet(self) -> int:
        self.gluings.append([None] * 4)
        return len(self.gluings) - 1

    def glue(self, tet: int, face: int, target: int, perm: Perm4) -> None:
        if self.gluings[tet][face] is not None or self.gluings[target][perm(face)] is not None:
            raise TriangulationError(
                f"face already glued: {tet}:{face} or {target}:{perm(face)}"
            )
        if target == tet and perm(face) == face:
            raise TriangulationError(f"cannot glue face {tet}:{face} to itself")
        self.gluings[tet][face] = (target, perm)
        self.gluings[target][perm(face)] = (tet, perm.inverse())

    def unglue(self, tet: int, face: int) -> None:
        gl = self.gluings[tet][face]
        if gl is None:
            return
        target, perm = gl
        self.gluings[tet][face] = None
        self.gluings[target][perm(face)] = None

    def remove_tets(self, removed: Iterable[int]) -> dict[int, int]:
        """Drop the given tets (ungluing their faces); returns old->new index map."""
        removed_set = set(removed)
        for tet in removed_set:
            for face in range(4):
                self.unglue(tet, face)
        remap = {}
        new_rows: list[list[Optional[Gluing]]] = []
        for old in range(self.size):
            if old in removed_set:
                continue
            remap[old] = len(new_rows)
            new_rows.append(self.gluings[old])
        for row in new_rows:
            for face in range(4):
                if row[face] is not None:
                    target, perm = row[face]
                    row[face] = (remap[target], perm)
        self.gluings = new_rows
        return remap

    def build(self, **kwargs) -> Triangulation:
        return Triangulation(self.gluings, **kwargs)


# ---------------------------------------------------------------------------
# cusp cross-sections: fundamental loops and their holonomy exponent data


@dataclass(frozen=True)
class LoopEquation:
    """Multiplicative holonomy of one loop in a cusp cross-section.

    The holonomy derivative is
        sign * prod over tets of  z^ea * z'^eb * z''^ec
    with the integer exponents in ``triples`` (tet -> (ea, eb, ec));
    a complete structure has every loop holonomy equal to 1.
    """

    sign: int
    triples: tuple[tuple[int, tuple[int, int, int]], ...]

    def exponents(self) -> dict[int, tuple[int, int, int]]:
        return {tet: triple for tet, triple in self.triples}


def _corner_sides(v: int) -> tuple[int, int, int]:
    """The three faces (sides of the corner triangle) at vertex v."""
    return tuple(f for f in range(4) if f != v)


def _side_germs(v: int, face: int) -> tuple[int, int]:
    """The two germ endpoints (other vertices) of side `face` at vertex v, sorted."""
    w = [u for u in FACE_VERTICES[face] if u != v]
    return (w[0], w[1]) if w[0] < w[1] else (w[1], w[0])


# Symbolic values of germ-position differences in the canonical placement
# Q[0]=0, Q[1]=1, Q[2]=ζ0: linear polynomials A + B·ζ0 as (A, B).
_DIFF = {
    (0, 1): (1, 0), (1, 0): (-1, 0),
    (0, 2): (0, 1), (2, 0): (0, -1),
    (1, 2): (-1, 1), (2, 1): (1, -1),
}

# base vector -> germ-power class:  value = sign * ζ_{germ}^{exp}
#   1    -> no germ;   ζ0 -> ζ_0;   ζ0 - 1 = -1/ζ_1;   and ratios give ζ_2.
_RATIO_CLASS = {
    # (num_base, den_base) with bases 'one', 'z', 'z-1'
    ("one", "one"): (1, None, 0),
    ("z", "z"): (1, None, 0),
    ("z-1", "z-1"): (1, None, 0),
    ("z", "one"): (1, 0, 1),
    ("one", "z"): (1, 0, -1),
    ("z-1", "one"): (-1, 1, -1),   # ζ0 − 1 = −1/ζ1
    ("one", "z-1"): (-1, 1, 1),
    ("z-1", "z"): (1, 2, 1),       # (ζ0 − 1)/ζ0 = ζ2
    ("z", "z-1"): (1, 2, -1),
}


def _base_and_sign(diff: tuple[int, int]) -> tuple[str, int]:
    if diff == (1, 0):
        return "one", 1
    if diff == (-1, 0):
        return "one", -1
    if diff == (0, 1):
        return "z", 1
    if diff == (0, -1):
        return "z", -1
    if diff == (-1, 1):
        return "z-1", 1
    if diff == (1, -1):
        return "z-1", -1
    raise AssertionError(diff)


def _crossing_factor(
    v: int, in_pair: tuple[int, int], out_pair: tuple[int, int]
) -> tuple[int, Optional[int], int]:
    """Ratio (out germ-vector)/(in germ-vector) at a corner of vertex v.

    Pairs are ordered germ endpoints (vertices ≠ v).  Returns
    (sign, germ_slot or None, exponent) where germ_slot indexes
    VERTEX_GERMS[v]; the factor is sign * ζ_slot^exponent.
    """
    order = VERTEX_GERMS[v]
    slot = {w: k for k, w in enumerate(order)}
    num = _DIFF[(slot[out_pair[0]], slot[out_pair[1]])]
    den = _DIFF[(slot[in_pair[0]], slot[in_pair[1]])]
    num_base, num_sign = _base_and_sign(num)
    den_base, den_sign = _base_and_sign(den)
    cls_sign, germ, exp = _RATIO_CLASS[(num_base, den_base)]
    return (num_sign * den_sign * cls_sign, germ, exp)


def cusp_fundamental_loops(
    t: Triangulation, cusp: VertexClass
) -> list[LoopEquation]:
    """Holonomy exponent data for a generating set of cusp cross-section loops.

    Builds the dual graph of the cusp triangulation (nodes = tet corners,
    edges = side identifications induced by the face gluings), takes a BFS
    spanning tree, and returns one multiplicative equation per non-tree edge.
    Imposing all of them = 1, together with the edge gluing equations, cuts
    out the complete structure.
    """
    corners = list(cusp.corners)
    corner_index = {c: k for k, c in enumerate(corners)}

    # side adjacency: (corner, face) -> (corner', face')
    def across(corner: tuple[int, int], face: int):
        tet, v = corner
        gl = t.gluing(tet, face)
        if gl is None:
            return None
        target, perm = gl
        return ((target, perm(v)), perm(face), perm)

    # BFS spanning tree
    root = corners[0]
    parent: dict[tuple[int, int], tuple] = {root: None}
    order = [root]
    queue = [root]
    tree_sides: set[frozenset] = set()
    while queue:
        cur = queue.pop(0)
        tet, v = cur
        for face in _corner_sides(v):
            hop = across(cur, face)
            if hop is None:
                continue
            nbr, nbr_face, _ = hop
            if nbr not in parent:
                parent[nbr] = (cur, face, nbr_face)
                tree_sides.add(frozenset({(cur, face), (nbr, nbr_face)}))
                order.append(nbr)
                queue.append(nbr)
    if len(parent) != len(corners):
        raise TriangulationError("cusp cross-section is not connected")

    def path_to_root(c):
        """List of (corner, out_face) hops from c up to the root."""
        hops = []
        while parent[c] is not None:
            prev, face_up, face_down = parent[c]
            hops.append((c, face_down, prev, face_up))
            c = prev
        return hops

    loops: list[LoopEquation] = []
    seen_chords: set[frozenset] = set()
    for cur in order:
        tet, v = cur
        for face in _corner_sides(v):
            hop = across(cur, face)
            if hop is None:
                continue
            nbr, nbr_face, _ = hop
            side_key = frozenset({(cur, face), (nbr, nbr_face)})
            if side_key in tree_sides or side_key in seen_chords:
                continue
            seen_chords.add(side_key)
            # loop: root -> cur, chord, nbr -> root
            down = [(a, b) for (_, _, a, b) in reversed(path_to_root(cur))]
            # down is the hop list root->cur as (corner, out_face)
            up = [(c, f_down) for (c, f_down, _, _) in path_to_root(nbr)]
            hops: list[tuple[tuple[int, int], int]] = []
            hops.extend(down)
            hops.append((cur, face))
            hops.extend(up)
            loops.append(_loop_equation(t, hops))
    return loops


def _loop_equation(
    t: Triangulation, hops: list[tuple[tuple[int, int], int]]
) -> LoopEquation:
    """Holonomy of the closed corner path given by (corner, out_face) hops."""
    k = len(hops)
    # in-pair arriving at hop i comes from crossing hop i-1 (cyclically)
    sign = 1
    exps: dict[int, list[int]] = {}
    for i in range(k):
        corner, out_face = hops[i]
        prev_corner, prev_face = hops[(i - 1) % k]
        tet, v = corner
        # entering germ pair: image of the previous corner's sorted side germs
        gl = t.gluing(prev_corner[0], prev_face)
        assert gl is not None
        target, perm = gl
        assert (target, perm(prev_corner[1])) == corner
        w1, w2 = _side_germs(prev_corner[1], prev_face)
        in_pair = (perm(w1), perm(w2))
        out_pair = _side_germs(v, out_face)
        s, germ_slot, exp = _crossing_factor(v, in_pair, out_pair)
        sign *= s
        if germ_slot is not None and exp != 0:
            germ_vertex = VERTEX_GERMS[v][germ_slot]
            letter = edge_letter((v, germ_vertex))
            row = exps.setdefault(tet, [0, 0, 0])
            row[LETTERS.index(letter)] += exp
    triples = tuple(
        (tet, tuple(row)) for tet, row in sorted(exps.items()) if any(row)
    )
    return LoopEquation(sign=sign, triples=triples)


# ---------------------------------------------------------------------------
# combinatorial isomorphism search

_ALL_PERMS: tuple[Perm4, ...] = tuple(
    Perm4((i, j, k, 6 - i - j - k))
    for i in range(4)
    for j in range(4)
    if j != i
    for k in range(4)
    if k not in (i, j)
)


def find_isomorphism(
    a: Triangulation,
    b: Triangulation,
    orientation_preserving: Optional[bool] = None,
) -> Optional[tuple[dict[int, int], dict[int, Perm4]]]:
    """Search for a combinatorial isomorphism from ``a`` onto ``b``.

    Returns (tet map, per-tet vertex permutation) or None.  The image of
    tet 0 is tried against every (tet, labelling) of ``b`` and propagated
    across gluings, so the search is exhaustive for connected complexes.
    With ``orientation_preserving`` set, only even (True) or odd (False)
    anchor relabellings are considered, which for complexes whose gluings
    are all odd selects orientation-preserving resp. -reversing maps.
    """
    if a.size != b.size:
        return None
    n = a.size
    for t0 in range(n):
        for sigma0 in _ALL_PERMS:
            if orientation_preserving is True and not sigma0.is_even:
                continue
            if orientation_preserving is False and sigma0.is_even:
                continue
            tet_map: dict[int, int] = {0: t0}
            perm_map: dict[int, Perm4] = {0: sigma0}
            queue = [0]
            ok = True
            while queue and ok:
                s = queue.pop()
                ts, ps = tet_map[s], perm_map[s]
                for face in range(4):
                    gl_a = a.gluing(s, face)
                    gl_b = b.gluing(ts, ps(face))
                    if (gl_a is None) != (gl_b is None):
                        ok = False
                        break
                    if gl_a is None:
                        continue
                    ta, pa = gl_a
                    tb, pb = gl_b
                    induced = pb.compose(ps).compose(pa.inverse())
                    if ta in tet_map:
                        if tet_map[ta] != tb or perm_map[ta].images != induced.images:
                            ok = False
                            break
                    else:
                        tet_map[ta] = tb
                        perm_map[ta] = induced
                        queue.append(ta)
            if (
                ok
                and len(tet_map) == n
                and len(set(tet_map.values())) == n
            ):
                return tet_map, perm_map
    return None
