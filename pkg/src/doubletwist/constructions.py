"""Builders for triangulated double twist knot complements.

Two fixed seed complexes (eight and ten ideal tetrahedra, both triangulating
the same three-cusped link complement) are combined with layered solid tori
to produce, for twist parameters p, q >= 2:

* ``build_minimal``   -- remove the two-tetrahedron prism cap at each
  crossing-circle cusp of the ten-tetrahedron seed, exposing a once-punctured
  torus boundary per cusp, then layer tetrahedra along a Farey walk to the
  slope -1/n and fold.  Result: 6 + (p-2) + (q-2) tetrahedra.

* ``build_canonical`` -- replace each crossing-circle cusp neighbourhood by a
  doubled layered solid torus built over a twice-punctured torus (four
  triangles), walking to the Farey triangle (-1/(2n-2), -1/(2n-1), 0/1) and
  folding along the two lifts of -1/(2n-2).  The two towers meet along the
  four-triangle surface, glued by a reflection of each unit square across its
  drawn diagonal.  Result: 4(p-1) + 4(q-1) tetrahedra.

Edge classes of the results carry string labels (``E0``, ``P1``, ``O0_1``,
...) that the angle-equation and Neumann-Zagier layers key on.  All expected
edge identifications are asserted after building; a contradiction raises
``TriangulationError`` rather than silently relabelling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .farey import (
    INFINITY,
    STANDARD_START,
    Slope,
    WalkStep,
    walk_to_slope,
)
from .triangulation import (
    FACE_VERTICES,
    Perm4,
    Triangulation,
    TriangulationBuilder,
    TriangulationError,
    edge_letter,
)

# ---------------------------------------------------------------------------
# slopes of the standard once/twice-punctured torus boundary

PIVOT = Slope(0, 1)  # kept by every step of a walk toward -1/n
DIAGONAL = Slope(-1, 1)

#: (slope, lift) -- which copy of a slope an edge is on a boundary surface.
#: Once-punctured boundaries have a single lift (index 0) of each slope.
EdgeId = tuple[Slope, int]


def _slope_key(s: Slope) -> tuple:
    if s.is_infinite:
        return (1, Fraction(0))
    return (0, Fraction(s.num, s.den))


# ---------------------------------------------------------------------------
# the two seed gluing tables

_EIGHT_TET_ROWS = (
    "3(013) 1(012) 1(013) 5(132)",
    "0(013) 0(023) 2(021) 4(132)",
    "1(032) 3(023) 3(021) 6(321)",
    "2(032) 0(012) 2(013) 7(132)",
    "7(013) 5(012) 5(013) 1(132)",
    "4(013) 4(023) 6(021) 0(132)",
    "5(032) 7(023) 7(021) 2(321)",
    "6(032) 4(012) 6(013) 3(132)",
)

_TEN_TET_ROWS = (
    "2(021) 1(201) 3(130) 5(213)",
    "0(130) 2(310) 7(321) 4(213)",
    "0(021) 1(310) 6(312) 3(321)",
    "4(210) 0(302) 5(021) 2(321)",
    "3(210) 5(310) 9(321) 1(213)",
    "3(032) 4(310) 8(312) 0(213)",
    "7(012) 7(032) 7(031) 2(230)",
    "6(012) 6(032) 6(031) 1(320)",
    "9(012) 9(032) 9(031) 5(230)",
    "8(012) 8(032) 8(031) 4(320)",
)

# Edge classes of the ten-tetrahedron seed, identified by their multiset of
# (tet, edge letter) incidences restricted to the six central tets.  The
# eight restricted signatures are pairwise distinct, so they pin the
# labelling uniquely -- and they are exactly the seed-tet coefficients of
# the labelled angle equations, so matching doubles as a transcription
# check on the gluing table.  The two cap classes have empty restriction
# and are told apart by which cap pair they live on.
_TEN_TET_CORE_SIGNATURES: dict[str, tuple[tuple[int, str], ...]] = {
    "E0": ((0, "c"), (2, "c"), (3, "a"), (5, "c")),
    "E1": ((0, "c"), (1, "c"), (3, "a"), (4, "c")),
    "P1": ((4, "c"), (5, "c")),
    "O0_1": (
        (0, "b"), (0, "b"), (1, "a"), (1, "b"), (2, "a"), (2, "b"),
        (3, "b"), (4, "a"), (5, "a"),
    ),
    "O1_1": ((3, "b"), (4, "b"), (5, "b")),
    "P2": ((1, "c"), (2, "c")),
    "O0_2": (
        (0, "a"), (1, "a"), (2, "a"), (3, "c"), (3, "c"), (4, "a"),
        (4, "b"), (5, "a"), (5, "b"),
    ),
    "O1_2": ((0, "a"), (1, "b"), (2, "b")),
}

# Signed (a, b, c) corner crossings of the knot cusp's meridian and longitude
# on the ten-tetrahedron seed; tets absent from a row are not crossed.  These
# rows survive both fillings unchanged (the filled tetrahedra contribute
# zeros), because both curves run over seed tetrahedra only.
_MERIDIAN_ROW: dict[int, tuple[int, int, int]] = {
    0: (0, 1, 0),
    2: (1, 1, 0),
    3: (-1, 0, -1),
}
_LONGITUDE_ROW: dict[int, tuple[int, int, int]] = {
    0: (2, 0, 0),
    1: (2, 0, 0),
    2: (-2, 0, 0),
    3: (-2, -2, 0),
    4: (0, 2, 0),
    5: (2, 0, 0),
}

def _signature(members: Iterable[tuple[int, tuple[int, int], int]]) -> tuple:
    return tuple(sorted((tet, edge_letter(pair)) for tet, pair, _ in members))


def borromean8() -> Triangulation:
    """The eight-tetrahedron seed: two four-tetrahedron pieces meeting along
    a four-triangle twice-punctured torus (the four 123-faces).

    Cusp labels: ``clasp1`` is the cusp contained in tets 0-3, ``clasp2`` the
    one in tets 4-7, ``knot`` the cusp meeting both pieces.
    """
    t = Triangulation.from_table("\n".join(_EIGHT_TET_ROWS))
    cusp_labels: dict[int, str] = {}
    for v in t.vertex_classes():
        tets = {tet for tet, _ in v.corners}
        if tets <= {0, 1, 2, 3}:
            name = "clasp1"
        elif tets <= {4, 5, 6, 7}:
            name = "clasp2"
        else:
            name = "knot"
        if name in cusp_labels.values():
            raise TriangulationError(f"two cusps match the {name!r} pattern")
        cusp_labels[v.index] = name
    if len(cusp_labels) != 3:
        raise TriangulationError(
            f"expected 3 cusps on the eight-tetrahedron seed, found {len(cusp_labels)}"
        )
    return Triangulation(
        t.gluing_rows(), cusp_labels=cusp_labels, validate=False
    )


def borromean10() -> Triangulation:
    """The ten-tetrahedron seed: six central tets plus a two-tetrahedron
    prism cap over each crossing-circle cusp.

    Edge classes are labelled by matching their (tet, letter) incidences on
    the central tets; the cap-only classes become ``cap1``/``cap2``, where
    cap pair 1 is the one meeting the ``P1`` class.  Cusp ``claspi`` is the
    cusp inside cap pair i, and ``m``/``l`` curve data for the knot cusp is
    attached.
    """
    t = Triangulation.from_table("\n".join(_TEN_TET_ROWS))
    by_signature = {
        sig: label for label, sig in _TEN_TET_CORE_SIGNATURES.items()
    }
    edge_labels: dict[int, str] = {}
    cap_classes = []
    for cls in t.edge_classes():
        core = _signature(
            (tet, pair, s) for tet, pair, s in cls.members if tet <= 5
        )
        if not core:
            cap_classes.append(cls)
            continue
        label = by_signature.get(core)
        if label is None:
            raise TriangulationError(
                f"edge class {cls.index} has unexpected core incidences {core}"
            )
        if label in edge_labels.values():
            raise TriangulationError(f"two edge classes match {label}")
        edge_labels[cls.index] = label
    if len(edge_labels) != 8 or len(cap_classes) != 2:
        raise TriangulationError(
            f"expected 8 core and 2 cap edge classes, got "
            f"{len(edge_labels)} and {len(cap_classes)}"
        )

    # cap pair of side i = the cap tets meeting the P{i} class
    cap_supports = [
        frozenset(tet for tet, _, _ in cls.members) for cls in cap_classes
    ]
    cap_pairs: dict[int, frozenset[int]] = {}
    for side in (1, 2):
        cls = next(
            c for c in t.edge_classes()
            if edge_labels.get(c.index) == f"P{side}"
        )
        caps = {tet for tet, pair, _ in cls.members if tet >= 6}
        matches = [s for s in cap_supports if caps <= s]
        if not caps or len(matches) != 1:
            raise TriangulationError(
                f"P{side} meets {len(matches)} cap pairs; expected exactly 1"
            )
        cap_pairs[side] = matches[0]
    if cap_pairs[1] == cap_pairs[2] or cap_pairs[1] | cap_pairs[2] != {6, 7, 8, 9}:
        raise TriangulationError(f"cap pairs did not separate: {cap_pairs}")
    for cls in cap_classes:
        support = frozenset(tet for tet, _, _ in cls.members)
        side = 1 if support == cap_pairs[1] else 2
        if support != cap_pairs[side]:
            raise TriangulationError(f"cap class on unexpected tets {support}")
        edge_labels[cls.index] = f"cap{side}"

    cusp_labels: dict[int, str] = {}
    for v in t.vertex_classes():
        tets = {tet for tet, _ in v.corners}
        if tets <= cap_pairs[1]:
            name = "clasp1"
        elif tets <= cap_pairs[2]:
            name = "clasp2"
        else:
            name = "knot"
        if name in cusp_labels.values():
            raise TriangulationError(f"two cusps match the {name!r} pattern")
        cusp_labels[v.index] = name
    if len(cusp_labels) != 3:
        raise TriangulationError(
            f"expected 3 cusps on the ten-tetrahedron seed, found {len(cusp_labels)}"
        )
    return Triangulation(
        t.gluing_rows(),
        edge_labels=edge_labels,
        cusp_labels=cusp_labels,
        cusp_curves={"m": dict(_MERIDIAN_ROW), "l": dict(_LONGITUDE_ROW)},
        validate=False,
    )


# ---------------------------------------------------------------------------
# punctured-torus boundaries


@dataclass(frozen=True)
class BoundaryTriangle:
    """One boundary face together with the (slope, lift) id of each edge."""

    tet: int
    face: int
    edge_ids: tuple[tuple[tuple[int, int], EdgeId], ...]

    def id_map(self) -> dict[tuple[int, int], EdgeId]:
        return dict(self.edge_ids)

    def slopes(self) -> tuple[Slope, ...]:
        return tuple(eid[0] for _, eid in self.edge_ids)


@dataclass(frozen=True)
class PuncturedTorusBoundary:
    """A once- (2 triangles) or twice- (4 triangles) punctured torus boundary.

    Every triangle carries one edge of each of the three slopes of a common
    Farey triangle; each (slope, lift) id appears on exactly two triangles.
    """

    triangles: tuple[BoundaryTriangle, ...]

    def __post_init__(self) -> None:
        if len(self.triangles) not in (2, 4):
            raise TriangulationError(
                f"boundary needs 2 or 4 triangles, got {len(self.triangles)}"
            )
        slope_sets = {frozenset(tri.slopes()) for tri in self.triangles}
        if len(slope_sets) != 1:
            raise TriangulationError("boundary triangles carry mixed slopes")
        from .farey import FareyTriangle

        FareyTriangle(tuple(slope_sets.pop()))  # validates pairwise unimodular
        counts: dict[EdgeId, int] = {}
        for tri in self.triangles:
            if len(tri.edge_ids) != 3:
                raise TriangulationError("boundary triangle needs 3 edges")
            for _, eid in tri.edge_ids:
                counts[eid] = counts.get(eid, 0) + 1
        if set(counts.values()) != {2}:
            raise TriangulationError(
                f"each boundary edge must lie on exactly 2 triangles: {counts}"
            )

    @property
    def punctures(self) -> int:
        return len(self.triangles) // 2

    def farey_triangle(self):
        from .farey import FareyTriangle

        return FareyTriangle(tuple(set(self.triangles[0].slopes())))


@dataclass(frozen=True)
class FillingSpec:
    """How one crossing-circle cusp is filled."""

    cusp: str
    slope: Slope
    style: str  # "minimal" | "canonical-double-cover"

    def __post_init__(self) -> None:
        if self.style not in ("minimal", "canonical-double-cover"):
            raise ValueError(f"unknown filling style {self.style!r}")
        if self.slope.num != -1 or self.slope.den < 2:
            raise ValueError(
                f"filling slope must be -1/n with n >= 2, got {self.slope}"
            )

    @property
    def twists(self) -> int:
        return self.slope.den


# ---------------------------------------------------------------------------
# layering targets: actual boundary faces, or triangles of the abstract
# surface the double-cover towers grow from on both sides


class _FaceTarget:
    """A boundary face of the complex under construction."""

    def __init__(self, tet: int, face: int, ids: dict) -> None:
        self.tet = tet
        self.face = face
        self.ids = dict(ids)  # frozenset{two vertices} -> EdgeId

    def key_with_slope(self, slope: Slope):
        keys = [k for k, eid in self.ids.items() if eid[0] == slope]
        if len(keys) != 1:
            raise TriangulationError(
                f"face {self.tet}:{self.face} has {len(keys)} edges of slope {slope}"
            )
        return keys[0]

    @staticmethod
    def corner(key1, key2):
        common = key1 & key2
        if len(common) != 1:
            raise TriangulationError("boundary edges do not share a corner")
        return next(iter(common))

    def perm_onto(self, corner_images: dict[int, int], new_face: int) -> Perm4:
        images = [None] * 4
        for v, corner in corner_images.items():
            images[v] = corner
        images[new_face] = self.face
        return Perm4(tuple(images))

    def attach(self, builder: TriangulationBuilder, tet: int, new_face: int,
               corner_images: dict[int, int]) -> None:
        builder.glue(tet, new_face, self.tet, self.perm_onto(corner_images, new_face))

    def to_boundary_triangle(self) -> BoundaryTriangle:
        entries = []
        for key, eid in self.ids.items():
            i, j = sorted(key)
            entries.append(((i, j), eid))
        return BoundaryTriangle(self.tet, self.face, tuple(sorted(entries)))

    @classmethod
    def from_boundary_triangle(cls, tri: BoundaryTriangle) -> "_FaceTarget":
        return cls(
            tri.tet,
            tri.face,
            {frozenset(pair): eid for pair, eid in tri.edge_ids},
        )


class _SurfaceTarget:
    """A triangle of the abstract interface surface (no tetrahedron yet);
    corners are lattice points of the surface's fundamental domain."""

    def __init__(self, name: str, ids: dict) -> None:
        self.name = name
        self.ids = dict(ids)  # frozenset{two lattice points} -> EdgeId

    key_with_slope = _FaceTarget.key_with_slope
    corner = staticmethod(_FaceTarget.corner)


def _standard_double_surface() -> list[_SurfaceTarget]:
    """Four triangles tiling [0,2] x [0,1] with the negative diagonals drawn;
    vertical edges are the two lifts of 1/0, horizontal of 0/1, diagonal of
    -1/1, and the left/right resp. top/bottom domain edges are identified."""
    v0 = (INFINITY, 0)
    v1 = (INFINITY, 1)
    h1 = (PIVOT, 0)
    h2 = (PIVOT, 1)
    d1 = (DIAGONAL, 0)
    d2 = (DIAGONAL, 1)

    def fs(p1, p2):
        return frozenset((p1, p2))

    return [
        _SurfaceTarget("L1", {
            fs((0, 0), (0, 1)): v0,
            fs((0, 0), (1, 0)): h1,
            fs((1, 0), (0, 1)): d1,
        }),
        _SurfaceTarget("U1", {
            fs((1, 0), (1, 1)): v1,
            fs((0, 1), (1, 1)): h1,
            fs((1, 0), (0, 1)): d1,
        }),
        _SurfaceTarget("L2", {
            fs((1, 0), (1, 1)): v1,
            fs((1, 0), (2, 0)): h2,
            fs((2, 0), (1, 1)): d2,
        }),
        _SurfaceTarget("U2", {
            fs((2, 0), (2, 1)): v0,
            fs((1, 1), (2, 1)): h2,
            fs((2, 0), (1, 1)): d2,
        }),
    ]


def _det2(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


@dataclass
class _LayerInfo:
    """Which (slope, lift) each edge of one layered tetrahedron carries."""

    tet: int
    edge_ids: dict[tuple[int, int], EdgeId] = field(default_factory=dict)


def _attach_layer(
    builder: TriangulationBuilder,
    targets: Sequence[Union[_FaceTarget, _SurfaceTarget]],
    step: WalkStep,
    seed_det: int = 1,
    records: Optional[list] = None,
) -> tuple[list[_FaceTarget], list[_LayerInfo]]:
    """Attach one tetrahedron per lift of ``step.covered``.

    A new tetrahedron's faces 012 and 013 cover the two targets adjacent to
    the covered edge (edge 01); its faces 023 and 123 become new boundary,
    with edge 23 carrying the newly produced slope.  Abstract surface targets
    are recorded instead of glued, their vertex roles chosen so the face-012
    corner map has lattice orientation ``seed_det``; real boundary faces have
    the roles forced by orientability.
    """
    groups: dict[EdgeId, list] = {}
    for target in targets:
        for eid in target.ids.values():
            if eid[0] == step.covered:
                groups.setdefault(eid, []).append(target)
    if not groups:
        raise TriangulationError(
            f"no boundary edge carries the covered slope {step.covered}"
        )
    kept_sorted = sorted(step.kept, key=_slope_key)
    new_targets: list[_FaceTarget] = []
    infos: list[_LayerInfo] = []
    for cov_id in sorted(groups, key=lambda e: (_slope_key(e[0]), e[1])):
        pair_targets = groups[cov_id]
        if len(pair_targets) != 2:
            raise TriangulationError(
                f"edge {cov_id} lies on {len(pair_targets)} boundary triangles"
            )
        t_a, t_b = pair_targets
        tet = builder.add_tet()
        new_id: EdgeId = (step.added, cov_id[1])

        def corner_maps(b_slope, c_slope):
            cov_a = t_a.key_with_slope(step.covered)
            b_a = t_a.key_with_slope(b_slope)
            c_a = t_a.key_with_slope(c_slope)
            cov_b = t_b.key_with_slope(step.covered)
            b_b = t_b.key_with_slope(b_slope)
            c_b = t_b.key_with_slope(c_slope)
            map3 = {
                0: t_a.corner(cov_a, b_a),
                1: t_a.corner(cov_a, c_a),
                2: t_a.corner(b_a, c_a),
            }
            map2 = {
                0: t_b.corner(cov_b, c_b),
                1: t_b.corner(cov_b, b_b),
                3: t_b.corner(b_b, c_b),
            }
            return map3, map2, (b_a, c_a, b_b, c_b)

        chosen = None
        for b_slope, c_slope in (kept_sorted, kept_sorted[::-1]):
            map3, map2, keys = corner_maps(b_slope, c_slope)
            if isinstance(t_a, _SurfaceTarget):
                x0, x1, x2 = map3[0], map3[1], map3[2]
                sign = _det2(
                    (x1[0] - x0[0], x1[1] - x0[1]),
                    (x2[0] - x0[0], x2[1] - x0[1]),
                )
                if sign == seed_det:
                    chosen = (b_slope, c_slope, map3, map2, keys)
                    break
            else:
                if not t_a.perm_onto(map3, 3).is_even:
                    chosen = (b_slope, c_slope, map3, map2, keys)
                    break
        if chosen is None:
            raise TriangulationError(
                f"no orientation-consistent layering onto edge {cov_id}"
            )
        b_slope, c_slope, map3, map2, (b_a, c_a, b_b, c_b) = chosen

        if isinstance(t_a, _SurfaceTarget):
            if records is None or not isinstance(t_b, _SurfaceTarget):
                raise TriangulationError("mixed abstract/real layering targets")
            records.append((tet, 3, t_a.name, map3))
            records.append((tet, 2, t_b.name, map2))
        else:
            if t_b.perm_onto(map2, 2).is_even:
                raise TriangulationError(
                    f"inconsistent boundary orientation at edge {cov_id}"
                )
            t_a.attach(builder, tet, 3, map3)
            t_b.attach(builder, tet, 2, map2)

        info = _LayerInfo(tet=tet, edge_ids={
            (0, 1): cov_id,
            (2, 3): new_id,
            (0, 2): t_a.ids[b_a],
            (1, 2): t_a.ids[c_a],
            (1, 3): t_b.ids[b_b],
            (0, 3): t_b.ids[c_b],
        })
        infos.append(info)

        def fs(i, j):
            return frozenset((i, j))

        new_targets.append(_FaceTarget(tet, 1, {
            fs(0, 2): info.edge_ids[(0, 2)],
            fs(0, 3): info.edge_ids[(0, 3)],
            fs(2, 3): new_id,
        }))
        new_targets.append(_FaceTarget(tet, 0, {
            fs(1, 2): info.edge_ids[(1, 2)],
            fs(1, 3): info.edge_ids[(1, 3)],
            fs(2, 3): new_id,
        }))
    return new_targets, infos


def _fold_pair(builder: TriangulationBuilder, t_a: _FaceTarget,
               t_b: _FaceTarget, axis_id: EdgeId) -> None:
    """Glue two boundary faces across their common edge ``axis_id``, swapping
    the axis endpoints; this identifies each face's two non-axis edges with
    the other face's, in crossed order."""
    if (t_a.tet, t_a.face) == (t_b.tet, t_b.face):
        raise TriangulationError(
            f"folding would glue face {t_a.tet}:{t_a.face} to itself"
        )
    axis_slope = axis_id[0]
    others = sorted(
        (s for s in {eid[0] for eid in t_a.ids.values()} if s != axis_slope),
        key=_slope_key,
    )
    o1, o2 = others
    ax_a = t_a.key_with_slope(axis_slope)
    ax_b = t_b.key_with_slope(axis_slope)
    if t_a.ids[ax_a] != axis_id or t_b.ids[ax_b] != axis_id:
        raise TriangulationError("fold axis id mismatch between the two faces")
    a_a = t_a.corner(ax_a, t_a.key_with_slope(o1))
    b_a = t_a.corner(ax_a, t_a.key_with_slope(o2))
    c_a = t_a.corner(t_a.key_with_slope(o1), t_a.key_with_slope(o2))
    a_b = t_b.corner(ax_b, t_b.key_with_slope(o1))
    b_b = t_b.corner(ax_b, t_b.key_with_slope(o2))
    c_b = t_b.corner(t_b.key_with_slope(o1), t_b.key_with_slope(o2))
    images = [None] * 4
    images[a_a] = b_b
    images[b_a] = a_b
    images[c_a] = c_b
    images[t_a.face] = t_b.face
    perm = Perm4(tuple(images))
    if perm.is_even:
        raise TriangulationError(
            f"fold of {t_a.tet}:{t_a.face} onto {t_b.tet}:{t_b.face} would "
            "violate orientability"
        )
    builder.glue(t_a.tet, t_a.face, t_b.tet, perm)


def layer_tetrahedron(
    builder: TriangulationBuilder,
    boundary: PuncturedTorusBoundary,
    step: WalkStep,
) -> PuncturedTorusBoundary:
    """Attach one tetrahedron per lift of ``step.covered`` onto the boundary
    (one for a once-punctured torus, two for a twice-punctured one) and
    return the new boundary, whose diagonal now carries ``step.added``."""
    targets = [_FaceTarget.from_boundary_triangle(t) for t in boundary.triangles]
    new_targets, _ = _attach_layer(builder, targets, step)
    return PuncturedTorusBoundary(
        tuple(t.to_boundary_triangle() for t in new_targets)
    )


def fold(
    builder: TriangulationBuilder,
    boundary: PuncturedTorusBoundary,
    axis: Slope,
) -> None:
    """Close the boundary by folding its triangles pairwise across their
    common ``axis`` edges, identifying the remaining two slopes with each
    other.  Rejects folds that would glue a face to itself or reverse
    orientation."""
    targets = [_FaceTarget.from_boundary_triangle(t) for t in boundary.triangles]
    _fold_targets(builder, targets, axis)


# ---------------------------------------------------------------------------
# cap removal


def _boundary_slope_of_label(name: str) -> Slope:
    base = name.split("_")[0]
    if base in ("P1", "P2"):
        return PIVOT
    if base == "O0":
        return INFINITY
    if base == "O1":
        return DIAGONAL
    raise TriangulationError(
        f"exposed boundary edge lies on class {name!r}, which carries no "
        "punctured-torus slope"
    )


def remove_cusp_tets(
    t: Triangulation, cusp: str
) -> tuple[Triangulation, Optional[PuncturedTorusBoundary]]:
    """Remove the tetrahedra meeting a crossing-circle cusp of a seed.

    Returns the remaining complex (with the covering faces now boundary) and
    the punctured-torus boundary with slope ids on its edges -- or None for
    the degenerate case where nothing remains.  Slope ids come from the
    seed's edge labels when present (``P*`` is 0/1, ``O0*`` is 1/0, ``O1*``
    is -1/1); otherwise vertical/horizontal/diagonal roles are assigned
    structurally, with the convention that of the two edge classes doubled
    between one triangle pair, the lower-indexed one carries 0/1.
    """
    label = None
    for idx, name in t.cusp_labels.items():
        if name == cusp:
            label = idx
    if label is None or cusp == "knot":
        raise TriangulationError(
            f"cusp {cusp!r} is not a removable crossing-circle cusp here"
        )
    vclass = t.vertex_classes()[label]
    removed = sorted({tet for tet, _ in vclass.corners})
    exposed: list[tuple[int, int]] = []
    for tet in removed:
        for face in range(4):
            gl = t.gluing(tet, face)
            if gl is not None and gl[0] not in removed:
                exposed.append((gl[0], gl[1](face)))
    exposed = sorted(set(exposed))

    builder = TriangulationBuilder.from_triangulation(t)
    remap = builder.remove_tets(removed)

    if not exposed:
        boundary = None
    elif len(exposed) not in (2, 4):
        raise TriangulationError(
            f"cusp {cusp!r} exposes {len(exposed)} faces; expected 2 or 4"
        )
    elif t.edge_labels:
        triangles = []
        for tet, face in exposed:
            ids = {
                pair: (_boundary_slope_of_label(t.label_of(tet, pair)), 0)
                for pair in _face_pairs(face)
            }
            triangles.append(
                BoundaryTriangle(remap[tet], face, tuple(sorted(ids.items())))
            )
        boundary = PuncturedTorusBoundary(tuple(triangles))
    else:
        boundary = _structural_boundary(t, exposed, set(removed), remap)

    new_t = builder.build()
    # carry surviving cusp labels over by corner membership (the knot cusp
    # may split into several boundary-touching vertex classes; each keeps
    # the name)
    corner_sets = {
        idx: {
            (remap[tet], v)
            for tet, v in t.vertex_classes()[idx].corners
            if tet in remap
        }
        for idx, name in t.cusp_labels.items()
        if name != cusp
    }
    new_cusp_labels: dict[int, str] = {}
    for v in new_t.vertex_classes():
        corners = set(v.corners)
        for idx, old in corner_sets.items():
            if corners & old:
                new_cusp_labels[v.index] = t.cusp_labels[idx]
                break
    curves = {
        name: {remap[tet]: triple for tet, triple in rows.items() if tet in remap}
        for name, rows in t.cusp_curves.items()
    }
    result = Triangulation(
        new_t.gluing_rows(),
        cusp_labels=new_cusp_labels,
        cusp_curves=curves,
        validate=False,
    )
    return result, boundary


def _face_pairs(face: int) -> list[tuple[int, int]]:
    verts = FACE_VERTICES[face]
    return [
        (verts[0], verts[1]),
        (verts[0], verts[2]),
        (verts[1], verts[2]),
    ]


_Slot = tuple[int, int, tuple[int, int]]  # (tet, face, sorted vertex pair)


def _partner_slot(t: Triangulation, removed: set[int], slot: _Slot) -> _Slot:
    """Fan around an edge from one boundary face slot to the opposite one.

    Starting at an un-glued (or to-be-un-glued) face of ``t``, pivot through
    the interior gluings around the edge until the fan ends at another
    boundary face; faces glued to a tetrahedron in ``removed`` count as
    boundary.  The two ends of the fan are the two sides of a single edge of
    the boundary surface.
    """
    tet, face, pair = slot
    while True:
        exit_face = next(
            f for f in range(4) if f not in pair and f != face
        )
        gl = t.gluing(tet, exit_face)
        if gl is None or gl[0] in removed:
            return (tet, exit_face, pair)
        nxt, perm = gl
        tet, face, pair = nxt, perm(exit_face), tuple(sorted(perm(v) for v in pair))


def _structural_boundary(
    t: Triangulation,
    exposed: list[tuple[int, int]],
    removed: set[int],
    remap: dict[int, int],
) -> PuncturedTorusBoundary:
    """Assign slope ids to a twice-punctured boundary by adjacency structure.

    The surface's own edges are recovered by pairing boundary face slots
    through edge fans.  A twice-punctured torus of four triangles has two
    edges each joining a distinct triangle pair (these are the two lifts of
    1/0) and two triangle pairs joined doubly (0/1 and -1/1); within each
    doubled pair the edge whose germ sorts first carries 0/1.
    """
    partner: dict[_Slot, _Slot] = {}
    for tet, face in exposed:
        for pair in _face_pairs(face):
            slot = (tet, face, pair)
            if slot in partner:
                continue
            other = _partner_slot(t, removed, slot)
            if other == slot or other[:2] not in exposed:
                raise TriangulationError(
                    "exposed boundary is not a twice-punctured torus"
                )
            partner[slot] = other
            partner[other] = slot
    edges = sorted({tuple(sorted((s, partner[s]))) for s in partner})
    by_pair: dict[frozenset, list[tuple[_Slot, _Slot]]] = {}
    for s1, s2 in edges:
        by_pair.setdefault(frozenset((s1[:2], s2[:2])), []).append((s1, s2))
    ids: dict[_Slot, EdgeId] = {}
    vertical = 0
    doubled = 0
    for key in sorted(by_pair, key=lambda k: min(by_pair[k])):
        group = sorted(by_pair[key])
        if len(group) == 1:
            eid = (INFINITY, vertical)
            vertical += 1
            for slot in group[0]:
                ids[slot] = eid
        elif len(group) == 2:
            for slope, (s1, s2) in zip((PIVOT, DIAGONAL), group):
                ids[s1] = ids[s2] = (slope, doubled)
            doubled += 1
        else:
            raise TriangulationError(
                "exposed boundary is not a twice-punctured torus"
            )
    if vertical != 2 or doubled != 2:
        raise TriangulationError(
            f"unexpected boundary structure: {vertical} single, {doubled} doubled"
        )
    triangles = []
    for tet, face in exposed:
        entries = {
            pair: ids[(tet, face, pair)] for pair in _face_pairs(face)
        }
        triangles.append(
            BoundaryTriangle(remap[tet], face, tuple(sorted(entries.items())))
        )
    return PuncturedTorusBoundary(tuple(triangles))


# ---------------------------------------------------------------------------
# the minimal family


def _check_params(p: int, q: int) -> None:
    if not (isinstance(p, int) and isinstance(q, int)) or p < 2 or q < 2:
        raise ValueError(f"twist parameters must be integers >= 2, got ({p}, {q})")


def build_minimal(p: int, q: int) -> Triangulation:
    """The 6 + (p-2) + (q-2) tetrahedron filling of the ten-tetrahedron seed.

    Removes both prism caps, layers each exposed once-punctured torus along
    the Farey walk to -1/n (n = p resp. q), folds, and labels the resulting
    edge classes ``E0, E1, P1, O0_1, ..., P2, O0_2, ...``.  The knot cusp's
    meridian/longitude curve data is carried over from the seed.
    """
    _check_params(p, q)
    seed = borromean10()
    label_indices = {name: idx for idx, name in seed.edge_labels.items()}
    seed_classes = seed.edge_classes()

    # germs (on the six surviving tets) of every seed edge class
    seed_germs = {
        name: [
            (tet, pair)
            for tet, pair, _ in seed_classes[idx].members
            if tet <= 5
        ]
        for name, idx in label_indices.items()
        if not name.startswith("cap")
    }

    builder = TriangulationBuilder.from_triangulation(seed)
    cap_tets: list[int] = []
    side_boundaries: dict[int, PuncturedTorusBoundary] = {}
    for clasp in ("clasp1", "clasp2"):
        vclass = next(
            v for v in seed.vertex_classes()
            if seed.cusp_labels.get(v.index) == clasp
        )
        cap_tets.extend({tet for tet, _ in vclass.corners})
    remap = builder.remove_tets(cap_tets)

    for clasp in ("clasp1", "clasp2"):
        vclass = next(
            v for v in seed.vertex_classes()
            if seed.cusp_labels.get(v.index) == clasp
        )
        caps = {tet for tet, _ in vclass.corners}
        exposed = sorted(
            (gl[0], gl[1](face))
            for tet in caps
            for face in range(4)
            if (gl := seed.gluing(tet, face)) is not None and gl[0] not in caps
        )
        triangles = []
        sides = set()
        for tet, face in exposed:
            ids = {}
            for pair in _face_pairs(face):
                name = seed.label_of(tet, pair)
                sides.add(int(name[-1]))
                ids[pair] = (_boundary_slope_of_label(name), 0)
            triangles.append(
                BoundaryTriangle(remap[tet], face, tuple(sorted(ids.items())))
            )
        if len(sides) != 1:
            raise TriangulationError(
                f"cap removal for {clasp} exposed mixed side labels {sides}"
            )
        side_boundaries[sides.pop()] = PuncturedTorusBoundary(tuple(triangles))
    if sorted(side_boundaries) != [1, 2]:
        raise TriangulationError("expected one boundary per side")

    expected_merges: list[tuple[tuple[int, tuple[int, int]], str]] = []
    new_labels: dict[tuple[int, tuple[int, int]], str] = {}
    for side, n in ((1, p), (2, q)):
        FillingSpec(f"clasp{side}", Slope(-1, n), "minimal")
        boundary = side_boundaries[side]
        walk = walk_to_slope(STANDARD_START, Slope(-1, n))
        targets = [
            _FaceTarget.from_boundary_triangle(tri) for tri in boundary.triangles
        ]
        for j, step in enumerate(walk.steps[:-1]):
            targets, infos = _attach_layer(builder, targets, step)
            (info,) = infos
            germ = (info.tet, (2, 3))
            if j <= n - 4:
                new_labels[germ] = f"O{j + 2}_{side}"
            else:  # the last layer's new edge folds onto the 0/1 class
                expected_merges.append((germ, f"P{side}"))
        if n == 2:  # no layers: the -1/1 class folds onto the 0/1 class
            germ = seed_germs[f"O1_{side}"][0]
            expected_merges.append((germ, f"P{side}"))
        last = walk.steps[-1]
        _fold_targets(builder, targets, last.covered)

    bare = builder.build(validate=True)
    germ_class = {
        (tet, pair): cls.index
        for cls in bare.edge_classes()
        for tet, pair, _ in cls.members
    }

    edge_labels: dict[int, str] = {}

    def assign(germs: list, name: str) -> None:
        indices = {germ_class[g] for g in germs}
        if len(indices) != 1:
            raise TriangulationError(
                f"edge identifications split the {name} class: {indices}"
            )
        idx = indices.pop()
        if idx in edge_labels and edge_labels[idx] != name:
            raise TriangulationError(
                f"classes {edge_labels[idx]} and {name} merged unexpectedly"
            )
        edge_labels[idx] = name

    for name, germs in seed_germs.items():
        if name == "O1_1" and p == 2:
            continue
        if name == "O1_2" and q == 2:
            continue
        assign(germs, name)
    for germ, name in new_labels.items():
        assign([germ], name)
    for germ, partner in expected_merges:
        target = germ_class[germ]
        if edge_labels.get(target) != partner:
            raise TriangulationError(
                f"fold did not identify {germ} with {partner}"
            )

    classes = bare.edge_classes()
    if len(classes) != p + q + 2 or len(edge_labels) != len(classes):
        raise TriangulationError(
            f"expected {p + q + 2} labelled edge classes, got "
            f"{len(edge_labels)} labels on {len(classes)} classes"
        )
    if bare.size != p + q + 2:
        raise TriangulationError(f"expected {p + q + 2} tets, got {bare.size}")
    if len(bare.vertex_classes()) != 1:
        raise TriangulationError("filled complex should have a single cusp")

    curves = {
        name: {tet: triple for tet, triple in rows.items() if tet <= 5}
        for name, rows in seed.cusp_curves.items()
    }
    return Triangulation(
        bare.gluing_rows(),
        edge_labels=edge_labels,
        cusp_labels={0: "knot"},
        cusp_curves=curves,
        validate=False,
    )


def _fold_targets(
    builder: TriangulationBuilder, targets: list[_FaceTarget], axis: Slope
) -> None:
    groups: dict[EdgeId, list[_FaceTarget]] = {}
    for target in targets:
        key = target.key_with_slope(axis)
        groups.setdefault(target.ids[key], []).append(target)
    for axis_id in sorted(groups, key=lambda e: (_slope_key(e[0]), e[1])):
        pair = groups[axis_id]
        if len(pair) != 2:
            raise TriangulationError(
                f"fold axis {axis_id} lies on {len(pair)} triangles"
            )
        _fold_pair(builder, pair[0], pair[1], axis_id)


# ---------------------------------------------------------------------------
# the canonical family

#: Frozen interface conventions: reflect each square of the interface surface
#: across its drawn (negative) diagonal, and seed the towers' first-level
#: vertex roles with lattice orientation -1.  Validated against the minimal
#: family: both settings produce geometric triangulations whose volumes agree.
_CANONICAL_REFLECTION = "negative"
_CANONICAL_SEED_DET = -1

_NEGATIVE_PARTNERS = {"L1": "U1", "U1": "L1", "L2": "U2", "U2": "L2"}
_POSITIVE_PARTNERS = {"L1": "L1", "U1": "U1", "L2": "L2", "U2": "U2"}


def _reflect_point(variant: str, name: str, pt: tuple[int, int]) -> tuple[int, int]:
    x, y = pt
    square = 1 if name in ("L1", "U1") else 2
    if variant == "negative":
        return (1 - y, 1 - x) if square == 1 else (2 - y, 2 - x)
    if variant == "positive":
        return (y, x) if square == 1 else (y + 1, x - 1)
    raise ValueError(f"unknown reflection variant {variant!r}")


def _double_cover_tower(
    builder: TriangulationBuilder, n: int, seed_det: int
) -> tuple[dict[str, tuple[int, int, dict]], dict[int, dict]]:
    """Grow the doubled layered solid torus for twist parameter ``n``.

    Walks the Farey graph from (1/0, -1/1, 0/1) to the triangle containing
    -1/(2n-1), attaching two tetrahedra per step (one per lift of the covered
    slope), then folds across the two lifts of -1/(2n-2).  Returns the four
    interface records name -> (tet, face, corner map) and every layered
    tetrahedron's edge-id map.
    """
    targets: list[Union[_FaceTarget, _SurfaceTarget]] = list(_standard_double_surface())
    records: list = []
    walk = walk_to_slope(STANDARD_START, Slope(-1, 2 * n - 1))
    if len(walk.steps) != 2 * n - 2:
        raise TriangulationError(
            f"double-cover walk has {len(walk.steps)} steps; expected {2 * n - 2}"
        )
    tet_ids: dict[int, dict] = {}
    for step in walk.steps:
        targets, infos = _attach_layer(
            builder, targets, step, seed_det=seed_det, records=records
        )
        for info in infos:
            tet_ids[info.tet] = info.edge_ids
        if len(targets) != 4:
            raise TriangulationError("double-cover boundary lost triangles")
    last = walk.steps[-1]
    axis = next(s for s in last.kept if s != PIVOT)
    _fold_targets(builder, targets, axis)
    if len(records) != 4:
        raise TriangulationError(
            f"double-cover tower produced {len(records)} interface faces"
        )
    by_name = {name: (tet, face, cmap) for tet, face, name, cmap in records}
    if len(by_name) != 4:
        raise TriangulationError("interface triangle covered twice")
    return by_name, tet_ids


def _glue_interface(
    builder: TriangulationBuilder,
    rec1: dict[str, tuple[int, int, dict]],
    rec2: dict[str, tuple[int, int, dict]],
    variant: str,
) -> None:
    partners = (
        _NEGATIVE_PARTNERS if variant == "negative" else _POSITIVE_PARTNERS
    )
    for name in ("L1", "U1", "L2", "U2"):
        t1, f1, cm1 = rec1[name]
        t2, f2, cm2 = rec2[partners[name]]
        inverse2 = {pt: v for v, pt in cm2.items()}
        images = [None] * 4
        for v, pt in cm1.items():
            images[v] = inverse2[_reflect_point(variant, name, pt)]
        images[f1] = f2
        perm = Perm4(tuple(images))
        if perm.is_even:
            raise TriangulationError(
                f"interface gluing of {name} would violate orientability"
            )
        builder.glue(t1, f1, t2, perm)


def build_canonical(
    p: int,
    q: int,
    *,
    _reflection: str = _CANONICAL_REFLECTION,
    _seed_det: int = _CANONICAL_SEED_DET,
) -> Triangulation:
    """The 4(p-1) + 4(q-1) tetrahedron doubled-layered-torus triangulation.

    Two towers are grown over copies of the same four-triangle surface and
    glued to each other along it by per-square diagonal reflections.  The
    expected edge identifications are verified: each side's 0/1 lifts merge
    with the other side's 1/0 lifts (classes ``P1``, ``P2``), the two
    diagonal lifts give one class each shared by both sides (``O1a``,
    ``O1b``), deeper slopes -1/j stay distinct per lift and side, and the
    top folds merge each side's final slope into its 0/1 class.
    """
    _check_params(p, q)
    FillingSpec("clasp1", Slope(-1, p), "canonical-double-cover")
    FillingSpec("clasp2", Slope(-1, q), "canonical-double-cover")
    builder = TriangulationBuilder()
    rec1, ids1 = _double_cover_tower(builder, p, _seed_det)
    rec2, ids2 = _double_cover_tower(builder, q, _seed_det)
    _glue_interface(builder, rec1, rec2, _reflection)
    t = builder.build(validate=True)

    expected_size = 4 * (p - 1) + 4 * (q - 1)
    if t.size != expected_size:
        raise TriangulationError(
            f"expected {expected_size} tets, got {t.size}"
        )
    if not t.is_boundary_free():
        raise TriangulationError("canonical complex has boundary left over")

    germ_class = {
        (tet, pair): cls.index
        for cls in t.edge_classes()
        for tet, pair, _ in cls.members
    }
    groups: dict[str, set[int]] = {}
    for side, ids, n in ((1, ids1, p), (2, ids2, q)):
        final = Slope(-1, 2 * n - 1)
        for tet, pairs in ids.items():
            for pair, (slope, lift) in pairs.items():
                if slope == PIVOT or slope == final:
                    name = f"P{side}"
                elif slope == INFINITY:
                    name = f"P{3 - side}"
                elif slope == DIAGONAL:
                    name = f"O1{'ab'[lift]}"
                else:
                    name = f"O{slope.den}{'ab'[lift]}_{side}"
                groups.setdefault(name, set()).add(germ_class[(tet, pair)])
    edge_labels: dict[int, str] = {}
    for name, indices in groups.items():
        if len(indices) != 1:
            raise TriangulationError(
                f"edge identifications split the {name} class: {indices}"
            )
        idx = indices.pop()
        if idx in edge_labels:
            raise TriangulationError(
                f"classes {edge_labels[idx]} and {name} merged unexpectedly"
            )
        edge_labels[idx] = name
    classes = t.edge_classes()
    if len(classes) != expected_size or len(edge_labels) != len(classes):
        raise TriangulationError(
            f"expected {expected_size} labelled edge classes, got "
            f"{len(edge_labels)} labels on {len(classes)} classes"
        )
    if len(t.vertex_classes()) != 1:
        raise TriangulationError("canonical complex should have a single cusp")
    return Triangulation(
        t.gluing_rows(),
        edge_labels=edge_labels,
        cusp_labels={0: "knot"},
        validate=False,
    )
