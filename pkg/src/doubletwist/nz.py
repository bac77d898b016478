"""Edge-incidence bookkeeping for labelled triangulations.

For a one-vertex ideal triangulation with labelled edges and peripheral
curve data, this module assembles:

* the incidence matrix, whose edge rows count how many edges of each
  tetrahedron land in a given edge class, split by edge letter (``a``,
  ``b``, ``c``), and whose curve rows record the per-tetrahedron shape
  exponents of the cusp curves;
* the change-of-variables matrix obtained by differencing the ``c``
  column out of each tetrahedron block, two columns per tetrahedron;
* the target vector combining edge degrees and curve winding data;
* an integer solution of ``matrix @ b == target``, found sparsity-first
  so that structurally sparse solutions are preferred, with a Hermite
  normal form fallback for the general case.

The same matrix can be assembled incrementally, starting from the
ten-tetrahedron seed and replaying the column/row updates that attaching
one solid-torus layer at a time performs; :func:`incremental_nz_data`
implements that path so tests can confirm it agrees with direct
assembly on the final triangulation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .constructions import borromean10
from .triangulation import (
    LETTERS,
    Triangulation,
    TriangulationError,
    edge_letter,
)

__all__ = [
    "NZData",
    "c_vector",
    "incidence_matrix",
    "incremental_nz_data",
    "nz_data",
    "nz_matrix",
    "row_order",
    "solve_b_vector",
]


# --------------------------------------------------------------------------
# Row ordering
# --------------------------------------------------------------------------


def _edge_sort_key(label: str, index: int) -> tuple:
    """Sort key placing edge labels in table order.

    ``E*`` rows come first, then the side-1 block (``P1`` ahead of
    ``O0_1``, ``O1_1``, ...), then the side-2 block, then any remaining
    labels in edge-class order.
    """
    if label.startswith("E") and label[1:].isdigit():
        return (0, int(label[1:]), index)
    for side in (1, 2):
        if label == f"P{side}":
            return (side, -1, index)
        stem, _, suffix = label.partition("_")
        if suffix == str(side) and stem.startswith("O") and stem[1:].isdigit():
            return (side, int(stem[1:]), index)
    return (3, index, index)


def _curve_sort_key(name: str) -> tuple:
    """Sort key for cusp-curve rows: group by cusp, meridian before longitude."""
    cusp, _, kind = name.rpartition(":")
    rank = {"m": 0, "l": 1}.get(kind, 2)
    return (cusp, rank, name)


def row_order(
    t: Triangulation, exclude_edges: Iterable[str] = ()
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Return (edge row labels, curve row labels) in table order."""
    dropped = set(exclude_edges)
    classes = t.edge_classes()
    missing = [cls.index for cls in classes if cls.index not in t.edge_labels]
    if missing:
        raise TriangulationError(
            f"edge classes {missing} have no labels; label all edges first"
        )
    labelled = [(t.edge_labels[cls.index], cls.index) for cls in classes]
    unknown = dropped - {label for label, _ in labelled}
    if unknown:
        raise TriangulationError(f"cannot exclude unknown edge labels {sorted(unknown)}")
    kept = [(label, idx) for label, idx in labelled if label not in dropped]
    kept.sort(key=lambda item: _edge_sort_key(*item))
    curves = tuple(sorted(t.cusp_curves, key=_curve_sort_key))
    return tuple(label for label, _ in kept), curves


# --------------------------------------------------------------------------
# Matrix assembly
# --------------------------------------------------------------------------


def incidence_matrix(
    t: Triangulation, exclude_edges: Iterable[str] = ()
) -> tuple[tuple[int, ...], ...]:
    """Per-row (a, b, c) incidence counts, three columns per tetrahedron.

    Edge rows count the edges of each tetrahedron in the class, split by
    edge letter; curve rows carry the stored per-tetrahedron shape
    exponent triples of each cusp curve.
    """
    edge_labels, curve_labels = row_order(t, exclude_edges)
    n = t.size
    rows: list[tuple[int, ...]] = []
    for label in edge_labels:
        cls = t.labelled_class(label)
        counts = t.degree_vector(cls)
        rows.append(tuple(value for triple in counts for value in triple))
    for name in curve_labels:
        triples = t.cusp_curves[name]
        flat: list[int] = []
        for tet in range(n):
            flat.extend(triples.get(tet, (0, 0, 0)))
        rows.append(tuple(flat))
    return tuple(rows)


def _difference_columns(incidence: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Collapse each (a, b, c) block to the pair (a - c, b - c)."""
    out: list[tuple[int, ...]] = []
    for row in incidence:
        pairs: list[int] = []
        for j in range(0, len(row), 3):
            a, b, c = row[j], row[j + 1], row[j + 2]
            pairs.extend((a - c, b - c))
        out.append(tuple(pairs))
    return tuple(out)


def nz_matrix(
    t: Triangulation, exclude_edges: Iterable[str] = ()
) -> tuple[tuple[int, ...], ...]:
    """The incidence matrix with the ``c`` column differenced out: two
    columns per tetrahedron, ``(a - c, b - c)``."""
    return _difference_columns(incidence_matrix(t, exclude_edges))


def c_vector(t: Triangulation, exclude_edges: Iterable[str] = ()) -> tuple[int, ...]:
    """Target vector: ``2 - sum(c)`` per edge row, ``-sum(c)`` per curve row."""
    edge_labels, curve_labels = row_order(t, exclude_edges)
    incidence = incidence_matrix(t, exclude_edges)
    out: list[int] = []
    for k, label in enumerate(edge_labels):
        c_sum = sum(incidence[k][j] for j in range(2, len(incidence[k]), 3))
        out.append(2 - c_sum)
    base = len(edge_labels)
    for k, name in enumerate(curve_labels):
        row = incidence[base + k]
        c_sum = sum(row[j] for j in range(2, len(row), 3))
        out.append(-c_sum)
    return tuple(out)


# --------------------------------------------------------------------------
# Integer solving
# --------------------------------------------------------------------------


def _solve_on_support(
    rows: Sequence[Sequence[int]], target: Sequence[int], support: Sequence[int]
) -> Optional[tuple[int, ...]]:
    """Solve the system restricted to ``support`` columns, exactly.

    Returns the full-width integer vector when the restricted system is
    consistent and the (unique, in the full-rank case) solution is
    integral; otherwise None.  Underdetermined consistent systems return
    the solution with free columns set to zero when that is integral.
    """
    m = [[Fraction(row[j]) for j in support] + [Fraction(tv)] for row, tv in zip(rows, target)]
    n_cols = len(support)
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in range(n_cols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][col]
        m[r] = [value * inv for value in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [value - factor * pivot_value for value, pivot_value in zip(m[i], m[r])]
        pivots.append((r, col))
        r += 1
    for i in range(r, len(m)):
        if m[i][n_cols] != 0:
            return None
    values = [Fraction(0)] * n_cols
    for row_idx, col in pivots:
        values[col] = m[row_idx][n_cols]
    if any(value.denominator != 1 for value in values):
        return None
    full = [0] * len(rows[0])
    for col, value in zip(support, values):
        full[col] = int(value)
    return tuple(full)


def _column_hermite(
    rows: Sequence[Sequence[int]],
) -> tuple[list[list[int]], list[list[int]], list[tuple[int, int]]]:
    """Column-echelon reduction by unimodular column operations.

    Returns (H, V, pivots) with ``A @ V == H``, V unimodular, and pivots
    a list of (row, column) positions of the echelon pivots.
    """
    h = [list(row) for row in rows]
    n_rows = len(h)
    n_cols = len(h[0]) if h else 0
    v = [[int(i == j) for j in range(n_cols)] for i in range(n_cols)]

    def col_op(dst: int, src: int, factor: int) -> None:
        for i in range(n_rows):
            h[i][dst] -= factor * h[i][src]
        for i in range(n_cols):
            v[i][dst] -= factor * v[i][src]

    def col_swap(i: int, j: int) -> None:
        for row in h:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    pivots: list[tuple[int, int]] = []
    lead = 0
    for row_idx in range(n_rows):
        if lead >= n_cols:
            break
        while True:
            live = [j for j in range(lead, n_cols) if h[row_idx][j] != 0]
            if not live:
                break
            best = min(live, key=lambda j: abs(h[row_idx][j]))
            col_swap(lead, best)
            done = True
            for j in range(lead + 1, n_cols):
                if h[row_idx][j] != 0:
                    factor = h[row_idx][j] // h[row_idx][lead]
                    col_op(j, lead, factor)
                    if h[row_idx][j] != 0:
                        done = False
            if done:
                break
        if h[row_idx][lead] != 0:
            if h[row_idx][lead] < 0:
                for i in range(n_rows):
                    h[i][lead] = -h[i][lead]
                for i in range(n_cols):
                    v[i][lead] = -v[i][lead]
            pivots.append((row_idx, lead))
            lead += 1
    return h, v, pivots


def _hermite_solve(
    rows: Sequence[Sequence[int]], target: Sequence[int]
) -> tuple[tuple[int, ...], list[tuple[int, ...]]]:
    """Integer solution of ``rows @ x == target`` plus a kernel basis."""
    h, v, pivots = _column_hermite(rows)
    n_cols = len(rows[0])
    y = [0] * n_cols
    used_rows = {row_idx: col for row_idx, col in pivots}
    for row_idx in range(len(rows)):
        acc = sum(h[row_idx][j] * y[j] for j in range(n_cols))
        residual = target[row_idx] - acc
        if row_idx in used_rows:
            col = used_rows[row_idx]
            pivot_value = h[row_idx][col]
            extra = residual - h[row_idx][col] * y[col]
            if extra % pivot_value != 0:
                raise TriangulationError(
                    "no integer solution: matrix assembly is inconsistent"
                )
            y[col] += extra // pivot_value
        elif residual != 0:
            raise TriangulationError(
                "no integer solution: matrix assembly is inconsistent"
            )
    x = [sum(v[i][j] * y[j] for j in range(n_cols)) for i in range(n_cols)]
    pivot_cols = {col for _, col in pivots}
    kernel = [
        tuple(v[i][j] for i in range(n_cols))
        for j in range(n_cols)
        if j not in pivot_cols
    ]
    return tuple(x), kernel


def _l1_reduce(x: Sequence[int], kernel: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Greedy L1-norm reduction of ``x`` against kernel vectors."""
    best = list(x)
    improved = True
    guard = 0
    while improved and guard < 200:
        improved = False
        guard += 1
        for vec in kernel:
            for step in (1, -1):
                while True:
                    candidate = [value + step * kv for value, kv in zip(best, vec)]
                    if sum(abs(value) for value in candidate) < sum(
                        abs(value) for value in best
                    ):
                        best = candidate
                        improved = True
                    else:
                        break
    return tuple(best)


def solve_b_vector(
    nz: Sequence[Sequence[int]], c_vec: Sequence[int]
) -> tuple[int, ...]:
    """Integer vector ``b`` with ``nz @ b == c_vec``.

    Sparse solutions are searched first (single columns, then small
    supports in lexicographic order), which finds the structurally
    meaningful solutions on the families built here; a Hermite normal
    form solve with greedy L1 reduction covers the general case.
    Raises :class:`TriangulationError` when no integer solution exists.
    """
    rows = [tuple(row) for row in nz]
    if not rows:
        raise TriangulationError("empty matrix")
    n_cols = len(rows[0])
    if any(len(row) != n_cols for row in rows):
        raise TriangulationError("ragged matrix")
    target = tuple(c_vec)
    if len(target) != len(rows):
        raise TriangulationError("target length does not match row count")

    max_support = 3 if n_cols <= 32 else (2 if n_cols <= 128 else 1)
    for size in range(1, max_support + 1):
        for support in combinations(range(n_cols), size):
            found = _solve_on_support(rows, target, support)
            if found is not None:
                return found
    x, kernel = _hermite_solve(rows, target)
    return _l1_reduce(x, kernel)


# --------------------------------------------------------------------------
# Bundle
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NZData:
    """Incidence data, differenced matrix, target vector, and solution.

    Rows are ordered: edge rows in table order, then cusp-curve rows
    (meridian before longitude per cusp).  Columns follow tetrahedron
    order: three per tetrahedron in ``incidence``, two in ``nz``.
    """

    tet_count: int
    edge_row_labels: tuple[str, ...]
    curve_row_labels: tuple[str, ...]
    incidence: tuple[tuple[int, ...], ...]
    nz: tuple[tuple[int, ...], ...]
    c_vec: tuple[int, ...]
    b_vec: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if _difference_columns(self.incidence) != self.nz:
            raise TriangulationError("nz matrix does not match incidence data")
        if len(self.c_vec) != len(self.nz):
            raise TriangulationError("target vector length mismatch")
        if self.b_vec is not None:
            if len(self.b_vec) != 2 * self.tet_count:
                raise TriangulationError("solution vector length mismatch")
            products = tuple(
                sum(entry * bv for entry, bv in zip(row, self.b_vec)) for row in self.nz
            )
            if products != self.c_vec:
                raise TriangulationError("solution vector does not solve the system")

    @property
    def row_labels(self) -> tuple[str, ...]:
        return self.edge_row_labels + self.curve_row_labels

    def row(self, label: str) -> tuple[int, ...]:
        try:
            return self.nz[self.row_labels.index(label)]
        except ValueError:
            raise KeyError(label) from None

    def column_pair(self, tet: int) -> tuple[tuple[int, int], ...]:
        """The ``(a - c, b - c)`` pairs of one tetrahedron, row by row."""
        return tuple((row[2 * tet], row[2 * tet + 1]) for row in self.nz)

    def to_tsv(self) -> str:
        """Tab-separated rendering of the differenced matrix, zeros blank."""
        header = [""]
        for tet in range(self.tet_count):
            header.extend([f"D{tet}", ""])
        lines = ["\t".join(header)]
        for label, row in zip(self.row_labels, self.nz):
            cells = [label] + [str(value) if value else "" for value in row]
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "tet_count": self.tet_count,
            "edge_rows": list(self.edge_row_labels),
            "curve_rows": list(self.curve_row_labels),
            "incidence": [list(row) for row in self.incidence],
            "nz": [list(row) for row in self.nz],
            "c": list(self.c_vec),
            "b": list(self.b_vec) if self.b_vec is not None else None,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def nz_data(
    t: Triangulation,
    exclude_edges: Iterable[str] = (),
    b_vec: Optional[Sequence[int]] = None,
    solve: bool = True,
) -> NZData:
    """Assemble the full bundle for a labelled triangulation.

    ``b_vec`` may supply an externally chosen solution (it is validated);
    otherwise one is solved for unless ``solve`` is false.
    """
    edge_labels, curve_labels = row_order(t, exclude_edges)
    incidence = incidence_matrix(t, exclude_edges)
    nz = _difference_columns(incidence)
    c_vec = c_vector(t, exclude_edges)
    chosen: Optional[tuple[int, ...]]
    if b_vec is not None:
        chosen = tuple(int(v) for v in b_vec)
    elif solve:
        chosen = solve_b_vector(nz, c_vec)
    else:
        chosen = None
    return NZData(
        tet_count=t.size,
        edge_row_labels=edge_labels,
        curve_row_labels=curve_labels,
        incidence=incidence,
        nz=nz,
        c_vec=c_vec,
        b_vec=chosen,
    )


# --------------------------------------------------------------------------
# Incremental assembly
# --------------------------------------------------------------------------


_CAP_LABELS = ("cap1", "cap2")
_CAP_TETS = (6, 7, 8, 9)


@dataclass
class _IncrementalRows:
    """Mutable incidence rows keyed by edge label, plus curve rows."""

    n_cols: int
    edges: dict[str, list[int]] = field(default_factory=dict)
    curves: dict[str, list[int]] = field(default_factory=dict)

    def new_edge(self, label: str) -> None:
        self.edges[label] = [0] * self.n_cols

    def grow(self, extra_tets: int) -> None:
        for row in self.edges.values():
            row.extend([0] * (3 * extra_tets))
        for row in self.curves.values():
            row.extend([0] * (3 * extra_tets))
        self.n_cols += 3 * extra_tets

    def bump(self, label: str, tet: int, letter_counts: tuple[int, int, int]) -> None:
        row = self.edges[label]
        for offset, count in enumerate(letter_counts):
            row[3 * tet + offset] += count


def _seed_core_rows() -> _IncrementalRows:
    """Seed incidence rows restricted to the six core tetrahedra.

    Starts from the ten-tetrahedron seed, drops the two cap-only edge
    rows, and deletes the incidence columns of the four cap tetrahedra.
    """
    seed = borromean10()
    edge_labels, curve_labels = row_order(seed, _CAP_LABELS)
    incidence = incidence_matrix(seed, _CAP_LABELS)
    keep = [j for tet in range(seed.size) if tet not in _CAP_TETS for j in range(3 * tet, 3 * tet + 3)]
    rows = _IncrementalRows(n_cols=len(keep))
    for label, row in zip(edge_labels, incidence):
        rows.edges[label] = [row[j] for j in keep]
    for name, row in zip(curve_labels, incidence[len(edge_labels):]):
        rows.curves[name] = [row[j] for j in keep]
    return rows


def _attach_layers(rows: _IncrementalRows, side: int, count: int, first_tet: int) -> None:
    """Replay the column/row updates of attaching one solid-torus side.

    ``count`` is the number of layered tetrahedra (two fewer than the
    side parameter).  A zero count folds the once-layered boundary
    directly, merging the ``O1`` row into the pivot row.
    """
    pivot = f"P{side}"
    if count == 0:
        merged = rows.edges.pop(f"O1_{side}")
        target = rows.edges[pivot]
        for j, value in enumerate(merged):
            target[j] += value
        return
    for j in range(count):
        tet = first_tet + j
        rows.grow(1)
        outer = f"O{j + 2}_{side}"
        if j + 2 <= count:
            rows.new_edge(outer)
        last = j == count - 1
        rows.bump(pivot, tet, (1, 2, 0) if last else (0, 2, 0))
        rows.bump(f"O{j}_{side}", tet, (1, 0, 0))
        rows.bump(f"O{j + 1}_{side}", tet, (0, 0, 2))
        if not last:
            rows.bump(outer, tet, (1, 0, 0))


def incremental_nz_data(p: int, q: int) -> NZData:
    """Assemble the data for the minimal family by incremental updates.

    Tests compare this against :func:`nz_data` on the directly built
    triangulation; the two paths must agree entry for entry.
    """
    if p < 2 or q < 2:
        raise TriangulationError("both twist parameters must be at least 2")
    rows = _seed_core_rows()
    _attach_layers(rows, side=1, count=p - 2, first_tet=6)
    _attach_layers(rows, side=2, count=q - 2, first_tet=6 + (p - 2))
    tet_count = rows.n_cols // 3

    labelled = sorted(rows.edges, key=lambda label: _edge_sort_key(label, 0))
    curve_labels = tuple(sorted(rows.curves, key=_curve_sort_key))
    incidence_rows = [tuple(rows.edges[label]) for label in labelled]
    incidence_rows.extend(tuple(rows.curves[name]) for name in curve_labels)
    incidence = tuple(incidence_rows)
    nz = _difference_columns(incidence)

    c_vec: list[int] = []
    for k in range(len(labelled)):
        c_sum = sum(incidence[k][j] for j in range(2, rows.n_cols, 3))
        c_vec.append(2 - c_sum)
    for k in range(len(curve_labels)):
        row = incidence[len(labelled) + k]
        c_vec.append(-sum(row[j] for j in range(2, rows.n_cols, 3)))

    return NZData(
        tet_count=tet_count,
        edge_row_labels=tuple(labelled),
        curve_row_labels=curve_labels,
        incidence=incidence,
        nz=nz,
        c_vec=tuple(c_vec),
        b_vec=solve_b_vector(nz, c_vec),
    )
