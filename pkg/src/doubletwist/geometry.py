"""Angle structures, volume maximization, and hyperbolic shape solving.

This module certifies geometricity of the ideal triangulations produced by
:mod:`doubletwist.constructions` in three stages:

1. extract the linear angle-structure system (one equation per edge class
   summing its dihedral angles to 2*pi, one per tetrahedron summing to pi),
   together with an explicit exact feasible point, symbolic in two small
   parameters (eps, delta);
2. maximize the total volume (the sum of Lobachevsky function values over
   all corner angles) over the polytope of positive solutions -- an interior
   maximizer certifies that a complete hyperbolic structure exists with
   these tetrahedra positively oriented;
3. solve the multiplicative gluing and cusp-completeness equations for the
   complex shape parameters by a damped Gauss-Newton iteration seeded from
   the maximizing angles, and recompute the volume from the shapes via the
   Bloch-Wigner dilogarithm.

Stages 2 and 3 compute the volume by two independent routes (real
Lobachevsky series versus complex dilogarithm); their agreement is the
internal correctness oracle used throughout the test suite.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
import scipy.optimize
import scipy.special

from .triangulation import (
    LETTERS,
    Triangulation,
    TriangulationError,
    cusp_fundamental_loops,
    edge_letter,
)

__all__ = [
    "AngleForm",
    "AngleVector",
    "LinearSystem",
    "MaximizeResult",
    "MultiplicativeEquation",
    "NewtonResult",
    "ResidualReport",
    "ShapeVector",
    "angle_system",
    "bloch_wigner",
    "certify",
    "gluing_and_cusp_equations",
    "holonomies",
    "lemma_angle_structure",
    "lobachevsky",
    "maximize_volume",
    "newton_solve",
    "numeric_instance",
    "verify_angle_structure",
    "volume",
]


# ---------------------------------------------------------------------------
# Lobachevsky function and Bloch-Wigner dilogarithm

# Series coefficients zeta(2n) / (n (2n+1)); with the argument reduced to
# [0, pi/2] the ratio between consecutive terms is at most 1/4, so 40 terms
# leave a tail below 1e-24.
_ZETA_COEFF = tuple(
    float(scipy.special.zeta(2 * n)) / (n * (2 * n + 1)) for n in range(1, 41)
)


def _lobachevsky_array(theta: np.ndarray) -> np.ndarray:
    t = np.mod(theta, math.pi)
    flip = t > math.pi / 2
    t = np.where(flip, math.pi - t, t)
    x2 = (t / math.pi) ** 2
    s = np.zeros_like(t)
    p = x2.copy()
    for coef in _ZETA_COEFF:
        s += coef * p
        p *= x2
    safe = np.where(t > 0, t, 1.0)
    val = np.where(t > 0, t * (1.0 - np.log(2.0 * safe) + s), 0.0)
    return np.where(flip, -val, val)


def lobachevsky(theta: float) -> float:
    """The Lobachevsky function -integral_0^theta log|2 sin u| du.

    Odd, pi-periodic; evaluated by reduction to [0, pi/2] followed by the
    zeta-coefficient power series (absolute accuracy well below 1e-13).
    """
    return float(_lobachevsky_array(np.asarray([float(theta)]))[0])


def bloch_wigner(z: complex) -> float:
    """The Bloch-Wigner function D(z) = Im Li2(z) + arg(1 - z) log|z|.

    D(z) is the hyperbolic volume of the ideal tetrahedron of shape z when
    Im z > 0; it vanishes on the real line.
    """
    z = complex(z)
    if z.imag == 0.0:
        return 0.0
    li2 = complex(scipy.special.spence(complex(1.0) - z))
    return li2.imag + cmath.phase(1.0 - z) * math.log(abs(z))


def volume(shapes: Union["ShapeVector", Sequence[complex]]) -> float:
    """Total volume of a shape assignment: the sum of D(z) over tetrahedra."""
    if isinstance(shapes, ShapeVector):
        shapes = shapes.shapes
    return float(sum(bloch_wigner(z) for z in shapes))


# ---------------------------------------------------------------------------
# exact linear forms in (pi, eps, delta)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class AngleForm:
    """An exact linear form  coeff_pi*pi + coeff_eps*eps + coeff_delta*delta."""

    coeff_pi: Fraction = Fraction(0)
    coeff_eps: Fraction = Fraction(0)
    coeff_delta: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff_pi", _frac(self.coeff_pi))
        object.__setattr__(self, "coeff_eps", _frac(self.coeff_eps))
        object.__setattr__(self, "coeff_delta", _frac(self.coeff_delta))

    def __add__(self, other: "AngleForm") -> "AngleForm":
        return AngleForm(
            self.coeff_pi + other.coeff_pi,
            self.coeff_eps + other.coeff_eps,
            self.coeff_delta + other.coeff_delta,
        )

    def __sub__(self, other: "AngleForm") -> "AngleForm":
        return AngleForm(
            self.coeff_pi - other.coeff_pi,
            self.coeff_eps - other.coeff_eps,
            self.coeff_delta - other.coeff_delta,
        )

    def scale(self, k) -> "AngleForm":
        k = _frac(k)
        return AngleForm(
            k * self.coeff_pi, k * self.coeff_eps, k * self.coeff_delta
        )

    def is_zero(self) -> bool:
        return not (self.coeff_pi or self.coeff_eps or self.coeff_delta)

    def value(self, eps: float = 0.0, delta: float = 0.0) -> float:
        return (
            float(self.coeff_pi) * math.pi
            + float(self.coeff_eps) * eps
            + float(self.coeff_delta) * delta
        )

    def __str__(self) -> str:
        parts = []
        for coeff, name in (
            (self.coeff_pi, "pi"),
            (self.coeff_eps, "eps"),
            (self.coeff_delta, "delta"),
        ):
            if coeff:
                parts.append(f"{coeff}*{name}")
        return " + ".join(parts) if parts else "0"


_ZERO_FORM = AngleForm()


@dataclass(frozen=True)
class AngleVector:
    """Per-tetrahedron dihedral angle triples (a, b, c).

    Entries are either all :class:`AngleForm` (symbolic) or all floats
    (radians).  Each triple must sum to pi -- exactly in symbolic mode, to
    1e-12 numerically.
    """

    triples: tuple[tuple, ...]

    def __post_init__(self) -> None:
        triples = tuple(tuple(tri) for tri in self.triples)
        object.__setattr__(self, "triples", triples)
        for k, tri in enumerate(triples):
            if len(tri) != 3:
                raise ValueError(f"tet {k}: expected (a, b, c), got {tri!r}")
            if self.symbolic:
                total = tri[0] + tri[1] + tri[2]
                if (total - AngleForm(1)).is_zero() is False:
                    raise ValueError(f"tet {k}: angles sum to {total}, not pi")
            else:
                total = float(tri[0] + tri[1] + tri[2])
                if abs(total - math.pi) > 1e-12:
                    raise ValueError(
                        f"tet {k}: angles sum to {total!r}, not pi"
                    )

    @property
    def symbolic(self) -> bool:
        return bool(self.triples) and isinstance(self.triples[0][0], AngleForm)

    @property
    def size(self) -> int:
        return len(self.triples)

    def flat(self) -> tuple:
        return tuple(v for tri in self.triples for v in tri)

    def numeric(self, eps: float = 0.0, delta: float = 0.0) -> "AngleVector":
        """Substitute numeric (eps, delta); identity on numeric vectors."""
        if not self.symbolic:
            return self
        return AngleVector(
            tuple(
                tuple(f.value(eps, delta) for f in tri) for tri in self.triples
            )
        )

    def min_angle(self) -> float:
        if self.symbolic:
            raise ValueError("min_angle needs a numeric vector")
        return min(self.flat())

    @classmethod
    def from_flat(cls, values: Sequence) -> "AngleVector":
        values = tuple(values)
        if len(values) % 3:
            raise ValueError("flat angle vector length must be divisible by 3")
        return cls(
            tuple(values[3 * k : 3 * k + 3] for k in range(len(values) // 3))
        )


# ---------------------------------------------------------------------------
# the angle-structure linear system


@dataclass(frozen=True)
class LinearSystem:
    """Equality system  sum_i coeff_i * angle_i = rhs * pi  over 3n variables.

    Row order: one row per edge class (rhs 2), then one per tetrahedron
    (rhs 1).  Variable order: (a_0, b_0, c_0, a_1, ...).
    """

    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (len(self.rows) == len(self.rhs) == len(self.labels)):
            raise ValueError("rows, rhs, labels must have equal length")

    @property
    def num_tets(self) -> int:
        return len(self.rows[0]) // 3 if self.rows else 0

    def variables(self) -> tuple[str, ...]:
        return tuple(
            f"{letter}{k}" for k in range(self.num_tets) for letter in LETTERS
        )

    def row(self, label: str) -> tuple[tuple[Fraction, ...], Fraction]:
        for coeffs, rhs, name in zip(self.rows, self.rhs, self.labels):
            if name == label:
                return coeffs, rhs
        raise KeyError(label)

    def as_floats(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.array([[float(c) for c in row] for row in self.rows])
        b = np.array([float(r) * math.pi for r in self.rhs])
        return a, b


def angle_system(t: Triangulation) -> LinearSystem:
    """Edge-sum (2*pi) and tetrahedron-sum (pi) equations of a triangulation.

    Edge rows are labelled by the triangulation's edge labels when present
    (``edge<k>`` otherwise); tetrahedron rows are labelled ``tet<k>``.
    """
    if not t.is_boundary_free():
        raise TriangulationError("angle system needs a boundary-free complex")
    n = t.size
    rows: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    labels: list[str] = []
    for cls in t.edge_classes():
        coeffs = [Fraction(0)] * (3 * n)
        for tet, pair, _ in cls.members:
            coeffs[3 * tet + LETTERS.index(edge_letter(pair))] += 1
        rows.append(tuple(coeffs))
        rhs.append(Fraction(2))
        labels.append(
            t.edge_labels.get(cls.index, f"edge{cls.index}")
            if t.edge_labels
            else f"edge{cls.index}"
        )
    for k in range(n):
        coeffs = [Fraction(0)] * (3 * n)
        coeffs[3 * k] = coeffs[3 * k + 1] = coeffs[3 * k + 2] = Fraction(1)
        rows.append(tuple(coeffs))
        rhs.append(Fraction(1))
        labels.append(f"tet{k}")
    return LinearSystem(tuple(rows), tuple(rhs), tuple(labels))


# ---------------------------------------------------------------------------
# the explicit feasible point, symbolic in (eps, delta)


def _core_forms(p: int, q: int) -> list[tuple[AngleForm, AngleForm, AngleForm]]:
    F = AngleForm
    h = Fraction(1, 2)
    ep = Fraction(2 * p - 5)          # eps slope of b0
    dq = Fraction(q * q - 6 * q + 9, 2)  # delta slope of several forms
    return [
        (
            F(Fraction(1, 3)),
            F(Fraction(1, 6), -ep, dq),
            F(h, ep, -dq),
        ),
        (
            F(Fraction(1, 6), 0, -Fraction(q * q - 2 * q - 1, 2)),
            F(Fraction(1, 3), 0, Fraction(2 * q - 5)),
            F(h, 0, dq),
        ),
        (
            F(Fraction(1, 6), 0, -dq),
            F(Fraction(1, 3)),
            F(h, 0, dq),
        ),
        (
            F(h, -Fraction(p * p - 2 * p - 1, 2)),
            F(Fraction(1, 3), Fraction(2 * p - 5)),
            F(Fraction(1, 6), Fraction(p * p - 6 * p + 9, 2)),
        ),
        (
            F(Fraction(1, 6), -Fraction(p * p - 6 * p + 9, 2)),
            F(Fraction(1, 3)),
            F(h, Fraction(p * p - 6 * p + 9, 2)),
        ),
        (
            F(Fraction(1, 6), -Fraction(p * p - 6 * p + 9, 2)),
            F(Fraction(1, 3)),
            F(h, Fraction(p * p - 6 * p + 9, 2)),
        ),
    ]


def _tower_forms(n: int, slot: int) -> list[tuple[AngleForm, AngleForm, AngleForm]]:
    """Angle forms for the n-2 layered tets of one side (slot 1 = eps, 2 = delta)."""
    F = AngleForm

    def form(cpi, small):
        coeffs = [cpi, 0, 0]
        coeffs[slot] = small
        return F(*coeffs)

    out = []
    for k in range(n - 2):
        if k == 0:
            w = Fraction((n - 2) ** 2)
            out.append(
                (
                    form(0, w),
                    form(Fraction(1, 2), -w / 2),
                    form(Fraction(1, 2), -w / 2),
                )
            )
        else:
            w = Fraction((n - k - 2) ** 2)
            out.append((form(0, w), form(0, 1), form(1, -(w + 1))))
    return out


def lemma_angle_structure(p: int, q: int) -> AngleVector:
    """The explicit exact angle assignment for the minimal filling of (p, q).

    Symbolic in two parameters (eps for the p side, delta for the q side);
    strictly positive and interior for small positive values, with eps = 0
    required when p = 2 and delta = 0 when q = 2.  Satisfies every edge and
    tetrahedron equation of ``angle_system(build_minimal(p, q))`` identically
    as linear forms.
    """
    if p < 2 or q < 2:
        raise ValueError(f"twist parameters must be >= 2, got ({p}, {q})")
    triples = _core_forms(p, q)
    triples.extend(_tower_forms(p, 1))
    triples.extend(_tower_forms(q, 2))
    return AngleVector(tuple(triples))


def numeric_instance(alpha: AngleVector, p: int, q: int) -> AngleVector:
    """A strictly interior numeric instance of a symbolic angle vector.

    Substitutes eps = delta = t with t chosen as 2/5 of the largest value
    keeping every angle inside (0, pi); sides with parameter 2 force their
    small parameter to zero exactly.
    """
    if not alpha.symbolic:
        return alpha
    use_eps = p > 2
    use_delta = q > 2
    bound = math.inf
    for tri in alpha.triples:
        for f in tri:
            slope = Fraction(0)
            if use_eps:
                slope += f.coeff_eps
            if use_delta:
                slope += f.coeff_delta
            if slope < 0:  # keep f > 0
                bound = min(bound, float(f.coeff_pi / -slope) * math.pi)
            if slope > 0:  # keep f < pi
                bound = min(bound, float((1 - f.coeff_pi) / slope) * math.pi)
    t = 0.0 if bound is math.inf else 0.4 * bound
    if (use_eps or use_delta) and t <= 0.0:
        raise ValueError("no positive parameter keeps the angles interior")
    return alpha.numeric(eps=t if use_eps else 0.0, delta=t if use_delta else 0.0)


# ---------------------------------------------------------------------------
# residual verification


@dataclass(frozen=True)
class ResidualReport:
    """Row-by-row residuals of an angle vector against a linear system."""

    symbolic: bool
    labels: tuple[str, ...]
    residuals: tuple
    ok: bool

    @property
    def max_abs(self) -> float:
        if self.symbolic:
            return 0.0 if self.ok else math.nan
        return max((abs(r) for r in self.residuals), default=0.0)

    def failing(self) -> tuple[str, ...]:
        if self.symbolic:
            return tuple(
                lab
                for lab, r in zip(self.labels, self.residuals)
                if not r.is_zero()
            )
        return tuple(
            lab
            for lab, r in zip(self.labels, self.residuals)
            if abs(r) > 1e-11
        )


def verify_angle_structure(
    sys: LinearSystem, alpha: AngleVector, tol: float = 1e-11
) -> ResidualReport:
    """Check an angle vector against the system, exactly or numerically."""
    flat = alpha.flat()
    if len(flat) != 3 * sys.num_tets:
        raise ValueError(
            f"angle vector has {len(flat)} entries, system wants "
            f"{3 * sys.num_tets}"
        )
    residuals = []
    if alpha.symbolic:
        for coeffs, rhs in zip(sys.rows, sys.rhs):
            acc = AngleForm(-rhs)
            for c, f in zip(coeffs, flat):
                if c:
                    acc = acc + f.scale(c)
            residuals.append(acc)
        ok = all(r.is_zero() for r in residuals)
    else:
        for coeffs, rhs in zip(sys.rows, sys.rhs):
            acc = -float(rhs) * math.pi
            for c, v in zip(coeffs, flat):
                if c:
                    acc += float(c) * v
            residuals.append(acc)
        ok = all(abs(r) <= tol for r in residuals)
    return ResidualReport(alpha.symbolic, sys.labels, tuple(residuals), ok)


# ---------------------------------------------------------------------------
# volume maximization over the angle polytope


def _rational_null_basis(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Exact basis of the null space of a rational matrix (RREF back-fill)."""
    m = [list(row) for row in rows]
    if not m:
        return []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = m[r][col]
        m[r] = [x / inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for prow, pcol in enumerate(pivots):
            vec[pcol] = -m[prow][fc]
        basis.append(vec)
    return basis


def _interior_start(sys: LinearSystem) -> np.ndarray:
    """Strictly interior feasible point via an LP maximizing the angle margin."""
    a, b = sys.as_floats()
    m, n3 = a.shape
    c = np.zeros(n3 + 1)
    c[-1] = -1.0  # maximize t
    a_eq = np.hstack([a, np.zeros((m, 1))])
    rows_lo = np.hstack([-np.eye(n3), np.ones((n3, 1))])  # t - x_i <= 0
    rows_hi = np.hstack([np.eye(n3), np.ones((n3, 1))])  # x_i + t <= pi
    a_ub = np.vstack([rows_lo, rows_hi])
    b_ub = np.concatenate([np.zeros(n3), np.full(n3, math.pi)])
    bounds = [(0.0, math.pi)] * n3 + [(0.0, math.pi / 2)]
    res = scipy.optimize.linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b, bounds=bounds,
        method="highs",
    )
    if not res.success or res.x[-1] <= 1e-9:
        raise TriangulationError(
            "no strictly positive angle assignment satisfies the system"
        )
    return res.x[:-1]


@dataclass(frozen=True)
class MaximizeResult:
    """Outcome of volume maximization over the angle polytope."""

    angles: AngleVector
    volume: float
    min_angle: float
    grad_norm: float
    iterations: int
    certified: bool
    message: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "angles": [list(tri) for tri in self.angles.triples],
                "volume": self.volume,
                "min_angle": self.min_angle,
                "grad_norm": self.grad_norm,
                "iterations": self.iterations,
                "certified": self.certified,
                "message": self.message,
            },
            indent=2,
        )


def maximize_volume(
    sys: LinearSystem,
    alpha0: Optional[AngleVector] = None,
    *,
    angle_floor: float = 1e-3,
    grad_tol: float = 1e-9,
    max_iter: int = 200,
) -> MaximizeResult:
    """Maximize total volume over the polytope cut out by ``sys``.

    The feasible set is parameterized through an exact rational null-space
    basis (orthonormalized), on which the functional is strictly concave;
    a damped Newton iteration with backtracking keeps all angles strictly
    inside (0, pi).  The result is *certified* only when the maximizer is
    interior (min angle above ``angle_floor``) and the projected gradient
    norm is below ``grad_tol``; boundary approaches are reported, never
    silently accepted.
    """
    a, b = sys.as_floats()
    n3 = 3 * sys.num_tets
    if alpha0 is None:
        x = _interior_start(sys)
    else:
        x = np.array([float(v) for v in alpha0.numeric().flat()])
        if len(x) != n3:
            raise ValueError("alpha0 does not match the system dimensions")
        if np.max(np.abs(a @ x - b)) > 1e-9:
            raise ValueError("alpha0 does not satisfy the system")
        if np.min(x) <= 0 or np.max(x) >= math.pi:
            raise ValueError("alpha0 is not strictly interior")

    basis = _rational_null_basis(sys.rows)
    if basis:
        nmat = np.array([[float(v) for v in vec] for vec in basis]).T
        qmat, _ = np.linalg.qr(nmat)
    else:
        qmat = np.zeros((n3, 0))

    def vol(xv: np.ndarray) -> float:
        return float(np.sum(_lobachevsky_array(xv)))

    message = "converged"
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = -np.log(2.0 * np.sin(x))
        g = qmat.T @ w
        if np.linalg.norm(g) < grad_tol:
            break
        h = (qmat.T * (-1.0 / np.tan(x))) @ qmat
        # solve -H du = g with -H positive definite (ridge if needed)
        neg_h = -h
        for ridge in (0.0, 1e-12, 1e-8, 1e-4):
            try:
                du = np.linalg.solve(
                    neg_h + ridge * np.eye(len(g)), g
                )
                break
            except np.linalg.LinAlgError:
                continue
        else:
            message = "singular Hessian"
            break
        dx = qmat @ du
        if g @ du <= 0:
            # fall back to steepest ascent if the model is not ascentwise
            du = g
            dx = qmat @ du
        # largest step keeping x strictly inside (0, pi)
        t_max = math.inf
        for j in range(n3):
            if dx[j] < 0:
                t_max = min(t_max, x[j] / -dx[j])
            elif dx[j] > 0:
                t_max = min(t_max, (math.pi - x[j]) / dx[j])
        t = min(1.0, 0.9 * t_max)
        v0 = vol(x)
        slope = float(g @ du)
        while t > 1e-18:
            xt = x + t * dx
            if np.min(xt) > 0 and np.max(xt) < math.pi:
                if vol(xt) >= v0 + 1e-4 * t * slope:
                    break
            t *= 0.5
        else:
            message = "line search failed"
            break
        x = x + t * dx
    else:
        message = "max iterations reached"

    w = -np.log(2.0 * np.sin(x))
    grad_norm = float(np.linalg.norm(qmat.T @ w))
    min_angle = float(np.min(x)) if n3 else 0.0
    certified = (
        message in ("converged",)
        and grad_norm < grad_tol
        and min_angle > angle_floor
    )
    if message == "converged" and min_angle <= angle_floor:
        message = "NOT-CERTIFIED: maximizer approaches the boundary"
    alpha = AngleVector.from_flat([float(v) for v in x])
    return MaximizeResult(
        angles=alpha,
        volume=vol(x),
        min_angle=min_angle,
        grad_norm=grad_norm,
        iterations=iterations,
        certified=certified,
        message=message,
    )


# ---------------------------------------------------------------------------
# multiplicative gluing / cusp equations and the Newton shape solver


@dataclass(frozen=True)
class MultiplicativeEquation:
    """One multiplicative constraint  sign * prod z^ea z'^eb z''^ec = target.

    Edge equations have target exp(2*pi*i) = 1 with angle sum 2*pi; cusp
    curve and loop equations have target 1 (completeness).
    """

    label: str
    kind: str  # "edge" | "curve" | "loop"
    triples: tuple[tuple[int, tuple[int, int, int]], ...]
    sign: int = 1

    def exponents(self) -> dict[int, tuple[int, int, int]]:
        return {tet: triple for tet, triple in self.triples}


def gluing_and_cusp_equations(
    t: Triangulation,
) -> tuple[MultiplicativeEquation, ...]:
    """Edge gluing equations plus cusp-completeness rows.

    Cusp rows come from the triangulation's stored peripheral-curve data
    when present; otherwise a generating set of cross-section loops is
    computed combinatorially for every cusp.
    """
    if not t.is_boundary_free():
        raise TriangulationError(
            "gluing equations need a boundary-free complex"
        )
    equations: list[MultiplicativeEquation] = []
    for cls in t.edge_classes():
        counts: dict[int, list[int]] = {}
        for tet, pair, _ in cls.members:
            counts.setdefault(tet, [0, 0, 0])[
                LETTERS.index(edge_letter(pair))
            ] += 1
        label = (
            t.edge_labels.get(cls.index, f"edge{cls.index}")
            if t.edge_labels
            else f"edge{cls.index}"
        )
        equations.append(
            MultiplicativeEquation(
                label=label,
                kind="edge",
                triples=tuple(
                    (tet, tuple(row)) for tet, row in sorted(counts.items())
                ),
            )
        )
    if t.cusp_curves:
        for name in sorted(t.cusp_curves):
            rows = t.cusp_curves[name]
            equations.append(
                MultiplicativeEquation(
                    label=name,
                    kind="curve",
                    triples=tuple(
                        (tet, tuple(rows[tet])) for tet in sorted(rows)
                    ),
                )
            )
    else:
        for v in t.vertex_classes():
            name = (
                t.cusp_labels.get(v.index, f"cusp{v.index}")
                if t.cusp_labels
                else f"cusp{v.index}"
            )
            for k, loop in enumerate(cusp_fundamental_loops(t, v)):
                equations.append(
                    MultiplicativeEquation(
                        label=f"{name}:loop{k}",
                        kind="loop",
                        triples=loop.triples,
                        sign=loop.sign,
                    )
                )
    return tuple(equations)


@dataclass(frozen=True)
class ShapeVector:
    """Complex shape parameters, one per tetrahedron.

    The companions z' = 1/(1-z) and z'' = 1 - 1/z are derived on demand;
    arg z, arg z', arg z'' are the tet's dihedral angles when Im z > 0.
    """

    shapes: tuple[complex, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "shapes", tuple(complex(z) for z in self.shapes)
        )

    @property
    def size(self) -> int:
        return len(self.shapes)

    def companions(self) -> tuple[tuple[complex, complex, complex], ...]:
        return tuple(
            (z, 1.0 / (1.0 - z), 1.0 - 1.0 / z) for z in self.shapes
        )

    def positively_oriented(self) -> bool:
        return all(z.imag > 0 for z in self.shapes)

    def angles(self) -> AngleVector:
        return AngleVector(
            tuple(
                tuple(cmath.phase(w) for w in tri) for tri in self.companions()
            )
        )

    def identity_error(self) -> float:
        """Max deviation of z z' z'' = -1 and z + 1/z' - 1 = 0."""
        worst = 0.0
        for z, zp, zpp in self.companions():
            worst = max(worst, abs(z * zp * zpp + 1.0))
            worst = max(worst, abs(z + 1.0 / zp - 1.0))
        return worst


def _initial_shapes(alpha: AngleVector) -> tuple[tuple[complex, ...], str]:
    """Shapes from angles, with the modulus convention fixed by self-check.

    Tries z = e^{ia} sin(c)/sin(b) first; if arg(1/(1-z)) fails to equal b,
    uses z = e^{ia} sin(b)/sin(c) and reports the flip.
    """
    tris = alpha.numeric().triples

    def build(flip: bool):
        out = []
        worst = 0.0
        for a_ang, b_ang, c_ang in tris:
            mod = (
                math.sin(b_ang) / math.sin(c_ang)
                if flip
                else math.sin(c_ang) / math.sin(b_ang)
            )
            z = cmath.rect(mod, a_ang)
            worst = max(worst, abs(cmath.phase(1.0 / (1.0 - z)) - b_ang))
            out.append(z)
        return tuple(out), worst

    primary, err = build(False)
    if err < 1e-6:
        return primary, "sin(c)/sin(b)"
    flipped, err2 = build(True)
    if err2 < 1e-6:
        return flipped, "sin(b)/sin(c)"
    raise TriangulationError(
        "neither shape-modulus convention reproduces the angles "
        f"(errors {err:.2e} / {err2:.2e})"
    )


def _log_triple(z: complex) -> tuple[complex, complex, complex]:
    """(Log z, Log z', Log z'') with principal branches; valid for Im z > 0."""
    return (
        cmath.log(z),
        -cmath.log(1.0 - z),
        cmath.log(1.0 - 1.0 / z),
    )


@dataclass(frozen=True)
class NewtonResult:
    """Outcome of the Gauss-Newton solve of gluing plus cusp equations."""

    shapes: ShapeVector
    residual: float  # infinity norm of the log-form residual
    iterations: int
    converged: bool
    positively_oriented: bool
    volume: float
    targets: tuple[int, ...]  # per-row integer k: log-target = i pi k
    labels: tuple[str, ...]
    modulus_convention: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "shapes": [[z.real, z.imag] for z in self.shapes.shapes],
                "residual": self.residual,
                "iterations": self.iterations,
                "converged": self.converged,
                "positively_oriented": self.positively_oriented,
                "volume": self.volume,
                "targets": list(self.targets),
                "labels": list(self.labels),
                "modulus_convention": self.modulus_convention,
            },
            indent=2,
        )


def _log_residual(
    equations: Sequence[MultiplicativeEquation],
    targets: Sequence[int],
    shapes: Sequence[complex],
) -> np.ndarray:
    logs = [_log_triple(z) for z in shapes]
    out = np.zeros(len(equations), dtype=complex)
    for r, (eq, k) in enumerate(zip(equations, targets)):
        acc = complex(0.0)
        for tet, (ea, eb, ec) in eq.triples:
            la, lb, lc = logs[tet]
            acc += ea * la + eb * lb + ec * lc
        out[r] = acc - 1j * math.pi * k
    return out


def _jacobian(
    equations: Sequence[MultiplicativeEquation], shapes: Sequence[complex]
) -> np.ndarray:
    jac = np.zeros((len(equations), len(shapes)), dtype=complex)
    for r, eq in enumerate(equations):
        for tet, (ea, eb, ec) in eq.triples:
            z = shapes[tet]
            jac[r, tet] = ea / z + eb / (1.0 - z) + ec / (z * (z - 1.0))
    return jac


def newton_solve(
    t: Triangulation,
    alpha: AngleVector,
    *,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> NewtonResult:
    """Solve the gluing and cusp-completeness equations for the shapes.

    Branch-fixed logarithmic form: each edge row is solved to 2*pi*i, each
    cusp row to the integer multiple of pi*i nearest its value at the
    initial point (parity-corrected for loop rows carrying a sign).  The
    iteration is damped Gauss-Newton on the complex least-squares system,
    constrained to keep every shape in the upper half plane.
    """
    equations = gluing_and_cusp_equations(t)
    shapes0, convention = _initial_shapes(alpha)
    shapes = np.array(shapes0, dtype=complex)

    targets: list[int] = []
    f0 = _log_residual(equations, [0] * len(equations), shapes)
    for eq, val in zip(equations, f0):
        if eq.kind == "edge":
            targets.append(2)
        else:
            k = int(round(val.imag / math.pi))
            if eq.kind == "loop" and (-1) ** k != eq.sign:
                k += 1 if val.imag / math.pi >= k else -1
            targets.append(k)

    f = _log_residual(equations, targets, shapes)
    res = float(np.max(np.abs(f)))
    converged = res < tol
    iterations = 0
    while not converged and iterations < max_iter:
        iterations += 1
        jac = _jacobian(equations, shapes)
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        damp = 1.0
        base = float(np.linalg.norm(f))
        while damp > 1e-16:
            cand = shapes + damp * step
            if np.all(cand.imag > 0):
                fc = _log_residual(equations, targets, cand)
                if float(np.linalg.norm(fc)) < base:
                    shapes, f = cand, fc
                    break
            damp *= 0.5
        else:
            break
        res = float(np.max(np.abs(f)))
        if res < tol:
            converged = True

    sv = ShapeVector(tuple(shapes))
    return NewtonResult(
        shapes=sv,
        residual=res,
        iterations=iterations,
        converged=converged,
        positively_oriented=sv.positively_oriented(),
        volume=volume(sv),
        targets=tuple(targets),
        labels=tuple(eq.label for eq in equations),
        modulus_convention=convention,
    )


def holonomies(
    equations: Sequence[MultiplicativeEquation],
    shapes: Union[ShapeVector, Sequence[complex]],
) -> dict[str, complex]:
    """Multiplicative value (including loop signs) of each equation."""
    if isinstance(shapes, ShapeVector):
        shapes = shapes.shapes
    trips = [(z, 1.0 / (1.0 - z), 1.0 - 1.0 / z) for z in shapes]
    out: dict[str, complex] = {}
    for eq in equations:
        acc = complex(eq.sign)
        for tet, (ea, eb, ec) in eq.triples:
            z, zp, zpp = trips[tet]
            acc *= z**ea * zp**eb * zpp**ec
        out[eq.label] = acc
    return out


# ---------------------------------------------------------------------------
# one-call certification


@dataclass(frozen=True)
class CertificationReport:
    """Joint outcome of volume maximization and the Newton shape solve."""

    maximize: MaximizeResult
    newton: NewtonResult
    volume_agreement: float
    geometric: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "maximize": json.loads(self.maximize.to_json()),
                "newton": json.loads(self.newton.to_json()),
                "volume_agreement": self.volume_agreement,
                "geometric": self.geometric,
            },
            indent=2,
        )


def certify(
    t: Triangulation,
    alpha0: Optional[AngleVector] = None,
    *,
    angle_floor: float = 1e-3,
    volume_tol: float = 1e-9,
) -> CertificationReport:
    """Certify geometricity: interior volume maximizer + positive Newton solve.

    ``geometric`` is True only when the maximizer is certified interior, the
    Newton iteration converges with every shape in the upper half plane, and
    the two independently computed volumes agree to ``volume_tol``.
    """
    sys = angle_system(t)
    mx = maximize_volume(sys, alpha0, angle_floor=angle_floor)
    nt = newton_solve(t, mx.angles)
    agreement = abs(mx.volume - nt.volume)
    geometric = (
        mx.certified
        and nt.converged
        and nt.positively_oriented
        and agreement < volume_tol
    )
    return CertificationReport(
        maximize=mx,
        newton=nt,
        volume_agreement=agreement,
        geometric=geometric,
    )
