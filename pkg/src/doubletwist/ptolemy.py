"""Quadratic edge-variable equations from the change-of-variables data.

Each tetrahedron contributes one three-term equation in formal variables
attached to the edge classes of the triangulation: opposite-edge pairs
multiply, the first two terms carry signs read off the parity of the
integer solution vector and monomials in the cusp parameters read off
the curve rows, and the third term is always subtracted bare.

For the minimal family the layered tetrahedra of one solid-torus side
satisfy a closed-form consequence: the recursive layer equations plus
the final fold collapse to a single polynomial relating the two
outermost slope variables and the pivot.  :func:`tail_equation` expands
that polynomial and :func:`corollary_system` assembles the compressed
eight-equation system used for elimination.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from typing import Optional, Union

from .constructions import build_minimal
from .nz import NZData, nz_data
from .triangulation import Triangulation, TriangulationError

__all__ = [
    "PtolemyEquation",
    "PtolemyTerm",
    "TailEquation",
    "corollary_system",
    "ptolemy_equations",
    "tail_equation",
]


_PAIR_ORDER = ((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))


def _format_power(base: str, half_exponent: int) -> Optional[str]:
    """Render ``base`` raised to ``half_exponent / 2``; None when trivial."""
    if half_exponent == 0:
        return None
    if half_exponent % 2 == 0:
        power = half_exponent // 2
        return base if power == 1 else f"{base}^{power}"
    return f"{base}half" if half_exponent == 1 else f"{base}half^{half_exponent}"


@dataclass(frozen=True)
class PtolemyTerm:
    """One signed monomial: cusp-parameter powers times two edge variables.

    ``l_half`` is the exponent of the half-power of the longitude
    parameter; ``m_half`` likewise for the meridian parameter (always
    even on the families built here, so meridian powers are integral).
    """

    sign: int
    l_half: int
    m_half: int
    gammas: tuple[str, str]

    def __post_init__(self) -> None:
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    def text(self) -> str:
        factors = []
        l_part = _format_power("l", self.l_half)
        m_part = _format_power("m", self.m_half)
        if l_part:
            factors.append(l_part)
        if m_part:
            factors.append(m_part)
        factors.extend(f"γ_{name}" if not name.startswith("γ_") else name for name in self._grouped())
        return "*".join(factors)

    def _grouped(self) -> list[str]:
        first, second = self.gammas
        if first == second:
            return [f"{first}^2"]
        return [first, second]

    def to_json(self) -> dict:
        return {
            "sign": self.sign,
            "l_half": self.l_half,
            "m_half": self.m_half,
            "gammas": list(self.gammas),
        }


@dataclass(frozen=True)
class PtolemyEquation:
    """The three-term equation contributed by one tetrahedron."""

    tet: int
    terms: tuple[PtolemyTerm, PtolemyTerm, PtolemyTerm]

    def __post_init__(self) -> None:
        last = self.terms[2]
        if last.sign != -1 or last.l_half or last.m_half:
            raise ValueError("third term must be the bare subtracted pair")

    def text(self) -> str:
        parts: list[str] = []
        for term in self.terms:
            body = term.text()
            if not parts:
                parts.append(body if term.sign > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if term.sign > 0 else f"- {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return f"D{self.tet}: {self.text()}"

    def to_json(self) -> dict:
        return {"tet": self.tet, "terms": [term.to_json() for term in self.terms]}


def ptolemy_equations(nz: NZData, t: Triangulation) -> tuple[PtolemyEquation, ...]:
    """One equation per tetrahedron, from the solved change-of-variables data.

    The two curve rows supply the per-column cusp-parameter exponents;
    the parity of the solution vector supplies the signs of the first
    two terms.  Requires a solved ``b_vec`` and one cusp.
    """
    if nz.b_vec is None:
        raise TriangulationError("the change-of-variables data has no solution vector")
    if nz.tet_count != t.size:
        raise TriangulationError("matrix and triangulation sizes disagree")
    curve_names = nz.curve_row_labels
    if len(curve_names) != 2:
        raise TriangulationError(
            f"expected one cusp (two curve rows), found rows {curve_names}"
        )
    meridian = nz.row(curve_names[0])
    longitude = nz.row(curve_names[1])
    b_vec = nz.b_vec

    equations = []
    for tet in range(t.size):
        names = {}
        for pairs in _PAIR_ORDER:
            for pair in pairs:
                names[pair] = t.label_of(tet, pair)
        col_a, col_b = 2 * tet, 2 * tet + 1
        term_a = PtolemyTerm(
            sign=-1 if b_vec[col_b] % 2 else 1,
            l_half=-meridian[col_a],
            m_half=longitude[col_a],
            gammas=(names[(0, 1)], names[(2, 3)]),
        )
        term_b = PtolemyTerm(
            sign=-1 if b_vec[col_a] % 2 else 1,
            l_half=-meridian[col_b],
            m_half=longitude[col_b],
            gammas=(names[(0, 2)], names[(1, 3)]),
        )
        term_c = PtolemyTerm(sign=-1, l_half=0, m_half=0, gammas=(names[(0, 3)], names[(1, 2)]))
        equations.append(PtolemyEquation(tet=tet, terms=(term_a, term_b, term_c)))
    return tuple(equations)


# --------------------------------------------------------------------------
# Closed-form solid-torus side
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TailEquation:
    """Closed form for one fully layered and folded solid-torus side.

    The polynomial part has leading term ``fold**(2n)`` plus one term
    per lattice point (a, b) with a + b <= n - 1; the correction term
    subtracts ``fold**(n-1) * outer**n * pivot``.  ``fold``, ``outer``
    and ``pivot`` name the edge variables of the second, first and
    pivot slopes of the side.
    """

    n: int
    fold: str
    outer: str
    pivot: str

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("tail length must be at least 1")

    def polynomial_terms(self) -> tuple[tuple[int, int, int, int], ...]:
        """Terms of the polynomial part as (coeff, fold_pow, outer_pow, pivot_pow)."""
        terms = [(1, 2 * self.n, 0, 0)]
        for a in range(self.n):
            for b in range(self.n - a):
                coeff = (-1) ** (self.n - a - b) * comb(self.n - 1 - a, b) * comb(self.n - b, a)
                terms.append((coeff, 2 * a, 2 * b, 2 * (self.n - a - b)))
        return tuple(terms)

    def correction_term(self) -> tuple[int, int, int, int]:
        """The subtracted monomial as (coeff, fold_pow, outer_pow, pivot_pow)."""
        return (-1, self.n - 1, self.n, 1)

    def all_terms(self) -> tuple[tuple[int, int, int, int], ...]:
        return self.polynomial_terms() + (self.correction_term(),)

    def text(self) -> str:
        parts: list[str] = []
        for coeff, f_pow, o_pow, p_pow in self.all_terms():
            factors = []
            for name, power in ((self.fold, f_pow), (self.outer, o_pow), (self.pivot, p_pow)):
                if power == 1:
                    factors.append(f"γ_{name}")
                elif power:
                    factors.append(f"γ_{name}^{power}")
            body = "*".join(factors) if factors else "1"
            magnitude = abs(coeff)
            if magnitude != 1:
                body = f"{magnitude}*{body}"
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return f"Tail({self.fold},{self.outer},{self.pivot}): {self.text()}"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "fold": self.fold,
            "outer": self.outer,
            "pivot": self.pivot,
            "terms": [list(term) for term in self.all_terms()],
        }


def tail_equation(n: int, fold: str, outer: str, pivot: str) -> TailEquation:
    """The closed-form equation for a layered side of ``n`` tetrahedra."""
    return TailEquation(n=n, fold=fold, outer=outer, pivot=pivot)


CorollaryEquation = Union[PtolemyEquation, TailEquation]


def corollary_system(p: int, q: int) -> tuple[CorollaryEquation, ...]:
    """The compressed defining system for the minimal family.

    For p, q >= 3 this is the six core-tetrahedron equations plus one
    closed-form tail per solid-torus side (eight equations).  When a
    side parameter equals 2 that side has no layered tetrahedra to
    compress, so the full per-tetrahedron system is returned instead.
    """
    if p < 2 or q < 2:
        raise TriangulationError("both twist parameters must be at least 2")
    t = build_minimal(p, q)
    data = nz_data(t)
    equations = ptolemy_equations(data, t)
    if p == 2 or q == 2:
        return equations
    core = equations[:6]
    tail_1 = tail_equation(p - 2, fold="O1_1", outer="O0_1", pivot="P1")
    tail_2 = tail_equation(q - 2, fold="O1_2", outer="O0_2", pivot="P2")
    return core + (tail_1, tail_2)


def system_to_json(equations: tuple[CorollaryEquation, ...]) -> str:
    """Structured JSON for a generated system."""
    return json.dumps([eq.to_json() for eq in equations], indent=2, sort_keys=True)
