"""Exact multivariate polynomials, Groebner bases, and elimination.

The polynomial type stores rational coefficients keyed by exponent
vectors over a declared variable tuple.  The Groebner engine is a
deterministic fraction-free Buchberger loop (normal selection with a
sugar tie-break, coprime and chain criteria, configurable budgets that
fail loudly rather than return a wrong basis).  Elimination runs in
pure lexicographic order with the variables to remove in front,
saturates inverted parameters through one auxiliary variable, then
intersects with the kept parameter ring; factorization of the result
delegates to sympy.

Also here: conversion of the quadratic edge-variable equations into
polynomials under the substitution that squares the meridian parameter
and replaces the half-power of the longitude by a negated new variable,
a parser for pasted printed polynomials, and a seeded Newton search for
common numeric roots used as an elimination soundness check.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import sympy

from .ptolemy import PtolemyEquation, TailEquation

__all__ = [
    "BudgetExceeded",
    "EliminationError",
    "EliminationResult",
    "EliminationTask",
    "GroebnerBudget",
    "MultiPoly",
    "equations_to_polynomials",
    "eliminate",
    "factor_over_rationals",
    "groebner",
    "normal_form",
    "numeric_common_roots",
    "parse_polynomial",
    "s_polynomial",
]


Monomial = tuple[int, ...]
_IntPoly = dict[Monomial, int]


# --------------------------------------------------------------------------
# Monomial orders
# --------------------------------------------------------------------------


def _lex_key(mono: Monomial) -> tuple:
    return mono


def _grevlex_key(mono: Monomial) -> tuple:
    return (sum(mono), tuple(-mono[i] for i in range(len(mono) - 1, -1, -1)))


_ORDERS: dict[str, Callable[[Monomial], tuple]] = {
    "lex": _lex_key,
    "grevlex": _grevlex_key,
}


def _order_key(order: Union[str, Callable[[Monomial], tuple]]) -> Callable[[Monomial], tuple]:
    if callable(order):
        return order
    try:
        return _ORDERS[order]
    except KeyError:
        raise ValueError(f"unknown monomial order {order!r}") from None


def _front_block_key(index: int) -> Callable[[Monomial], tuple]:
    """Elimination order: one variable in front, graded-reverse-lex tail.

    Every monomial containing the front variable outranks every one
    without it, so basis elements free of it generate the elimination
    ideal exactly.
    """

    def key(mono: Monomial) -> tuple:
        rest = mono[:index] + mono[index + 1 :]
        return (mono[index],) + _grevlex_key(rest)

    return key


def _two_block_key(front: Sequence[int], width: int) -> Callable[[Monomial], tuple]:
    """Elimination order: front block before back block, grevlex in each.

    Any monomial using a front variable outranks any monomial that uses
    none, so basis elements without front variables generate the full
    elimination ideal in one basis computation.
    """
    front_set = set(front)
    back = tuple(i for i in range(width) if i not in front_set)
    front = tuple(front)

    def key(mono: Monomial) -> tuple:
        front_part = tuple(mono[i] for i in front)
        back_part = tuple(mono[i] for i in back)
        return _grevlex_key(front_part) + _grevlex_key(back_part)

    return key


# --------------------------------------------------------------------------
# Public polynomial type
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiPoly:
    """Rational-coefficient polynomial over a declared variable tuple.

    ``terms`` is canonically sorted and carries no zero coefficients,
    so equal polynomials compare and hash equal.
    """

    variables: tuple[str, ...]
    terms: tuple[tuple[Monomial, Fraction], ...]

    @classmethod
    def from_dict(
        cls, variables: Sequence[str], coeffs: Mapping[Monomial, Union[int, Fraction]]
    ) -> "MultiPoly":
        cleaned = {}
        width = len(variables)
        for mono, coeff in coeffs.items():
            value = Fraction(coeff)
            if len(mono) != width:
                raise ValueError(f"exponent vector {mono} has wrong width")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            if value:
                cleaned[tuple(int(e) for e in mono)] = value
        return cls(
            variables=tuple(variables),
            terms=tuple(sorted(cleaned.items())),
        )

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "MultiPoly":
        return cls.from_dict(variables, {})

    @classmethod
    def constant(cls, variables: Sequence[str], value: Union[int, Fraction]) -> "MultiPoly":
        return cls.from_dict(variables, {(0,) * len(variables): Fraction(value)})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "MultiPoly":
        index = list(variables).index(name)
        mono = tuple(1 if i == index else 0 for i in range(len(variables)))
        return cls.from_dict(variables, {mono: 1})

    # -- bookkeeping ---------------------------------------------------------

    def as_dict(self) -> dict[Monomial, Fraction]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(mono) for mono, _ in self.terms), default=0)

    def degree(self, name: str) -> int:
        index = self.variables.index(name)
        return max((mono[index] for mono, _ in self.terms), default=0)

    def uses(self, name: str) -> bool:
        index = self.variables.index(name)
        return any(mono[index] for mono, _ in self.terms)

    def with_variables(self, variables: Sequence[str]) -> "MultiPoly":
        """Re-express over a superset (or reordering) of the variables."""
        new_vars = tuple(variables)
        positions = []
        for name in self.variables:
            if name not in new_vars:
                if self.uses(name):
                    raise ValueError(f"cannot drop used variable {name}")
                positions.append(None)
            else:
                positions.append(new_vars.index(name))
        out: dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms:
            fresh = [0] * len(new_vars)
            for exp, pos in zip(mono, positions):
                if pos is None:
                    continue
                fresh[pos] = exp
            key = tuple(fresh)
            out[key] = out.get(key, Fraction(0)) + coeff
        return MultiPoly.from_dict(new_vars, out)

    # -- arithmetic ----------------------------------------------------------

    def _check_compatible(self, other: "MultiPoly") -> None:
        if self.variables != other.variables:
            raise ValueError("polynomials use different variable tuples")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check_compatible(other)
        out = dict(self.terms)
        for mono, coeff in other.terms:
            out[mono] = out.get(mono, Fraction(0)) + coeff
        return MultiPoly.from_dict(self.variables, out)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        self._check_compatible(other)
        out = dict(self.terms)
        for mono, coeff in other.terms:
            out[mono] = out.get(mono, Fraction(0)) - coeff
        return MultiPoly.from_dict(self.variables, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.variables, tuple((mono, -coeff) for mono, coeff in self.terms))

    def __mul__(self, other: Union["MultiPoly", int, Fraction]) -> "MultiPoly":
        if isinstance(other, (int, Fraction)):
            factor = Fraction(other)
            if not factor:
                return MultiPoly.zero(self.variables)
            return MultiPoly(
                self.variables,
                tuple((mono, coeff * factor) for mono, coeff in self.terms),
            )
        self._check_compatible(other)
        out: dict[Monomial, Fraction] = {}
        for mono_a, coeff_a in self.terms:
            for mono_b, coeff_b in other.terms:
                key = tuple(a + b for a, b in zip(mono_a, mono_b))
                out[key] = out.get(key, Fraction(0)) + coeff_a * coeff_b
        return MultiPoly.from_dict(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "MultiPoly":
        if power < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(self.variables, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base if power > 1 else base
            power >>= 1
        return result

    # -- normalizations ------------------------------------------------------

    def primitive(self) -> "MultiPoly":
        """Integer-content-free form with positive leading coefficient (lex)."""
        if self.is_zero:
            return self
        denom = math.lcm(*(coeff.denominator for _, coeff in self.terms))
        ints = [coeff * denom for _, coeff in self.terms]
        content = 0
        for value in ints:
            content = math.gcd(content, int(value))
        scale = Fraction(denom, content)
        lead = max((mono for mono, _ in self.terms), key=_lex_key)
        if dict(self.terms)[lead] < 0:
            scale = -scale
        return self * scale

    def monic(self, order: str = "lex") -> "MultiPoly":
        if self.is_zero:
            return self
        key = _order_key(order)
        lead = max((mono for mono, _ in self.terms), key=key)
        return self * (1 / dict(self.terms)[lead])

    def leading_monomial(self, order: str = "lex") -> Monomial:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading monomial")
        return max((mono for mono, _ in self.terms), key=_order_key(order))

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, assignment: Mapping[str, complex]) -> complex:
        missing = [name for name in self.variables if self.uses(name) and name not in assignment]
        if missing:
            raise ValueError(f"no value for variables {missing}")
        values = [complex(assignment.get(name, 0.0)) for name in self.variables]
        total = 0.0 + 0.0j
        for mono, coeff in self.terms:
            term = complex(coeff)
            for value, exp in zip(values, mono):
                if exp:
                    term *= value**exp
            total += term
        return total

    def derivative(self, name: str) -> "MultiPoly":
        index = self.variables.index(name)
        out: dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms:
            if not mono[index]:
                continue
            lowered = list(mono)
            lowered[index] -= 1
            key = tuple(lowered)
            out[key] = out.get(key, Fraction(0)) + coeff * mono[index]
        return MultiPoly.from_dict(self.variables, out)

    # -- rendering -----------------------------------------------------------

    def text(self) -> str:
        if self.is_zero:
            return "0"
        ordered = sorted(self.terms, key=lambda item: (sum(item[0]), item[0][::-1]))
        parts: list[str] = []
        for mono, coeff in ordered:
            factors = []
            for name, exp in zip(self.variables, mono):
                if exp == 1:
                    factors.append(name)
                elif exp:
                    factors.append(f"{name}^{exp}")
            magnitude = abs(coeff)
            if magnitude != 1 or not factors:
                factors.insert(0, str(magnitude))
            body = "*".join(factors)
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.text()


# --------------------------------------------------------------------------
# Fraction-free engine internals
# --------------------------------------------------------------------------


def _to_int_poly(p: MultiPoly) -> _IntPoly:
    prim = p.primitive()
    return {mono: int(coeff) for mono, coeff in prim.terms}


def _from_int_poly(variables: tuple[str, ...], p: _IntPoly) -> MultiPoly:
    return MultiPoly.from_dict(variables, p)


def _int_primitive(p: _IntPoly, key: Callable[[Monomial], tuple]) -> _IntPoly:
    if not p:
        return p
    content = 0
    for value in p.values():
        content = math.gcd(content, value)
    lead = max(p, key=key)
    sign = -1 if p[lead] < 0 else 1
    divisor = content * sign
    return {mono: value // divisor for mono, value in p.items()}


def _divides(divisor: Monomial, mono: Monomial) -> bool:
    return all(d <= m for d, m in zip(divisor, mono))


def _mono_div(mono: Monomial, divisor: Monomial) -> Monomial:
    return tuple(m - d for m, d in zip(mono, divisor))


def _mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _shift_scale(p: _IntPoly, shift: Monomial, factor: int) -> _IntPoly:
    return {_mono_mul(mono, shift): value * factor for mono, value in p.items()}


class _NegKey:
    """Reverses tuple comparison so heapq pops the largest key first."""

    __slots__ = ("key",)

    def __init__(self, key: tuple) -> None:
        self.key = key

    def __lt__(self, other: "_NegKey") -> bool:
        return self.key > other.key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _NegKey) and self.key == other.key


def _strip_content(work: _IntPoly, remainder: _IntPoly) -> None:
    """Divide both halves of a partly reduced polynomial by their gcd."""
    content = 0
    for value in work.values():
        content = math.gcd(content, value)
        if content == 1:
            return
    for value in remainder.values():
        content = math.gcd(content, value)
        if content == 1:
            return
    if content > 1:
        for mono in work:
            work[mono] //= content
        for mono in remainder:
            remainder[mono] //= content


def _int_reduce(
    p: _IntPoly,
    basis: Sequence[tuple[Monomial, int, _IntPoly]],
    key: Callable[[Monomial], tuple],
    term_cap: Optional[int] = None,
    basis_keys: Optional[Sequence[tuple]] = None,
    top_only: bool = False,
    deadline: Optional[float] = None,
) -> _IntPoly:
    """Fraction-free normal form of ``p`` against the basis.

    ``basis`` must be sorted ascending by the order key of its leading
    monomials (``basis_keys``, precomputed when available).  The
    remainder is returned primitive; it equals the true normal form up
    to a positive rational factor, which is all that ideal membership
    and basis construction need.  Content is stripped as the reduction
    proceeds so the global scalings cannot snowball.

    With ``top_only`` the reduction stops at the first irreducible
    leading term (enough for basis construction, and it avoids dragging
    the whole staircase through every tail); otherwise every term is
    reduced.  Terms are processed largest-first through a heap so each
    inserted term costs a logarithmic factor rather than a scan.
    """
    import heapq
    from bisect import bisect_right

    if basis_keys is None:
        basis_keys = [key(lead) for lead, _, _ in basis]
    work = dict(p)
    heap = [(_NegKey(key(mono)), mono) for mono in work]
    heapq.heapify(heap)
    remainder: _IntPoly = {}
    scaled = 0
    steps = 0
    while heap:
        neg, mono = heapq.heappop(heap)
        coeff = work.pop(mono, 0)
        if not coeff:
            continue
        steps += 1
        if deadline is not None and steps % 64 == 0 and time.monotonic() > deadline:
            raise BudgetExceeded(
                "time budget exceeded during reduction",
                stats={"terms": len(work) + len(remainder)},
            )
        cut = bisect_right(basis_keys, neg.key)
        for position in range(cut):
            lead, lead_coeff, g = basis[position]
            if _divides(lead, mono):
                d = math.gcd(coeff, lead_coeff)
                scale_all = lead_coeff // d
                factor = coeff // d
                if scale_all != 1:
                    for other in work:
                        work[other] *= scale_all
                    for other in remainder:
                        remainder[other] *= scale_all
                    scaled += 1
                shift = _mono_div(mono, lead)
                for g_mono, g_coeff in g.items():
                    if g_mono == lead:
                        continue
                    target = _mono_mul(g_mono, shift)
                    previous = work.get(target, 0)
                    value = previous - factor * g_coeff
                    if value:
                        work[target] = value
                        if not previous:
                            heapq.heappush(heap, (_NegKey(key(target)), target))
                    elif previous:
                        del work[target]
                if scaled >= 8:
                    _strip_content(work, remainder)
                    scaled = 0
                break
        else:
            remainder[mono] = coeff
            if top_only:
                remainder.update(work)
                break
        if term_cap is not None and len(work) + len(remainder) > term_cap:
            raise BudgetExceeded(
                "term cap exceeded during reduction",
                stats={"terms": len(work) + len(remainder), "cap": term_cap},
            )
    return _int_primitive(remainder, key)


def _int_s_poly(
    f: tuple[Monomial, int, _IntPoly],
    g: tuple[Monomial, int, _IntPoly],
    key: Callable[[Monomial], tuple],
) -> _IntPoly:
    lead_f, lc_f, poly_f = f
    lead_g, lc_g, poly_g = g
    lcm = _mono_lcm(lead_f, lead_g)
    d = math.gcd(lc_f, lc_g)
    left = _shift_scale(poly_f, _mono_div(lcm, lead_f), lc_g // d)
    right = _shift_scale(poly_g, _mono_div(lcm, lead_g), lc_f // d)
    out = dict(left)
    for mono, value in right.items():
        out[mono] = out.get(mono, 0) - value
        if not out[mono]:
            del out[mono]
    return out


# --------------------------------------------------------------------------
# Budgets and Buchberger
# --------------------------------------------------------------------------


_FULL_TAILS = False  # reduce S-polynomial tails fully during the loop


class BudgetExceeded(RuntimeError):
    """Raised when a basis computation hits its configured resource caps."""

    def __init__(self, message: str, stats: Optional[dict] = None) -> None:
        super().__init__(message)
        self.stats = dict(stats or {})


@dataclass(frozen=True)
class GroebnerBudget:
    """Resource caps for the basis loop; exceeding any raises, never lies."""

    max_pairs: int = 50_000
    max_basis: int = 2_000
    max_terms: int = 200_000
    max_seconds: Optional[float] = None

    def __post_init__(self) -> None:
        if self.max_pairs <= 0 or self.max_basis <= 0 or self.max_terms <= 0:
            raise ValueError("budgets must be positive")


def s_polynomial(f: MultiPoly, g: MultiPoly, order: str = "lex") -> MultiPoly:
    """The S-polynomial, primitive-normalized."""
    f._check_compatible(g)
    key = _order_key(order)
    fi = _to_int_poly(f)
    gi = _to_int_poly(g)
    if not fi or not gi:
        raise ValueError("S-polynomial of zero polynomial")
    f_entry = (max(fi, key=key), fi[max(fi, key=key)], fi)
    g_entry = (max(gi, key=key), gi[max(gi, key=key)], gi)
    return _from_int_poly(f.variables, _int_primitive(_int_s_poly(f_entry, g_entry, key), key))


def normal_form(
    p: MultiPoly, basis: Sequence[MultiPoly], order: str = "lex"
) -> MultiPoly:
    """Remainder of ``p`` on full division by ``basis``.

    Returned primitive: equal to the true normal form up to a positive
    rational factor, hence zero exactly when ``p`` reduces to zero.
    """
    key = _order_key(order)
    entries = []
    for g in basis:
        gi = _to_int_poly(g)
        if gi:
            lead = max(gi, key=key)
            entries.append((lead, gi[lead], gi))
    entries.sort(key=lambda item: key(item[0]))
    return _from_int_poly(
        p.variables,
        _int_reduce(
            _to_int_poly(p), entries, key, basis_keys=[key(e[0]) for e in entries]
        ),
    )


def groebner(
    generators: Sequence[MultiPoly],
    order: Union[str, Callable[[Monomial], tuple]] = "lex",
    budget: Optional[GroebnerBudget] = None,
) -> tuple[MultiPoly, ...]:
    """Reduced Groebner basis (monic) for the given monomial order.

    Deterministic Buchberger loop: pairs selected by smallest lcm in the
    active order with a sugar tie-break; coprime and chain criteria
    prune pairs; every new element is fully reduced before joining the
    basis.  Raises :class:`BudgetExceeded` on resource caps.
    """
    import heapq
    from bisect import bisect_right

    budget = budget or GroebnerBudget()
    if not generators:
        return ()
    variables = generators[0].variables
    key = _order_key(order)
    start = time.monotonic()
    deadline = start + budget.max_seconds if budget.max_seconds is not None else None

    basis: list[_IntPoly] = []
    leads: list[tuple[Monomial, int, _IntPoly]] = []
    sugars: list[int] = []
    red_keys: list[tuple] = []  # sorted order keys of the leads
    red_entries: list[tuple[Monomial, int, _IntPoly]] = []  # parallel, sorted

    def add_poly(p: _IntPoly, sugar: int) -> Optional[int]:
        if not p:
            return None
        if len(basis) >= budget.max_basis:
            raise BudgetExceeded(
                "basis size cap exceeded", stats={"basis": len(basis), "cap": budget.max_basis}
            )
        basis.append(p)
        lead = max(p, key=key)
        entry = (lead, p[lead], p)
        leads.append(entry)
        sugars.append(sugar)
        lead_key = key(lead)
        position = bisect_right(red_keys, lead_key)
        red_keys.insert(position, lead_key)
        red_entries.insert(position, entry)
        return len(basis) - 1

    seeds = sorted(
        (poly for poly in (g.primitive() for g in generators) if not poly.is_zero),
        key=lambda g: key(g.leading_monomial(order)),
    )
    for g in seeds:
        add_poly(_to_int_poly(g), g.total_degree())

    def pair_entry(i: int, j: int) -> tuple:
        lcm = _mono_lcm(leads[i][0], leads[j][0])
        sugar = max(
            sugars[i] + sum(_mono_div(lcm, leads[i][0])),
            sugars[j] + sum(_mono_div(lcm, leads[j][0])),
        )
        return (key(lcm), sugar, i, j)

    # Pair bookkeeping follows the classical update algorithm: the
    # coprime criterion and both lcm-divisibility prunings run when a
    # new element arrives, and elements whose lead the newcomer divides
    # stop forming future pairs (they remain valid reducers).
    heap: list[tuple] = []
    alive_pairs: set[tuple[int, int]] = set()
    active: set[int] = set()
    stats = {"pairs_processed": 0, "reductions_to_zero": 0, "pairs_pruned": 0}

    def update_pairs(t: int) -> None:
        lead_t = leads[t][0]
        ordering = sorted(
            active, key=lambda g: (key(_mono_lcm(leads[g][0], lead_t)), g)
        )
        lcms = {g: _mono_lcm(leads[g][0], lead_t) for g in ordering}
        held: list[int] = []
        for position, g in enumerate(ordering):
            lcm_g = lcms[g]
            coprime = lcm_g == _mono_mul(leads[g][0], lead_t)
            keep = coprime or not any(
                _divides(lcms[other], lcm_g)
                for other in held + ordering[position + 1 :]
                if other != g
            )
            if keep:
                held.append(g)
            else:
                stats["pairs_pruned"] += 1
        kept = []
        for g in held:
            if lcms[g] == _mono_mul(leads[g][0], lead_t):
                stats["pairs_pruned"] += 1  # coprime leads: S-pair reduces to zero
            else:
                kept.append(g)
        for pair in list(alive_pairs):
            i, j = pair
            lcm_ij = _mono_lcm(leads[i][0], leads[j][0])
            if (
                _divides(lead_t, lcm_ij)
                and _mono_lcm(leads[i][0], lead_t) != lcm_ij
                and _mono_lcm(leads[j][0], lead_t) != lcm_ij
            ):
                alive_pairs.discard(pair)
                stats["pairs_pruned"] += 1
        for g in kept:
            pair = (min(g, t), max(g, t))
            alive_pairs.add(pair)
            heapq.heappush(heap, pair_entry(*pair))
        for g in list(active):
            if _divides(lead_t, leads[g][0]):
                active.discard(g)
        active.add(t)

    for index in range(len(basis)):
        update_pairs(index)

    while alive_pairs:
        if budget.max_seconds is not None and time.monotonic() - start > budget.max_seconds:
            raise BudgetExceeded(
                "time budget exceeded",
                stats={**stats, "seconds": time.monotonic() - start},
            )
        _, _, i, j = heapq.heappop(heap)
        if (i, j) not in alive_pairs:
            continue
        alive_pairs.discard((i, j))
        stats["pairs_processed"] += 1
        if stats["pairs_processed"] > budget.max_pairs:
            raise BudgetExceeded("pair cap exceeded", stats=stats)

        lead_i, lead_j = leads[i][0], leads[j][0]
        lcm = _mono_lcm(lead_i, lead_j)
        s_poly = _int_s_poly(leads[i], leads[j], key)
        reduced = _int_reduce(
            s_poly,
            red_entries,
            key,
            term_cap=budget.max_terms,
            basis_keys=red_keys,
            top_only=not _FULL_TAILS,
            deadline=deadline,
        )
        if not reduced:
            stats["reductions_to_zero"] += 1
            continue
        lcm_sugar = max(
            sugars[i] + sum(_mono_div(lcm, lead_i)),
            sugars[j] + sum(_mono_div(lcm, lead_j)),
        )
        index = add_poly(reduced, lcm_sugar)
        update_pairs(index)

    # Minimalize (drop elements whose lead another lead divides), then
    # interreduce to the unique reduced basis.
    unique: dict[Monomial, _IntPoly] = {}
    for p in basis:
        lead = max(p, key=key)
        held = unique.get(lead)
        if held is None or len(p) < len(held):
            unique[lead] = p
    leads_only = sorted(unique, key=key)
    minimal = [
        unique[lead]
        for lead in leads_only
        if not any(_divides(other, lead) for other in leads_only if other != lead)
    ]
    final = [dict(p) for p in minimal]
    changed = True
    while changed:
        changed = False
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(
                "time budget exceeded during interreduction", stats=stats
            )
        for idx in range(len(final)):
            if not final[idx]:
                continue
            others = []
            for jdx, q in enumerate(final):
                if jdx != idx and q:
                    lead = max(q, key=key)
                    others.append((lead, q[lead], q))
            others.sort(key=lambda item: key(item[0]))
            reduced = _int_reduce(
                final[idx],
                others,
                key,
                basis_keys=[key(o[0]) for o in others],
                deadline=deadline,
            )
            if reduced != final[idx]:
                final[idx] = reduced
                changed = True
    kept = [p for p in final if p]
    return tuple(
        _from_int_poly(variables, p).monic(order)
        for p in sorted(kept, key=lambda p: key(max(p, key=key)))
    )


# --------------------------------------------------------------------------
# Elimination
# --------------------------------------------------------------------------


class EliminationError(RuntimeError):
    """Raised when elimination cannot produce a kept-variable generator."""


@dataclass(frozen=True)
class EliminationTask:
    """A batch elimination: kill ``eliminate`` variables, keep ``keep``.

    ``saturations`` lists variables whose product is inverted through
    one auxiliary variable, removing the components where any of them
    vanishes.  For the edge-variable systems this must include the edge
    variables themselves: they stand for nonzero quantities, and the
    locus where they all vanish would otherwise swallow the
    two-variable intersection entirely.
    """

    generators: tuple[MultiPoly, ...]
    eliminate: tuple[str, ...]
    keep: tuple[str, ...] = ("L", "M")
    saturations: tuple[str, ...] = ("M", "L")
    aux_name: str = "u"

    def __post_init__(self) -> None:
        if not self.generators:
            raise ValueError("no generators")
        variables = set(self.generators[0].variables)
        declared = set(self.eliminate) | set(self.keep) | {self.aux_name}
        if not variables <= declared:
            raise ValueError(f"variables {sorted(variables - declared)} not covered")
        if set(self.saturations) - (set(self.keep) | set(self.eliminate)):
            raise ValueError("saturated variables must be kept or eliminated ones")


@dataclass(frozen=True)
class EliminationResult:
    """Eliminant (primitive, kept variables only) and its factorization."""

    eliminant: MultiPoly
    factors: tuple[tuple[MultiPoly, int], ...]
    squarefree: MultiPoly
    kept_basis: tuple[MultiPoly, ...]
    stats: dict = field(compare=False, default_factory=dict)


def _unit_coefficient(coeff: MultiPoly, invertible: Sequence[str]) -> bool:
    """True when ``coeff`` is a single ±1 term in invertible variables only."""
    if len(coeff.terms) != 1:
        return False
    mono, value = coeff.terms[0]
    if abs(value) != 1:
        return False
    allowed = set(invertible)
    return all(
        exp == 0 or name in allowed for name, exp in zip(coeff.variables, mono)
    )


def _coefficients_in(p: MultiPoly, name: str) -> dict[int, MultiPoly]:
    """Split ``p`` as a polynomial in ``name`` with MultiPoly coefficients."""
    index = p.variables.index(name)
    split: dict[int, dict[Monomial, Fraction]] = {}
    for mono, coeff in p.terms:
        power = mono[index]
        lowered = list(mono)
        lowered[index] = 0
        split.setdefault(power, {})[tuple(lowered)] = coeff
    return {
        power: MultiPoly.from_dict(p.variables, coeffs)
        for power, coeffs in split.items()
    }


def _strip_invertible_content(p: MultiPoly, invertible: Sequence[str]) -> MultiPoly:
    """Divide out the monomial content carried by invertible variables.

    A monomial in variables that stand for nonzero quantities is a unit
    of the localized ring, so dividing it out of a generator leaves the
    localized ideal unchanged while shrinking degrees — and frequently
    exposes linear structure hidden under the content.
    """
    if p.is_zero:
        return p
    allowed = set(invertible)
    mins = [
        min(mono[i] for mono, _ in p.terms) if name in allowed else 0
        for i, name in enumerate(p.variables)
    ]
    if not any(mins):
        return p.primitive()
    shifted = {
        tuple(e - m for e, m in zip(mono, mins)): coeff for mono, coeff in p.terms
    }
    return MultiPoly.from_dict(p.variables, shifted).primitive()


def _substitute_linear(
    generators: list[MultiPoly], eliminable: Sequence[str], invertible: Sequence[str]
) -> tuple[list[MultiPoly], list[str], list[MultiPoly]]:
    """Remove variables solved by unit-coefficient linear relations.

    Whenever some generator reads ``A*γ − B`` with ``A`` a unit monomial
    in the invertible variables, the map ``γ ↦ B/A`` is an isomorphism
    of the ring localized at those variables, so replacing ``γ``
    everywhere (clearing powers of ``A``) leaves every localized
    elimination ideal — in particular the kept-variable eliminant —
    unchanged.

    When the substituted variable is itself one of the invertible ones,
    its nonvanishing constraint must survive as a constraint on the
    numerator: the non-unit irreducible factors of ``B`` are returned
    so the caller can extend the saturation with them.

    Returns ``(reduced system, removed variables, extra saturations)``.
    """
    gens = [
        _strip_invertible_content(g, invertible) for g in generators if not g.is_zero
    ]
    remaining = list(eliminable)
    removed: list[str] = []
    numerators: list[MultiPoly] = []

    def substituted(h: MultiPoly, name: str, lead: MultiPoly, numerator: MultiPoly) -> MultiPoly:
        d = h.degree(name)
        if d == 0:
            return h
        h_parts = _coefficients_in(h, name)
        total = MultiPoly.zero(h.variables)
        for power in range(d + 1):
            piece = h_parts.get(power)
            if piece is None:
                continue
            total = total + piece * numerator**power * lead ** (d - power)
        return total.primitive()

    while True:
        candidates = []
        for gen_index, g in enumerate(gens):
            for name in remaining:
                if g.degree(name) != 1:
                    continue
                if not _unit_coefficient(_coefficients_in(g, name)[1], invertible):
                    continue
                # Substituting a variable used by few other equations
                # keeps the fill-in small and preserves other linear
                # relations for later rounds.
                users = [h for j, h in enumerate(gens) if j != gen_index and h.uses(name)]
                cost = (
                    len(users),
                    sum(h.degree(name) for h in users),
                    name,
                    gen_index,
                )
                candidates.append((cost, gen_index, name))
        if not candidates:
            break
        _, gen_index, name = min(candidates)
        g = gens[gen_index]
        parts = _coefficients_in(g, name)
        lead = parts[1]
        rest = parts.get(0, MultiPoly.zero(g.variables))
        # A*γ + rest = 0  ⇒  γ = -rest / A.
        numerator = -rest
        out = [
            _strip_invertible_content(
                substituted(h, name, lead, numerator), invertible
            )
            for jdx, h in enumerate(gens)
            if jdx != gen_index
        ]
        # Nonvanishing of an inverted variable survives as
        # nonvanishing of its numerator (a unit times this value).
        if name in invertible:
            numerators.append(numerator)
        numerators = [substituted(s, name, lead, numerator) for s in numerators]
        gens = [h for h in out if not h.is_zero]
        remaining.remove(name)
        removed.append(name)

    extra_saturations: list[MultiPoly] = []
    for survived in numerators:
        if survived.is_zero:
            # A vanishing numerator forces an inverted variable to
            # zero: the localized ideal is the unit ideal on this
            # branch, matching an empty intersection downstream.
            continue
        for factor_poly, _ in factor_over_rationals(survived):
            if len(factor_poly.terms) > 1:
                extra_saturations.append(normalize_unit_monomial(factor_poly))
            else:
                (mono, _), = factor_poly.terms
                for var, exp in zip(factor_poly.variables, mono):
                    if exp and var not in invertible:
                        extra_saturations.append(
                            MultiPoly.variable(factor_poly.variables, var)
                        )
    return gens, removed, extra_saturations


def eliminate(
    task: EliminationTask, budget: Optional[GroebnerBudget] = None
) -> EliminationResult:
    """Exact elimination down to the kept variables; factors the output.

    The pipeline is substitution-first: variables appearing linearly
    with unit-monomial coefficients are substituted away (an
    isomorphism of the ring localized at the saturated variables), and
    monomial content in saturated variables — units of that ring — is
    divided out wherever it appears.  Any polynomial factor common to
    all remaining generators is then classified: a factor in the kept
    variables alone is a component of the eliminant and is set aside to
    be multiplied back in; a factor dividing a saturated quantity (a
    saturated variable, or the numerator such a variable acquired under
    substitution) vanishes only where the saturation already excludes
    solutions, so it is divided out; any other common factor witnesses
    a solution component with every saturated quantity nonzero and the
    kept values unconstrained, which makes the kept-variable
    intersection zero — reported as the documented error.

    The surviving variables are removed by iterated resultants against
    a fixed pivot.  The resultant of two ideal members is an ideal
    member free of the pivoted variable, so the returned polynomial is
    an exact member of the saturated ideal's kept-variable
    intersection: the intersection's generator divides it, every factor
    of the generator appears among its factors, and extraneous
    cofactors — the usual price of resultant elimination, and of the
    shrunken localization when a saturated quantity's numerator is
    divided out — may accompany them.  Budgets are honored between
    steps; exceeding one raises, never returns a wrong answer.
    """
    budget = budget or GroebnerBudget()
    deadline = (
        time.monotonic() + budget.max_seconds if budget.max_seconds is not None else None
    )
    stats: dict = {"tower": []}

    def check_time() -> None:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded("time budget exceeded", stats=dict(stats))

    reduced_gens, removed, extra_saturations = _substitute_linear(
        list(task.generators), task.eliminate, tuple(task.saturations)
    )
    stats["substituted"] = tuple(removed)
    if not reduced_gens:
        raise EliminationError("system collapsed to zero; nothing to eliminate")
    live = tuple(name for name in task.eliminate if name not in removed)
    keep = tuple(task.keep)
    work_vars = live + keep
    gens = [g.with_variables(work_vars) for g in reduced_gens]
    invertible = tuple(name for name in task.saturations if name in work_vars)
    backing = tuple(
        s.with_variables(work_vars) for s in extra_saturations if not s.is_zero
    )
    stats["saturation_numerator_factors"] = tuple(s.text() for s in backing)

    keep_set = set(keep)
    invertible_set = set(invertible)
    prefactors: list[tuple[MultiPoly, int]] = []

    def keep_only(p: MultiPoly) -> bool:
        return not any(p.uses(name) for name in live)

    def classify_factor(factor_poly: MultiPoly, multiplicity: int) -> None:
        if len(factor_poly.terms) == 1:
            (mono, _), = factor_poly.terms
            used = {
                name
                for name, exp in zip(factor_poly.variables, mono)
                if exp
            }
            if used <= invertible_set:
                # A unit of the localized ring: no content to record.
                return
        if keep_only(factor_poly):
            prefactors.append((factor_poly, multiplicity))
            stats.setdefault("kept_components", []).append(factor_poly.text())
            return
        if any(_divides_exactly(factor_poly, b) for b in backing):
            stats.setdefault("saturated_components", []).append(factor_poly.text())
            return
        raise EliminationError(
            "ideal intersection with the kept variables is zero: the system "
            "carries a solution component with every saturated quantity "
            "nonzero and the kept variables unconstrained; "
            "check the normalization choice"
        )

    def divide_common(current: list[MultiPoly]) -> list[MultiPoly]:
        current = [
            _strip_invertible_content(g, invertible) for g in current if not g.is_zero
        ]
        while len(current) > 1:
            check_time()
            common = current[0]
            for other in current[1:]:
                common = _gcd_pair(common, other)
                if common.total_degree() == 0:
                    break
            if common.total_degree() == 0:
                break
            for factor_poly, multiplicity in factor_over_rationals(common):
                classify_factor(factor_poly, multiplicity)
            current = [
                _strip_invertible_content(_quo_exact(g, common), invertible)
                for g in current
            ]
        return current

    current = divide_common(gens)
    while True:
        check_time()
        live_used = sorted(name for name in live if any(g.uses(name) for g in current))
        if not live_used:
            break

        def variable_cost(name: str) -> tuple:
            degrees = sorted(g.degree(name) for g in current if g.uses(name))
            return (degrees[0], sum(degrees), name)

        target = min(live_used, key=variable_cost)
        users = [g for g in current if g.uses(target)]
        rest = [g for g in current if not g.uses(target)]
        users.sort(key=lambda g: (g.degree(target), len(g.terms), g.terms))
        pivot = users[0]
        if len(users) == 1:
            # The variable's only relation cannot be transported to the
            # kept variables: its solutions are unconstrained fibers.
            if not rest:
                raise EliminationError(
                    "ideal intersection with the kept variables is zero: "
                    "a variable remains free; check the normalization choice"
                )
            stats["tower"].append({"variable": target, "resultants": 0})
            current = rest
            continue
        resultants = []
        for other in users[1:]:
            check_time()
            pair_common = _gcd_pair(pivot, other)
            if pair_common.total_degree() > 0:
                for factor_poly, multiplicity in factor_over_rationals(pair_common):
                    classify_factor(factor_poly, multiplicity)
                other = _strip_invertible_content(
                    _quo_exact(other, pair_common), invertible
                )
                if other.total_degree() == 0:
                    continue
                if not other.uses(target):
                    rest.append(other)
                    continue
            member = _resultant_pair(pivot, other, target)
            if member.is_zero:
                raise EliminationError(
                    "resultant vanished after common factors were removed; "
                    "the system is degenerate"
                )
            resultants.append(_strip_invertible_content(member, invertible))
        stats["tower"].append(
            {
                "variable": target,
                "pivot_degree": pivot.degree(target),
                "resultants": len(resultants),
            }
        )
        current = divide_common(resultants + rest)
        if not current:
            raise EliminationError("system collapsed to zero; nothing to eliminate")

    members = sorted(
        (g.with_variables(keep) for g in current),
        key=lambda g: (g.total_degree(), len(g.terms), g.terms),
    )
    eliminant = members[0] if members else MultiPoly.constant(keep, 1)
    if not members and not prefactors:
        raise EliminationError(
            "ideal intersection with the kept variables is zero; "
            "check the normalization choice"
        )
    for factor_poly, multiplicity in prefactors:
        eliminant = eliminant * factor_poly.with_variables(keep) ** multiplicity
    eliminant = _strip_invertible_content(
        eliminant, tuple(name for name in keep if name in invertible_set)
    ).primitive()
    if eliminant.total_degree() == 0:
        raise EliminationError(
            "the saturated system has no solutions: the kept-variable "
            "intersection is the unit ideal"
        )
    stats["members"] = tuple(
        (len(g.terms), g.total_degree()) for g in members
    )
    factors = factor_over_rationals(eliminant)
    squarefree = MultiPoly.constant(keep, 1)
    for factor_poly, _ in factors:
        squarefree = squarefree * factor_poly
    return EliminationResult(
        eliminant=eliminant,
        factors=factors,
        squarefree=squarefree.primitive(),
        kept_basis=tuple(members),
        stats=stats,
    )


# --------------------------------------------------------------------------
# sympy bridge: gcd and factorization
# --------------------------------------------------------------------------


def _to_sympy(p: MultiPoly) -> sympy.Poly:
    symbols = sympy.symbols(p.variables)
    if isinstance(symbols, sympy.Symbol):
        symbols = (symbols,)
    expr = sympy.Integer(0)
    for mono, coeff in p.terms:
        term = sympy.Rational(coeff.numerator, coeff.denominator)
        for symbol, exp in zip(symbols, mono):
            if exp:
                term *= symbol**exp
        expr += term
    return sympy.Poly(expr, *symbols)

def _from_sympy(poly: sympy.Poly, variables: tuple[str, ...]) -> MultiPoly:
    coeffs: dict[Monomial, Fraction] = {}
    for mono, coeff in poly.terms():
        rational = sympy.Rational(coeff)
        coeffs[tuple(int(e) for e in mono)] = Fraction(
            int(rational.p), int(rational.q)
        )
    return MultiPoly.from_dict(variables, coeffs)


def _symbols_of(variables: tuple[str, ...]) -> tuple:
    symbols = sympy.symbols(variables)
    if isinstance(symbols, sympy.Symbol):
        symbols = (symbols,)
    return symbols


def _gcd_pair(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    result = sympy.gcd(_to_sympy(a), _to_sympy(b))
    return _from_sympy(sympy.Poly(result, *_symbols_of(a.variables)), a.variables)


def _quo_exact(p: MultiPoly, divisor: MultiPoly) -> MultiPoly:
    """Exact quotient ``p / divisor``; raises on a nonzero remainder."""
    symbols = _symbols_of(p.variables)
    quotient, remainder = sympy.div(
        _to_sympy(p).as_expr(),
        _to_sympy(divisor.with_variables(p.variables)).as_expr(),
        *symbols,
    )
    if sympy.expand(remainder) != 0:
        raise ValueError("inexact polynomial division")
    return _from_sympy(sympy.Poly(quotient, *symbols), p.variables)


def _divides_exactly(candidate: MultiPoly, target: MultiPoly) -> bool:
    """True when ``candidate`` divides ``target`` over the rationals."""
    if candidate.total_degree() == 0:
        return not candidate.is_zero
    symbols = _symbols_of(candidate.variables)
    _, remainder = sympy.div(
        _to_sympy(target.with_variables(candidate.variables)).as_expr(),
        _to_sympy(candidate).as_expr(),
        *symbols,
    )
    return sympy.expand(remainder) == 0


def _resultant_pair(f: MultiPoly, g: MultiPoly, name: str) -> MultiPoly:
    """Resultant of ``f`` and ``g`` with respect to ``name``.

    The result lies in the ideal generated by the two inputs and is
    free of the chosen variable — the classical one-variable
    elimination step.
    """
    symbols = _symbols_of(f.variables)
    target = symbols[f.variables.index(name)]
    result = sympy.resultant(
        _to_sympy(f).as_expr(),
        _to_sympy(g.with_variables(f.variables)).as_expr(),
        target,
    )
    return _from_sympy(
        sympy.Poly(sympy.expand(result), *symbols), f.variables
    )


def factor_over_rationals(p: MultiPoly) -> tuple[tuple[MultiPoly, int], ...]:
    """Irreducible rational factors with multiplicities, primitive, sorted.

    The product of the factors (with multiplicity, times the returned
    constant factor absorbed into the first entry's sign convention)
    reproduces the input exactly up to a positive rational unit; tests
    verify the reconstruction.
    """
    if p.is_zero:
        return ()
    _, factor_list = _to_sympy(p).factor_list()
    out = []
    for factor_poly, multiplicity in factor_list:
        converted = _from_sympy(factor_poly, p.variables).primitive()
        if converted.total_degree() == 0:
            continue
        out.append((converted, int(multiplicity)))
    out.sort(key=lambda item: (item[0].total_degree(), item[0].terms))
    return tuple(out)


def normalize_unit_monomial(p: MultiPoly) -> MultiPoly:
    """Strip monomial content and sign: the representative of a factor
    up to unit monomials, used when comparing against printed factors."""
    if p.is_zero:
        return p
    mins = [min(mono[i] for mono, _ in p.terms) for i in range(len(p.variables))]
    shifted = {
        tuple(e - m for e, m in zip(mono, mins)): coeff for mono, coeff in p.terms
    }
    return MultiPoly.from_dict(p.variables, shifted).primitive()


def same_up_to_unit(a: MultiPoly, b: MultiPoly) -> bool:
    """Equality up to sign and monomial factors in the shared variables."""
    if a.variables != b.variables:
        b = b.with_variables(a.variables)
    return normalize_unit_monomial(a) == normalize_unit_monomial(b)


# --------------------------------------------------------------------------
# Equation conversion and parsing
# --------------------------------------------------------------------------


def _gamma_name(label: str) -> str:
    return f"γ_{label}"


def equations_to_polynomials(
    equations: Sequence[Union[PtolemyEquation, TailEquation]],
    set_to_one: Optional[str] = None,
) -> tuple[tuple[MultiPoly, ...], tuple[str, ...]]:
    """Polynomials under meridian-squaring and longitude-half negation.

    Each three-term equation becomes a polynomial over the edge
    variables plus ``L`` and ``M``: the half-power of the longitude
    parameter is replaced by ``-L`` and the meridian parameter by
    ``M**2``, then negative powers are cleared per equation.  The edge
    variable named by ``set_to_one`` is substituted away.
    """
    labels: set[str] = set()
    for equation in equations:
        if isinstance(equation, PtolemyEquation):
            for term in equation.terms:
                labels.update(term.gammas)
        else:
            labels.update((equation.fold, equation.outer, equation.pivot))
    if set_to_one is not None:
        if set_to_one not in labels:
            raise ValueError(f"{set_to_one!r} does not appear in the system")
        labels.discard(set_to_one)
    from .nz import _edge_sort_key  # deterministic label order

    gamma_vars = tuple(
        _gamma_name(label) for label in sorted(labels, key=lambda lb: _edge_sort_key(lb, 0))
    )
    variables = gamma_vars + ("L", "M")
    width = len(variables)
    index = {name: i for i, name in enumerate(variables)}

    def monomial_of(gammas: Iterable[tuple[str, int]], l_exp: int, m_exp: int) -> Monomial:
        mono = [0] * width
        for label, power in gammas:
            if set_to_one is not None and label == set_to_one:
                continue
            mono[index[_gamma_name(label)]] += power
        mono[index["L"]] = l_exp
        mono[index["M"]] = m_exp
        return tuple(mono)

    polys = []
    for equation in equations:
        raw: list[tuple[Fraction, list[tuple[str, int]], int, int]] = []
        if isinstance(equation, PtolemyEquation):
            for term in equation.terms:
                sign = term.sign * (-1) ** (term.l_half % 2)
                gammas = [(term.gammas[0], 1), (term.gammas[1], 1)]
                if term.gammas[0] == term.gammas[1]:
                    gammas = [(term.gammas[0], 2)]
                raw.append((Fraction(sign), gammas, term.l_half, term.m_half))
        else:
            for coeff, f_pow, o_pow, p_pow in equation.all_terms():
                gammas = [
                    (equation.fold, f_pow),
                    (equation.outer, o_pow),
                    (equation.pivot, p_pow),
                ]
                raw.append((Fraction(coeff), [g for g in gammas if g[1]], 0, 0))
        min_l = min(item[2] for item in raw)
        min_m = min(item[3] for item in raw)
        shift_l = -min(min_l, 0)
        shift_m = -min(min_m, 0)
        coeffs: dict[Monomial, Fraction] = {}
        for value, gammas, l_exp, m_exp in raw:
            mono = monomial_of(gammas, l_exp + shift_l, m_exp + shift_m)
            coeffs[mono] = coeffs.get(mono, Fraction(0)) + value
        polys.append(MultiPoly.from_dict(variables, coeffs))
    return tuple(polys), variables


import re as _re

_TOKEN = _re.compile(
    r"(?P<sign>[+-])|(?P<int>\d+)|(?P<var>[^\W\d]\w*)(?:\s*\^\s*(?P<exp>\d+))?",
    _re.UNICODE,
)


def parse_polynomial(text: str, variables: Sequence[str]) -> MultiPoly:
    """Parse pasted polynomial text (juxtaposition or ``*`` products).

    Accepts forms like ``1 - 2 L + 6 L M^2 - 7 L^2 M^8``: signs split
    terms, integers multiply, names raised with ``^``.
    """
    cleaned = text.replace("*", " ").replace("\n", " ")
    variables = tuple(variables)
    index = {name: i for i, name in enumerate(variables)}
    width = len(variables)
    coeffs: dict[Monomial, Fraction] = {}
    sign = 1
    coeff: Optional[int] = None
    mono = [0] * width
    seen_factor = False

    def flush() -> None:
        nonlocal sign, coeff, mono, seen_factor
        if not seen_factor and coeff is None:
            return
        value = Fraction(sign * (coeff if coeff is not None else 1))
        key = tuple(mono)
        coeffs[key] = coeffs.get(key, Fraction(0)) + value
        sign, coeff, mono, seen_factor = 1, None, [0] * width, False

    pos = 0
    for match in _TOKEN.finditer(cleaned):
        between = cleaned[pos : match.start()]
        if between.strip():
            raise ValueError(f"unexpected text {between.strip()!r}")
        pos = match.end()
        if match.group("sign"):
            flush()
            sign = -1 if match.group("sign") == "-" else 1
            seen_factor = False
        elif match.group("int"):
            if coeff is None:
                coeff = int(match.group("int"))
            else:
                coeff *= int(match.group("int"))
            seen_factor = True
        else:
            name = match.group("var")
            if name not in index:
                raise ValueError(f"unknown variable {name!r}")
            exp = int(match.group("exp") or 1)
            mono[index[name]] += exp
            seen_factor = True
    if cleaned[pos:].strip():
        raise ValueError(f"unexpected trailing text {cleaned[pos:].strip()!r}")
    flush()
    return MultiPoly.from_dict(variables, coeffs)


# --------------------------------------------------------------------------
# Numeric root finding (elimination soundness checks)
# --------------------------------------------------------------------------


def numeric_common_roots(
    polys: Sequence[MultiPoly],
    n_roots: int = 20,
    seed: int = 0,
    fix: Optional[str] = None,
    tol: float = 1e-12,
    max_attempts: Optional[int] = None,
) -> list[dict[str, complex]]:
    """Common numeric roots of the system, by damped Newton from random starts.

    When the system has one more unknown than equations, the variable
    named by ``fix`` (default ``M`` when present, else the last
    variable) is pinned to a random unit-modulus value per attempt so
    the remaining square system can be solved.  Converged assignments
    (residual below ``tol``) are collected until ``n_roots`` are found.
    """
    if not polys:
        raise ValueError("no polynomials")
    variables = polys[0].variables
    rng = random.Random(seed)
    unknown_count = len(variables)
    fixed_name: Optional[str] = None
    if unknown_count == len(polys) + 1:
        fixed_name = fix or ("M" if "M" in variables else variables[-1])
        unknown_count -= 1
    elif unknown_count != len(polys):
        raise ValueError(
            f"{len(polys)} equations in {unknown_count} unknowns is not supported"
        )
    free = [name for name in variables if name != fixed_name]
    derivs = [[p.derivative(name) for name in free] for p in polys]

    roots: list[dict[str, complex]] = []
    attempts = 0
    cap = max_attempts if max_attempts is not None else 60 * n_roots
    while len(roots) < n_roots and attempts < cap:
        attempts += 1
        assignment: dict[str, complex] = {}
        if fixed_name is not None:
            theta = rng.uniform(0.0, 2.0 * math.pi)
            radius = math.exp(rng.uniform(-0.2, 0.2))
            assignment[fixed_name] = radius * complex(math.cos(theta), math.sin(theta))
        x = np.array(
            [
                complex(rng.gauss(0.0, 1.0), rng.gauss(0.0, 1.0))
                for _ in free
            ],
            dtype=complex,
        )
        for _ in range(120):
            point = dict(assignment)
            point.update({name: x[i] for i, name in enumerate(free)})
            f_val = np.array([p.evaluate(point) for p in polys], dtype=complex)
            norm = float(np.linalg.norm(f_val))
            if norm < tol:
                break
            jac = np.array(
                [[d.evaluate(point) for d in row] for row in derivs], dtype=complex
            )
            try:
                step = np.linalg.solve(jac, f_val)
            except np.linalg.LinAlgError:
                break
            damp = 1.0
            moved = False
            for _ in range(40):
                trial = x - damp * step
                trial_point = dict(assignment)
                trial_point.update({name: trial[i] for i, name in enumerate(free)})
                trial_norm = float(
                    np.linalg.norm([p.evaluate(trial_point) for p in polys])
                )
                if trial_norm < norm:
                    x = trial
                    moved = True
                    break
                damp *= 0.5
            if not moved:
                break
        point = dict(assignment)
        point.update({name: x[i] for i, name in enumerate(free)})
        residual = float(np.linalg.norm([p.evaluate(point) for p in polys]))
        if residual < tol and all(np.isfinite([abs(v) for v in point.values()])):
            roots.append(point)
    return roots
