"""Triangulations, hyperbolic structures, and A-polynomials of double twist knots.

The package builds two explicit families of ideal triangulations of the
double twist knot complements K(p, q) (p, q >= 2):

* a conjecturally-minimal family obtained by layering solid tori onto a
  ten-tetrahedron seed, with 6 + (p-2) + (q-2) tetrahedra, and
* a second family of layered-solid-torus double covers glued along a
  four-triangle interface, with 4(p-1) + 4(q-1) tetrahedra.

On top of the combinatorics it certifies the hyperbolic structure
numerically (angle-structure volume maximization followed by a Newton
solution of the gluing and completeness equations), derives Neumann-Zagier
data, writes down Ptolemy-style gluing variety equations, and eliminates
variables to obtain PSL(2, C) A-polynomials exactly.
"""

from __future__ import annotations

__version__ = "1.0.0"
