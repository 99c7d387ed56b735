"""Exact-arithmetic verification lab for linear BV-BFV gauge theories on
simplicial complexes, plus symbolic checks of graded symplectic target data.

All linear algebra is over the rationals; every verdict produced by this
package is an exact statement, never a numerical tolerance.
"""

__version__ = "0.1.0"
