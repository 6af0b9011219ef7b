"""Single binary operators that generate elementary functions.

S(x, y) = M(f(x), g(y)) with g the inverse of f and M a subtraction-like
operation.  The package checks the axioms of M numerically, builds the
six-step derivation chain as expression trees, and searches for minimal
trees representing target functions.
"""

__version__ = "0.1.0"
