"""Numerical tolerances.

``PLURILATT_TOL`` overrides the consistency tolerance used for residual checks
(propagation agreement, closedness of conjugate 1-forms, flip extension).
"""

import os

#: relative tolerance for consistency residuals
CONSISTENCY_TOL = 1e-9
#: relative tolerance for exact algebraic identities
ALGEBRAIC_TOL = 1e-12
#: a denominator is degenerate when |den| < DEGENERACY_TOL * scale**2
DEGENERACY_TOL = 1e-12
#: relative singular-value threshold for the numerical rank of a cube Gram matrix
RANK_TOL = 1e-8


def consistency_tol():
    """Current consistency tolerance, re-reading the environment."""
    return float(os.environ.get("PLURILATT_TOL", CONSISTENCY_TOL))
