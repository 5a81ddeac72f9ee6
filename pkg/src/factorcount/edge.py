"""Upper edge of the generalized Marchenko-Pastur distribution.

For a weighted point-mass variance distribution H = sum_j w_j delta_{Phi_j}
and aspect ratio gamma, the map

    z(v) = -1/v + gamma * sum_j w_j Phi_j / (1 + Phi_j v)

is strictly convex on (B, 0) with B = -1/max_j Phi_j, diverging at both
ends, and its minimum value z(v*) is the upper support edge. We locate
v* by bracketing the sign change of z' and polishing with Brent's
method.

Two interchangeable kernels exist: a compiled one (_edgecore, built from
Cython) and a pure-Python one (_edgepy). The compiled kernel is used
when importable; set FACTORCOUNT_PURE_PYTHON=1 before import to force
the fallback. Both honor identical bracket and stopping rules.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MaxIterations, NoBracket
from .matrix import VarianceDistribution

__all__ = [
    "EdgeProblem",
    "EdgeSolution",
    "silverstein_z",
    "silverstein_z_prime",
    "upper_edge",
    "tracy_widom_scale",
    "backend_name",
]

if os.environ.get("FACTORCOUNT_PURE_PYTHON"):
    from . import _edgepy as _kernel

    _BACKEND = "pure"
else:
    try:
        from . import _edgecore as _kernel

        _BACKEND = "compiled"
    except ImportError:
        from . import _edgepy as _kernel

        _BACKEND = "pure"


def backend_name():
    """Kernel selected at import time: "compiled" or "pure"."""
    return _BACKEND


@dataclass
class EdgeProblem:
    """Aspect ratio gamma = p/n plus a variance distribution H.

    H must put positive mass somewhere above zero, otherwise the edge
    is undefined.
    """

    gamma: float
    H: VarianceDistribution

    def __post_init__(self):
        g = float(self.gamma)
        if not (np.isfinite(g) and g > 0):
            raise DomainError(f"gamma must be positive and finite, got {self.gamma!r}")
        self.gamma = g
        if self.H.max_atom <= 0:
            raise DomainError("H must have at least one positive atom")

    @property
    def lower_end(self):
        """B = -1/max_j Phi_j, the left end of the search interval."""
        return -1.0 / self.H.max_atom


@dataclass
class EdgeSolution:
    v_star: float
    edge: float
    iterations: int
    residual: float


def _check_domain(v, prob):
    B = prob.lower_end
    if not (B < v < 0.0):
        raise DomainError(f"v must lie in ({B!r}, 0), got {v!r}")


def silverstein_z(v, prob):
    """Evaluate z(v) with compensated summation over the atoms."""
    _check_domain(v, prob)
    return float(_kernel.z_value(float(v), prob.gamma, prob.H.weights, prob.H.atoms))


def silverstein_z_prime(v, prob):
    """Evaluate z'(v) = 1/v^2 - gamma * sum_j w_j Phi_j^2/(1 + Phi_j v)^2."""
    _check_domain(v, prob)
    return float(_kernel.z_prime(float(v), prob.gamma, prob.H.weights, prob.H.atoms))


def upper_edge(prob):
    """Minimize z on (B, 0) and return the edge z(v*) with diagnostics.

    Raises NoBracket when no sign change of z' can be bracketed (only
    degenerate H, e.g. vanishing weight on the top atom) and
    MaxIterations when Brent's method fails to meet its stopping rules
    within the iteration cap.
    """
    status, v_star, edge_val, iterations, residual = _kernel.solve_edge(
        prob.gamma, prob.H.weights, prob.H.atoms, prob.H.max_atom
    )
    if status == 1:
        raise NoBracket(f"gamma={prob.gamma!r}, {prob.H.atoms.size} atoms")
    if status == 2:
        raise MaxIterations(200)
    return EdgeSolution(
        v_star=float(v_star),
        edge=float(edge_val),
        iterations=int(iterations),
        residual=float(residual),
    )


def tracy_widom_scale(n, p):
    """Fluctuation scale of the top noise singular value squared.

    tau = n^{-1/2} * (1 + (p/n)^{1/2}) * (n^{-1/2} + p^{-1/2})^{1/3}
    """
    n = int(n)
    p = int(p)
    if n < 1 or p < 1:
        raise DomainError(f"n and p must be >= 1, got n={n}, p={p}")
    return n ** -0.5 * (1.0 + (p / n) ** 0.5) * (n ** -0.5 + p ** -0.5) ** (1.0 / 3.0)
