"""Data-matrix core: standardization, SVD, and column variance distributions.

The matrix convention is rows = samples (n), columns = features (p).
All selectors downstream consume either the singular values of X or the
empirical distribution of column variances diag(X'X/n), both defined here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AllZeroMatrix,
    ConvergenceFailure,
    DimensionMismatch,
    InvalidDistribution,
    ZeroVarianceColumn,
)

__all__ = [
    "DataMatrix",
    "SvdResult",
    "VarianceDistribution",
    "standardize",
    "variance_distribution",
    "svd",
]


@dataclass
class DataMatrix:
    """Dense n x p real matrix, n samples by p features.

    Entries must be finite; missing-value handling is the ingestion
    layer's job and happens before construction.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d array, got ndim={vals.ndim}")
        if vals.shape[0] < 2 or vals.shape[1] < 1:
            raise DimensionMismatch(
                f"need n >= 2 samples and p >= 1 features, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DimensionMismatch("matrix entries must all be finite")
        self.values = vals

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape


@dataclass
class SvdResult:
    """Ordered singular triples of a matrix.

    singular_values is non-increasing with length min(n, p);
    left_vectors is n x min(n, p) and right_vectors is p x min(n, p),
    both column-orthonormal.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray


@dataclass
class VarianceDistribution:
    """Weighted point masses {(w_j, Phi_j)} on the nonnegative axis.

    Weights are strictly positive and sum to 1 (within 1e-12); atoms are
    nonnegative. Atom order is meaningful to callers (column order) and
    is never rearranged here.
    """

    weights: np.ndarray
    atoms: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        a = np.ascontiguousarray(self.atoms, dtype=np.float64)
        if w.ndim != 1 or a.ndim != 1 or w.shape != a.shape or w.size == 0:
            raise InvalidDistribution(
                f"weights and atoms must be equal-length 1-d arrays, "
                f"got shapes {w.shape} and {a.shape}"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(a))):
            raise InvalidDistribution("weights and atoms must be finite")
        if np.any(w <= 0):
            raise InvalidDistribution("weights must be strictly positive")
        total = float(np.sum(w))
        if abs(total - 1.0) > 1e-12:
            raise InvalidDistribution(f"weights must sum to 1, got {total!r}")
        if np.any(a < 0):
            raise InvalidDistribution("atoms must be nonnegative")
        self.weights = w
        self.atoms = a

    @property
    def max_atom(self):
        return float(np.max(self.atoms))

    def coalesced(self, rel_tol=1e-12):
        """Merge atoms equal within rel_tol (relative to the larger one).

        Optional preprocessing that shortens the sums inside the edge
        solver; correctness never requires it.
        """
        order = np.argsort(self.atoms, kind="stable")
        a = self.atoms[order]
        w = self.weights[order]
        out_a = [a[0]]
        out_w = [w[0]]
        for av, wv in zip(a[1:], w[1:]):
            if av - out_a[-1] <= rel_tol * max(av, abs(out_a[-1])):
                out_w[-1] += wv
            else:
                out_a.append(av)
                out_w.append(wv)
        return VarianceDistribution(np.array(out_w), np.array(out_a))


def standardize(X, scale):
    """Center every column; optionally divide by the sample SD (divisor n-1).

    Raises ZeroVarianceColumn when scale is requested and a column is
    constant. The divisor convention is recorded by callers that emit
    metadata.
    """
    vals = X.values
    centered = vals - vals.mean(axis=0)
    if scale:
        sd = centered.std(axis=0, ddof=1)
        bad = np.flatnonzero(sd == 0.0)
        if bad.size:
            raise ZeroVarianceColumn(int(bad[0]))
        centered = centered / sd
    return DataMatrix(centered)


def variance_distribution(X):
    """Empirical distribution of column variances diag(X'X/n), weights 1/p.

    Atom order matches column order. Raises AllZeroMatrix when every
    column is identically zero, since the spectral edge of the all-zero
    distribution is undefined.
    """
    vals = X.values
    atoms = np.einsum("ij,ij->j", vals, vals) / vals.shape[0]
    if not np.any(atoms > 0):
        raise AllZeroMatrix()
    weights = np.full(vals.shape[1], 1.0 / vals.shape[1])
    return VarianceDistribution(weights, atoms)


def svd(X):
    """Full thin SVD of X with non-increasing singular values."""
    try:
        u, s, vt = np.linalg.svd(X.values, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SvdResult(singular_values=s, left_vectors=u, right_vectors=vt.T)
