"""Factor-number selectors: PA, DPA, DDPA, DDPA+.

All selectors take a centered DataMatrix and return a SelectionResult:
the chosen k plus a per-step audit trail. PA compares each observed
singular value against the same-index singular values of column-wise
permuted copies. DPA replaces the permutation null with the upper edge
of the generalized Marchenko-Pastur law fitted to the empirical column
variances. DDPA re-tests after deflating each accepted factor so that
strong factors stop inflating the threshold for weaker ones. DDPA+
keeps a candidate only while the rank-one reconstruction built from it
would beat the all-zero estimate in mean squared error, using the
OptShrink spike functionals computed from the deflated spectrum.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .edge import EdgeProblem, upper_edge
from .errors import (
    AllZeroMatrix,
    ConvergenceFailure,
    DegenerateTopPair,
    DomainError,
    InvalidPercentile,
    ZeroD,
)
from .matrix import VarianceDistribution, svd, variance_distribution

__all__ = [
    "Method",
    "StepRecord",
    "SelectionResult",
    "SpectralFunctionals",
    "pa_select",
    "dpa_select",
    "ddpa_select",
    "ddpa_plus_select",
    "optshrink_functionals",
]


class Method(Enum):
    PA = "pa"
    DPA = "dpa"
    DDPA = "ddpa"
    DDPA_PLUS = "ddpa+"


@dataclass
class StepRecord:
    """One accept/reject decision.

    statistic is sigma_k(X) for PA, sigma_k(X)/sqrt(n) for DPA and DDPA,
    and the top remaining eigenvalue sigma_k(X)^2/n for DDPA+. Accepting
    means statistic > threshold (strict) except for DDPA+, which accepts
    while statistic < threshold. A step whose functionals degenerate is
    recorded with threshold 0, which always rejects.
    """

    index: int
    statistic: float
    threshold: float
    accepted: bool


@dataclass
class SelectionResult:
    """Selected k (= count of accepted steps) plus the audit trail.

    Steps appear in test order and the first rejected step, if any,
    ends the list. seed is set only by pa_select.
    """

    k: int
    steps: list
    method: Method
    seed: int = None


@dataclass
class SpectralFunctionals:
    """OptShrink quantities for the top eigenvalue of one spectrum.

    lam is the candidate eigenvalue (field named lam because lambda is
    reserved). ell = 1/D estimates the population spike; c_r_sq and
    c_l_sq estimate the squared cosines between the population and
    sample singular vectors on each side.
    """

    m: float
    v: float
    D: float
    ell: float
    m_prime: float
    v_prime: float
    D_prime: float
    c_r_sq: float
    c_l_sq: float
    lam: float
    gamma: float


def _svdvals(values):
    try:
        return np.linalg.svd(values, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def _nearest_rank_index(percentile, count):
    # 1-based nearest-rank: smallest index with at least percentile% mass.
    return max(1, math.ceil(percentile / 100.0 * count)) - 1


def pa_select(X, n_permutations=19, percentile=100.0, seed=0, fresh_permutations=False):
    """Permutation parallel analysis.

    Builds n_permutations null matrices by permuting every column of X
    independently with a counter-based generator (substream i drives
    permutation i, so results do not depend on evaluation order), then
    accepts factor k while sigma_k(X) strictly exceeds the nearest-rank
    percentile of the largest permuted singular values. percentile 100
    means the maximum, i.e. sigma_k(X) must clear every singular value
    of every permuted matrix. All steps share that one threshold, the
    permutation estimate of the noise edge, which is what makes the
    deterministic variant a drop-in replacement. By default the same
    permuted matrices serve every k; fresh_permutations=True redraws
    them for each step instead.

    Columns are put in a content-derived (lexicographic) order before
    any permutation is drawn, so for a fixed seed the result cannot
    depend on how the input's columns happen to be arranged, and
    positive rescaling scales every statistic and threshold together.
    """
    percentile = float(percentile)
    if not (0.0 < percentile <= 100.0):
        raise InvalidPercentile(percentile)
    n_permutations = int(n_permutations)
    if n_permutations < 1:
        raise DomainError(f"n_permutations must be >= 1, got {n_permutations}")
    seed = int(seed)
    if seed < 0:
        raise DomainError(f"seed must be nonnegative, got {seed}")

    # content-derived column order: permutation substreams attach to the
    # sorted columns, not to input positions, so reordering columns of X
    # cannot change the outcome (ties sort adjacent but are identical
    # columns, so their stream assignment is interchangeable)
    order = np.lexsort(X.values[::-1])
    values = X.values[:, order]
    m = min(X.n, X.p)
    limit = m - 1
    sv = _svdvals(values)
    rank_idx = _nearest_rank_index(percentile, n_permutations)
    root = np.random.SeedSequence(seed)

    def permuted_tops(children):
        out = np.empty(n_permutations)
        for i, child in enumerate(children):
            rng = np.random.Generator(np.random.Philox(child))
            out[i] = _svdvals(rng.permuted(values, axis=0))[0]
        return out

    if not fresh_permutations:
        tops = np.sort(permuted_tops(root.spawn(n_permutations)))
        shared_thr = float(tops[rank_idx])

    steps = []
    k = 0
    for c in range(limit):
        if fresh_permutations:
            tops = np.sort(permuted_tops(root.spawn(n_permutations)))
            thr = float(tops[rank_idx])
        else:
            thr = shared_thr
        stat = float(sv[c])
        accepted = stat > thr
        steps.append(StepRecord(c + 1, stat, thr, accepted))
        if not accepted:
            break
        k += 1
    return SelectionResult(k=k, steps=steps, method=Method.PA, seed=seed)


def dpa_select(X, eps=0.0):
    """Deterministic parallel analysis.

    Computes the empirical column-variance distribution once, its upper
    spectral edge once, and counts the singular values of X/sqrt(n)
    strictly above (1+eps) * edge^{1/2}. Every step shares that one
    threshold. An all-zero matrix selects k = 0.
    """
    eps = _check_eps(eps)
    try:
        H = variance_distribution(X)
    except AllZeroMatrix:
        return SelectionResult(k=0, steps=[], method=Method.DPA)
    sol = upper_edge(EdgeProblem(gamma=X.p / X.n, H=H))
    thr = (1.0 + eps) * math.sqrt(sol.edge)
    sv = _svdvals(X.values) / math.sqrt(X.n)

    steps = []
    k = 0
    for c in range(min(X.n, X.p) - 1):
        stat = float(sv[c])
        accepted = stat > thr
        steps.append(StepRecord(c + 1, stat, thr, accepted))
        if not accepted:
            break
        k += 1
    return SelectionResult(k=k, steps=steps, method=Method.DPA)


def ddpa_select(X, eps=0.0):
    """Deflated deterministic parallel analysis.

    Like dpa_select, but after each accepted factor the top remaining
    singular triple is deflated away and both the variance distribution
    and the edge are recomputed for the residual. One SVD of X supplies
    every deflation: the residual's column variances follow from the
    tail triples, so each step costs one O(p) update plus one edge
    solve. The variances are rebuilt from the tail every 32 steps to
    bound rounding drift. Selection stops, rejecting, if the residual
    becomes numerically zero.
    """
    eps = _check_eps(eps)
    n, p = X.n, X.p
    m = min(n, p)
    limit = m - 1
    gamma = p / n
    sqrt_n = math.sqrt(n)

    dec = svd(X)
    s = dec.singular_values
    V = dec.right_vectors
    s2 = s * s
    phi = np.einsum("ij,ij->j", X.values, X.values) / n
    weights = np.full(p, 1.0 / p)

    steps = []
    k = 0
    while k < limit:
        atoms = np.maximum(phi, 0.0)
        if not np.any(atoms > 0):
            break
        sol = upper_edge(EdgeProblem(gamma=gamma, H=VarianceDistribution(weights, atoms)))
        thr = (1.0 + eps) * math.sqrt(sol.edge)
        stat = float(s[k] / sqrt_n)
        accepted = stat > thr
        steps.append(StepRecord(k + 1, stat, thr, accepted))
        if not accepted:
            break
        k += 1
        if k % 32 == 0:
            phi = np.einsum("ji,i,ji->j", V[:, k:], s2[k:], V[:, k:]) / n
        else:
            phi = phi - s2[k - 1] * (V[:, k - 1] ** 2) / n
    return SelectionResult(k=k, steps=steps, method=Method.DDPA)


def ddpa_plus_select(X):
    """Deflated selection with an estimation-accuracy threshold.

    Works on the eigenvalues of (1/n) X'X. For each candidate the
    OptShrink functionals of the remaining spectrum give the estimated
    population spike ell and squared vector cosines c_r_sq, c_l_sq; the
    candidate is kept while its eigenvalue stays below
    4 * ell * c_r_sq * c_l_sq, the point at which keeping the rank-one
    term stops improving mean squared error over dropping it. Both
    sides of that comparison scale together under rescaling of X.
    Degenerate spectra (tied top pair, vanishing denominators) stop
    selection with a rejecting step recorded at threshold 0.
    """
    n, p = X.n, X.p
    m = min(n, p)
    if m < 2:
        raise DomainError("ddpa_plus_select needs min(n, p) >= 2")
    gamma = p / n
    lam = (_svdvals(X.values) ** 2) / n

    steps = []
    k = 0
    while m - k >= 2:
        lam1 = float(lam[k])
        if lam1 <= 0.0:
            break
        try:
            f = optshrink_functionals(lam[k:], gamma)
        except (DegenerateTopPair, ZeroD):
            steps.append(StepRecord(k + 1, lam1, 0.0, False))
            break
        thr = 4.0 * f.ell * f.c_r_sq * f.c_l_sq
        accepted = lam1 < thr
        steps.append(StepRecord(k + 1, lam1, thr, accepted))
        if not accepted:
            break
        k += 1
    return SelectionResult(k=k, steps=steps, method=Method.DDPA_PLUS)


def optshrink_functionals(spectrum, gamma):
    """Spike functionals of a non-increasing eigenvalue spectrum.

    With lam = spectrum[0] and the remaining r-1 values as the noise
    proxy:

        m  = mean of 1/(lam_i - lam)          v  = gamma*m - (1-gamma)/lam
        D  = lam*m*v                          ell = 1/D
        m' = mean of 1/(lam_i - lam)^2        v' = gamma*m' + (1-gamma)/lam^2
        D' = m*v + lam*(m*v' + m'*v)
        c_r_sq = m/(D'*ell)                   c_l_sq = v/(D'*ell)

    Raises DegenerateTopPair when the two leading values are equal to
    within 1e-12 relative and ZeroD when D or D' vanishes.
    """
    arr = np.ascontiguousarray(spectrum, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise DomainError("spectrum must be 1-d with at least 2 values")
    if not np.all(np.isfinite(arr)):
        raise DomainError("spectrum must be finite")
    if np.any(np.diff(arr) > 0):
        raise DomainError("spectrum must be non-increasing")
    gamma = float(gamma)
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    lam = float(arr[0])
    if lam <= 0:
        raise DomainError(f"top eigenvalue must be positive, got {lam!r}")
    if arr[0] - arr[1] <= 1e-12 * arr[0]:
        raise DegenerateTopPair(float(arr[0]), float(arr[1]))

    gaps = arr[1:] - lam
    m = float(np.mean(1.0 / gaps))
    v = gamma * m - (1.0 - gamma) / lam
    D = lam * m * v
    if D == 0.0:
        raise ZeroD()
    ell = 1.0 / D
    m_prime = float(np.mean(1.0 / (gaps * gaps)))
    v_prime = gamma * m_prime + (1.0 - gamma) / (lam * lam)
    D_prime = m * v + lam * (m * v_prime + m_prime * v)
    if D_prime == 0.0:
        raise ZeroD()
    return SpectralFunctionals(
        m=m,
        v=v,
        D=D,
        ell=ell,
        m_prime=m_prime,
        v_prime=v_prime,
        D_prime=D_prime,
        c_r_sq=m / (D_prime * ell),
        c_l_sq=v / (D_prime * ell),
        lam=lam,
        gamma=gamma,
    )


def _check_eps(eps):
    eps = float(eps)
    if not (math.isfinite(eps) and eps >= 0.0):
        raise DomainError(f"eps must be >= 0, got {eps!r}")
    return eps
