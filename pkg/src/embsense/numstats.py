"""Deterministic numerical primitives: ranking, Spearman correlation,
SVD/PCA with fixed sign conventions, single-target CCA, two-class LDA,
and orthonormal-basis utilities.

Everything here is a pure function of its inputs. Decompositions are
delegated to LAPACK via numpy, then post-processed so repeated calls on
identical inputs give bit-identical outputs (sign conventions fixed,
no randomized algorithms).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateGeometryError,
    DegenerateInputError,
    DimensionMismatchError,
    InvalidInputError,
)

# Relative tolerance (as a fraction of the data range) below which two
# values are considered tied by rank_transform. Keeps rank statistics
# stable when mathematically equal values differ only by float rounding.
RANK_TIE_RTOL = 1e-8


@dataclass
class SpectrumReport:
    """A non-increasing spectrum (singular values or their analogues)
    together with its copy normalized by the leading value."""

    values: np.ndarray
    normalized: np.ndarray = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise InvalidInputError("spectrum must be one-dimensional")
        if np.any(values < 0) or np.any(np.diff(values) > 0):
            raise InvalidInputError("spectrum must be non-negative and non-increasing")
        self.values = values
        if values.size and values[0] > 0:
            self.normalized = values / values[0]
        else:
            self.normalized = values.copy()

    def effective_dim(self, mass: float = 0.9) -> int:
        """Smallest k such that the first k entries carry `mass` of the
        total squared spectrum mass."""
        sq = self.values**2
        total = sq.sum()
        if total == 0:
            return 0
        frac = np.cumsum(sq) / total
        return int(np.searchsorted(frac, mass - 1e-12) + 1)


@dataclass
class CcaResult:
    """Direction maximizing correlation with a signed scalar target."""

    direction: np.ndarray  # unit vector in R^d
    sign: int              # a in {-1, +1}
    rho: float             # Pearson corr of (u.x, a*y), >= 0 by convention
    r2: float              # squared Spearman corr of (u.x, y)


def _check_finite(arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def rank_transform(values, tie_rtol: float = RANK_TIE_RTOL) -> np.ndarray:
    """Ranks 1..n with average ranks for ties.

    Values whose sorted-adjacent gap is at most ``tie_rtol`` times the
    data range are chained into one tie group. This makes the ranks of
    values that are equal up to float rounding behave like exact ties;
    pass ``tie_rtol=0`` for exact-equality ties only.
    """
    v = _check_finite(values, "values")
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError("rank_transform expects a non-empty 1-D sequence")
    n = v.size
    order = np.argsort(v, kind="stable")
    sv = v[order]
    tol = tie_rtol * (sv[-1] - sv[0])
    ranks = np.empty(n, dtype=float)
    start = 0
    for i in range(1, n + 1):
        if i == n or sv[i] - sv[i - 1] > tol:
            avg = 0.5 * (start + i - 1) + 1.0  # average of positions start..i-1, 1-based
            ranks[order[start:i]] = avg
            start = i
    return ranks


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt((a @ a) * (b @ b))
    if denom == 0:
        raise DegenerateInputError("constant input to Pearson correlation")
    return float((a @ b) / denom)


def spearman(a, b) -> float:
    """Spearman rank correlation: Pearson correlation of the rank
    transforms. Raises on constant input instead of returning NaN."""
    a = _check_finite(a, "a")
    b = _check_finite(b, "b")
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError("spearman expects two equal-length 1-D sequences")
    if a.size < 3:
        raise InvalidInputError("spearman requires at least 3 observations")
    ra = rank_transform(a)
    rb = rank_transform(b)
    if np.all(ra == ra[0]) or np.all(rb == rb[0]):
        raise DegenerateInputError("constant input to spearman")
    return _pearson(ra, rb)


def _fix_signs(u: np.ndarray, vt: np.ndarray):
    """Flip matched (column of u, row of vt) pairs so the largest-magnitude
    entry of each vt row is positive. Resolves SVD sign ambiguity."""
    for j in range(vt.shape[0]):
        k = int(np.argmax(np.abs(vt[j])))
        if vt[j, k] < 0:
            vt[j] *= -1.0
            if u is not None:
                u[:, j] *= -1.0
    return u, vt


def svd(m) -> tuple[np.ndarray, SpectrumReport, np.ndarray]:
    """Thin SVD with deterministic signs.

    Returns (U, spectrum, V) with column-orthonormal U and V such that
    U @ diag(s) @ V.T reconstructs the input.
    """
    m = _check_finite(m, "matrix")
    if m.ndim != 2:
        raise InvalidInputError("svd expects a 2-D matrix")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u, vt = _fix_signs(u, vt)
    return u, SpectrumReport(s), vt.T


def pca(x) -> tuple[np.ndarray, SpectrumReport]:
    """PCA of the rows of x after column-mean centering.

    Returns (components, variances): orthonormal component rows (right
    singular vectors of the centered matrix) and the explained variances
    s^2/(N-1) as a spectrum.
    """
    x = _check_finite(x, "matrix")
    if x.ndim != 2 or x.shape[0] < 2:
        raise InvalidInputError("pca expects a 2-D matrix with at least 2 rows")
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    _, vt = _fix_signs(None, vt)
    return vt, SpectrumReport(s**2 / (n - 1))


def cca_single_target(x, y, ridge: float = 0.0) -> CcaResult:
    """Direction u in R^d maximizing corr(u.x, a*y) for a scalar target y
    and sign a in {-1, +1}.

    Solved in the row space of the centered data via thin SVD:
    u is proportional to (Xc.T Xc + lam I)^+ Xc.T yc with
    lam = ridge * tr(Xc.T Xc) / d, reducing to the pseudo-inverse
    (minimum-norm least squares) when ridge is 0.
    """
    x = _check_finite(x, "x")
    y = _check_finite(y, "y")
    if x.ndim != 2:
        raise InvalidInputError("x must be a 2-D matrix")
    n, d = x.shape
    if y.shape != (n,):
        raise DimensionMismatchError(f"y must have length {n}")
    if n < 3:
        raise InvalidInputError("cca_single_target requires at least 3 rows")
    if ridge < 0:
        raise InvalidInputError("ridge must be non-negative")
    yc = y - y.mean()
    if np.all(yc == 0):
        raise DegenerateInputError("y is constant")

    xc = x - x.mean(axis=0)
    u_svd, s, vt = np.linalg.svd(xc, full_matrices=False)
    uty = u_svd.T @ yc
    if ridge > 0:
        lam = ridge * float(np.sum(s**2)) / d
        coef = s * uty / (s**2 + lam)
    else:
        keep = s > max(n, d) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        coef = np.where(keep, np.divide(uty, s, out=np.zeros_like(uty), where=keep), 0.0)
    raw = vt.T @ coef
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        raise DegenerateGeometryError("y is orthogonal to the row space of centered x")
    direction = raw / norm

    proj = x @ direction
    rho_signed = _pearson(proj, y)
    sign = 1 if rho_signed >= 0 else -1
    r2 = spearman(proj, y) ** 2
    return CcaResult(direction=direction, sign=sign, rho=abs(rho_signed), r2=float(r2))


def lda_two_class(x0, x1) -> tuple[np.ndarray, float]:
    """Two-class LDA discriminant.

    Returns (w, c): unit-norm w proportional to pooled_cov^-1 (mu1 - mu0)
    with a small ridge (1e-6 * trace/d) on the pooled covariance, oriented
    so w.mu1 > w.mu0, and threshold c = w.(mu0 + mu1)/2.
    """
    x0 = _check_finite(x0, "x0")
    x1 = _check_finite(x1, "x1")
    if x0.ndim != 2 or x1.ndim != 2 or x0.shape[1] != x1.shape[1]:
        raise DimensionMismatchError("x0 and x1 must be 2-D with equal width")
    n0, d = x0.shape
    n1 = x1.shape[0]
    if n0 < 2 or n1 < 2:
        raise InvalidInputError("each class needs at least 2 rows")
    mu0 = x0.mean(axis=0)
    mu1 = x1.mean(axis=0)
    s0 = (x0 - mu0).T @ (x0 - mu0)
    s1 = (x1 - mu1).T @ (x1 - mu1)
    cov = (s0 + s1) / (n0 + n1 - 2)
    trace = float(np.trace(cov))
    if trace <= 0:
        raise DegenerateGeometryError("pooled covariance is identically zero")
    delta = mu1 - mu0
    # a mean gap at rounding level of the within-class spread carries no geometry
    if np.linalg.norm(delta) <= 1e-12 * np.sqrt(trace):
        raise DegenerateGeometryError("class means coincide; discriminant vanishes")
    cov[np.diag_indices(d)] += 1e-6 * trace / d
    try:
        w = np.linalg.solve(cov, delta)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError("pooled covariance is singular") from exc
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        raise DegenerateGeometryError("class means coincide; discriminant vanishes")
    w = w / norm
    if w @ mu1 < w @ mu0:
        w = -w
    c = float(w @ (mu0 + mu1) / 2.0)
    return w, c


def orthonormalize(dirs, drop_rtol: float = 1e-10) -> np.ndarray:
    """Modified Gram-Schmidt with drop tolerance.

    Vectors whose residual norm falls below ``drop_rtol`` times their input
    norm are dropped. Returns a (k, d) array of orthonormal rows spanning
    the same subspace; k may be 0.
    """
    arr = _check_finite(np.atleast_2d(np.asarray(dirs, dtype=float)), "dirs")
    if arr.size == 0:
        raise InvalidInputError("orthonormalize expects at least one vector")
    basis: list[np.ndarray] = []
    for v in arr:
        v0 = float(np.linalg.norm(v))
        if v0 == 0.0:
            continue
        w = v.copy()
        for _ in range(2):  # re-orthogonalization pass tightens inner products
            for b in basis:
                w -= (w @ b) * b
        norm = float(np.linalg.norm(w))
        if norm > drop_rtol * v0:
            basis.append(w / norm)
    return np.array(basis) if basis else np.empty((0, arr.shape[1]))


def project_out(x, basis) -> np.ndarray:
    """Remove from each row of x its components along the orthonormal
    basis rows: x -> x - sum_k <x, u_k> u_k."""
    x = _check_finite(x, "x")
    basis = np.asarray(basis, dtype=float)
    was_1d = x.ndim == 1
    x2 = np.atleast_2d(x)
    if basis.size == 0:
        out = x2.copy()
        return out[0] if was_1d else out
    if basis.ndim != 2 or basis.shape[1] != x2.shape[1]:
        raise DimensionMismatchError(
            f"basis width {basis.shape[-1]} does not match data width {x2.shape[1]}"
        )
    gram = basis @ basis.T
    if np.abs(gram - np.eye(basis.shape[0])).max() > 1e-8:
        raise InvalidInputError("basis is not orthonormal")
    out = x2 - (x2 @ basis.T) @ basis
    return out[0] if was_1d else out
