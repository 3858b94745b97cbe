"""Eigenstructure of moment matrices.

Numerical rank, the per-eigenvector partition sums used by the reconstruction
identities, the product-gap matrix P - xy^T, and the completely positive
rank-2 factorization that drives rank-2 recovery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FactorizationError, InputError, RankError

# Relative cutoff defining numerical rank.  Interior-point outputs are
# maximal-rank, so this cutoff materially defines all rank-conditioned logic.
RANK_TOL = 1e-6


def min_eigenvalue(mat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0])


@dataclass(frozen=True)
class Spectrum:
    """Descending eigenvalues with eigenvectors retained above the rank cutoff.

    ``values`` holds the full clipped spectrum; ``vectors`` (columns) and the
    partition data ``s``/``half_sums`` cover only the leading ``rank`` pairs.
    When the partition split m is unknown, ``s`` falls back to full
    coordinate sums.
    """

    values: np.ndarray  # all eigenvalues, descending, clipped at 0
    vectors: np.ndarray  # N x rank, orthonormal, sign-fixed so s_i >= 0
    s: np.ndarray  # partition sums, length rank
    half_sums: np.ndarray | None  # rank x 2 (sum of a_i, sum of b_i)
    rank: int
    rank_tol: float

    @property
    def tail_sum(self) -> float:
        """Sum of eigenvalues beyond the leading one (including sub-cutoff)."""
        return float(self.values[1:].sum())


def eigendecompose(
    mat: np.ndarray, m: int | None = None, rank_tol: float = RANK_TOL
) -> Spectrum:
    """Spectral decomposition of a symmetric PSD matrix.

    Eigenvalues below -1e-7 or asymmetry beyond 1e-9 are errors; small
    negative eigenvalues are clipped to zero.  If ``m`` is given, each
    eigenvector is partitioned into its first-m and remaining coordinates and
    sign-flipped so the partition sum is nonnegative.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InputError("expected a square matrix")
    if np.abs(mat - mat.T).max() > 1e-9:
        raise InputError("matrix is not symmetric within 1e-9")
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    # Interior-point output can dip slightly negative (reduced-accuracy
    # solves reach the -1e-6 scale); reject only clear indefiniteness.
    if vals[0] < -1e-5 * max(vals[-1], 1.0):
        raise InputError(f"matrix is indefinite: min eigenvalue {vals[0]:.3e}")
    vals = np.maximum(vals[::-1], 0.0)
    vecs = vecs[:, ::-1]
    cutoff = rank_tol * max(vals[0], 1.0) if len(vals) else 0.0
    rank = int(np.sum(vals > cutoff))
    lead = vecs[:, :rank].copy()

    if m is None:
        sums = lead.sum(axis=0)
        flip = np.where(sums < 0, -1.0, 1.0)
        lead *= flip
        s = np.abs(sums)
        half = None
    else:
        sa = lead[:m].sum(axis=0)
        sb = lead[m:].sum(axis=0)
        mean = 0.5 * (sa + sb)
        flip = np.where(mean < 0, -1.0, 1.0)
        lead *= flip
        sa *= flip
        sb *= flip
        s = 0.5 * (sa + sb)
        half = np.column_stack([sa, sb])
    return Spectrum(vals, lead, s, half, rank, rank_tol)


def partition_identities(
    spectrum: Spectrum, m: int, n: int, check_tol: float = 1e-6
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reconstruct x, y and the product gap P - xy^T from a spectrum.

    The gap is computed both directly from the reconstructed blocks and via
    the pairwise double sum over eigenvectors; disagreement beyond
    ``check_tol`` raises.
    """
    if spectrum.vectors.shape[0] != m + n:
        raise InputError("spectrum dimension does not match m + n")
    lam = spectrum.values[: spectrum.rank]
    a = spectrum.vectors[:m]
    b = spectrum.vectors[m:]
    s = spectrum.s
    x = a @ (lam * s)
    y = b @ (lam * s)
    p = (a * lam) @ b.T
    gap = p - np.outer(x, y)

    gap2 = np.zeros_like(gap)
    for i in range(spectrum.rank):
        for j in range(i + 1, spectrum.rank):
            u = s[j] * a[:, i] - s[i] * a[:, j]
            v = s[j] * b[:, i] - s[i] * b[:, j]
            gap2 += lam[i] * lam[j] * np.outer(u, v)
    if np.abs(gap - gap2).max() > check_tol:
        raise FactorizationError(
            "direct and double-sum gap computations disagree beyond tolerance"
        )
    return x, y, gap


@dataclass(frozen=True)
class CpFactorization:
    """M = sigma1 [a;b][a;b]^T + sigma2 [c;d][c;d]^T with simplex factors."""

    sigma1: float
    sigma2: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = np.concatenate([self.a, self.b])
        v = np.concatenate([self.c, self.d])
        return self.sigma1 * np.outer(u, u) + self.sigma2 * np.outer(v, v)


def _arc_intersection(alphas: np.ndarray, betas: np.ndarray) -> float | None:
    """Midpoint of the set of angles theta with
    alpha_r cos(theta) + beta_r sin(theta) >= 0 for every r, or None.

    Each constraint is a closed half-circle centered at atan2(beta, alpha);
    the intersection of such arcs is an arc tracked as [lo, hi].
    """
    lo, hi = -np.pi, np.pi  # start with the full circle
    started = False
    for alpha, beta in zip(alphas, betas):
        norm = np.hypot(alpha, beta)
        if norm < 1e-12:
            continue
        center = np.arctan2(beta, alpha)
        if not started:
            lo, hi = center - np.pi / 2, center + np.pi / 2
            started = True
            continue
        mid = 0.5 * (lo + hi)
        center += 2 * np.pi * np.round((mid - center) / (2 * np.pi))
        lo = max(lo, center - np.pi / 2)
        hi = min(hi, center + np.pi / 2)
        if lo > hi + 1e-9:
            return None
    return 0.5 * (lo + hi)


def cp_rank2_factorize(
    mat: np.ndarray, m: int, n: int, residual_tol: float = 1e-6
) -> CpFactorization:
    """Nonnegative rank-2 factorization of a rank-2 doubly nonnegative matrix.

    Rotates the width-2 eigenfactor by an angle chosen from the intersection
    of the per-row nonnegativity arcs; for near-rank-2 inputs where that
    intersection is empty, falls back to clamping the best rotation and
    accepts only if the reconstruction residual stays within tolerance.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.min() < -1e-9:
        raise InputError("matrix must be entrywise nonnegative")
    spec = eigendecompose(mat, m=m)
    if spec.rank != 2:
        raise RankError(f"expected numerical rank 2, got {spec.rank}")
    v2 = spec.vectors[:, :2] * np.sqrt(spec.values[:2])

    # Column 1 of the rotated factor needs v1 cos + v2 sin >= 0 rowwise,
    # column 2 needs -v1 sin + v2 cos >= 0.
    alphas = np.concatenate([v2[:, 0], v2[:, 1]])
    betas = np.concatenate([v2[:, 1], -v2[:, 0]])
    theta = _arc_intersection(alphas, betas)
    if theta is None:
        theta = _best_effort_angle(v2)
    c, sn = np.cos(theta), np.sin(theta)
    w = v2 @ np.array([[c, -sn], [sn, c]])
    w = np.where(w < 0, 0.0, w)

    factors = []
    sigmas = []
    for col in range(2):
        ah = w[:m, col]
        bh = w[m:, col]
        sa, sb = ah.sum(), bh.sum()
        if min(sa, sb) < 1e-9:
            raise FactorizationError("degenerate factor column in CP factorization")
        sigmas.append(sa * sb)
        factors.append((ah / sa, bh / sb))
    out = CpFactorization(
        sigmas[0], sigmas[1], factors[0][0], factors[0][1], factors[1][0], factors[1][1]
    )
    resid = np.abs(out.reconstruct() - mat).max()
    if resid > residual_tol:
        raise FactorizationError(f"CP factorization residual {resid:.3e} too large")
    return out


def _best_effort_angle(v2: np.ndarray, samples: int = 3600) -> float:
    """Angle minimizing total negativity of the rotated factor (fallback)."""
    thetas = np.linspace(-np.pi, np.pi, samples, endpoint=False)
    best_theta, best_neg = 0.0, np.inf
    for theta in thetas:
        c, sn = np.cos(theta), np.sin(theta)
        w = v2 @ np.array([[c, -sn], [sn, c]])
        neg = float(-np.minimum(w, 0.0).sum())
        if neg < best_neg:
            best_neg, best_theta = neg, theta
    return best_theta
