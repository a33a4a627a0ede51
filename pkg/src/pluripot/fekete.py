"""Weighted Vandermonde determinants and discrete weighted Fekete sets.

Determinant magnitudes are always carried as logarithms.  The grid search
first orthonormalizes the weighted basis over the grid (QR of the grid
Vandermonde), then runs a greedy volume-maximizing selection on the rows
of Q followed by single-point exchange passes (a maxvol-style sweep).
``|det V_S| = |det Q_S| |det R|`` keeps the comparisons well conditioned
even when the monomial Vandermonde is not.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations, islice

import numpy as np
from scipy import linalg

from .basis import MultiIndexBasis, eval_basis_log
from .errors import AllSingularError, DimensionMismatchError, InsufficientPointsError, NonFiniteError
from .measures import DiscreteMeasure, WeightSpec

log = logging.getLogger(__name__)

EXCHANGE_TOL = 1e-12
REFACTOR_EVERY = 25
# below this many d_n-subsets the search enumerates them all
EXHAUSTIVE_LIMIT = 500_000


def _scaled_rows(B: MultiIndexBasis, pts: np.ndarray, w: WeightSpec) -> tuple[np.ndarray, float]:
    """Weighted basis rows ``w(z)^n z^J`` divided by per-column maxima; returns (matrix, log of scales)."""
    Q = w.q(pts)
    if not np.all(np.isfinite(Q)):
        raise NonFiniteError("fekete: non-finite weight on the points")
    logmag, phase = eval_basis_log(B, pts)
    logmag = logmag - B.n * Q[:, None]
    colmax = logmag.max(axis=0)
    colmax = np.where(np.isfinite(colmax), colmax, 0.0)
    M = np.exp(logmag - colmax[None, :]) * phase
    return M, float(colmax.sum())


def log_abs_wvdm(points, B: MultiIndexBasis, w: WeightSpec) -> float:
    """``log |det[e_i(z_j)]| + n sum_j log w(z_j)``; ``-inf`` when singular."""
    pts = np.asarray(points, dtype=complex).reshape(-1, B.dim)
    if len(pts) != B.size:
        raise DimensionMismatchError(f"fekete.log_abs_wvdm: got {len(pts)} points, basis has {B.size} elements")
    M, shift = _scaled_rows(B, pts, w)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, _ = linalg.lu_factor(M, check_finite=False)
    piv = np.abs(np.diag(lu))
    if np.any(piv == 0):
        return -math.inf
    return float(np.sum(np.log(piv)) + shift)


@dataclass
class FeketeResult:
    points: np.ndarray
    indices: np.ndarray
    log_wvdm: float
    delta_wn: float
    iterations: int
    history: list[float] = field(default_factory=list)


def _greedy(Qm: np.ndarray, k: int) -> tuple[list[int], float]:
    """Pick ``k`` rows of ``Qm`` one at a time maximizing the accumulated volume."""
    R = Qm.copy()
    norms = np.sum(np.abs(R) ** 2, axis=1)
    chosen: list[int] = []
    logvol = 0.0
    for _ in range(k):
        norms_masked = norms.copy()
        norms_masked[chosen] = -1.0
        i = int(np.argmax(norms_masked))  # lowest index on ties
        nrm = math.sqrt(max(norms_masked[i], 0.0))
        if nrm <= 1e-300:
            return chosen, -math.inf
        chosen.append(i)
        logvol += math.log(nrm)
        u = R[i] / nrm
        R -= np.outer(R @ np.conj(u), u)
        norms = np.sum(np.abs(R) ** 2, axis=1)
    return chosen, logvol


def _exhaustive(Qm: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    """Best ``k``-subset of rows by enumeration; lowest lexicographic subset on ties."""
    best, best_idx = -math.inf, None
    combos = combinations(range(len(Qm)), k)
    while True:
        chunk = np.array(list(islice(combos, 100_000)), dtype=np.intp)
        if chunk.size == 0:
            break
        with np.errstate(divide="ignore"):
            vals = np.log(np.abs(np.linalg.det(Qm[chunk])))
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_idx = float(vals[i]), chunk[i]
    return best_idx, best


def fekete_search(grid: DiscreteMeasure, w: WeightSpec, B: MultiIndexBasis, max_passes: int = 100) -> FeketeResult:
    """Approximate weighted Fekete set of ``B`` among the grid points."""
    d_n = B.size
    pts = grid.points
    if grid.dim != B.dim:
        raise DimensionMismatchError(f"fekete.fekete_search: grid has dim {grid.dim}, basis has dim {B.dim}")
    if len(np.unique(pts, axis=0)) < d_n:
        raise InsufficientPointsError(f"fekete.fekete_search: grid has fewer than d_n = {d_n} distinct points")
    M, shift = _scaled_rows(B, pts, w)
    Qm, R = linalg.qr(M, mode="economic", check_finite=False)
    rdiag = np.abs(np.diag(R))
    if np.any(rdiag == 0):
        raise AllSingularError("fekete.fekete_search: weighted basis is linearly dependent on the grid")
    logdetR = float(np.sum(np.log(rdiag)))

    if math.comb(len(pts), d_n) <= EXHAUSTIVE_LIMIT:
        sel, logvol = _exhaustive(Qm, d_n)
        if not math.isfinite(logvol):
            raise AllSingularError("fekete.fekete_search: no nonsingular configuration on the grid")
        max_passes = 0
    else:
        sel, logvol = _greedy(Qm, d_n)
        if not math.isfinite(logvol):
            raise AllSingularError("fekete.fekete_search: no nonsingular configuration on the grid")
    sel = np.array(sel)
    history = [logvol + logdetR + shift]

    if max_passes > 0:
        S = Qm[sel]
        T = linalg.solve(S.T, Qm.T, check_finite=False).T  # rows of Qm in the basis of selected rows
    accepted = 0
    passes = 0
    while passes < max_passes:
        passes += 1
        gained = 0.0
        for j in range(d_n):
            col = np.abs(T[:, j])
            c = int(np.argmax(col))
            g = math.log(col[c]) if col[c] > 0 else -math.inf
            if g <= EXCHANGE_TOL:
                continue
            t = T[c].copy()
            tj = t[j]
            sel[j] = c
            gained += g
            accepted += 1
            if accepted % REFACTOR_EVERY == 0:
                S = Qm[sel]
                T = linalg.solve(S.T, Qm.T, check_finite=False).T
            else:
                t[j] -= 1.0
                T -= np.outer(T[:, j] / tj, t)
        logvol += gained
        if gained == 0.0:
            break
        history.append(logvol + logdetR + shift)

    S = Qm[sel]
    lu, _ = linalg.lu_factor(S, check_finite=False)
    logvol = float(np.sum(np.log(np.abs(np.diag(lu)))))
    log_w = logvol + logdetR + shift
    order = np.argsort(sel, kind="stable")
    sel = sel[order]
    l_n = B.degree_sum
    delta = math.exp(log_w / l_n) if l_n > 0 else math.nan
    log.debug("fekete_search: d_n=%d passes=%d log_wvdm=%.12g", d_n, passes, log_w)
    return FeketeResult(pts[sel], sel, log_w, delta, passes, history)


@dataclass(frozen=True)
class MomentTable:
    k: np.ndarray
    power: np.ndarray  # d=1: mean Re z^k; d>1: (dim, K) per-coordinate
    fourier: np.ndarray  # |mean z^k|, same layout


def fekete_moments(points, kmax: int = 8) -> MomentTable:
    """Empirical counting-measure moments (marginal moments per coordinate for d > 1)."""
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if len(pts) == 0:
        raise InsufficientPointsError("fekete.fekete_moments: no points")
    k = np.arange(1, kmax + 1)
    powers = pts[:, :, None] ** k[None, None, :]  # (m, d, K)
    mean = powers.mean(axis=0)
    power, fourier = mean.real, np.abs(mean)
    if pts.shape[1] == 1:
        power, fourier = power[0], fourier[0]
    return MomentTable(k, power, fourier)
