"""Weighted Gram matrices, log-determinants and Bergman functions.

The Gram matrix ``G = sum_k m_k w_k^{2n} P(z_k) P(z_k)^*`` is stored for
reference, but its Cholesky factor is taken from a QR factorization of
the weighted design matrix whose rows are ``sqrt(m_k) w_k^n P(z_k)^*``.
That matrix has the square root of the Gram condition number, which is
what keeps monomial bases on intervals usable up to n ~ 40.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .basis import MultiIndexBasis, eval_basis, eval_basis_log
from .errors import DegenerateGramError, DimensionMismatchError, InvalidParameterError, MissingWeightError
from .measures import DiscreteMeasure, WeightSpec

# relative pivot size below which the design matrix is treated as rank deficient
RANK_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class GramSystem:
    basis: MultiIndexBasis
    measure: DiscreteMeasure
    weight: WeightSpec
    gram: np.ndarray
    chol: np.ndarray | None
    logdet: float
    degenerate: bool
    jittered: bool = False

    @property
    def n(self) -> int:
        return self.basis.n

    def require_nondegenerate(self, op: str) -> None:
        if self.degenerate:
            raise DegenerateGramError(f"gram.{op}: Gram matrix is degenerate (rank < {self.basis.size})")


def _design_matrix(B: MultiIndexBasis, mu: DiscreteMeasure, w: WeightSpec) -> np.ndarray:
    keep = mu.masses > 0
    pts = mu.points[keep]
    m = mu.masses[keep]
    Q = w.q(pts)
    logmag, phase = eval_basis_log(B, pts.reshape(-1, B.dim))
    logmag = logmag + (0.5 * np.log(m) - B.n * Q)[:, None]
    return np.exp(logmag) * np.conj(phase)


def gram_build(B: MultiIndexBasis, mu: DiscreteMeasure, w: WeightSpec) -> GramSystem:
    """Assemble and factor the weighted Gram matrix of ``B`` over ``mu``."""
    if mu.dim != B.dim:
        raise DimensionMismatchError(f"gram.gram_build: measure has dim {mu.dim}, basis has dim {B.dim}")
    C = _design_matrix(B, mu, w)
    gram = C.conj().T @ C
    gram = (gram + gram.conj().T) / 2
    d_n = B.size
    jittered = False
    chol = None
    if C.shape[0] >= d_n and mu.n_distinct() >= d_n:
        R = linalg.qr(C, mode="r")[0][:d_n]
        diag = np.diag(R)
        colnorm = np.linalg.norm(C, axis=0)
        if np.all(np.isfinite(diag)) and np.all(np.abs(diag) > RANK_TOL * colnorm):
            phase = diag / np.abs(diag)
            R = np.conj(phase)[:, None] * R
            chol = np.triu(R).conj().T
        else:
            try:
                chol = np.linalg.cholesky(gram)
            except np.linalg.LinAlgError:
                jitter = 1e-14 * np.trace(gram).real / d_n
                jittered = True
                try:
                    chol = np.linalg.cholesky(gram + jitter * np.eye(d_n))
                except np.linalg.LinAlgError:
                    chol = None
    if chol is None:
        return GramSystem(B, mu, w, gram, None, -math.inf, True, jittered)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol).real)))
    return GramSystem(B, mu, w, gram, chol, logdet, False, jittered)


def logdet_scaled(G: GramSystem) -> float:
    """``logdet / (2 l_n)``; for the torus reference this is a log ball-volume ratio per degree."""
    G.require_nondegenerate("logdet_scaled")
    return G.logdet / (2 * G.basis.degree_sum)


def _solve_lower(G: GramSystem, P: np.ndarray) -> np.ndarray:
    return linalg.solve_triangular(G.chol, P, lower=True, check_finite=False)


def bergman_eval(G: GramSystem, z, include_weight_at_z: bool = False, weight_q=None) -> np.ndarray | float:
    """``P(z)^* G^{-1} P(z)``, times ``w(z)^{2n}`` when requested.

    ``z`` is one point or an ``(m, d)`` array.  ``weight_q`` overrides the
    weight lookup with explicit Q values at ``z``.
    """
    G.require_nondegenerate("bergman_eval")
    pts = np.asarray(z, dtype=complex)
    single = pts.ndim == 0 or (pts.ndim == 1 and pts.shape[0] == G.basis.dim)
    pts = pts.reshape(-1, G.basis.dim)
    P = eval_basis(G.basis, pts).T
    Y = _solve_lower(G, P)
    vals = np.sum(np.abs(Y) ** 2, axis=0)
    if include_weight_at_z:
        if weight_q is None:
            try:
                weight_q = G.weight.q(pts)
            except MissingWeightError as exc:
                raise MissingWeightError(f"gram.bergman_eval: {exc}") from None
        vals = vals * np.exp(-2 * G.n * np.asarray(weight_q, dtype=float))
    return float(vals[0]) if single else vals


def bergman_on_support(G: GramSystem) -> np.ndarray:
    """Weighted Bergman function at every point of the system's own measure."""
    return bergman_eval(G, G.measure.points, include_weight_at_z=True)


def f_n(B: MultiIndexBasis, mu: DiscreteMeasure, w: WeightSpec, u, t: float) -> float:
    """``-(1/2 l_n) log det G`` for the weight ``w exp(-t u)`` on ``mu``'s points."""
    wt = w.perturbed(mu.points, u, t) if t != 0 else w
    G = gram_build(B, mu, wt)
    G.require_nondegenerate("f_n")
    return -G.logdet / (2 * B.degree_sum)


@dataclass(frozen=True)
class DerivativeCheck:
    analytic: float
    finite_difference: float
    rel_err: float


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def f_derivative_check(B, mu, w, u, t0: float = 0.0, h: float = 1e-4) -> DerivativeCheck:
    """Compare ``(n/l_n) sum u B_n dmu`` with a central difference of f_n."""
    u = np.asarray(u, dtype=float)
    wt = w.perturbed(mu.points, u, t0)
    G = gram_build(B, mu, wt)
    G.require_nondegenerate("f_derivative_check")
    Bvals = bergman_on_support(G)
    analytic = B.n / B.degree_sum * float(np.sum(mu.masses * u * Bvals))
    fd = (f_n(B, mu, w, u, t0 + h) - f_n(B, mu, w, u, t0 - h)) / (2 * h)
    return DerivativeCheck(analytic, fd, _rel(analytic, fd))


@dataclass(frozen=True)
class ConcavityScan:
    t: np.ndarray
    f: np.ndarray
    second_differences: np.ndarray

    @property
    def max_second_difference(self) -> float:
        return float(self.second_differences.max())


def concavity_scan(B, mu, w, u, t_grid) -> ConcavityScan:
    t = np.asarray(t_grid, dtype=float)
    f = np.array([f_n(B, mu, w, u, ti) for ti in t])
    return ConcavityScan(t, f, f[:-2] - 2 * f[1:-1] + f[2:])


@dataclass(frozen=True)
class ZnCheck:
    mc_estimate: float
    dn_fact_detG: float
    rel_err: float
    std_err: float

    @property
    def z_score(self) -> float:
        return abs(self.mc_estimate - self.dn_fact_detG) / self.std_err if self.std_err > 0 else 0.0


def zn_crosscheck(B: MultiIndexBasis, mu: DiscreteMeasure, w: WeightSpec, trials: int = 100_000, seed: int = 0,
                  batch: int = 20_000) -> ZnCheck:
    """Monte Carlo ``E |VDM|^2 prod w^{2n}`` against ``d_n! det G``."""
    d_n = B.size
    if d_n > 4:
        raise InvalidParameterError(f"gram.zn_crosscheck: d_n must be <= 4, got {d_n}")
    if abs(mu.total - 1.0) > 1e-12:
        raise InvalidParameterError("gram.zn_crosscheck: measure must be a probability measure")
    p = mu.masses / mu.masses.sum()
    rng = np.random.default_rng(seed)
    E = eval_basis(B, mu.points)
    Q = w.q(mu.points)
    samples = []
    done = 0
    while done < trials:
        k = min(batch, trials - done)
        idx = rng.choice(len(p), size=(k, d_n), p=p)
        M = E[idx]  # (k, d_n points, d_n basis)
        det = np.linalg.det(M)
        samples.append(np.abs(det) ** 2 * np.exp(-2 * B.n * Q[idx].sum(axis=1)))
        done += k
    s = np.concatenate(samples)
    G = gram_build(B, mu, w)
    exact = math.factorial(d_n) * math.exp(G.logdet)
    mc = float(s.mean())
    se = float(s.std(ddof=1) / math.sqrt(len(s)))
    return ZnCheck(mc, exact, abs(mc - exact) / exact, se)
