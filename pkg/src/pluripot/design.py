"""D-optimal (P-optimal) designs on a candidate grid.

The multiplicative update ``m_i <- m_i B_n(z_i) / d_n`` keeps total mass 1
(the Bergman function integrates to d_n against its own measure) and does
not decrease ``log det G``.  Its fixed points with ``max B_n = d_n`` are the
optimal measures.

On real candidate grids each iteration also drops points that cannot carry
mass in any optimal design (Harman and Pronzato, Stat. Probab. Lett. 2007).
The bound assumes real regressors, so complex grids are never screened.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .basis import MultiIndexBasis
from .errors import DegenerateGramError, InvalidParameterError
from .fekete import fekete_search
from .gram import bergman_eval, gram_build
from .measures import DiscreteMeasure, WeightSpec

log = logging.getLogger(__name__)

PRUNE_BELOW = 1e-15
MONOTONE_SLACK = 1e-12
# equivalence check: mass above HEAVY_MASS only where B >= d_n (1 - EQUIV_FACTOR tol)
HEAVY_MASS = 1e-8
EQUIV_FACTOR = 10.0
SANDWICH_SLACK = 1e-12


@dataclass
class DesignResult:
    measure: DiscreteMeasure
    kw_gap: float
    logdet: float
    iterations: int
    converged: bool
    bergman: np.ndarray  # weighted Bergman function on the candidate grid
    max_logdet_drop: float = 0.0
    max_mass_drift: float = 0.0
    equivalence_ok: bool = False
    screened: int = 0

    def to_json(self) -> dict:
        return {
            "kw_gap": self.kw_gap,
            "logdet": self.logdet,
            "iterations": self.iterations,
            "converged": self.converged,
            "equivalence_ok": self.equivalence_ok,
            "support_size": int(np.count_nonzero(self.measure.masses)),
        }


def _bergman_grid(grid: DiscreteMeasure, masses: np.ndarray, w: WeightSpec, B: MultiIndexBasis):
    mu = DiscreteMeasure(grid.points, masses, grid.label)
    G = gram_build(B, mu, w)
    if G.degenerate:
        return G, None
    return G, bergman_eval(G, grid.points, include_weight_at_z=True, weight_q=w.q(grid.points))


def _screen_threshold(eps: float, d_n: int) -> float:
    """Lower bound on ``B`` at any support point of an optimal design, given ``max B = d_n (1 + eps)``."""
    return d_n * (1 + eps / 2 - math.sqrt(eps * (4 + eps - 4 / d_n)) / 2)


def _equivalent(masses: np.ndarray, Bv: np.ndarray, d_n: int, tol: float) -> bool:
    return not np.any((masses > HEAVY_MASS) & (Bv < d_n * (1 - EQUIV_FACTOR * tol)))


def optimal_measure(grid: DiscreteMeasure, w: WeightSpec, B: MultiIndexBasis, tol: float = 1e-4,
                    max_iters: int = 5000) -> DesignResult:
    """Multiplicative algorithm from the uniform design.

    ``converged`` means ``kw_gap <= tol d_n``.  Once that holds the iteration
    continues (within ``max_iters``) until no mass above 1e-8 sits where
    ``B < d_n (1 - 10 tol)``; ``equivalence_ok`` reports whether it got there.
    """
    if tol <= 0:
        raise InvalidParameterError(f"design.optimal_measure: tol must be > 0, got {tol}")
    d_n = B.size
    N = len(grid)
    real_grid = bool(np.all(grid.points.imag == 0))
    masses = np.full(N, 1.0 / N)
    G, Bv = _bergman_grid(grid, masses, w, B)
    if Bv is None:
        raise DegenerateGramError(f"design.optimal_measure: uniform start on {grid.label} is degenerate for d_n={d_n}")
    prev = G.logdet
    drop = 0.0
    drift = 0.0
    it = 0
    screened = 0
    gap = float(Bv.max() - d_n)
    while not (gap <= tol * d_n and _equivalent(masses, Bv, d_n, tol)) and it < max_iters:
        new = masses * Bv / d_n
        drift = max(drift, abs(new.sum() - 1.0))
        if real_grid:
            out = (Bv < _screen_threshold(max(gap, 0.0) / d_n, d_n)) & (new > 0)
            screened += int(out.sum())
            new[out] = 0.0
        masses = new / new.sum()
        G, Bv = _bergman_grid(grid, masses, w, B)
        if Bv is None:
            raise DegenerateGramError("design.optimal_measure: Gram became degenerate during iteration")
        it += 1
        if G.logdet < prev - MONOTONE_SLACK * max(1.0, abs(prev)):
            drop = max(drop, prev - G.logdet)
            log.warning("optimal_measure: logdet decreased by %.3g at iteration %d", prev - G.logdet, it)
        prev = G.logdet
        gap = float(Bv.max() - d_n)
    masses = np.where(masses < PRUNE_BELOW, 0.0, masses)
    masses /= masses.sum()
    G, Bv = _bergman_grid(grid, masses, w, B)
    gap = float(Bv.max() - d_n)
    mu = DiscreteMeasure(grid.points, masses, f"optimal[{grid.label}]", probability=True)
    return DesignResult(mu, gap, G.logdet, it, gap <= tol * d_n, Bv, drop, drift,
                        _equivalent(masses, Bv, d_n, tol), screened)


@dataclass(frozen=True)
class KWGap:
    gap: float
    argmax: np.ndarray


def kw_gap(mu: DiscreteMeasure, w: WeightSpec, B: MultiIndexBasis, candidates: DiscreteMeasure | None = None) -> KWGap:
    """``max B_n - d_n`` over the candidate points (default: the support grid of ``mu``)."""
    G = gram_build(B, mu, w)
    G.require_nondegenerate("kw_gap")
    pts = mu.points if candidates is None else candidates.points
    vals = bergman_eval(G, pts, include_weight_at_z=True)
    i = int(np.argmax(vals))
    return KWGap(float(vals[i] - B.size), pts[i])


def efficiency_bound(result: DesignResult, d_n: int) -> float:
    """Upper bound on ``log det G_opt - result.logdet``: ``d_n log(max B / d_n)``."""
    return d_n * math.log1p(max(result.kw_gap, 0.0) / d_n)


@dataclass(frozen=True)
class SandwichReport:
    log_lower: float  # log of delta^{2 l_n} / d_n^{d_n}
    logdet_opt: float  # attained by the returned design
    certificate: float  # the optimum lies in [logdet_opt, logdet_opt + certificate]
    log_upper: float  # log of delta^{2 l_n} / d_n!
    lower_slack: float
    upper_slack: float
    delta_wn: float

    @property
    def holds(self) -> bool:
        # equality cases (torus grids) leave slacks at roundoff level
        eps = SANDWICH_SLACK * max(1.0, abs(self.logdet_opt))
        return self.lower_slack >= -eps and self.upper_slack >= -eps


def tfd_sandwich(grid: DiscreteMeasure, w: WeightSpec, B: MultiIndexBasis, tol: float = 1e-4,
                 max_iters: int = 5000) -> SandwichReport:
    """Check ``delta^{2l_n}/d_n^{d_n} <= det G_opt <= delta^{2l_n}/d_n!`` in log space.

    The design iterate approaches the optimum from below, so both slacks
    are measured from the top of the certified interval for ``log det G_opt``.
    """
    d_n = B.size
    fek = fekete_search(grid, w, B)
    opt = optimal_measure(grid, w, B, tol=tol, max_iters=max_iters)
    cert = efficiency_bound(opt, d_n)
    lower = 2 * fek.log_wvdm - d_n * math.log(d_n)
    upper = 2 * fek.log_wvdm - math.lgamma(d_n + 1)
    top = opt.logdet + cert
    return SandwichReport(lower, opt.logdet, cert, upper, top - lower, upper - top, fek.delta_wn)
