"""Monomial bases of Poly(nP) and their dimension data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatchError, NonFiniteError
from .geometry import ConvexBody, lattice_points, normalized_mass, volume_and_cp


@dataclass(frozen=True, eq=False)
class MultiIndexBasis:
    """Ordered exponent set ``nP ∩ Z^d`` spanning Poly(nP)."""

    body: ConvexBody
    n: int
    exponents: np.ndarray  # (d_n, d) int

    @classmethod
    def build(cls, body: ConvexBody, n: int) -> "MultiIndexBasis":
        exps = np.array(lattice_points(body, n), dtype=np.int64).reshape(-1, body.dim)
        exps.setflags(write=False)
        return cls(body, n, exps)

    @property
    def dim(self) -> int:
        return self.body.dim

    @property
    def size(self) -> int:
        return len(self.exponents)

    @property
    def degree_sum(self) -> int:
        return int(self.exponents.sum())

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True)
class DimInfo:
    d_n: int
    l_n: int
    f_n: Fraction
    n_d: Fraction


def dims(P: ConvexBody, n: int) -> DimInfo:
    exps = lattice_points(P, n)
    d_n = len(exps)
    l_n = sum(sum(J) for J in exps)
    d = P.dim
    f_n = Fraction((d + 1) * l_n, n * d * d_n)
    return DimInfo(d_n, l_n, f_n, normalized_mass(P))


def a_limit(P: ConvexBody) -> Fraction:
    """Limit of f_n: ``((d+1)/d) C_P / Vol(P)``."""
    vol, cp = volume_and_cp(P)
    return Fraction(P.dim + 1, P.dim) * cp / vol


def _as_points(z, dim: int) -> tuple[np.ndarray, bool]:
    z = np.asarray(z, dtype=complex)
    single = z.ndim <= 1 and (z.ndim == 0 or z.shape[0] == dim)
    if z.ndim == 0:
        z = z.reshape(1, 1)
    elif z.ndim == 1:
        z = z.reshape(1, dim) if single else z.reshape(-1, 1)
    if z.shape[-1] != dim:
        raise DimensionMismatchError(f"basis.eval_basis: points have dim {z.shape[-1]}, basis has dim {dim}")
    return z, single


def eval_basis_log(B: MultiIndexBasis, z) -> tuple[np.ndarray, np.ndarray]:
    """Entries ``z^J`` as ``(log|z^J|, z^J/|z^J|)``; ``log 0 = -inf``, phase 1 there.

    Accepts one point (shape ``(d,)``) or many (shape ``(m, d)``).
    """
    pts, single = _as_points(z, B.dim)
    angle = np.angle(pts)
    E = B.exponents.astype(float)
    # 0 * log 0 := 0 so that z^0 = 1 at z = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        logabs = np.log(np.abs(pts))
        terms = np.where(E[None, :, :] == 0, 0.0, logabs[:, None, :] * E[None, :, :])
    logmag = terms.sum(axis=-1)
    phase = np.exp(1j * (angle @ E.T))
    if single:
        return logmag[0], phase[0]
    return logmag, phase


def eval_basis(B: MultiIndexBasis, z) -> np.ndarray:
    """Basis vector ``[z^J]_J`` (or a matrix, one row per point)."""
    pts, single = _as_points(z, B.dim)
    out = np.ones((pts.shape[0], B.size), dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(B.dim):
            out *= pts[:, i : i + 1] ** B.exponents[:, i][None, :]
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("basis.eval_basis: non-finite entries; use eval_basis_log")
    return out[0] if single else out


def safe_plain_mode(B: MultiIndexBasis, radius: float) -> bool:
    """Plain complex evaluation is safe while ``n A log r`` stays below 300."""
    if radius <= 1:
        return True
    top = int(B.exponents.sum(axis=1).max()) if B.size else 0
    return top * math.log(radius) < 300
