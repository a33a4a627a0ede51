"""Extremal functions, discrete Laplacian masses and the energy pairing in one complex variable.

Grid functions live on an ``N x N`` square lattice in C.  ``dd^c`` is
``(1/2 pi) Laplacian``, so ``dd^c log|z|`` has mass 1 and an L_{P,+}
potential in one variable has total mass ``Vol(P)``.

Masses at the outermost ring are not formed.  Whatever part of the mass
lies beyond the grid is inferred from the asymptotic slope carried by the
grid function (``u = slope log|z| + O(1)``) minus the discrete boundary
flux, which by summation by parts equals the interior mass exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .basis import MultiIndexBasis, eval_basis
from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    MaskMismatchError,
    SlopeMismatchError,
    UnknownCaseError,
)
from .geometry import ConvexBody, h_p_eval, interval
from .gram import GramSystem, bergman_eval

TWO_PI = 2 * math.pi


# -- closed-form extremal functions -----------------------------------------


def interval_green(z) -> np.ndarray:
    """Green function of [-1, 1] with pole at infinity, ``log|z + sqrt(z^2 - 1)|``."""
    z = np.asarray(z, dtype=complex)
    s = z + np.sqrt(z - 1) * np.sqrt(z + 1)
    return np.abs(np.log(np.abs(s)))


def log_plus(z) -> np.ndarray:
    return np.maximum(0.0, np.log(np.maximum(np.abs(np.asarray(z, dtype=complex)), 1e-300)))


CASES = ("torus-HP", "torus-HP-plus-c", "interval-green", "disk-logplus")


def closed_form_extremal(case: str, z, P: ConvexBody | None = None, c: float = 0.0):
    """Known extremal functions used as oracles.

    ``torus-HP`` and ``torus-HP-plus-c`` need the body ``P``; the other two
    cases fix ``P = [0, 1]``.
    """
    if case in ("torus-HP", "torus-HP-plus-c"):
        if P is None:
            raise InvalidParameterError(f"energy.closed_form_extremal: case {case} needs a body")
        pts = np.asarray(z, dtype=complex)
        if P.dim == 1:
            pts = pts.reshape(-1, 1)
        val = h_p_eval(P, pts)
        if case == "torus-HP-plus-c":
            val = val + c
        return val if np.ndim(val) and np.size(val) > 1 else float(np.ravel(val)[0])
    if case == "interval-green":
        out = interval_green(z)
    elif case == "disk-logplus":
        out = log_plus(z)
    else:
        raise UnknownCaseError(f"energy.closed_form_extremal: unknown case {case!r}; expected one of {CASES}")
    return float(out) if np.ndim(out) == 0 else out


def extremal_bergman_approx(G: GramSystem, z) -> np.ndarray | float:
    """``(1/2n) log(P(z)^* G^{-1} P(z))``, the L^2 surrogate of the weighted extremal function."""
    vals = bergman_eval(G, z, include_weight_at_z=False)
    return np.log(vals) / (2 * G.n)


@dataclass(frozen=True)
class DominationReport:
    max_ratio: float  # max over polynomials and test points of |p| / exp(n V*)
    max_violation: float  # max(0, max_ratio - 1)
    samples: int
    violations: int


def domination_check(B: MultiIndexBasis, grid, weight, oracle: Callable, test_points, samples: int = 100,
                     seed: int = 0, rtol: float = 1e-6) -> DominationReport:
    """Random polynomials normalized to grid sup-norm 1 against ``exp(n V*)`` off K."""
    rng = np.random.default_rng(seed)
    Kvals = eval_basis(B, grid.points) * np.exp(-B.n * weight.q(grid.points))[:, None]
    tp = np.asarray(test_points, dtype=complex).reshape(-1, B.dim)
    T = eval_basis(B, tp)
    bound = np.exp(B.n * np.asarray(oracle(tp.reshape(-1) if B.dim == 1 else tp), dtype=float))
    coeffs = rng.standard_normal((B.size, samples)) + 1j * rng.standard_normal((B.size, samples))
    sup = np.abs(Kvals @ coeffs).max(axis=0)
    ratio = np.abs(T @ coeffs) / sup[None, :] / bound[:, None]
    worst = float(ratio.max())
    return DominationReport(worst, max(0.0, worst - 1.0), samples, int(np.sum(ratio > 1 + rtol)))


# -- grid functions -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridFunction1D:
    """Samples of a real function on the square ``center + [-hw, hw]^2``.

    ``values[i, j]`` sits at ``x = Re(center) - hw + j h``,
    ``y = Im(center) - hw + i h`` with ``h = 2 hw / (N - 1)``.
    ``slope`` is the asymptotic growth ``b`` in ``u = b log|z| + O(1)``,
    when known.
    """

    center: complex
    half_width: float
    N: int
    values: np.ndarray
    mask: np.ndarray | None = None
    slope: float | None = None

    def __post_init__(self):
        if self.N < 3 or self.half_width <= 0:
            raise InvalidParameterError("energy.GridFunction1D: need N >= 3 and half_width > 0")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.N, self.N):
            raise DimensionMismatchError(f"energy.GridFunction1D: values have shape {v.shape}, expected {(self.N, self.N)}")
        mask = np.ones_like(v, dtype=bool) if self.mask is None else np.asarray(self.mask, dtype=bool)
        if not np.all(np.isfinite(v[mask])):
            raise InvalidParameterError("energy.GridFunction1D: non-finite values on the mask")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", mask)

    @property
    def h(self) -> float:
        return 2 * self.half_width / (self.N - 1)

    def nodes(self) -> np.ndarray:
        return grid_nodes(self.center, self.half_width, self.N)

    @classmethod
    def sample(cls, f: Callable, extent: float = 4.0, N: int = 1024, center: complex = 0j,
               slope: float | None = None) -> "GridFunction1D":
        """Sample ``f`` on a square of side ``extent``."""
        z = grid_nodes(center, extent / 2, N)
        return cls(complex(center), extent / 2, N, np.asarray(f(z), dtype=float), slope=slope)

    def same_grid(self, other: "GridFunction1D") -> bool:
        return (self.center == other.center and self.half_width == other.half_width and self.N == other.N
                and np.array_equal(self.mask, other.mask))

    def combine(self, other: "GridFunction1D", a: float, b: float) -> "GridFunction1D":
        """``a * self + b * other`` on the common grid."""
        _check_compatible(self, other, "combine")
        slope = None
        if self.slope is not None and other.slope is not None:
            slope = a * self.slope + b * other.slope
        return replace(self, values=a * self.values + b * other.values, slope=slope)

    def shifted(self, c: float) -> "GridFunction1D":
        return replace(self, values=self.values + c)

    def save(self, path) -> None:
        """JSON header line, then the values as little-endian float64."""
        header = {"center": [self.center.real, self.center.imag], "half_width": self.half_width, "N": self.N,
                  "slope": self.slope}
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode() + b"\n")
            fh.write(self.values.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "GridFunction1D":
        raw = Path(path).read_bytes()
        head, _, body = raw.partition(b"\n")
        try:
            header = json.loads(head)
            N = int(header["N"])
            center = complex(*header["center"])
            hw = float(header["half_width"])
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidParameterError(f"energy.GridFunction1D.load: bad header in {path}: {exc}") from exc
        vals = np.frombuffer(body, dtype="<f8")
        if vals.size != N * N:
            raise DimensionMismatchError(f"energy.GridFunction1D.load: {vals.size} values, expected {N * N}")
        return cls(center, hw, N, vals.reshape(N, N).copy(), slope=header.get("slope"))


def grid_nodes(center: complex, half_width: float, N: int) -> np.ndarray:
    t = np.linspace(-half_width, half_width, N)
    x, y = np.meshgrid(t, t)
    return complex(center) + x + 1j * y


def _check_compatible(u: GridFunction1D, v: GridFunction1D, op: str) -> None:
    if not u.same_grid(v):
        raise MaskMismatchError(f"energy.{op}: grid functions live on different grids or masks")
    if u.slope is not None and v.slope is not None and abs(u.slope - v.slope) > 1e-12 * max(1.0, abs(u.slope)):
        if op != "combine":
            raise SlopeMismatchError(f"energy.{op}: asymptotic slopes differ ({u.slope} vs {v.slope})")


@dataclass(frozen=True)
class LaplacianMass:
    masses: np.ndarray  # node masses; zero on the outer ring and off the mask
    interior: float  # sum of node masses
    flux: float  # outward boundary flux / 2 pi, computed from the outer ring
    exterior: float  # slope - flux: mass beyond the grid (0 when untagged)

    @property
    def total(self) -> float:
        return self.interior + self.exterior


def ddc_1d(u: GridFunction1D) -> LaplacianMass:
    """Five-point ``(1/2 pi) Delta u h^2`` at interior nodes."""
    if not isinstance(u, GridFunction1D):
        raise DimensionMismatchError("energy.ddc_1d: only one-variable grid functions are supported")
    v = u.values
    lap = np.zeros_like(v)
    lap[1:-1, 1:-1] = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2] - 4 * v[1:-1, 1:-1]) / TWO_PI
    ok = np.zeros_like(u.mask)
    ok[1:-1, 1:-1] = (u.mask[1:-1, 1:-1] & u.mask[2:, 1:-1] & u.mask[:-2, 1:-1]
                      & u.mask[1:-1, 2:] & u.mask[1:-1, :-2])
    lap = np.where(ok, lap, 0.0)
    # outward differences across the four sides, corners excluded
    flux = (np.sum(v[0, 1:-1] - v[1, 1:-1]) + np.sum(v[-1, 1:-1] - v[-2, 1:-1])
            + np.sum(v[1:-1, 0] - v[1:-1, 1]) + np.sum(v[1:-1, -1] - v[1:-1, -2])) / TWO_PI
    exterior = 0.0 if u.slope is None else u.slope - flux
    return LaplacianMass(lap, float(np.sum(lap)), float(flux), float(exterior))


def _ring_mean(a: np.ndarray) -> float:
    ring = np.concatenate([a[0, :], a[-1, :], a[1:-1, 0], a[1:-1, -1]])
    return float(ring.mean())


def energy_1d(u: GridFunction1D, v: GridFunction1D, mu: LaplacianMass | None = None,
              mv: LaplacianMass | None = None) -> float:
    """``E(u, v) = integral of (u - v)(dd^c u + dd^c v)`` on the grid plus the beyond-grid term."""
    _check_compatible(u, v, "energy_1d")
    mu = mu or ddc_1d(u)
    mv = mv or ddc_1d(v)
    diff = u.values - v.values
    inside = float(np.sum(diff * (mu.masses + mv.masses)))
    return inside + _ring_mean(diff) * (mu.exterior + mv.exterior)


def cocycle_check(u: GridFunction1D, v: GridFunction1D, w: GridFunction1D) -> float:
    mu, mv, mw = ddc_1d(u), ddc_1d(v), ddc_1d(w)
    return energy_1d(u, v, mu, mv) + energy_1d(v, w, mv, mw) + energy_1d(w, u, mw, mu)


@dataclass(frozen=True)
class EnergyDerivativeCheck:
    analytic: float
    finite_difference: float
    rel_err: float


def energy_derivative_check(u: GridFunction1D, u2: GridFunction1D, v: GridFunction1D, t0: float = 0.5,
                            h: float = 1e-3) -> EnergyDerivativeCheck:
    """``d/dt E(u + t(u2 - u), v)`` against ``2 integral (u2 - u) dd^c(u_t)``."""
    _check_compatible(u, u2, "energy_derivative_check")
    _check_compatible(u, v, "energy_derivative_check")
    delta = u2.values - u.values
    ut = u.combine(u2, 1 - t0, t0)
    m = ddc_1d(ut)
    analytic = 2 * (float(np.sum(delta * m.masses)) + _ring_mean(delta) * m.exterior)

    def f(t):
        return energy_1d(u.combine(u2, 1 - t, t), v)

    fd = (f(t0 + h) - f(t0 - h)) / (2 * h)
    scale = max(abs(analytic), abs(fd))
    return EnergyDerivativeCheck(analytic, fd, 0.0 if scale == 0 else abs(analytic - fd) / scale)


# -- ball-volume-ratio experiment ------------------------------------------


def bvr_coefficient(B: MultiIndexBasis) -> float:
    """``(d+1) n_d / (2 n d_n)``."""
    from .geometry import normalized_mass

    return (B.dim + 1) * float(normalized_mass(B.body)) / (2 * B.n * B.size)


@dataclass(frozen=True)
class BVRRow:
    n: int
    L_n: float
    target: float

    @property
    def gap(self) -> float:
        return abs(self.L_n - self.target)


def bvr_energy_experiment(config: dict) -> list[BVRRow]:
    """Normalized log Gram-determinant differences against an energy target.

    ``config["case"]``:

    ``constant-torus``
        body, ``c``; both sides on the torus, weight ``exp(-c)`` against 1.
        Target ``(d+1) n_d c``.
    ``interval-vs-torus``
        P = [0, 1]; arcsine grid on [-1, 1] against Haar on the circle.
        Target is the grid energy ``E(V_[-1,1], log+|z|)`` (``N``, ``extent``).
    ``identical``
        the same grid on both sides; target 0.
    """
    from .basis import MultiIndexBasis as MIB
    from .geometry import normalized_mass, parse_body
    from .gram import gram_build
    from .measures import WeightSpec, make_grid, parse_grid

    case = config.get("case", "interval-vs-torus")
    ns = list(config.get("n", range(1, 21)))
    if not ns:
        raise InvalidParameterError("energy.bvr_energy_experiment: empty n range")
    rows = []
    if case == "constant-torus":
        body = parse_body(config.get("body", "interval(0,1)"))
        c = float(config.get("c", 1.0))
        target = (body.dim + 1) * float(normalized_mass(body)) * c
        for n in ns:
            B = MIB.build(body, n)
            grid = make_grid("torus", body.dim, int(config.get("N", 2 * B.exponents.max() + 1)))
            g1 = gram_build(B, grid, WeightSpec.constant(c))
            g0 = gram_build(B, grid, WeightSpec.zero())
            rows.append(BVRRow(n, -bvr_coefficient(B) * (g1.logdet - g0.logdet), target))
    elif case == "interval-vs-torus":
        body = interval(0, 1)
        if "target" in config:
            target = float(config["target"])
        else:
            N = int(config.get("N", 1024))
            extent = float(config.get("extent", 4.0))
            u = GridFunction1D.sample(interval_green, extent, N, slope=1.0)
            v = GridFunction1D.sample(log_plus, extent, N, slope=1.0)
            target = energy_1d(u, v)
        for n in ns:
            B = MIB.build(body, n)
            K = make_grid("interval", -1, 1, "chebyshev", int(config.get("grid_N", 2 * n + 1 + 64)))
            T = make_grid("circle", 2 * n + 1)
            gK = gram_build(B, K, WeightSpec.zero())
            gT = gram_build(B, T, WeightSpec.zero())
            rows.append(BVRRow(n, -bvr_coefficient(B) * (gK.logdet - gT.logdet), target))
    elif case == "identical":
        body = parse_body(config.get("body", "interval(0,1)"))
        grid = parse_grid(config.get("grid", "interval(-1,1,chebyshev,200)"))
        for n in ns:
            B = MIB.build(body, n)
            g = gram_build(B, grid, WeightSpec.zero())
            rows.append(BVRRow(n, -bvr_coefficient(B) * (g.logdet - g.logdet), 0.0))
    else:
        raise UnknownCaseError(f"energy.bvr_energy_experiment: unknown case {case!r}")
    return rows
