"""Point-cloud discretizations of compact sets, weights, and Bernstein-Markov constants."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import DegenerateGramError, InvalidParameterError, MissingWeightError, NonFiniteError


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted point cloud; ``points`` has shape ``(N, d)``."""

    points: np.ndarray
    masses: np.ndarray
    label: str = ""
    probability: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        if len(pts) != len(m):
            raise InvalidParameterError(f"measures.DiscreteMeasure: {len(pts)} points but {len(m)} masses")
        if np.any(m < 0) or not np.any(m > 0) or not np.all(np.isfinite(m)):
            raise InvalidParameterError("measures.DiscreteMeasure: masses must be finite, >= 0, not all zero")
        if self.probability and abs(m.sum() - 1.0) > 1e-12:
            raise InvalidParameterError(f"measures.DiscreteMeasure: probability flag but total mass {m.sum()!r}")
        pts.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", m)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def __len__(self) -> int:
        return len(self.masses)

    def n_distinct(self) -> int:
        return len(np.unique(self.points[self.masses > 0], axis=0))

    def with_masses(self, masses, label: str | None = None) -> "DiscreteMeasure":
        masses = np.asarray(masses, dtype=float)
        prob = abs(masses.sum() - 1.0) <= 1e-12
        return DiscreteMeasure(self.points, masses, label or self.label, probability=prob)

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.masses / self.masses.sum(), self.label, probability=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{p}_{i + 1}" for i in range(self.dim) for p in ("re", "im")] + ["mass"])
        for z, m in zip(self.points, self.masses):
            w.writerow([f"{v:.17g}" for c in z for v in (c.real, c.imag)] + [f"{m:.17g}"])
        return buf.getvalue()


def _circle(N: int, radius: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(N)
    pts = radius * np.exp(2j * np.pi * k / N)
    return pts, np.full(N, 1.0 / N)


def _interval(a: float, b: float, rule: str, N: int) -> tuple[np.ndarray, np.ndarray]:
    if b <= a:
        raise InvalidParameterError(f"measures.make_grid: interval needs a < b, got ({a}, {b})")
    mid, half = (a + b) / 2, (b - a) / 2
    if rule == "chebyshev":
        k = np.arange(1, N + 1)
        x = np.cos((2 * k - 1) * np.pi / (2 * N))
        m = np.full(N, 1.0 / N)
    elif rule == "lobatto":
        if N < 2:
            raise InvalidParameterError("measures.make_grid: lobatto rule needs N >= 2")
        k = np.arange(N)
        x = np.cos(k * np.pi / (N - 1))
        m = np.full(N, 1.0 / (N - 1))
        m[[0, -1]] /= 2
    elif rule == "uniform":
        x = np.linspace(-1.0, 1.0, N) if N > 1 else np.zeros(1)
        m = np.full(N, 1.0 / N)
    else:
        raise InvalidParameterError(f"measures.make_grid: unknown interval rule {rule!r}")
    # ascending order
    x = np.sort(x)
    return (mid + half * x).astype(complex), m


def _polar(r0: float, R: float, N_r: int, N_t: int) -> tuple[np.ndarray, np.ndarray]:
    dr = (R - r0) / N_r
    r = r0 + (np.arange(N_r) + 0.5) * dr
    t = 2 * np.pi * np.arange(N_t) / N_t
    rr, tt = np.meshgrid(r, t, indexing="ij")
    pts = (rr * np.exp(1j * tt)).ravel()
    m = (rr * dr * (2 * np.pi / N_t)).ravel()
    return pts, m / m.sum()


def make_grid(kind: str, *args, **params) -> DiscreteMeasure:
    """Build a discretization of a compact set.

    Kinds and parameters::

        circle(N, radius=1)                 Haar masses 1/N
        interval(a, b, rule, N)             rule in chebyshev | lobatto | uniform; lobatto is the
                                            Chebyshev extrema cos(k pi/(N-1)) with arcsine weights
        torus(d, N)                         N^d points, masses 1/N^d
        disk(R, N_r, N_t)                   midpoint polar grid, area masses
        annulus(r, R, N_r, N_t)
        product(m1, m2, ...)                product of 1-d DiscreteMeasures

    All builtin grids are probability measures.
    """
    try:
        if kind == "circle":
            N = int(args[0] if args else params["N"])
            radius = float(args[1] if len(args) > 1 else params.get("radius", 1.0))
            _check_n(N)
            pts, m = _circle(N, radius)
            label = f"circle({N})" if radius == 1 else f"circle({N},{radius})"
            return DiscreteMeasure(pts.reshape(-1, 1), m, label, probability=True)
        if kind == "interval":
            a, b, rule, N = args if args else (params["a"], params["b"], params.get("rule", "chebyshev"), params["N"])
            N = int(N)
            _check_n(N)
            pts, m = _interval(float(a), float(b), str(rule), N)
            return DiscreteMeasure(pts.reshape(-1, 1), m, f"interval({a},{b},{rule},{N})", probability=True)
        if kind == "torus":
            d, N = (int(v) for v in (args if args else (params["d"], params["N"])))
            _check_n(N)
            if d < 1:
                raise InvalidParameterError("measures.make_grid: torus needs d >= 1")
            roots, _ = _circle(N)
            pts = np.array(list(product(roots, repeat=d)), dtype=complex)
            return DiscreteMeasure(pts, np.full(N**d, 1.0 / N**d), f"torus({d},{N})", probability=True)
        if kind == "disk":
            R, N_r, N_t = args if args else (params["R"], params["N_r"], params["N_t"])
            if float(R) <= 0:
                raise InvalidParameterError("measures.make_grid: disk radius must be > 0")
            _check_n(int(N_r)), _check_n(int(N_t))
            pts, m = _polar(0.0, float(R), int(N_r), int(N_t))
            return DiscreteMeasure(pts.reshape(-1, 1), m, f"disk({R},{N_r},{N_t})", probability=True)
        if kind == "annulus":
            r, R, N_r, N_t = args if args else (params["r"], params["R"], params["N_r"], params["N_t"])
            if not 0 <= float(r) < float(R):
                raise InvalidParameterError(f"measures.make_grid: annulus needs 0 <= r < R, got ({r}, {R})")
            _check_n(int(N_r)), _check_n(int(N_t))
            pts, m = _polar(float(r), float(R), int(N_r), int(N_t))
            return DiscreteMeasure(pts.reshape(-1, 1), m, f"annulus({r},{R},{N_r},{N_t})", probability=True)
        if kind == "product":
            factors = args if args else params["factors"]
            if any(f.dim != 1 for f in factors):
                raise InvalidParameterError("measures.make_grid: product factors must be 1-d")
            pts = np.array(list(product(*(f.points[:, 0] for f in factors))), dtype=complex)
            m = np.array([math.prod(c) for c in product(*(f.masses for f in factors))])
            label = "x".join(f.label for f in factors)
            return DiscreteMeasure(pts, m / m.sum(), label, probability=True)
    except (KeyError, IndexError, TypeError) as exc:
        raise InvalidParameterError(f"measures.make_grid: bad parameters for {kind}: {exc}") from exc
    raise InvalidParameterError(f"measures.make_grid: unknown grid kind {kind!r}")


def _check_n(N: int) -> None:
    if N < 1:
        raise InvalidParameterError(f"measures.make_grid: N must be >= 1, got {N}")


_GRID = re.compile(r"^\s*(\w+)\s*\(([^)]*)\)\s*$")


def parse_grid(spec: str) -> DiscreteMeasure:
    """Parse ``circle(300)``, ``interval(-1,1,chebyshev,2000)``, ``torus(2,5)`` ..."""
    m = _GRID.match(spec)
    if not m:
        raise InvalidParameterError(f"measures.parse_grid: cannot parse grid {spec!r}")
    kind = m.group(1)
    raw = [s.strip() for s in m.group(2).split(",") if s.strip()]
    args = []
    for s in raw:
        try:
            args.append(int(s))
        except ValueError:
            try:
                args.append(float(s))
            except ValueError:
                args.append(s)
    return make_grid(kind, *args)


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """Weight ``w = exp(-Q)``.

    ``kind`` is ``zero``, ``constant`` (Q = c), ``quadratic`` (Q = c |z|^2)
    or ``table`` (Q given per point on ``points``).
    """

    kind: str = "zero"
    c: float = 0.0
    points: np.ndarray | None = None
    values: np.ndarray | None = None
    admissible: bool = True
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "quadratic", "table"):
            raise InvalidParameterError(f"measures.WeightSpec: unknown kind {self.kind!r}")
        if not math.isfinite(self.c):
            raise NonFiniteError("measures.WeightSpec: non-finite constant")
        if self.kind == "table":
            pts = np.asarray(self.points, dtype=complex)
            if pts.ndim == 1:
                pts = pts.reshape(-1, 1)
            vals = np.asarray(self.values, dtype=float).reshape(-1)
            if len(pts) != len(vals):
                raise InvalidParameterError("measures.WeightSpec: table points and values differ in length")
            if not np.all(np.isfinite(vals)):
                raise NonFiniteError("measures.WeightSpec: table has non-finite Q values")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "values", vals)
            object.__setattr__(self, "_index", {tuple(p): i for i, p in enumerate(pts)})

    @classmethod
    def zero(cls) -> "WeightSpec":
        return cls("zero")

    @classmethod
    def constant(cls, c: float) -> "WeightSpec":
        return cls("constant", float(c))

    @classmethod
    def quadratic(cls, c: float) -> "WeightSpec":
        return cls("quadratic", float(c))

    @classmethod
    def table(cls, points, values) -> "WeightSpec":
        return cls("table", 0.0, points, values)

    def q(self, points) -> np.ndarray:
        """Q at the given ``(N, d)`` points."""
        pts = np.asarray(points, dtype=complex)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if self.kind == "zero":
            return np.zeros(len(pts))
        if self.kind == "constant":
            return np.full(len(pts), self.c)
        if self.kind == "quadratic":
            return self.c * np.sum(np.abs(pts) ** 2, axis=1)
        if pts is self.points or (pts.shape == self.points.shape and np.array_equal(pts, self.points)):
            return self.values.copy()
        try:
            idx = [self._index[tuple(p)] for p in pts]
        except KeyError as exc:
            raise MissingWeightError(f"measures.WeightSpec.q: no table weight at point {exc.args[0]}") from None
        return self.values[idx]

    def perturbed(self, points, u, t: float) -> "WeightSpec":
        """Table weight ``w exp(-t u)`` on ``points`` (Q + t u)."""
        pts = np.asarray(points, dtype=complex)
        return WeightSpec.table(pts, self.q(pts) + t * np.asarray(u, dtype=float))

    def label(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind in ("constant", "quadratic"):
            return f"{self.kind}({self.c!r})"
        return f"table({len(self.values)})"


_WEIGHT = re.compile(r"^\s*(zero|constant|quadratic)\s*(?:\(([^)]*)\))?\s*$")


def parse_weight(spec: str | None) -> WeightSpec:
    if spec is None:
        return WeightSpec.zero()
    m = _WEIGHT.match(spec)
    if not m:
        raise InvalidParameterError(f"measures.parse_weight: cannot parse weight {spec!r}")
    kind, arg = m.group(1), m.group(2)
    if kind == "zero":
        return WeightSpec.zero()
    try:
        return WeightSpec(kind, float(arg))
    except (TypeError, ValueError) as exc:
        raise InvalidParameterError(f"measures.parse_weight: {kind} needs a number, got {arg!r}") from exc


@dataclass(frozen=True)
class BMConstant:
    value: float
    lower_bound: float  # sqrt(d_n / mu(K)), forced by the trace identity


def bm_constant(mu: DiscreteMeasure, w: WeightSpec, B) -> BMConstant:
    """Empirical Bernstein-Markov constant ``sqrt(max_K B_n)``."""
    from .gram import bergman_eval, gram_build

    if mu.n_distinct() < B.size:
        raise DegenerateGramError(
            f"measures.bm_constant: measure has {mu.n_distinct()} distinct points, need {B.size}"
        )
    G = gram_build(B, mu, w)
    vals = bergman_eval(G, mu.points, include_weight_at_z=True)
    return BMConstant(float(np.sqrt(vals.max())), float(np.sqrt(B.size / mu.total)))
