"""Rational convex polytopes in the positive orthant.

Bodies carry exact :class:`fractions.Fraction` coordinates.  Lattice
membership, volumes and inclusion constants are decided in exact
arithmetic; only :func:`h_p_eval` works in floating point.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateBodyError, InvalidParameterError, MissingFacetsError

MAX_DIM = 3


def as_fraction(value) -> Fraction:
    """Parse ``3``, ``0.5``, ``"1/2"`` or ``[num, den]`` into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidParameterError(f"geometry: rational pair must have 2 entries, got {value!r}")
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, bool):
        raise InvalidParameterError(f"geometry: not a number: {value!r}")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    raise InvalidParameterError(f"geometry: not a number: {value!r}")


def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(r) for r in rows]
    k = len(m)
    det = Fraction(1)
    for c in range(k):
        p = next((r for r in range(c, k) if m[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, k):
            f = m[r][c] / m[c][c]
            if f:
                for j in range(c, k):
                    m[r][j] -= f * m[c][j]
    return det


def _rank(rows: Sequence[Sequence[Fraction]]) -> int:
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncol = len(m[0])
    rank = 0
    for c in range(ncol):
        p = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if p is None:
            continue
        m[rank], m[p] = m[p], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class Facet:
    """Halfspace ``normal . x <= offset``."""

    normal: tuple[Fraction, ...]
    offset: Fraction

    def slack(self, x: Sequence[Fraction]) -> Fraction:
        return self.offset - sum(a * b for a, b in zip(self.normal, x))


@dataclass(frozen=True)
class InclusionConstants:
    """``k``: least k with the standard simplex inside kP (None if none);
    ``A``: least integer A with P inside A times the simplex."""

    k: int | None
    A: int

    @property
    def admissible(self) -> bool:
        return self.k is not None


class ConvexBody:
    """A rational polytope P in the closed positive orthant of R^d.

    Parameters
    ----------
    vertices : iterable of d-sequences
        Extreme points; anything :func:`as_fraction` accepts.
    facets : iterable of (normal, offset), optional
        Halfspaces ``normal . x <= offset``.  Required for exact lattice and
        volume work when ``d > 1``.
    name : str, optional
        Display name.
    """

    def __init__(self, vertices, facets=None, name: str | None = None):
        verts = []
        for v in vertices:
            fv = tuple(as_fraction(c) for c in v)
            if fv not in verts:
                verts.append(fv)
        if not verts:
            raise InvalidParameterError("geometry.ConvexBody: no vertices")
        dim = len(verts[0])
        if dim < 1 or dim > MAX_DIM:
            raise InvalidParameterError(f"geometry.ConvexBody: dimension {dim} unsupported (1..{MAX_DIM})")
        if any(len(v) != dim for v in verts):
            raise InvalidParameterError("geometry.ConvexBody: vertices of mixed dimension")
        if any(c < 0 for v in verts for c in v):
            raise InvalidParameterError("geometry.ConvexBody: vertex coordinates must be >= 0")
        diffs = [[a - b for a, b in zip(v, verts[0])] for v in verts[1:]]
        if _rank(diffs) < dim:
            raise DegenerateBodyError("geometry.ConvexBody: body has empty interior")

        fs = None
        if facets is not None:
            fs = []
            for f in facets:
                if isinstance(f, Facet):
                    fs.append(f)
                else:
                    normal, offset = f
                    fs.append(Facet(tuple(as_fraction(c) for c in normal), as_fraction(offset)))
            fs = tuple(fs)
            for f in fs:
                if len(f.normal) != dim:
                    raise InvalidParameterError("geometry.ConvexBody: facet normal has wrong dimension")
                if any(f.slack(v) < 0 for v in verts):
                    raise InvalidParameterError(f"geometry.ConvexBody: vertex violates facet {f}")
                if sum(f.slack(v) == 0 for v in verts) < dim:
                    raise InvalidParameterError(f"geometry.ConvexBody: facet {f} is tight at fewer than {dim} vertices")
            for v in verts:
                tight = [f.normal for f in fs if f.slack(v) == 0]
                if _rank(tight) < dim:
                    raise InvalidParameterError(f"geometry.ConvexBody: {v} is not an extreme point")
        elif dim == 1:
            lo, hi = min(verts), max(verts)
            verts = [lo, hi]
        else:
            from scipy.spatial import ConvexHull

            hull = ConvexHull(np.array([[float(c) for c in v] for v in verts]))
            if len(hull.vertices) != len(verts):
                raise InvalidParameterError("geometry.ConvexBody: vertex list contains non-extreme points")

        if dim == 1:
            verts = sorted(verts)
        self.dim = dim
        self.vertices: tuple[tuple[Fraction, ...], ...] = tuple(verts)
        self.facets: tuple[Facet, ...] | None = fs
        self.name = name or f"polytope(d={dim}, {len(verts)} vertices)"

    def __repr__(self) -> str:
        return f"ConvexBody({self.name})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ConvexBody) and set(self.vertices) == set(other.vertices)

    def __hash__(self) -> int:
        return hash(frozenset(self.vertices))

    # -- membership -------------------------------------------------------

    def contains(self, x: Sequence, scale=1) -> bool:
        """Exact test of ``x in scale * P``."""
        x = [as_fraction(c) for c in x]
        scale = as_fraction(scale)
        if self.dim == 1:
            return scale * self.vertices[0][0] <= x[0] <= scale * self.vertices[-1][0]
        self._require_facets("contains")
        return all(f.offset * scale - sum(a * b for a, b in zip(f.normal, x)) >= 0 for f in self.facets)

    def _require_facets(self, op: str) -> None:
        if self.dim > 1 and self.facets is None:
            raise MissingFacetsError(f"geometry.{op}: body {self.name} has no facet representation")

    @cached_property
    def _integer_facets(self) -> tuple[np.ndarray, np.ndarray]:
        """Facets scaled to integer rows: ``N @ J <= n * b``."""
        rows, rhs = [], []
        for f in self.facets:
            lcm = reduce(math.lcm, [c.denominator for c in f.normal] + [f.offset.denominator], 1)
            rows.append([int(c * lcm) for c in f.normal])
            rhs.append(int(f.offset * lcm))
        return np.array(rows, dtype=object), np.array(rhs, dtype=object)

    # -- JSON -------------------------------------------------------------

    def to_json(self) -> dict:
        def pair(q: Fraction):
            return [q.numerator, q.denominator]

        out = {"dim": self.dim, "vertices": [[pair(c) for c in v] for v in self.vertices]}
        if self.facets is not None:
            out["facets"] = [{"normal": [pair(c) for c in f.normal], "offset": pair(f.offset)} for f in self.facets]
        return out

    @classmethod
    def from_json(cls, data: dict, name: str | None = None) -> "ConvexBody":
        try:
            dim = int(data["dim"])
            vertices = data["vertices"]
            facets = data.get("facets")
        except (KeyError, TypeError) as exc:
            raise InvalidParameterError(f"geometry.from_json: schema error, missing {exc}") from exc
        if facets is not None:
            try:
                facets = [(f["normal"], f["offset"]) for f in facets]
            except (KeyError, TypeError) as exc:
                raise InvalidParameterError(f"geometry.from_json: facet schema error, missing {exc}") from exc
        body = cls(vertices, facets, name=name)
        if body.dim != dim:
            raise InvalidParameterError(f"geometry.from_json: declared dim {dim} but vertices have dim {body.dim}")
        return body


# -- builtin bodies -------------------------------------------------------


def simplex(d: int) -> ConvexBody:
    """Standard simplex conv(0, e_1, ..., e_d)."""
    verts = [tuple([0] * d)] + [tuple(int(i == j) for j in range(d)) for i in range(d)]
    facets = [(tuple(-int(i == j) for j in range(d)), 0) for i in range(d)] + [(tuple([1] * d), 1)]
    return ConvexBody(verts, facets, name=f"simplex({d})")


def box(d: int, side=1) -> ConvexBody:
    """The cube [0, side]^d."""
    side = as_fraction(side)
    verts = [tuple(side * c for c in corner) for corner in product((0, 1), repeat=d)]
    facets = []
    for i in range(d):
        e = tuple(int(i == j) for j in range(d))
        facets.append((tuple(-c for c in e), 0))
        facets.append((e, side))
    return ConvexBody(verts, facets, name=f"box({d})" if side == 1 else f"box({d},{side})")


def interval(a, b) -> ConvexBody:
    """The segment [a, b] in R^1."""
    a, b = as_fraction(a), as_fraction(b)
    if b <= a:
        raise InvalidParameterError(f"geometry.interval: need a < b, got [{a}, {b}]")
    return ConvexBody([(a,), (b,)], [((-1,), -a), ((1,), b)], name=f"interval({a},{b})")


_NAMED = re.compile(r"^\s*(simplex|box|interval)\s*\(([^)]*)\)\s*$")


def parse_body(spec: str) -> ConvexBody:
    """Resolve ``simplex(d)``, ``box(d)``, ``interval(a,b)`` or a JSON file path."""
    m = _NAMED.match(spec)
    if m:
        kind, args = m.group(1), [s.strip() for s in m.group(2).split(",") if s.strip()]
        try:
            if kind == "simplex" and len(args) == 1:
                return simplex(int(args[0]))
            if kind == "box" and len(args) in (1, 2):
                return box(int(args[0]), *(as_fraction(a) for a in args[1:]))
            if kind == "interval" and len(args) == 2:
                return interval(as_fraction(args[0]), as_fraction(args[1]))
        except ValueError as exc:
            raise InvalidParameterError(f"geometry.parse_body: bad arguments in {spec!r}: {exc}") from exc
        raise InvalidParameterError(f"geometry.parse_body: bad arguments in {spec!r}")
    path = Path(spec)
    if not path.exists():
        raise InvalidParameterError(f"geometry.parse_body: {spec!r} is neither a builtin body nor a file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"geometry.parse_body: {spec} is not valid JSON: {exc}") from exc
    return ConvexBody.from_json(data, name=path.stem)


# -- operations -----------------------------------------------------------


def graded_lex_key(J: Sequence[int]) -> tuple:
    """Total degree first, then larger leading exponents first."""
    return (sum(J), tuple(-j for j in J))


def lattice_points(P: ConvexBody, n: int) -> list[tuple[int, ...]]:
    """Exponents ``nP ∩ Z^d`` in graded-lex order."""
    if n < 1:
        raise InvalidParameterError(f"geometry.lattice_points: n must be >= 1, got {n}")
    if P.dim == 1:
        lo, hi = P.vertices[0][0] * n, P.vertices[-1][0] * n
        return [(j,) for j in range(math.ceil(lo), math.floor(hi) + 1)]
    P._require_facets("lattice_points")
    top = [math.floor(max(v[i] for v in P.vertices) * n) for i in range(P.dim)]
    grid = np.array(list(product(*(range(t + 1) for t in top))), dtype=object)
    N, b = P._integer_facets
    inside = np.all(grid.dot(N.T) <= b * n, axis=1)
    pts = [tuple(int(c) for c in J) for J in grid[inside]]
    return sorted(pts, key=graded_lex_key)


def h_p_eval(P: ConvexBody, z) -> float:
    """Logarithmic indicator ``max_{J in P} log|z^J|``; may return ``-inf``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape[-1] != P.dim:
        raise InvalidParameterError(f"geometry.h_p_eval: point has dim {z.shape[-1]}, body has dim {P.dim}")
    V = np.array([[float(c) for c in v] for v in P.vertices])
    # 0 * log 0 contributes 0
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(np.abs(z))
        terms = np.where(V[:, None, :] == 0, 0.0, V[:, None, :] * logs.reshape(1, -1, P.dim))
    vals = terms.sum(axis=-1).max(axis=0)
    return float(vals[0]) if z.ndim == 1 else vals


def _simplices(P: ConvexBody, apex: int = 0) -> list[tuple[int, ...]]:
    """Fan triangulation from vertex ``apex``; vertex-index tuples."""
    if P.dim == 1:
        return [(0, 1)]
    P._require_facets("triangulation")
    tight = [frozenset(i for i, v in enumerate(P.vertices) if f.slack(v) == 0) for f in P.facets]
    out = []
    for k, T in enumerate(tight):
        if apex in T:
            continue
        if P.dim == 2:
            a, b = sorted(T)
            out.append((apex, a, b))
            continue
        # d = 3: fan inside the facet from its lowest vertex, over the facet's edges
        base = min(T)
        for j, U in enumerate(tight):
            if j == k:
                continue
            edge = T & U
            if len(edge) == 2 and base not in edge:
                e1, e2 = sorted(edge)
                out.append((apex, base, e1, e2))
    return out


def volume_and_cp(P: ConvexBody, apex: int = 0) -> tuple[Fraction, Fraction]:
    """Exact ``(Vol(P), integral over P of x_1+...+x_d)``."""
    if P.dim == 1:
        a, b = P.vertices[0][0], P.vertices[-1][0]
        vol, cp = b - a, (b * b - a * a) / 2
    else:
        vol = Fraction(0)
        cp = Fraction(0)
        fact = math.factorial(P.dim)
        for S in _simplices(P, apex):
            v0 = P.vertices[S[0]]
            rows = [[a - b for a, b in zip(P.vertices[i], v0)] for i in S[1:]]
            vs = abs(_det(rows)) / fact
            vol += vs
            cp += vs * sum(sum(P.vertices[i]) for i in S) / len(S)
    if vol == 0:
        raise DegenerateBodyError(f"geometry.volume_and_cp: {P.name} has zero volume")
    return vol, cp


def normalized_mass(P: ConvexBody) -> Fraction:
    """``d! Vol(P)``: total Monge-Ampere mass of an L_{P,+} potential."""
    return math.factorial(P.dim) * volume_and_cp(P)[0]


def simplex_inclusion(P: ConvexBody) -> InclusionConstants:
    A = max(1, math.ceil(max(sum(v) for v in P.vertices)))
    origin = (0,) * P.dim
    if not P.contains(origin):
        return InclusionConstants(None, A)
    k = 1
    for i in range(P.dim):
        # largest t with t e_i in P
        if P.dim == 1:
            t = P.vertices[-1][0]
        else:
            t = min((f.offset / f.normal[i] for f in P.facets if f.normal[i] > 0), default=None)
            if t is None:
                continue
        if t == 0:
            return InclusionConstants(None, A)
        k = max(k, math.ceil(1 / t))
    return InclusionConstants(k, A)


def iter_bodies() -> Iterable[ConvexBody]:
    """Builtin bodies used in property checks."""
    yield interval(0, 1)
    yield interval(0, 2)
    yield simplex(2)
    yield box(2)
    yield simplex(3)
