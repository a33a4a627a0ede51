import math
from itertools import combinations

import numpy as np
import pytest

from pluripot import (
    MultiIndexBasis,
    WeightSpec,
    eval_basis,
    fekete_moments,
    fekete_search,
    interval,
    log_abs_wvdm,
    make_grid,
    simplex,
)
from pluripot.errors import DimensionMismatchError, InsufficientPointsError

ZERO = WeightSpec.zero()


def exhaustive_max(B, grid, w):
    """Largest log|weighted VDM| over all d_n-subsets, by batched determinants."""
    V = eval_basis(B, grid.points) * np.exp(-B.n * w.q(grid.points))[:, None]
    idx = np.array(list(combinations(range(len(grid)), B.size)))
    best = -np.inf
    for chunk in np.array_split(idx, max(1, len(idx) // 100_000)):
        with np.errstate(divide="ignore"):
            best = max(best, float(np.log(np.abs(np.linalg.det(V[chunk]))).max()))
    return best


@pytest.mark.parametrize("P, n, grid, w", [
    (interval(0, 1), 1, make_grid("interval", -1, 1, "chebyshev", 60), ZERO),
    (interval(0, 1), 2, make_grid("interval", -1, 1, "uniform", 60), ZERO),
    (interval(0, 1), 3, make_grid("interval", -1, 1, "chebyshev", 60), ZERO),
    (interval(0, 1), 3, make_grid("interval", -2, 2, "uniform", 60), WeightSpec.quadratic(0.5)),
    (interval(0, 1), 3, make_grid("disk", 1.0, 5, 12), ZERO),
    (simplex(2), 1, make_grid("torus", 2, 6), ZERO),
    (simplex(2), 1, make_grid("product", make_grid("interval", -1, 1, "uniform", 7),
                              make_grid("interval", -1, 1, "chebyshev", 8)), WeightSpec.quadratic(0.2)),
], ids=["cheb-n1", "unif-n2", "cheb-n3", "weighted-n3", "disk-n3", "torus-simplex", "square-simplex-weighted"])
def test_search_attains_exhaustive_maximum(P, n, grid, w):
    B = MultiIndexBasis.build(P, n)
    assert len(grid) <= 60 and B.size <= 4
    res = fekete_search(grid, w, B)
    assert res.log_wvdm == pytest.approx(exhaustive_max(B, grid, w), abs=1e-9)
    assert log_abs_wvdm(res.points, B, w) == pytest.approx(res.log_wvdm, abs=1e-9)


def test_classical_small_cases():
    B1 = MultiIndexBasis.build(interval(0, 1), 1)
    res = fekete_search(make_grid("interval", -1, 1, "uniform", 201), ZERO, B1)
    assert sorted(res.points[:, 0].real) == [-1.0, 1.0]
    assert res.log_wvdm == pytest.approx(math.log(2), abs=1e-14)
    # three equally spaced points on the circle: |VDM| = 3^{3/2}
    B2 = MultiIndexBasis.build(interval(0, 1), 2)
    res = fekete_search(make_grid("circle", 300), ZERO, B2)
    assert res.log_wvdm == pytest.approx(1.5 * math.log(3), abs=1e-12)
    # circle(n+1) is itself Fekete: |VDM of the roots of unity|^2 = (n+1)^(n+1)
    n = 7
    res = fekete_search(make_grid("circle", n + 1), ZERO, MultiIndexBasis.build(interval(0, 1), n))
    assert res.log_wvdm == pytest.approx(0.5 * (n + 1) * math.log(n + 1), abs=1e-10)


def test_exchange_search_beyond_enumeration_limit():
    # 75 points, d_n = 4: too many subsets to enumerate, so greedy plus exchanges runs
    B = MultiIndexBasis.build(interval(0, 1), 3)
    grid = make_grid("interval", -1, 1, "chebyshev", 75)
    assert math.comb(75, 4) > 500_000
    res = fekete_search(grid, ZERO, B)
    assert res.log_wvdm == pytest.approx(exhaustive_max(B, grid, ZERO), abs=1e-9)


def test_exchange_history_monotone():
    B = MultiIndexBasis.build(interval(0, 1), 15)
    res = fekete_search(make_grid("interval", -1, 1, "uniform", 500), ZERO, B)
    h = res.history
    assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))
    assert res.log_wvdm >= h[0] - 1e-9


@pytest.mark.parametrize("w", [ZERO, WeightSpec.quadratic(0.4)])
def test_symmetric_grid_gives_symmetric_set(w):
    grid = make_grid("interval", -1.5, 1.5, "chebyshev", 400)
    res = fekete_search(grid, w, MultiIndexBasis.build(interval(0, 1), 10))
    x = np.sort(res.points[:, 0].real)
    spacing = np.abs(np.diff(grid.points[:, 0].real)).max()
    np.testing.assert_allclose(x, -x[::-1], atol=spacing)


def test_constant_weight_factorization():
    B = MultiIndexBasis.build(interval(0, 1), 6)
    grid = make_grid("interval", -1, 1, "chebyshev", 200)
    c = 0.35
    d0 = fekete_search(grid, ZERO, B).delta_wn
    dc = fekete_search(grid, WeightSpec.constant(c), B).delta_wn
    assert dc == pytest.approx(d0 * math.exp(-c * B.n * B.size / B.degree_sum), rel=1e-12)


def test_vandermonde_properties(rng):
    B = MultiIndexBasis.build(simplex(2), 2)
    pts = rng.standard_normal((B.size, 2)) + 1j * rng.standard_normal((B.size, 2))
    v = log_abs_wvdm(pts, B, ZERO)
    assert v == pytest.approx(math.log(abs(np.linalg.det(eval_basis(B, pts)))), abs=1e-12)
    assert log_abs_wvdm(pts[rng.permutation(B.size)], B, ZERO) == pytest.approx(v, abs=1e-12)
    pts[1] = pts[0]
    assert log_abs_wvdm(pts, B, ZERO) == -math.inf


def test_search_errors():
    B = MultiIndexBasis.build(interval(0, 1), 5)
    with pytest.raises(InsufficientPointsError):
        fekete_search(make_grid("circle", 5), ZERO, B)
    with pytest.raises(DimensionMismatchError):
        fekete_search(make_grid("torus", 2, 5), ZERO, B)


def test_moments():
    mom = fekete_moments(make_grid("circle", 8).points, kmax=8)
    np.testing.assert_allclose(mom.fourier[:7], 0, atol=1e-14)
    assert mom.fourier[7] == pytest.approx(1.0)
    x = np.array([[-1.0], [0.0], [1.0]])
    assert fekete_moments(x).power[1] == pytest.approx(2 / 3)
