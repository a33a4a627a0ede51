import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pluripot import (
    MultiIndexBasis,
    WeightSpec,
    bergman_eval,
    box,
    eval_basis,
    f_derivative_check,
    gram_build,
    interval,
    logdet_scaled,
    make_grid,
    simplex,
    zn_crosscheck,
)
from pluripot.errors import DegenerateGramError, InvalidParameterError, ValidationError
from pluripot.gram import bergman_on_support, concavity_scan, f_n

ZERO = WeightSpec.zero()


def direct_gram(B, mu, w):
    P = eval_basis(B, mu.points)
    s = mu.masses * np.exp(-2 * B.n * w.q(mu.points))
    return (P.T * s) @ P.conj()


@pytest.mark.parametrize("P, grid, w", [
    (interval(0, 1), make_grid("interval", -1, 1, "chebyshev", 30), WeightSpec.quadratic(0.3)),
    (simplex(2), make_grid("product", make_grid("disk", 1.5, 3, 4), make_grid("circle", 5)), WeightSpec.quadratic(0.5)),
    (box(2), make_grid("torus", 2, 7), WeightSpec.constant(0.2)),
])
def test_gram_matches_direct_sum(P, grid, w):
    B = MultiIndexBasis.build(P, 3)
    G = gram_build(B, grid, w)
    D = direct_gram(B, grid, w)
    np.testing.assert_allclose(G.gram, D, atol=1e-13 * np.abs(D).max())
    sign, ld = np.linalg.slogdet(D)
    assert G.logdet == pytest.approx(ld, abs=1e-10)
    np.testing.assert_allclose(G.chol @ G.chol.conj().T, D, atol=1e-12 * np.abs(D).max())


def test_trace_identity_and_lower_bound(rng, basis4):
    grid = make_grid("interval", -1, 1, "uniform", 40)
    for _ in range(5):
        mu = grid.with_masses(rng.dirichlet(np.ones(40)))
        Bv = bergman_on_support(gram_build(basis4, mu, ZERO))
        assert np.sum(mu.masses * Bv) == pytest.approx(basis4.size, rel=1e-11)
        assert Bv.max() >= basis4.size - 1e-10


def test_bergman_matches_inverse(rng, simplex2):
    B = MultiIndexBasis.build(simplex2, 3)
    mu = make_grid("product", make_grid("disk", 1.0, 3, 5), make_grid("disk", 1.0, 2, 4))
    G = gram_build(B, mu, ZERO)
    z = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    P = eval_basis(B, z)
    ref = np.real(np.einsum("ij,jk,ik->i", P.conj(), np.linalg.inv(G.gram.T), P))
    np.testing.assert_allclose(bergman_eval(G, z), ref, rtol=1e-10)


def test_basis_permutation_invariance(rng):
    P = box(2)
    B = MultiIndexBasis.build(P, 3)
    perm = rng.permutation(B.size)
    Bp = MultiIndexBasis(P, 3, B.exponents[perm])
    mu = make_grid("torus", 2, 5).with_masses(rng.dirichlet(np.ones(25)))
    w = WeightSpec.quadratic(0.1)
    G, Gp = gram_build(B, mu, w), gram_build(Bp, mu, w)
    z = rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2))
    np.testing.assert_allclose(bergman_eval(G, z), bergman_eval(Gp, z), rtol=1e-12)
    assert Gp.logdet == pytest.approx(G.logdet, abs=1e-12)


def test_constant_weight_scaling(basis4, cheb64):
    g0 = gram_build(basis4, cheb64, ZERO)
    g1 = gram_build(basis4, cheb64, WeightSpec.constant(0.7))
    assert g1.logdet - g0.logdet == pytest.approx(-2 * 4 * 0.7 * basis4.size, abs=1e-12)


def test_arcsine_logdet_formula():
    # monomial Gram under arcsine measure: det G = 2^{-n^2}, so logdet/(n(n+1)) is closed form
    for n in (1, 5, 20, 40):
        G = gram_build(MultiIndexBasis.build(interval(0, 1), n), make_grid("interval", -1, 1, "chebyshev", 2 * n + 1), ZERO)
        tol = 1e-10 if n <= 20 else 1e-4
        assert logdet_scaled(G) == pytest.approx(math.log(2) / (n + 1) - math.log(2), abs=tol)


def test_large_degree_is_finite():
    B = MultiIndexBasis.build(simplex(2), 25)
    G = gram_build(B, make_grid("product", make_grid("annulus", 0.5, 3.0, 6, 12), make_grid("annulus", 0.5, 3.0, 6, 12)), WeightSpec.quadratic(1.0))
    assert math.isfinite(G.logdet) and not G.degenerate


def test_degenerate_measure(basis4):
    G = gram_build(basis4, make_grid("circle", 4), ZERO)
    assert G.degenerate and G.logdet == -math.inf
    with pytest.raises(DegenerateGramError):
        bergman_eval(G, [[0.0]])
    with pytest.raises(DegenerateGramError):
        logdet_scaled(G)


weights = st.lists(st.floats(0, 1), min_size=20, max_size=20)


@given(weights, weights, weights)
@settings(max_examples=30, deadline=None)
def test_gram_cocycle_exact(q1, q2, q3):
    B = MultiIndexBasis.build(interval(0, 1), 3)
    grid = make_grid("interval", -1, 1, "chebyshev", 20)
    ld = [gram_build(B, grid, WeightSpec.table(grid.points, q)).logdet for q in (q1, q2, q3)]
    assert (ld[0] - ld[1]) + (ld[1] - ld[2]) + (ld[2] - ld[0]) == 0.0


@given(weights, st.lists(st.floats(0, 0.5), min_size=20, max_size=20))
@settings(max_examples=30, deadline=None)
def test_gram_monotone_in_weight(q1, dq):
    B = MultiIndexBasis.build(interval(0, 1), 3)
    grid = make_grid("interval", -1, 1, "chebyshev", 20)
    q1 = np.array(q1)
    g1 = gram_build(B, grid, WeightSpec.table(grid.points, q1))
    g2 = gram_build(B, grid, WeightSpec.table(grid.points, q1 + np.array(dq)))
    assert g1.logdet >= g2.logdet - 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_f_derivative(seed, basis4, cheb64):
    u = np.random.default_rng(seed).standard_normal(len(cheb64))
    chk = f_derivative_check(basis4, cheb64, ZERO, u, t0=0.3, h=1e-4)
    assert chk.rel_err <= 1e-6


def test_f_is_concave_in_t(basis4, cheb64, rng):
    u = rng.standard_normal(len(cheb64))
    scan = concavity_scan(basis4, cheb64, ZERO, u, np.linspace(-2, 2, 41))
    assert scan.max_second_difference <= 1e-9
    assert f_n(basis4, cheb64, ZERO, u, 0.0) == pytest.approx(
        -gram_build(basis4, cheb64, ZERO).logdet / (2 * basis4.degree_sum))


@pytest.mark.parametrize("P, n, grid", [
    (interval(0, 1), 2, make_grid("circle", 12)),
    (interval(0, 1), 3, make_grid("interval", -1, 1, "uniform", 15)),
    (simplex(2), 1, make_grid("torus", 2, 4)),
])
def test_zn_monte_carlo(P, n, grid):
    chk = zn_crosscheck(MultiIndexBasis.build(P, n), grid, ZERO, trials=100_000, seed=5)
    assert chk.z_score <= 3


def test_zn_preconditions(basis4, cheb64):
    with pytest.raises(ValidationError):
        zn_crosscheck(basis4, cheb64, ZERO)
    B = MultiIndexBasis.build(interval(0, 1), 1)
    with pytest.raises(InvalidParameterError):
        zn_crosscheck(B, make_grid("circle", 5).with_masses(np.full(5, 0.5)), ZERO)


def test_dimension_mismatch(simplex2):
    from pluripot.errors import DimensionMismatchError

    with pytest.raises(DimensionMismatchError):
        gram_build(MultiIndexBasis.build(simplex2, 2), make_grid("circle", 30), ZERO)
