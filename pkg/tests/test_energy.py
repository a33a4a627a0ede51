import math

import numpy as np
import pytest
from scipy import integrate

from pluripot import (
    GridFunction1D,
    MultiIndexBasis,
    WeightSpec,
    bvr_energy_experiment,
    closed_form_extremal,
    cocycle_check,
    ddc_1d,
    domination_check,
    energy_1d,
    energy_derivative_check,
    gram_build,
    h_p_eval,
    interval,
    make_grid,
)
from pluripot.energy import extremal_bergman_approx, interval_green, log_plus
from pluripot.errors import (
    InvalidParameterError,
    MaskMismatchError,
    SlopeMismatchError,
    UnknownCaseError,
    ValidationError,
)

N, EXT = 1024, 4.0
LOG2 = math.log(2)


@pytest.fixture(scope="module")
def g():
    return GridFunction1D.sample(interval_green, EXT, N, slope=1.0)


@pytest.fixture(scope="module")
def lp():
    return GridFunction1D.sample(log_plus, EXT, N, slope=1.0)


def test_closed_forms():
    assert closed_form_extremal("interval-green", 2.0) == pytest.approx(math.log(2 + math.sqrt(3)))
    assert closed_form_extremal("interval-green", 2j) == pytest.approx(math.log(2 + math.sqrt(5)))
    np.testing.assert_allclose(closed_form_extremal("interval-green", np.linspace(-1, 1, 9)), 0, atol=1e-7)
    assert closed_form_extremal("disk-logplus", 0.5) == 0.0
    P = interval(0, 2)
    assert closed_form_extremal("torus-HP-plus-c", 3.0, P=P, c=0.25) == pytest.approx(2 * math.log(3) + 0.25)
    with pytest.raises(UnknownCaseError):
        closed_form_extremal("square", 1.0)
    with pytest.raises(InvalidParameterError):
        closed_form_extremal("torus-HP", 1.0)


def test_mass_normalization(g, lp):
    P2 = interval(0, 2)
    hp2 = GridFunction1D.sample(lambda z: h_p_eval(P2, z.reshape(-1, 1)).reshape(z.shape), EXT, N, slope=2.0)
    for f, vol in ((g, 1.0), (lp, 1.0), (hp2, 2.0)):
        m = ddc_1d(f)
        assert m.total == pytest.approx(vol, rel=1e-12)
        assert m.interior == pytest.approx(vol, rel=1e-3)


def test_smooth_potential_interior_mass():
    # dd^c (1/2) log(1 + |z|^2) = (1/pi) (1 + |z|^2)^-2 dA
    f = GridFunction1D.sample(lambda z: 0.5 * np.log1p(np.abs(z) ** 2), EXT, N, slope=1.0)
    exact, _ = integrate.dblquad(lambda y, x: 1 / (math.pi * (1 + x * x + y * y) ** 2), -2, 2, -2, 2)
    m = ddc_1d(f)
    assert m.interior == pytest.approx(exact, abs=1e-3)
    assert m.total == pytest.approx(1.0, abs=1e-12)


def test_energy_oracle_and_sign(g, lp):
    E = energy_1d(g, lp)
    assert abs(E - LOG2) <= 0.02 * LOG2
    assert E > 0
    assert energy_1d(lp, g) == -E
    assert energy_1d(g, g) == 0.0


def test_shift_identity(lp):
    for c in (0.3, -1.1):
        assert energy_1d(lp.shifted(c), lp) == pytest.approx(2 * c, abs=1e-12)


def test_cocycle(g, lp):
    h = g.combine(lp, 0.5, 0.5)
    assert abs(cocycle_check(g, lp, h)) <= 1e-10
    assert abs(cocycle_check(g, lp, lp.shifted(0.7))) <= 1e-10


@pytest.mark.parametrize("pair", ["lp-g", "g-lp"])
def test_concavity_inequality(g, lp, pair):
    u1, u2 = (lp, g) if pair == "lp-g" else (g, lp)
    v = lp
    m1 = ddc_1d(u1)
    diff = u2.values - u1.values
    ring = np.concatenate([diff[0], diff[-1], diff[1:-1, 0], diff[1:-1, -1]]).mean()
    linear = 2 * (np.sum(diff * m1.masses) + ring * m1.exterior)
    assert energy_1d(u2, v) <= energy_1d(u1, v) + linear + 1e-2


def test_energy_derivative(g, lp):
    chk = energy_derivative_check(lp, g, lp, t0=0.5, h=1e-3)
    assert chk.rel_err <= 1e-6


def test_grid_function_roundtrip(tmp_path, g):
    path = tmp_path / "g.bin"
    g.save(path)
    h = GridFunction1D.load(path)
    assert h.same_grid(g) and h.slope == g.slope
    np.testing.assert_array_equal(h.values, g.values)
    raw = path.read_bytes()
    header, _, body = raw.partition(b"\n")
    assert b'"half_width"' in header and len(body) == 8 * N * N
    path.write_bytes(raw[:-8])
    with pytest.raises(ValidationError):
        GridFunction1D.load(path)


def test_incompatible_grid_functions(lp):
    other = GridFunction1D.sample(log_plus, 3.0, N, slope=1.0)
    with pytest.raises(MaskMismatchError):
        energy_1d(lp, other)
    steep = GridFunction1D.sample(lambda z: 2 * log_plus(z), EXT, N, slope=2.0)
    with pytest.raises(SlopeMismatchError):
        energy_1d(lp, steep)


def test_bergman_extremal_approximation():
    # (1/2n) log B_n -> Green function off K; error O(log n / n)
    n = 40
    G = gram_build(MultiIndexBasis.build(interval(0, 1), n), make_grid("interval", -1, 1, "chebyshev", 2 * n + 1),
                   WeightSpec.zero())
    z = np.array([[2.0], [1.5j], [0.3 + 1.0j]])
    approx = extremal_bergman_approx(G, z)
    np.testing.assert_allclose(approx, interval_green(z[:, 0]), atol=2 * math.log(n) / n)


def test_domination_small():
    B = MultiIndexBasis.build(interval(0, 1), 10)
    z = np.array([1.5, -2.0, 3j, 1 + 1j])
    rep = domination_check(B, make_grid("circle", 500), WeightSpec.zero(), log_plus, z, samples=50, seed=3)
    assert rep.violations == 0 and rep.max_ratio <= 1


def test_bvr_experiments():
    rows = bvr_energy_experiment({"case": "constant-torus", "body": "box(2)", "c": 0.4, "n": [1, 2, 3]})
    assert all(r.gap <= 1e-10 and r.target == pytest.approx(3 * 2 * 0.4) for r in rows)
    rows = bvr_energy_experiment({"case": "identical", "n": [2, 5]})
    assert all(r.L_n == 0 for r in rows)
    rows = bvr_energy_experiment({"case": "interval-vs-torus", "target": LOG2, "n": [40]})
    assert rows[0].gap <= 0.05 * LOG2
    with pytest.raises(UnknownCaseError):
        bvr_energy_experiment({"case": "sphere"})
    with pytest.raises(InvalidParameterError):
        bvr_energy_experiment({"case": "identical", "n": []})
