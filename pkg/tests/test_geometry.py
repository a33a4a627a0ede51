import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pluripot import ConvexBody, box, h_p_eval, interval, lattice_points, parse_body, simplex, simplex_inclusion
from pluripot.errors import DegenerateBodyError, InvalidParameterError, MissingFacetsError, ValidationError
from pluripot.geometry import iter_bodies, normalized_mass, volume_and_cp

# conv{(0,0), (2,0), (1,2), (0,1)}; shoelace area 5/2
QUAD = ConvexBody(
    [(0, 0), (2, 0), (1, 2), (0, 1)],
    [((0, -1), 0), ((2, 1), 4), ((-1, 1), 1), ((-1, 0), 0)],
    name="quad",
)


def lagrange_eval(xs, ys, x):
    total = Fraction(0)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        term = Fraction(yi)
        for j, xj in enumerate(xs):
            if j != i:
                term *= Fraction(x - xj, xi - xj)
        total += term
    return total


@pytest.mark.parametrize("P, vol, cp", [
    (interval(0, 1), Fraction(1), Fraction(1, 2)),
    (interval(1, 3), Fraction(2), Fraction(4)),
    (simplex(2), Fraction(1, 2), Fraction(1, 3)),
    (simplex(3), Fraction(1, 6), Fraction(1, 8)),
    (box(2), Fraction(1), Fraction(1)),
    (box(3), Fraction(1), Fraction(3, 2)),
    (QUAD, Fraction(5, 2), None),
])
def test_volume_and_cp_exact(P, vol, cp):
    v, c = volume_and_cp(P)
    assert v == vol
    if cp is not None:
        assert c == cp


@pytest.mark.parametrize("P", [QUAD, box(2), box(3), simplex(3)], ids=lambda P: P.name)
def test_retriangulation_invariance(P):
    ref = volume_and_cp(P, apex=0)
    for apex in range(1, len(P.vertices)):
        assert volume_and_cp(P, apex=apex) == ref


def test_quad_cp_matches_lattice_sum():
    # l_n / n^3 -> C_P; exact C_P checked against a Riemann sum of x + y
    _, cp = volume_and_cp(QUAD)
    n = 200
    pts = np.array(lattice_points(QUAD, n), dtype=float) / n
    assert abs(pts.sum() / n**2 - float(cp)) < 5e-2


def test_lattice_order_graded_lex():
    assert lattice_points(simplex(2), 1) == [(0, 0), (1, 0), (0, 1)]
    assert lattice_points(simplex(2), 2)[3:] == [(2, 0), (1, 1), (0, 2)]
    assert lattice_points(interval(1, 2), 2) == [(2,), (3,), (4,)]


@pytest.mark.parametrize("P", [b for b in iter_bodies()] + [QUAD], ids=lambda P: P.name)
def test_ehrhart_polynomial_fit(P):
    d = P.dim
    xs = list(range(1, d + 2))
    ys = [len(lattice_points(P, n)) for n in xs]
    counts = [len(lattice_points(P, n)) for n in range(1, d + 12)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    for n in range(d + 2, d + 12):
        assert lagrange_eval(xs, ys, n) == len(lattice_points(P, n))


@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=2), st.lists(st.floats(0, 2 * math.pi), min_size=2, max_size=2))
@settings(max_examples=60, deadline=None)
def test_hp_phase_invariance(radii, phases):
    for P in (simplex(2), box(2), QUAD):
        z = np.array(radii, dtype=complex)
        zr = z * np.exp(1j * np.array(phases))
        assert h_p_eval(P, zr) == pytest.approx(h_p_eval(P, z), abs=1e-12)


@given(st.lists(st.floats(1e-4, 1e4), min_size=2, max_size=2))
@settings(max_examples=60, deadline=None)
def test_hp_dominates_simplex_bound(radii):
    for P in (simplex(2), box(2), QUAD, box(2, Fraction(1, 2))):
        k = simplex_inclusion(P).k
        z = np.array(radii, dtype=complex)
        bound = max(max(0.0, math.log(r)) for r in radii) / k
        assert h_p_eval(P, z) >= bound - 1e-12


def test_inclusion_constants():
    assert simplex_inclusion(simplex(2)) == simplex_inclusion(simplex(3))
    assert (simplex_inclusion(simplex(2)).k, simplex_inclusion(simplex(2)).A) == (1, 1)
    assert (simplex_inclusion(box(2)).k, simplex_inclusion(box(2)).A) == (1, 2)
    assert simplex_inclusion(box(2, Fraction(1, 2))).k == 2
    assert simplex_inclusion(QUAD).A == 3
    assert not simplex_inclusion(interval(1, 2)).admissible


def test_hp_values():
    assert h_p_eval(interval(0, 1), [3.0]) == pytest.approx(math.log(3))
    assert h_p_eval(interval(0, 1), [0.5]) == 0.0
    assert h_p_eval(simplex(2), [2.0, 3.0]) == pytest.approx(math.log(3))
    assert h_p_eval(box(2), [2.0, 3.0]) == pytest.approx(math.log(6))
    assert h_p_eval(interval(1, 2), [0.0]) == -math.inf


def test_normalized_mass():
    assert normalized_mass(simplex(3)) == 1
    assert normalized_mass(box(2)) == 2
    assert normalized_mass(interval(0, 2)) == 2


@pytest.mark.parametrize("verts, facets, err", [
    ([(0, 0), (1, 0), (2, 0)], None, DegenerateBodyError),
    ([(-1,), (1,)], None, InvalidParameterError),
    ([(0,) * 4, (1, 0, 0, 0)], None, InvalidParameterError),
    ([(0, 0), (1, 0), (0, 1), (Fraction(1, 4), Fraction(1, 4))], None, InvalidParameterError),
    ([(0, 0), (1, 0), (0, 1)], [((1, 1), Fraction(1, 2))], InvalidParameterError),
])
def test_invalid_bodies(verts, facets, err):
    with pytest.raises(err):
        ConvexBody(verts, facets)


def test_missing_facets():
    P = ConvexBody([(0, 0), (1, 0), (0, 1)])
    with pytest.raises(MissingFacetsError):
        lattice_points(P, 2)


def test_parse_body_and_json_roundtrip(tmp_path):
    assert parse_body("simplex(3)") == simplex(3)
    assert parse_body("box(2,2)") == box(2, 2)
    assert parse_body("interval(0, 1)") == interval(0, 1)
    path = tmp_path / "quad.json"
    import json

    path.write_text(json.dumps(QUAD.to_json()))
    Q = parse_body(str(path))
    assert Q == QUAD and volume_and_cp(Q) == volume_and_cp(QUAD)
    path.write_text('{"vertices": [[0], [1]]}')
    with pytest.raises(ValidationError, match="schema"):
        parse_body(str(path))
    with pytest.raises(ValidationError):
        parse_body("simplex(x)")
    with pytest.raises(ValidationError):
        parse_body("no-such-file.json")


def test_contains_scaled():
    assert QUAD.contains((1, 2)) and not QUAD.contains((2, 1))
    assert QUAD.contains((2, 4), scale=2)
