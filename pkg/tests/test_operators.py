import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_chains.batteries import random_polynomial_form, standard_battery
from dirac_chains.chains import DiracChain, mass_norm
from dirac_chains.domains import Box
from dirac_chains.errors import DegenerateCellError, DomainError, ImageEscapeError, SimplicityError
from dirac_chains.exterior import MultiVector, mass
from dirac_chains.forms import FormField, d, interior, pullback
from dirac_chains.maps import MapField
from dirac_chains.norms import pairing
from dirac_chains.operators import (
    AffineCell,
    boundary_h,
    cartesian_wedge,
    cell_boundary,
    cell_boundary_chain,
    cell_chain,
    circle_chain,
    extrusion,
    interval_chain,
    multiply,
    polygon_chain,
    pushforward,
)
from oracles import line_integral, midpoint_rule


def e(n, *idx):
    return MultiVector.basis(n, *idx)


def random_chain(rng, n, k, terms=5, scale=1.0):
    pts = rng.random((terms, n)) * scale
    return DiracChain(n, k, pts, rng.standard_normal((terms, MultiVector.zero(n, k).coeffs.size)))


square = AffineCell.unit_cube(2)


# boundary


def test_boundary_of_square_pairs_like_the_line_integral():
    # counterclockwise line integral of x dy around the unit square
    pieces = [
        (lambda s: (s, 0.0), lambda s: (1.0, 0.0)),
        (lambda s: (1.0, s), lambda s: (0.0, 1.0)),
        (lambda s: (1 - s, 1.0), lambda s: (-1.0, 0.0)),
        (lambda s: (0.0, 1 - s), lambda s: (0.0, -1.0)),
    ]
    exact = sum(line_integral(lambda x, y: (0 * x, x), p, dp) for p, dp in pieces)
    assert exact == pytest.approx(1.0, abs=1e-12)
    for N, h in [(10, 1e-2), (50, 1e-3)]:
        got = pairing(boundary_h(cell_chain(square, N), h), FormField.parse("x dy", 2))
        assert abs(got - exact) <= 5 * (h + 1 / N ** 2)


def test_boundary_of_boundary_pairs_to_zero():
    a = cell_chain(AffineCell.unit_cube(3), 4)
    bb = boundary_h(boundary_h(a, 1e-3), 1e-3)
    for w in standard_battery(3, 1, 6):
        assert abs(pairing(bb, w)) <= 1e-6


def test_boundary_of_zero_chain_and_grade_zero():
    assert boundary_h(DiracChain.element((0.0, 0.0), 2.0)).is_zero()
    assert boundary_h(DiracChain.zero(2, 1)).is_zero()


def test_boundary_basis_formula():
    h = 0.5
    b = boundary_h(DiracChain.element((0.0, 0.0), e(2, 1, 2)), h)
    expected = (DiracChain.element((h, 0.0), e(2, 2)) - DiracChain.element((0.0, 0.0), e(2, 2))
                - DiracChain.element((0.0, h), e(2, 1)) + DiracChain.element((0.0, 0.0), e(2, 1))) * (1 / h)
    assert b.equals(expected, atol=1e-15)


def test_boundary_stays_in_domain_with_backward_steps():
    box = Box((0, 0), (1, 1))
    a = DiracChain.element((1.0, 1.0), e(2, 1, 2))
    b = boundary_h(a, 0.1, domain=box)
    assert np.all(box.contains(b.points))


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_stokes_residual_is_first_order_in_h(seed):
    rng = np.random.default_rng(seed)
    a = random_chain(rng, 2, 2, terms=3)
    w = random_polynomial_form(2, 1, rng)
    res = [abs(pairing(boundary_h(a, h), w) - pairing(a, d(w))) for h in (1e-2, 5e-3)]
    scale = max(1.0, mass_norm(a).upper)
    assert res[1] <= 0.6 * res[0] + 1e-9 * scale


# extrusion and multiplication


def test_extrusion_examples():
    p = (0.2, 0.4)
    assert extrusion(e(2, 1), DiracChain.element(p, e(2, 2))).equals(DiracChain.element(p, e(2, 1, 2)))
    assert extrusion(e(2, 1), DiracChain.element(p, e(2, 1))).is_zero()
    over = extrusion(e(2, 1, 2), DiracChain.element(p, e(2, 1)))
    assert over.is_zero() and over.degenerate
    with pytest.raises(SimplicityError):
        extrusion(MultiVector.from_dict(4, 2, {"1,2": 1, "3,4": 1}), DiracChain.zero(4, 0))


def test_adjunction_instance():
    a = DiracChain.element((0.1, 0.2), e(2, 2))
    vol = FormField.parse("dx^dy", 2)
    assert pairing(extrusion(e(2, 1), a), vol) == pairing(a, interior(e(2, 1), vol)) == 1.0


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_adjunction_on_random_instances(seed):
    rng = np.random.default_rng(seed)
    n = 3
    k, s = int(rng.integers(0, 2)), 1 + int(rng.integers(0, 2))
    beta = MultiVector.from_vectors(rng.standard_normal((s, n)))
    a = random_chain(rng, n, k)
    w = random_polynomial_form(n, k + s, rng)
    assert pairing(extrusion(beta, a), w) == pytest.approx(pairing(a, interior(beta, w)), abs=1e-12 * 100)


def test_extrusion_mass_bound():
    rng = np.random.default_rng(9)
    for _ in range(20):
        beta = MultiVector.from_vectors(rng.standard_normal((1, 4)))
        a = random_chain(rng, 4, 2)
        assert mass_norm(extrusion(beta, a)).upper <= mass(beta).upper * mass_norm(a).upper + 1e-9


def test_multiply_examples():
    a = DiracChain.element((2.0, 0.0), e(2, 2))
    assert multiply(FormField(2, 0, ["x"]), a).equals(DiracChain.element((2.0, 0.0), e(2, 2) * 2))
    assert multiply(FormField(2, 0, ["1"]), a).equals(a)
    assert multiply(FormField(2, 0, ["0"]), a).is_zero()
    with pytest.raises(DomainError):
        multiply(FormField(2, 0, ["x"], domain=Box((0, 0), (1, 1))), a)


def test_boundary_product_rule_in_pairing():
    # <d(fA) - f dA, w> = <A, f dw> - <A, d(f w)> = -<A, df ^ w>
    rng = np.random.default_rng(2)
    a = random_chain(rng, 2, 2, terms=4)
    f = FormField(2, 0, ["x*y + x"])
    w = FormField.parse("y dx + x^2 dy", 2)
    h = 1e-5
    lhs = pairing(boundary_h(multiply(f, a), h), w)
    rhs = pairing(multiply(f, boundary_h(a, h)), w)
    dfw = FormField(2, 2, [d(f).coefficients[0] * w.coefficients[1] - d(f).coefficients[1] * w.coefficients[0]])
    assert lhs - rhs == pytest.approx(-pairing(a, dfw), abs=1e-3)


# pushforward


def test_pushforward_examples():
    a = DiracChain.element((0.5, 0.5), e(2, 1, 2))
    assert pushforward(MapField.identity(2), a).equals(a)
    const = MapField(["1", "2"], ["x", "y"])
    assert pushforward(const, DiracChain.element((0.5, 0.5), e(2, 1))).is_zero()
    scale = MapField.linear([[2, 0], [0, 3]])
    assert pushforward(scale, a).equals(DiracChain.element((1.0, 1.5), e(2, 1, 2) * 6))


def test_pushforward_image_escape():
    f = MapField(["2*x"], ["x"], codomain=Box((0,), (1,)))
    with pytest.raises(ImageEscapeError):
        pushforward(f, DiracChain.element((0.9,), e(1, 1)))


def test_pushforward_duality_and_boundary_commutation():
    f = MapField(["x + y^2", "sin(x) + y"], ["x", "y"])
    rng = np.random.default_rng(6)
    a = random_chain(rng, 2, 1)
    w = FormField.parse("x dy + y^2 dx", 2)
    assert pairing(pushforward(f, a), w) == pytest.approx(pairing(a, pullback(f, w)), abs=1e-12)
    b = random_chain(rng, 2, 2)
    gaps = []
    for h in (1e-3, 1e-4):
        gaps.append(abs(pairing(pushforward(f, boundary_h(b, h)), w) - pairing(boundary_h(pushforward(f, b), h), w)))
    assert gaps[1] < 0.2 * gaps[0] + 1e-9


# Cartesian wedge


def test_cartesian_wedge_examples():
    s = DiracChain.element((0.5,), 1.0)
    a = DiracChain.element((1.0, 2.0), e(2, 1))
    assert cartesian_wedge(s, a).equals(DiracChain.element((0.5, 1.0, 2.0), e(3, 2)))
    t = DiracChain.element((0.0,), e(1, 1))
    assert cartesian_wedge(t, a).equals(DiracChain.element((0.0, 1.0, 2.0), e(3, 1, 2)))


def test_cartesian_wedge_bilinear_expansion():
    rng = np.random.default_rng(8)
    p = random_chain(rng, 2, 1, terms=2)
    q = random_chain(rng, 1, 1, terms=2)
    total = DiracChain.zero(3, 2)
    for pp, pa in p.terms:
        for qp, qa in q.terms:
            # e_i x e_1' -> e_i ^ e_3 in R^3
            coeffs = {f"{i + 1},3": pa.coeffs[i] * qa.coeffs[0] for i in range(2)}
            total = total + DiracChain.element(pp + qp, MultiVector.from_dict(3, 2, coeffs))
    assert cartesian_wedge(p, q).equals(total, atol=1e-14)


def test_cartesian_wedge_mass_bound_and_leibniz():
    rng = np.random.default_rng(10)
    j = random_chain(rng, 1, 1, terms=3)
    k = random_chain(rng, 2, 1, terms=3)
    assert mass_norm(cartesian_wedge(j, k)).upper <= mass_norm(j).upper * mass_norm(k).upper + 1e-12
    w = FormField(3, 1, ["x*y", "z^2", "x + y*z"])
    h = 1e-5
    lhs = pairing(boundary_h(cartesian_wedge(j, k), h), w)
    rhs = pairing(cartesian_wedge(boundary_h(j, h), k), w) - pairing(cartesian_wedge(j, boundary_h(k, h)), w)
    assert lhs == pytest.approx(rhs, abs=1e-3)


# intervals and cells


def test_interval_pairings():
    assert pairing(interval_chain(7), FormField(1, 1, ["1"], variables=["t"])) == pytest.approx(1.0, abs=1e-15)
    assert pairing(interval_chain(100), FormField(1, 1, ["t"], variables=["t"])) == pytest.approx(0.5, abs=1e-14)
    for N in (10, 40):
        got = pairing(interval_chain(N), FormField(1, 1, ["t^2"], variables=["t"]))
        assert got == pytest.approx(midpoint_rule(lambda t: t * t, 0, 1, N), abs=1e-14)
        assert abs(got - 1 / 3) == pytest.approx(1 / (12 * N ** 2), rel=1e-9)


def test_cell_pairings():
    vol = FormField.parse("dx^dy", 2)
    for N in (1, 3, 8):
        assert pairing(cell_chain(square, N), vol) == pytest.approx(1.0, abs=1e-14)
    assert pairing(cell_chain(square, 10), FormField.parse("x dx^dy", 2)) == pytest.approx(0.5, abs=1e-14)


def test_cell_boundary_faces():
    faces = cell_boundary(AffineCell.unit_cube(1))
    assert [(s, f.vertex) for s, f in faces] == [(1, (1.0,)), (-1, (0.0,))]
    with pytest.raises(DegenerateCellError):
        cell_chain(AffineCell((0, 0), ((1, 1), (2, 2))), 3)


def test_classical_stokes_on_represented_faces():
    cell = AffineCell((0.2, -0.1, 0.0), ((1.0, 0.2, 0.0), (0.0, 1.0, 0.3), (0.1, 0.0, 0.8)))
    w = FormField(3, 2, ["x*y", "sin(z)", "x^2"])
    N = 40
    lhs = pairing(cell_boundary_chain(cell, N), w)
    rhs = pairing(cell_chain(cell, N), d(w))
    assert lhs == pytest.approx(rhs, abs=5e-3)


def test_polygon_and_circle_chains():
    tri = polygon_chain([(0, 0), (1, 0), (0, 1)])
    assert pairing(tri, FormField.parse("x dy", 2)) == pytest.approx(0.5)
    circ = circle_chain(256)
    area = 0.5 * 256 * np.sin(2 * np.pi / 256)
    assert pairing(circ, FormField.parse("x dy", 2)) == pytest.approx(area, abs=1e-13)
