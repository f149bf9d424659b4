import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_chains.errors import DegenerateGradeError, DimensionError, GradeError
from dirac_chains.exterior import (
    MultiVector,
    compound_matrix,
    hodge_star,
    inner,
    is_simple,
    mass,
    mass_certificate,
    wedge,
)
from oracles import antisymmetric_tensor, wedge_dicts, wedge_of_vectors

coords = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def grade_and_vectors(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(0, n))
    vecs = [draw(st.lists(coords, min_size=n, max_size=n)) for _ in range(k)]
    return n, k, vecs


@st.composite
def multivectors(draw, n=None, k=None):
    n = n or draw(st.integers(1, 5))
    k = draw(st.integers(0, n)) if k is None else k
    c = draw(st.lists(coords, min_size=math.comb(n, k), max_size=math.comb(n, k)))
    return MultiVector(n, k, c)


def as_dict(mv):
    return {s: c for s, c in zip(itertools.combinations(range(mv.n), mv.k), mv.coeffs)}


# basis and construction


def test_basis_ordering_is_lexicographic():
    e = MultiVector.basis(4, 1, 3)
    assert e.to_dict() == {"1,3": 1.0}
    assert MultiVector.basis(4, 3, 1).to_dict() == {"1,3": -1.0}
    assert MultiVector.basis(3, 2, 2).is_zero()


def test_from_dict_accepts_unsorted_keys():
    mv = MultiVector.from_dict(3, 2, {"2,1": 2.0, (1, 3): 1.0})
    assert mv.to_dict() == {"1,2": -2.0, "1,3": 1.0}


def test_grade_out_of_range_raises():
    with pytest.raises(DegenerateGradeError):
        MultiVector(2, 3, [])
    with pytest.raises(DimensionError):
        MultiVector(3, 1, [1.0, 2.0])


@given(grade_and_vectors())
@settings(max_examples=200, deadline=None)
def test_from_vectors_matches_permutation_expansion(data):
    n, k, vecs = data
    mv = MultiVector.from_vectors(vecs, n=n)
    np.testing.assert_allclose(mv.coeffs, wedge_of_vectors(vecs, n), atol=1e-9)


def test_compound_matrix_of_product_is_product_of_compounds():
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal((4, 5)), rng.standard_normal((5, 3))
    for k in range(0, 4):
        np.testing.assert_allclose(compound_matrix(a @ b, k), compound_matrix(a, k) @ compound_matrix(b, k),
                                   atol=1e-10)


# wedge


def test_wedge_examples():
    e1, e2 = MultiVector.basis(3, 1), MultiVector.basis(3, 2)
    assert (e1 ^ e2).to_dict() == {"1,2": 1.0}
    assert (e2 ^ e1).to_dict() == {"1,2": -1.0}
    assert (e1 ^ e1).is_zero()


def test_wedge_overflow_is_signalled():
    with pytest.raises(DegenerateGradeError):
        wedge(MultiVector.basis(2, 1, 2), MultiVector.basis(2, 1))
    with pytest.raises(DimensionError):
        wedge(MultiVector.basis(2, 1), MultiVector.basis(3, 1))


@given(st.data())
@settings(max_examples=150, deadline=None)
def test_wedge_matches_dictionary_oracle(data):
    n = data.draw(st.integers(1, 5))
    k = data.draw(st.integers(0, n))
    l = data.draw(st.integers(0, n - k))
    a = data.draw(multivectors(n, k))
    b = data.draw(multivectors(n, l))
    ref = wedge_dicts(as_dict(a), as_dict(b))
    got = as_dict(a ^ b)
    for key in got:
        assert got[key] == pytest.approx(ref.get(key, 0.0), abs=1e-9)


@given(st.data())
@settings(max_examples=100, deadline=None)
def test_wedge_graded_commutativity_and_associativity(data):
    n = data.draw(st.integers(2, 5))
    k = data.draw(st.integers(0, n))
    l = data.draw(st.integers(0, n - k))
    m = data.draw(st.integers(0, n - k - l))
    a, b, c = data.draw(multivectors(n, k)), data.draw(multivectors(n, l)), data.draw(multivectors(n, m))
    np.testing.assert_allclose((a ^ b).coeffs, (-1) ** (k * l) * (b ^ a).coeffs, atol=1e-9)
    np.testing.assert_allclose(((a ^ b) ^ c).coeffs, (a ^ (b ^ c)).coeffs, atol=1e-8)


# inner product and Hodge star


def test_gram_determinant_matches_inner():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 6))
        k = int(rng.integers(0, n + 1))
        u, v = rng.standard_normal((k, n)), rng.standard_normal((k, n))
        lhs = inner(MultiVector.from_vectors(u, n=n), MultiVector.from_vectors(v, n=n))
        rhs = np.linalg.det(u @ v.T) if k else 1.0
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_inner_matches_tensor_contraction():
    # <a, b> on the basis equals the full tensor contraction divided by k!
    rng = np.random.default_rng(8)
    n, k = 4, 2
    a, b = rng.standard_normal(6), rng.standard_normal(6)
    ta, tb = antisymmetric_tensor(a, n, k), antisymmetric_tensor(b, n, k)
    assert inner(MultiVector(n, k, a), MultiVector(n, k, b)) == pytest.approx(np.sum(ta * tb) / 2)


def test_hodge_star_examples():
    assert hodge_star(MultiVector.basis(3, 1)).to_dict() == {"2,3": 1.0}
    assert hodge_star(MultiVector.basis(3, 2)).to_dict() == {"1,3": -1.0}
    assert hodge_star(MultiVector.basis(4, 1, 2)).to_dict() == {"3,4": 1.0}


@given(multivectors())
@settings(max_examples=100, deadline=None)
def test_hodge_star_is_an_isometry_with_volume_identity(a):
    s = hodge_star(a)
    assert s.norm() == pytest.approx(a.norm(), abs=1e-9)
    if a.k < a.n:
        vol = wedge(a, s)
        assert vol.coeffs[0] == pytest.approx(a.norm() ** 2, abs=1e-8)


# simplicity and mass


def test_is_simple_examples():
    assert is_simple(MultiVector.from_dict(4, 2, {"1,2": 1.0}))
    assert not is_simple(MultiVector.from_dict(4, 2, {"1,2": 1.0, "3,4": 1.0}))
    assert is_simple(MultiVector.from_dict(3, 2, {"1,2": 1.0, "2,3": 2.0}))  # every bivector in R^3
    rng = np.random.default_rng(2)
    blade = MultiVector.from_vectors(rng.standard_normal((3, 6)))
    assert is_simple(blade)
    assert not is_simple(blade + MultiVector.basis(6, 4, 5, 6) * 0.7 + MultiVector.basis(6, 1, 2, 4))


@given(grade_and_vectors())
@settings(max_examples=100, deadline=None)
def test_wedges_of_vectors_are_simple(data):
    n, k, vecs = data
    mv = MultiVector.from_vectors(vecs, n=n)
    assert is_simple(mv, atol=1e-7)


def test_mass_of_two_orthogonal_planes():
    est = mass(MultiVector.from_dict(4, 2, {"1,2": 1.0, "3,4": 1.0}))
    assert est.lower == pytest.approx(2.0, abs=1e-9)
    assert est.upper == pytest.approx(2.0, abs=1e-9)


def test_mass_of_rotated_calibrated_bivector():
    # R(e12 + 3 e34) with a random rotation R: mass 4, Euclidean norm sqrt(10)
    rng = np.random.default_rng(11)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    a = MultiVector.from_vectors([q[:, 0], q[:, 1]]) + 3 * MultiVector.from_vectors([q[:, 2], q[:, 3]])
    est = mass(a)
    assert est.lower == pytest.approx(4.0, abs=1e-9)
    assert est.upper == pytest.approx(4.0, abs=1e-9)
    assert a.norm() == pytest.approx(math.sqrt(10))


def test_mass_in_codimension_two_uses_the_dual():
    # *(e12 + e34) in R^4 is e34 + e12; in R^5 grade 3 pairs with grade 2
    a = MultiVector.from_dict(5, 3, {"1,2,5": 1.0, "3,4,5": 2.0})
    est = mass(a)
    assert est.lower == pytest.approx(3.0, abs=1e-9)
    assert est.upper == pytest.approx(3.0, abs=1e-9)


def test_mass_certificate_pieces_and_witness():
    a = MultiVector.from_dict(4, 2, {"1,2": 2.0, "3,4": -1.0, "1,3": 0.5})
    cert = mass_certificate(a)
    total = cert.residual
    for p in cert.pieces:
        assert is_simple(p)
        total = total + p
    np.testing.assert_allclose(total.coeffs, a.coeffs, atol=1e-12)
    assert cert.witness is not None
    assert abs(inner(cert.witness, a)) == pytest.approx(cert.estimate.lower, rel=1e-9)
    assert cert.estimate.upper >= cert.estimate.lower - 1e-12


@given(multivectors())
@settings(max_examples=60, deadline=None)
def test_mass_bracket_contains_euclidean_and_l1_bounds(a):
    est = mass(a)
    assert est.lower <= est.upper + 1e-9
    assert est.lower >= a.norm() - 1e-9
    assert est.upper <= float(np.sum(np.abs(a.coeffs))) + 1e-9


def test_mass_of_simple_is_euclidean():
    rng = np.random.default_rng(5)
    a = MultiVector.from_vectors(rng.standard_normal((3, 6)))
    est = mass(a)
    assert est.exact
    assert est.upper == pytest.approx(a.norm())


def test_mass_search_brackets_non_simple_grade_three():
    a = MultiVector.basis(6, 1, 2, 3) + MultiVector.basis(6, 4, 5, 6)
    est = mass(a)
    # two orthogonal unit 3-planes: the mass is 2
    assert est.lower == pytest.approx(math.sqrt(2))
    assert est.upper == pytest.approx(2.0, abs=1e-9)


def test_grade_mismatch_in_addition():
    with pytest.raises(GradeError):
        MultiVector.basis(3, 1) + MultiVector.basis(3, 1, 2)
