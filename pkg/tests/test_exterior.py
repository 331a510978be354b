import numpy as np
import pytest
from hypothesis import given, strategies as st

from g2lab.exterior import (
    ContractViolation,
    FormTriple,
    FrameAlgebra,
    KForm,
    SDependentScalar,
    SForm,
    adjugate,
    barwedge,
    compound,
    det3,
    exterior_derivative,
    from_natural_flat,
    hodge_star,
    inner,
    interior,
    lie_derivative_linear,
    natural_flat,
    pullback,
    volume_form,
    wedge,
    wedge_square,
)
from g2lab.g2 import standard_phi, standard_star_phi

from conftest import kforms, random_form, random_spd


# -- construction and invariants -----------------------------------------------


def test_basis_ordering_sets_sign():
    assert KForm.basis(3, 2, 1) == -KForm.basis(3, 1, 2)
    assert KForm.basis(3, 1, 1).is_zero()
    assert KForm.basis(4, 3, 1, 2).coefficient(1, 2, 3) == 1.0


def test_prune_threshold_removes_tiny_coefficients():
    c = np.zeros(8)
    c[0b011] = 1e-15
    c[0b101] = 2.0
    a = KForm(3, 2, c)
    assert a.terms == {(1, 3): 2.0}


def test_wrong_degree_coefficient_rejected():
    c = np.zeros(8)
    c[0b111] = 1.0
    with pytest.raises(ContractViolation):
        KForm(3, 2, c)


def test_equality_is_tolerance_based():
    a = KForm.basis(3, 1)
    b = a + 5e-11 * KForm.basis(3, 2)
    assert a == b
    assert a != a + 1e-8 * KForm.basis(3, 2)
    assert a != KForm.basis(4, 1)


def test_dimension_mismatch_raises():
    with pytest.raises(ContractViolation):
        wedge(KForm.basis(3, 1), KForm.basis(4, 1))
    with pytest.raises(ContractViolation):
        wedge(KForm.basis(2, 1, 2), KForm.basis(2, 1))
    with pytest.raises(ContractViolation):
        KForm(9, 1, np.zeros(512))


# -- wedge ---------------------------------------------------------------------


def test_wedge_basis_cases():
    e1, e2 = KForm.basis(3, 1), KForm.basis(3, 2)
    assert e1 * e2 == KForm.basis(3, 1, 2)
    assert (e1 * e1).is_zero()


def test_phi_wedge_star_phi_is_seven_vol():
    top = wedge(standard_phi(), standard_star_phi())
    assert top.terms == {(1, 2, 3, 4, 5, 6, 7): 7.0}


@given(kforms(5), kforms(5), kforms(5))
def test_wedge_associative(a, b, c):
    if a.degree + b.degree + c.degree > 5:
        return
    lhs = wedge(wedge(a, b), c)
    rhs = wedge(a, wedge(b, c))
    assert lhs.allclose(rhs, 1e-10 * (1 + lhs.max_abs()))


@given(kforms(6), kforms(6))
def test_wedge_graded_commutative(a, b):
    if a.degree + b.degree > 6:
        return
    sign = (-1) ** (a.degree * b.degree)
    lhs, rhs = wedge(a, b), sign * wedge(b, a)
    assert lhs.allclose(rhs, 1e-12 * (1 + lhs.max_abs()))


@given(kforms(5, 1), kforms(5), kforms(5))
def test_wedge_bilinear(v, a, b):
    if a.degree != b.degree or a.degree + 1 > 5:
        return
    lhs = wedge(v, 2.0 * a - b)
    rhs = 2.0 * wedge(v, a) - wedge(v, b)
    assert lhs.allclose(rhs, 1e-10 * (1 + lhs.max_abs()))


# -- interior ---------------------------------------------------------------------


def test_interior_basis_and_phi():
    E1 = np.eye(3)[0]
    assert interior(E1, KForm.basis(3, 1, 2)) == KForm.basis(3, 2)
    E1 = np.eye(7)[0]
    expected = KForm.basis(7, 2, 3) - KForm.basis(7, 4, 5) - KForm.basis(7, 6, 7)
    assert interior(E1, standard_phi()) == expected


def test_interior_of_function_is_zero():
    assert interior(np.ones(3), KForm.scalar(3, 2.0)).is_zero()


@given(kforms(6), st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_interior_twice_vanishes(a, v):
    assert interior(v, interior(v, a)).max_abs() < 1e-12 * (1 + a.max_abs())


@given(kforms(6), kforms(6), st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_interior_is_antiderivation(a, b, v):
    if a.degree + b.degree > 6 or a.degree == 0:
        return
    lhs = interior(v, wedge(a, b))
    rhs = wedge(interior(v, a), b) + (-1) ** a.degree * wedge(a, interior(v, b))
    assert lhs.allclose(rhs, 1e-10 * (1 + lhs.max_abs()))


def test_evaluate_matches_determinant(rng):
    vecs = rng.normal(size=(3, 5))
    a = KForm.basis(5, 1, 3, 4)
    assert np.isclose(a.evaluate(*vecs), np.linalg.det(vecs[:, [0, 2, 3]]))


# -- Hodge star -------------------------------------------------------------------


def test_star_one_is_volume():
    assert hodge_star(KForm.scalar(7, 1.0)) == KForm.basis(7, 1, 2, 3, 4, 5, 6, 7)


def test_star_phi_is_standard_four_form():
    assert (hodge_star(standard_phi()) - standard_star_phi()).max_abs() == 0.0


@pytest.mark.parametrize("degree", range(8))
def test_star_star_identity_in_dim_seven(degree, rng):
    g = random_spd(rng, 7)
    a = random_form(rng, 7, degree)
    back = hodge_star(hodge_star(a, g), g)
    assert back.allclose(a, 1e-10)


@pytest.mark.parametrize("dim,degree", [(4, 2), (6, 3), (8, 4), (8, 3)])
def test_star_star_sign_in_even_dim(dim, degree, rng):
    a = random_form(rng, dim, degree)
    back = hodge_star(hodge_star(a))
    assert back.allclose((-1) ** (degree * (dim - degree)) * a, 1e-12)


def test_star_defining_identity(rng):
    g = random_spd(rng, 5)
    vol = volume_form(5, g)
    for degree in range(6):
        a, b = random_form(rng, 5, degree), random_form(rng, 5, degree)
        lhs = wedge(a, hodge_star(b, g))
        assert lhs.allclose(inner(a, b, g) * vol, 1e-10)


def test_star_orientation_flips_sign():
    a = KForm.basis(3, 1)
    assert hodge_star(a, np.eye(3), -1) == -hodge_star(a)


def test_star_rejects_indefinite_metric():
    with pytest.raises(ContractViolation):
        hodge_star(KForm.basis(2, 1), np.diag([1.0, -1.0]))


def test_compound_of_product_is_product_of_compounds(rng):
    A, B = rng.normal(size=(5, 5)), rng.normal(size=(5, 5))
    for k in range(6):
        np.testing.assert_allclose(compound(A @ B, k), compound(A, k) @ compound(B, k), atol=1e-10)


# -- frames and d -----------------------------------------------------------------


@pytest.mark.parametrize(
    "lam", [(0, 0, 0), (1, 0, 0), (1, -1, 0), (1, 1, 0), (1, 1, 1), (1, 1, -1)]
)
def test_bianchi_frames_satisfy_d_squared(lam):
    frame = FrameAlgebra.bianchi(lam)
    assert frame.check_d_squared() < 1e-12
    for degree in range(3):
        for idx in [(1,), (2,), (3,), (1, 2), (2, 3), (1, 3)][: 3 if degree == 1 else 6]:
            if len(idx) != degree:
                continue
            a = KForm.basis(3, *idx)
            assert exterior_derivative(exterior_derivative(a, frame), frame).is_zero()


def test_su2_frame_differentials():
    frame = FrameAlgebra.bianchi((1, 1, 1))
    assert exterior_derivative(KForm.basis(3, 1), frame) == KForm.basis(3, 2, 3)
    assert exterior_derivative(KForm.basis(3, 2), frame) == KForm.basis(3, 3, 1)


def test_leibniz_rule(rng):
    # a nilpotent 5-dimensional Lie algebra: de^4 = e^12, de^5 = e^13
    d = [KForm.zero(5, 2)] * 3 + [KForm.basis(5, 1, 2), KForm.basis(5, 1, 3)]
    frame = FrameAlgebra(5, tuple(d))
    assert frame.check_d_squared() == 0.0
    for p in range(4):
        for q in range(4 - p):
            a, b = random_form(rng, 5, p), random_form(rng, 5, q)
            lhs = exterior_derivative(wedge(a, b), frame)
            rhs = wedge(exterior_derivative(a, frame), b) + (-1) ** p * wedge(
                a, exterior_derivative(b, frame)
            )
            assert lhs.allclose(rhs, 1e-10)


def test_s_dependent_coefficients_contribute_ds():
    frame = FrameAlgebra(2, (KForm.zero(2, 2), KForm.zero(2, 2)), s_index=1)
    a = SForm.from_terms(2, {(2,): SDependentScalar(3.0, 5.0)})
    assert exterior_derivative(a, frame) == 5.0 * KForm.basis(2, 1, 2)


def test_frame_rejects_nonclosed_ds():
    with pytest.raises(ContractViolation):
        FrameAlgebra(3, (KForm.basis(3, 2, 3), KForm.zero(3, 2), KForm.zero(3, 2)), s_index=1)


def test_sdependent_scalar_must_be_finite():
    with pytest.raises(ContractViolation):
        SDependentScalar(float("nan"))


# -- pullback and Lie derivative ----------------------------------------------------


def test_pullback_is_functorial(rng):
    a = random_form(rng, 6, 3)
    M, N = rng.normal(size=(6, 5)), rng.normal(size=(5, 4))
    lhs = pullback(pullback(a, M), N)
    assert lhs.allclose(pullback(a, M @ N), 1e-10)


def test_pullback_respects_wedge(rng):
    a, b = random_form(rng, 5, 2), random_form(rng, 5, 1)
    M = rng.normal(size=(5, 5))
    assert pullback(wedge(a, b), M).allclose(wedge(pullback(a, M), pullback(b, M)), 1e-10)


def test_lie_derivative_is_flow_derivative(rng):
    A = rng.normal(size=(4, 4))
    a = random_form(rng, 4, 2)
    t = 1e-6
    # flow of V = A x is exp(tA); differentiate the pullback numerically
    from_exp = lambda t: pullback(a, np.eye(4) + t * A + 0.5 * t * t * A @ A)
    fd = (from_exp(t) - from_exp(-t)) * (1.0 / (2 * t))
    assert fd.allclose(lie_derivative_linear(A, a), 1e-6)


# -- vector-valued calculus ---------------------------------------------------------


def test_wedge_square_components():
    e = FormTriple.of(*(KForm.basis(3, i) for i in (1, 2, 3)))
    sq = wedge_square(e)
    assert sq[0] == KForm.basis(3, 2, 3)
    assert sq[1] == KForm.basis(3, 3, 1)
    assert sq[2] == KForm.basis(3, 1, 2)


def test_barwedge_antisymmetry_for_one_forms(rng):
    g = FormTriple.of(*(random_form(rng, 4, 1) for _ in range(3)))
    d = FormTriple.of(*(random_form(rng, 4, 1) for _ in range(3)))
    # (γ ⊼ δ)_i = γ_j ∧ δ_k, (δ ⊼ γ)_i = δ_j ∧ γ_k = -γ_k ∧ δ_j
    lhs = barwedge(g, d) + barwedge(d, g)
    for i, (j, k) in enumerate(((1, 2), (2, 0), (0, 1))):
        expected = wedge(g[j], d[k]) - wedge(g[k], d[j])
        assert lhs[i].allclose(expected, 1e-12)


def test_matrix_action_on_wedge_square(rng):
    e = FormTriple.of(*(KForm.basis(3, i) for i in (1, 2, 3)))
    M = rng.normal(size=(3, 3))
    # (M e) ⊼ (M e) = adj(M)^T (e ⊼ e)
    assert wedge_square(M @ e).allclose(adjugate(M).T @ wedge_square(e), 1e-12)


def test_natural_flat_round_trip(rng):
    v = rng.normal(size=3)
    np.testing.assert_allclose(natural_flat(from_natural_flat(v)), v)
    S = random_spd(rng)
    assert np.all(natural_flat(S) == 0.0)


def test_adjugate_identity(rng):
    for n in (2, 3, 4):
        H = rng.normal(size=(n, n))
        np.testing.assert_allclose(H @ adjugate(H), np.linalg.det(H) * np.eye(n), atol=1e-12)
    H = rng.normal(size=(3, 3))
    assert np.isclose(det3(H), np.linalg.det(H))


def test_formtriple_rejects_mixed_degrees():
    with pytest.raises(ContractViolation):
        FormTriple.of(KForm.basis(3, 1), KForm.basis(3, 1, 2), KForm.basis(3, 3))
