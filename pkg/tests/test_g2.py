import numpy as np
import pytest

from g2lab.exterior import FrameAlgebra, KForm, hodge_star, interior, norm, pullback, wedge
from g2lab.g2 import (
    CollapsedOrbit,
    DegeneratePlane,
    G2Structure,
    LocalFrameData,
    NotAG2Form,
    associativity_residual,
    cross_and_associative,
    local_invariant_forms,
    local_invariant_forms_closed,
    metric_from_three_form,
    multi_moment,
    nearly_parallel_residual,
    standard_g2,
    standard_phi,
    standard_star_phi,
)


def test_standard_phi_has_seven_unit_terms():
    terms = standard_phi().terms
    assert len(terms) == 7
    assert set(terms.values()) == {1.0, -1.0}
    assert terms[(1, 2, 3)] == 1.0


def test_metric_of_standard_phi_is_identity():
    g, vol = metric_from_three_form(standard_phi())
    np.testing.assert_allclose(g, np.eye(7), atol=1e-12)
    assert vol.terms == pytest.approx({(1, 2, 3, 4, 5, 6, 7): 1.0}, abs=1e-12)


def test_metric_recovery_is_equivariant(rng):
    for _ in range(20):
        A = rng.normal(size=(7, 7)) + 3 * np.eye(7)
        phi = pullback(standard_phi(), A)
        g, vol = metric_from_three_form(phi)
        np.testing.assert_allclose(g, A.T @ A, rtol=1e-10, atol=1e-10)
        assert np.isclose(vol.array[-1], np.linalg.det(A), rtol=1e-10)


def test_negatively_oriented_phi():
    P = np.diag([1, 1, 1, 1, 1, 1, -1.0])
    s = G2Structure(pullback(standard_phi(), P))
    np.testing.assert_allclose(s.metric, np.eye(7), atol=1e-12)
    assert s.orientation == -1
    # φ ∧ ⋆φ = 7 vol holds in either orientation
    assert wedge(s.phi, s.star_phi).allclose(7.0 * s.volume, 1e-12)


def test_degenerate_three_form_rejected():
    with pytest.raises(NotAG2Form):
        metric_from_three_form(KForm.basis(7, 1, 2, 3))
    with pytest.raises(NotAG2Form):
        metric_from_three_form(KForm.basis(7, 1, 2, 3) + KForm.basis(7, 4, 5, 6))


def test_star_phi_of_structure():
    s = standard_g2()
    assert (s.star_phi - standard_star_phi()).max_abs() < 1e-14
    assert np.isclose(s.norm(s.phi), np.sqrt(7.0))


def test_cross_product_properties(rng):
    s = standard_g2()
    for _ in range(50):
        x, y = rng.normal(size=7), rng.normal(size=7)
        w = s.cross(x, y)
        assert abs(w @ x) < 1e-12 and abs(w @ y) < 1e-12
        assert np.isclose(w @ w, (x @ x) * (y @ y) - (x @ y) ** 2)
    E = np.eye(7)
    np.testing.assert_allclose(s.cross(E[0], E[1]), E[2])


def test_associative_planes():
    s = standard_g2()
    E = np.eye(7)
    assert s.is_associative(E[0], E[1], E[2])
    assert s.is_associative(E[0], E[3], E[4])
    assert not s.is_associative(E[0], E[1], E[3])
    assert associativity_residual(s, E[0], E[1], E[3]) == pytest.approx(1.0)
    out = cross_and_associative(E[0], E[1], E[2], s)
    assert out["is_associative"]


def test_degenerate_plane_raises():
    E = np.eye(7)
    with pytest.raises(DegeneratePlane):
        standard_g2().is_associative(E[0], E[1], E[0] + E[1])


def test_multi_moment_standard():
    E = np.eye(7)
    out = multi_moment(standard_g2(), E[0], E[1], E[2])
    assert out["nu"] == 1.0
    # ⋆φ(E1,E2,E3,·) vanishes: no ⋆φ term contains e^123
    assert out["dnu_contraction"].is_zero()


def test_nearly_parallel_residual_of_flat_phi():
    s = G2Structure(standard_phi(), FrameAlgebra.abelian(7))
    assert nearly_parallel_residual(s) == pytest.approx(4.0 * np.sqrt(7.0))


# -- local normal form -----------------------------------------------------------


def test_local_normal_form_scalars(rng):
    s = standard_g2()
    e7 = KForm.basis(7, 7)
    for _ in range(200):
        d = LocalFrameData.random(rng)
        U = d.U
        mm = multi_moment(s, *U)
        assert np.isclose(mm["nu"], d.p * d.q2 * d.r3, atol=1e-11)
        assert mm["dnu_contraction"].allclose(4 * d.p * d.q2 * d.r4 * e7, 1e-11)
        assert np.isclose(np.linalg.det(U @ U.T), d.h, rtol=1e-11)
        rho = d.h - mm["nu"] ** 2
        assert np.isclose(rho, norm(mm["dnu_contraction"]) ** 2 / 16.0, atol=1e-11 * max(1, d.h))


def test_local_invariant_forms_match_closed_expressions(rng):
    for _ in range(100):
        d = LocalFrameData.random(rng)
        direct = local_invariant_forms(d)
        closed = local_invariant_forms_closed(d)
        assert direct["theta"].allclose(closed["theta"], 1e-10)
        assert direct["alpha"].allclose(closed["alpha"], 1e-10)


def test_theta_is_dual_to_u(rng):
    d = LocalFrameData.random(rng)
    theta = local_invariant_forms(d)["theta"]
    M = np.array([[theta[i].evaluate(d.U[j]) for j in range(3)] for i in range(3)])
    np.testing.assert_allclose(M, np.eye(3), atol=1e-12)


def test_alpha_annihilates_orbit(rng):
    d = LocalFrameData.random(rng)
    alpha = local_invariant_forms(d)["alpha"]
    for a in alpha:
        for u in d.U:
            assert abs(a.evaluate(u)) < 1e-12


def test_collapsed_orbit_detected():
    d = LocalFrameData(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(CollapsedOrbit):
        local_invariant_forms(d)


def test_hodge_star_of_contraction_identity(rng):
    # X ⌟ ⋆φ = ⋆(φ ∧ X^♭) for the standard structure
    phi, sphi = standard_phi(), standard_star_phi()
    X = rng.normal(size=7)
    lhs = interior(X, sphi)
    rhs = hodge_star(wedge(phi, KForm.one_form(7, X)))
    assert lhs.allclose(rhs, 1e-12)
