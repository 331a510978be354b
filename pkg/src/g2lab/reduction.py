"""Reduced data on the three-dimensional torus quotient and its lift back to a
seven-dimensional G2 structure.

Base data is left-invariant on a three-dimensional Lie group in diagonal
Bianchi form ``d e^i = λ_i e^{jk}``; the coframe is ``α = U e`` and the metric
data is a symmetric positive-definite ``H``.  The lift lives on the frame
``(ds, θ_1, θ_2, θ_3, e^1, e^2, e^3)`` (generators 1..7).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exterior import (
    ContractViolation,
    FormTriple,
    FrameAlgebra,
    KForm,
    adjugate,
    det3,
    exterior_derivative,
    hodge_star,
    norm,
    wedge,
    wedge_square,
)
from .g2 import metric_from_three_form

SYMMETRY_TOL = 1e-10
D_SQUARED_TOL = 1e-8
ASSEMBLY_TOL = 1e-9


class OutsideRegularRegime(ValueError):
    pass


class InconsistentConnection(ValueError):
    pass


# -- base and invariant data -----------------------------------------------------


@dataclass(frozen=True)
class BaseGeometry:
    """Diagonal Bianchi frame with ``d e^i = lam_i e^{jk}``."""

    lam: tuple = (0.0, 0.0, 0.0)
    orientation: int = 1

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam)
        if len(lam) != 3:
            raise ContractViolation("a Bianchi base has three structure constants")
        object.__setattr__(self, "lam", lam)

    @property
    def frame(self) -> FrameAlgebra:
        return _bianchi_frame(self.lam)

    @property
    def e(self) -> FormTriple:
        return FormTriple.of(*(KForm.basis(3, i) for i in (1, 2, 3)))


_FRAMES: dict = {}


def _bianchi_frame(lam) -> FrameAlgebra:
    frame = _FRAMES.get(lam)
    if frame is None:
        frame = _FRAMES[lam] = FrameAlgebra.bianchi(lam)
    return frame


@dataclass(frozen=True, eq=False)
class InvariantData:
    """``(s, U, H)`` over a Bianchi base: ``α = U e``, ``h = det H``, ``ρ = h - s²``."""

    s: float
    U: np.ndarray
    H: np.ndarray
    base: BaseGeometry = field(default_factory=BaseGeometry)

    def __post_init__(self):
        U = np.array(self.U, dtype=np.float64)
        H = np.array(self.H, dtype=np.float64)
        if U.shape != (3, 3) or H.shape != (3, 3):
            raise ContractViolation("U and H are 3x3 matrices")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "s", float(self.s))

    def validate(self) -> "InvariantData":
        if np.max(np.abs(self.H - self.H.T)) > SYMMETRY_TOL:
            raise ContractViolation("H must be symmetric")
        if np.linalg.eigvalsh(0.5 * (self.H + self.H.T))[0] <= 0:
            raise ContractViolation("H must be positive-definite")
        if self.rho <= 0:
            raise OutsideRegularRegime("outside regular regime: rho <= 0")
        if abs(det3(self.U)) < 1e-14:
            raise ContractViolation("U must be invertible (alpha a coframe)")
        return self

    @property
    def h(self) -> float:
        return det3(self.H)

    @property
    def rho(self) -> float:
        return self.h - self.s**2

    @property
    def alpha(self) -> FormTriple:
        return self.U @ self.base.e


@dataclass(frozen=True, eq=False)
class DerivedForms:
    beta: FormTriple
    sigma: FormTriple
    tau: FormTriple
    h: float
    rho: float
    tau_variants: dict = field(default_factory=dict)


def cofactor(M) -> np.ndarray:
    """``cof(M) = adj(M)^T``; ``(M γ) ⊼ (M γ) = cof(M) (γ ⊼ γ)``."""
    return adjugate(M).T


def tau_matrix(data: InvariantData) -> np.ndarray:
    """Coefficients of τ against ``e ⊼ e``: ``(4/ρ) cof(H U)``."""
    return 4.0 / data.rho * cofactor(data.H @ data.U)


def derive_forms(data: InvariantData) -> DerivedForms:
    if data.rho <= 0:
        raise OutsideRegularRegime("outside regular regime: rho <= 0")
    alpha = data.alpha
    H, h, rho = data.H, data.h, data.rho
    beta = H @ alpha
    square = wedge_square(alpha)
    variants = {
        "star": wedge_square(beta).scale(4.0 / rho),
        "adjugate": (adjugate(H) @ square).scale(4.0 / rho),
        "inverse": (np.linalg.inv(H) @ square).scale(4.0 * h / rho),
    }
    tau = variants["star"]
    return DerivedForms(beta, H @ tau, tau, h, rho, variants)


def tau_variant_spread(forms: DerivedForms) -> float:
    v = list(forms.tau_variants.values())
    return max((a - b).max_abs() for a in v for b in v)


# -- closure, curvature ------------------------------------------------------------


def _matrix_derivative(kind: str, H, h, rho, s, dH, dh):
    """Directional derivative of ``4h/ρ`` (``kind='sigma'``) or ``(4/ρ) adj H``."""
    drho = dh
    if kind == "sigma":
        return -4.0 * s**2 / rho**2 * dh * np.eye(3)
    Hinv = np.linalg.inv(H)
    dadj = dh * Hinv - h * Hinv @ dH @ Hinv
    return 4.0 / rho * dadj - 4.0 * drho / rho**2 * adjugate(H)


def _pointwise_closure(data: InvariantData, jet) -> tuple[float, float]:
    """``d_3 σ`` and ``d_3 τ`` at a point, from a first-order jet.

    Works in the coframe ``α`` itself: ``dα = B (α ⊼ α)``, ``dH = Σ_p K^p α_p``.
    """
    H, h, rho, s = data.H, data.h, data.rho, data.s
    a = FormTriple.of(*(KForm.basis(3, i) for i in (1, 2, 3)))
    sq = wedge_square(a)
    da = np.asarray(jet.B) @ sq
    # d(α_j ∧ α_k) = dα_j ∧ α_k - α_j ∧ dα_k
    dsq = FormTriple.of(
        *(wedge(da[j], a[k]) - wedge(a[j], da[k]) for _, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)))
    )
    K = np.asarray(jet.K)
    adjH = adjugate(H)
    out = []
    for kind, M in (("sigma", 4.0 * h / rho * np.eye(3)), ("tau", 4.0 / rho * adjH)):
        total = M @ dsq
        for p in range(3):
            dH = K[:, :, p]
            dh = float(np.sum(adjH.T * dH))
            dM = _matrix_derivative(kind, H, h, rho, s, dH, dh)
            total = total + (dM @ sq).wedge_left(a[p])
        out.append(total.max_abs())
    return out[0], out[1]


def check_closed(data: InvariantData, jet=None) -> dict:
    """Residuals of ``d_3 σ`` and ``d_3 τ`` plus the coefficients of ``τ/s``.

    Without a jet the data is left-invariant and ``d_3`` comes from the
    structure constants; with a jet (fields ``B`` and ``K``) the check is
    pointwise.
    """
    forms = derive_forms(data)
    if jet is None:
        frame = data.base.frame
        sigma_res = max(exterior_derivative(c, frame).max_abs() for c in forms.sigma)
        tau_res = max(exterior_derivative(c, frame).max_abs() for c in forms.tau)
    else:
        sigma_res, tau_res = _pointwise_closure(data, jet)
    integrality = None
    if data.s != 0:
        integrality = forms.tau.scale(1.0 / data.s).coefficient_matrix(wedge_square(data.base.e))
    return {"sigma_residual": sigma_res, "tau_residual": tau_res, "integrality_coefficients": integrality}


def d_alpha(data: InvariantData) -> FormTriple:
    frame = data.base.frame
    return FormTriple.of(*(exterior_derivative(c, frame) for c in data.alpha))


def curvature(data: InvariantData) -> FormTriple:
    """``d_6 θ = (d_3 α - τ)/s``."""
    if data.s == 0:
        raise ContractViolation("curvature requires s != 0")
    return (d_alpha(data) - derive_forms(data).tau).scale(1.0 / data.s)


def curvature_matrix(data: InvariantData) -> np.ndarray:
    """Coefficients of ``d_6 θ`` against ``e ⊼ e``: ``(U Λ - (4/ρ) cof(HU))/s``
    with ``Λ = diag(λ)``."""
    if data.s == 0:
        raise ContractViolation("curvature requires s != 0")
    return (data.U @ np.diag(data.base.lam) - tau_matrix(data)) / data.s


# -- initial data from closed two-forms ----------------------------------------------


@dataclass(frozen=True, eq=False)
class EtaDecomposition:
    eta: FormTriple
    f: np.ndarray
    gamma: FormTriple
    epsilon: int
    c_hat: float
    alpha: FormTriple
    alpha_matrix: np.ndarray


def eta_to_coframe(eta: FormTriple, s0: float, swap: bool = False) -> EtaDecomposition:
    """Coframe ``α`` with ``α ⊼ α = ĉ ε η``, ``ĉ = (1 - s0²) s0/4``.

    ``η`` is a triple of two-forms on the three-dimensional base.  Writing
    ``η_i = f_i γ_j ∧ γ_k`` for a coframe ``γ`` whose dual vectors point along
    the kernels of ``η_i``, one sets ``ε = sign(f_1 f_2 f_3)``,
    ``b² = ε ĉ f_1 f_2 f_3`` and ``α_i = (b/f_i) γ_i``.  ``swap`` exchanges
    ``η_2`` and ``η_3`` first, which flips ``ε``.
    """
    if not 0.0 < s0**2 < 1.0:
        raise ContractViolation("need 0 < s0^2 < 1")
    if eta.dim != 3 or eta.degree != 2:
        raise ContractViolation("eta must be a triple of two-forms on the base")
    if swap:
        eta = FormTriple.of(eta[0], eta[2], eta[1])
    e = FormTriple.of(*(KForm.basis(3, i) for i in (1, 2, 3)))
    G = eta.coefficient_matrix(wedge_square(e))  # η = G (e ⊼ e)
    if abs(det3(G)) < 1e-12 * max(1.0, np.max(np.abs(G)) ** 3):
        raise ContractViolation("eta components are linearly dependent")
    # row i of G is the vector dual to η_i; the kernel of η_i is spanned by it
    Y = (G / np.linalg.norm(G, axis=1, keepdims=True)).T
    if np.linalg.det(Y) < 0:
        Y[:, 0] = -Y[:, 0]
    Gamma = np.linalg.inv(Y)
    C = cofactor(Gamma)
    f = np.einsum("ij,ij->i", G, C) / np.einsum("ij,ij->i", C, C)
    prod = float(np.prod(f))
    if abs(prod) < 1e-14:
        raise ContractViolation("f_1 f_2 f_3 vanishes")
    eps = 1 if prod > 0 else -1
    c_hat = (1.0 - s0**2) * s0 / 4.0
    b = np.sqrt(eps * c_hat * prod)
    A = (b / f)[:, None] * Gamma
    return EtaDecomposition(eta, f, Gamma @ e, eps, c_hat, A @ e, A)


def eta_initial_data(eta: FormTriple, s0: float, base: BaseGeometry, swap: bool = False) -> InvariantData:
    dec = eta_to_coframe(eta, s0, swap)
    return InvariantData(s0, dec.alpha_matrix, np.eye(3), base)


# -- the seven-dimensional lift ------------------------------------------------------

_S, _THETA, _E = 0, 1, 4  # bit offsets of ds, θ, e in the seven-frame


def _embed(a: KForm, offset: int) -> KForm:
    """Push a form on a sub-frame into the seven-frame by shifting generator labels."""
    out = np.zeros(1 << 7)
    out[np.arange(1 << a.dim) << offset] = a.array
    return KForm(7, a.degree, out)


def _embed_triple(t: FormTriple, offset: int) -> FormTriple:
    return FormTriple.of(*(_embed(c, offset) for c in t))


def seven_frame_generators():
    ds = KForm.basis(7, 1)
    theta = FormTriple.of(*(KForm.basis(7, i) for i in (2, 3, 4)))
    e = FormTriple.of(*(KForm.basis(7, i) for i in (5, 6, 7)))
    return ds, theta, e


@dataclass(frozen=True, eq=False)
class SevenStructure:
    data: InvariantData
    frame: FrameAlgebra
    g: np.ndarray
    vol: KForm
    phi: KForm
    star_phi: KForm

    @property
    def orientation(self) -> int:
        return 1 if self.vol.array[-1] > 0 else -1


def seven_metric(data: InvariantData) -> np.ndarray:
    """``1/(16ρ) ds² + θ^T H θ + (1/ρ) α^T H α`` on ``(ds, θ, e)``."""
    g = np.zeros((7, 7))
    g[0, 0] = 1.0 / (16.0 * data.rho)
    g[1:4, 1:4] = data.H
    g[4:7, 4:7] = data.U.T @ data.H @ data.U / data.rho
    return g


def seven_forms(data: InvariantData) -> dict:
    """φ, ⋆φ and vol assembled from the invariant forms, with ``ν = s``."""
    s, H, h, rho = data.s, data.H, data.h, data.rho
    ds, theta, e = seven_frame_generators()
    alpha = data.U @ e
    vol_theta = wedge(wedge(theta[0], theta[1]), theta[2])
    vol_alpha = det3(data.U) * wedge(wedge(e[0], e[1]), e[2])
    sq_theta = wedge_square(theta)
    sq_alpha = wedge_square(alpha)
    tau = _embed_triple(derive_forms(data).tau, _E)
    phi = (
        s * vol_theta
        - sq_theta.dot(alpha)
        - (s / rho) * theta.dot(sq_alpha)
        - (1.0 / (4.0 * rho)) * wedge(ds, theta.dot(H @ alpha))
        + (1.0 / rho) * vol_alpha
    )
    star_phi = (
        0.25 * wedge(ds, vol_theta)
        - 0.25 * sq_theta.dot(tau)
        + (s / (4.0 * rho)) * wedge(ds, sq_theta.dot(alpha))
        - (1.0 / (4.0 * rho)) * wedge(ds, theta.dot(sq_alpha))
        - (s / (4.0 * rho**2)) * wedge(ds, vol_alpha)
    )
    vol = (h / (4.0 * rho**2)) * wedge(wedge(vol_theta, vol_alpha), ds)
    return {"phi": phi, "star_phi": star_phi, "vol": vol}


def seven_frame(
    data: InvariantData,
    theta_curvature: FormTriple,
    theta_prime: FormTriple,
    curvature_prime: FormTriple | None = None,
) -> FrameAlgebra:
    """``dθ_i = (d_6θ)_i + ds ∧ θ'_i`` and ``de^i = λ_i e^{jk}`` on ``(ds, θ, e)``."""
    ds, _, _ = seven_frame_generators()
    curv = _embed_triple(theta_curvature, _E)
    tp = _embed_triple(theta_prime, _E)
    base = data.base.frame
    d_e = [_embed(base.d_of_generator[i], _E) for i in range(3)]
    d_theta = [curv[i] + wedge(ds, tp[i]) for i in range(3)]
    zero2 = KForm.zero(7, 2)
    d_prime = None
    if curvature_prime is not None:
        cp = _embed_triple(curvature_prime, _E)
        d_prime = (zero2, cp[0], cp[1], cp[2], zero2, zero2, zero2)
    return FrameAlgebra(
        7,
        (zero2, *d_theta, *d_e),
        metric=seven_metric(data),
        orientation=1 if det3(data.U) > 0 else -1,
        s_index=1,
        d_prime=d_prime,
    )


def assemble_seven(
    data: InvariantData,
    theta_curvature: FormTriple,
    theta_prime: FormTriple,
    curvature_prime: FormTriple | None = None,
    check: bool = True,
    enforce_d_squared: bool = True,
) -> SevenStructure:
    """Lift ``(s, α, H)`` with connection data to the seven-frame.

    ``curvature_prime`` (the s-derivative of the coefficients of ``d_6θ``)
    enables the ``d² = 0`` check on the extended frame.
    """
    data.validate()
    frame = seven_frame(data, theta_curvature, theta_prime, curvature_prime)
    if curvature_prime is not None and enforce_d_squared:
        dd = frame.check_d_squared()
        if dd > D_SQUARED_TOL:
            raise InconsistentConnection(f"inconsistent connection data: |d^2| = {dd:.3e}")
    forms = seven_forms(data)
    g = seven_metric(data)
    if check:
        g_phi, vol_phi = metric_from_three_form(forms["phi"])
        if np.max(np.abs(g_phi - g)) > ASSEMBLY_TOL * max(1.0, np.max(np.abs(g))):
            raise ContractViolation("assembled phi does not induce the assembled metric")
        orient = 1 if vol_phi.array[-1] > 0 else -1
        star = hodge_star(forms["phi"], g, orient)
        if (star - forms["star_phi"]).max_abs() > ASSEMBLY_TOL * max(1.0, star.max_abs()):
            raise ContractViolation("assembled star phi disagrees with the Hodge dual")
    return SevenStructure(data, frame, g, forms["vol"], forms["phi"], forms["star_phi"])


def theta_degree_parts(a: KForm) -> dict[int, KForm]:
    """Split a seven-frame form by its degree in ``θ_1, θ_2, θ_3``."""
    masks = np.arange(1 << 7)
    deg = ((masks >> _THETA) & 0b111)
    deg = (deg & 1) + ((deg >> 1) & 1) + ((deg >> 2) & 1)
    out = {}
    for k in range(4):
        arr = np.where(deg == k, a.array, 0.0)
        out[k] = KForm(7, a.degree, arr)
    return out


def nearly_parallel_split(structure: SevenStructure, phi_prime: KForm) -> dict:
    """``dφ - 4⋆φ`` in total and split by degree in θ (norms in the assembled metric)."""
    from .exterior import SForm

    dphi = exterior_derivative(SForm(structure.phi, phi_prime), structure.frame)
    r = dphi - 4.0 * structure.star_phi
    parts = theta_degree_parts(r)
    return {
        "total": norm(r, structure.g),
        "by_theta_degree": {k: norm(v, structure.g) for k, v in parts.items()},
    }


# -- change of basis of the torus ------------------------------------------------------


def transformation_rules(P) -> dict:
    """How each quantity transforms under ``U_i ↦ Σ P_ij U_j``."""
    P = np.asarray(P, dtype=np.float64)
    dp = det3(P)
    adjT = adjugate(P).T
    return {
        "nu": dp,
        "h": dp**2,
        "rho": dp**2,
        "H": lambda H: P @ H @ P.T,
        "theta": np.linalg.inv(P.T),
        "alpha": adjT,
        "beta": dp * P,
        "sigma": dp * P,
        "tau": adjT,
    }


def basis_change(data: InvariantData, P) -> InvariantData:
    P = np.asarray(P, dtype=np.float64)
    dp = det3(P)
    if abs(dp) < 1e-12:
        raise ContractViolation("basis change matrix is singular")
    return InvariantData(dp * data.s, adjugate(P).T @ data.U, P @ data.H @ P.T, data.base)


def changed_coframe(P) -> np.ndarray:
    """Matrix expressing ``(dν̃, θ̃, ẽ-part)`` generators in the original seven-frame.

    Rows: the new ``dν``, the new ``θ``; the ``e`` generators are unchanged (the
    new ``α`` is carried by ``U``).
    """
    P = np.asarray(P, dtype=np.float64)
    L = np.eye(7)
    L[0, 0] = det3(P)
    L[1:4, 1:4] = np.linalg.inv(P.T)
    return L


def transformed_metric(data: InvariantData, P) -> np.ndarray:
    """Assembled metric of the changed data, pulled back to the original frame."""
    L = changed_coframe(P)
    return L.T @ seven_metric(basis_change(data, P)) @ L
