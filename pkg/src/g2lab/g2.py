"""Pointwise G2 linear algebra: the standard three-form, metric recovery,
cross products, the multi-moment map and its local normal form."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exterior import (
    ContractViolation,
    FormTriple,
    FrameAlgebra,
    KForm,
    SForm,
    exterior_derivative,
    hodge_star,
    interior,
    norm,
    wedge,
)

DET_B_MIN = 1e-20


class NotAG2Form(ValueError):
    pass


class DegeneratePlane(ValueError):
    pass


class CollapsedOrbit(ValueError):
    pass


def standard_phi(dim_offset: int = 0, dim: int = 7) -> KForm:
    """``e^123 - e^1(e^45+e^67) - e^2(e^46+e^75) - e^3(e^47+e^56)``.

    ``dim_offset`` shifts all generator labels (used to embed in R^8).
    """
    o = dim_offset

    def e(*i):
        return KForm.basis(dim, *(k + o for k in i))

    return (
        e(1, 2, 3)
        - e(1) * (e(4, 5) + e(6, 7))
        - e(2) * (e(4, 6) + e(7, 5))
        - e(3) * (e(4, 7) + e(5, 6))
    )


def standard_star_phi(dim_offset: int = 0, dim: int = 7) -> KForm:
    o = dim_offset

    def e(*i):
        return KForm.basis(dim, *(k + o for k in i))

    return (
        e(4, 5, 6, 7)
        - e(2, 3) * (e(4, 5) + e(6, 7))
        - e(3, 1) * (e(4, 6) + e(7, 5))
        - e(1, 2) * (e(4, 7) + e(5, 6))
    )


def metric_from_three_form(phi: KForm) -> tuple[np.ndarray, KForm]:
    """Recover ``(g, vol)`` from ``6 g(X,Y) vol = (X⌟φ)∧(Y⌟φ)∧φ``.

    With ``B_ij`` the top coefficient of ``(E_i⌟φ)∧(E_j⌟φ)∧φ`` and
    ``vol = c e^{1..7}``, one has ``g = B/(6c)`` and ``c^9 = det B / 6^7``.
    The real ninth root keeps the sign, so negatively oriented forms are
    handled too.
    """
    if phi.dim != 7 or phi.degree != 3:
        raise ContractViolation("expected a three-form in dimension seven")
    basis = np.eye(7)
    contractions = [interior(basis[i], phi) for i in range(7)]
    B = np.empty((7, 7))
    for i in range(7):
        for j in range(i, 7):
            top = wedge(wedge(contractions[i], contractions[j]), phi)
            B[i, j] = B[j, i] = top.array[-1]
    det_b = np.linalg.det(B)
    if abs(det_b) < DET_B_MIN:
        raise NotAG2Form(f"not a G2 form: det B = {det_b:.3e}")
    c = np.sign(det_b) * (abs(det_b) / 6.0**7) ** (1.0 / 9.0)
    g = B / (6.0 * c)
    g = 0.5 * (g + g.T)
    if np.linalg.eigvalsh(g)[0] <= 0:
        raise NotAG2Form("not a G2 form: recovered bilinear form is indefinite")
    top = np.zeros(128)
    top[127] = c
    vol = KForm(7, 7, top)
    return g, vol


@dataclass(frozen=True, eq=False)
class G2Structure:
    """A G2 three-form on a seven-dimensional frame, with derived data."""

    phi: KForm
    frame: FrameAlgebra | None = None

    @cached_property
    def _metric_vol(self):
        return metric_from_three_form(self.phi)

    @property
    def metric(self) -> np.ndarray:
        return self._metric_vol[0]

    @property
    def volume(self) -> KForm:
        return self._metric_vol[1]

    @property
    def orientation(self) -> int:
        return 1 if self.volume.array[-1] > 0 else -1

    @cached_property
    def star_phi(self) -> KForm:
        return hodge_star(self.phi, self.metric, self.orientation)

    def star(self, a: KForm) -> KForm:
        return hodge_star(a, self.metric, self.orientation)

    def norm(self, a: KForm) -> float:
        return norm(a, self.metric)

    def cross(self, x, y) -> np.ndarray:
        """``x × y`` defined by ``g(x × y, z) = φ(x, y, z)``."""
        covector = interior(y, interior(x, self.phi)).components()
        return np.linalg.solve(self.metric, covector)

    def is_associative(self, x, y, z, tol: float = 1e-10) -> bool:
        return associativity_residual(self, x, y, z) < tol


def standard_g2(frame: FrameAlgebra | None = None) -> G2Structure:
    """Standard pair on an orthonormal oriented seven-frame."""
    return G2Structure(standard_phi(), frame)


def _orthonormalize(vectors, metric) -> np.ndarray:
    out = []
    for v in vectors:
        w = np.array(v, dtype=np.float64)
        for u in out:
            w = w - (u @ metric @ w) * u
        n = np.sqrt(w @ metric @ w)
        out.append(w / n)
    return np.array(out)


def associativity_residual(structure: G2Structure, x, y, z) -> float:
    """Distance of ``a × b`` from ``span{x, y, z}`` for a g-orthonormal basis ``a, b, c``.

    Scale invariant; raises :class:`DegeneratePlane` when the vectors are
    (numerically) dependent.
    """
    g = structure.metric
    vecs = np.array([x, y, z], dtype=np.float64)
    gram = vecs @ g @ vecs.T
    scale = np.prod(np.diag(gram))
    if scale == 0 or np.linalg.det(gram) / scale < 1e-12:
        raise DegeneratePlane("degenerate plane: vectors are linearly dependent")
    a, b, c = _orthonormalize(vecs, g)
    w = structure.cross(a, b)
    proj = sum((u @ g @ w) * u for u in (a, b, c))
    r = w - proj
    return float(np.sqrt(r @ g @ r))


def cross_and_associative(x, y, z, structure: G2Structure) -> dict:
    return {
        "cross": structure.cross(y, z),
        "is_associative": structure.is_associative(x, y, z),
    }


def multi_moment(structure: G2Structure, U1, U2, U3) -> dict:
    """``ν = φ(U1,U2,U3)`` and ``dν = -4 ⋆φ(U1,U2,U3,·)``."""
    nu = structure.phi.evaluate(U1, U2, U3)
    sphi = structure.star_phi
    dnu = -4.0 * interior(U3, interior(U2, interior(U1, sphi)))
    return {"nu": nu, "dnu_contraction": dnu}


def nearly_parallel_residual(structure: G2Structure, frame: FrameAlgebra | None = None, phi_prime=None) -> float:
    """``‖dφ - 4⋆φ‖`` in the metric induced by φ."""
    frame = frame if frame is not None else structure.frame
    if frame is None:
        raise ContractViolation("a frame with generator differentials is required")
    a = SForm(structure.phi, phi_prime) if phi_prime is not None else structure.phi
    dphi = exterior_derivative(a, frame)
    return structure.norm(dphi - 4.0 * structure.star_phi)


# -- local normal form ----------------------------------------------------------


@dataclass(frozen=True)
class LocalFrameData:
    """Staircase normal form ``(U1,U2,U3)^T = V (E1..E4)^T``."""

    p: float
    q1: float
    q2: float
    r1: float
    r2: float
    r3: float
    r4: float

    @classmethod
    def random(cls, rng: np.random.Generator) -> "LocalFrameData":
        p, q2 = rng.uniform(0.2, 2.0, size=2)
        q1, r1, r2, r3, r4 = rng.normal(size=5)
        return cls(p, q1, q2, r1, r2, r3, r4)

    @property
    def V(self) -> np.ndarray:
        return np.array(
            [
                [self.p, 0.0, 0.0, 0.0],
                [self.q1, self.q2, 0.0, 0.0],
                [self.r1, self.r2, self.r3, self.r4],
            ]
        )

    @property
    def H(self) -> np.ndarray:
        V = self.V
        return V @ V.T

    @property
    def r_tilde_sq(self) -> float:
        return self.r3**2 + self.r4**2

    @property
    def h(self) -> float:
        return self.p**2 * self.q2**2 * self.r_tilde_sq

    @property
    def U(self) -> np.ndarray:
        """The three vectors as rows in R^7."""
        out = np.zeros((3, 7))
        out[:, :4] = self.V
        return out

    @property
    def X(self) -> np.ndarray:
        p, q1, q2, r1, r2, r3, r4 = self.p, self.q1, self.q2, self.r1, self.r2, self.r3, self.r4
        rt = self.r_tilde_sq
        left = np.array(
            [
                [q2, -q1, q1 * r2 - q2 * r1],
                [0.0, p, -p * r2],
                [0.0, 0.0, p * q2],
            ]
        )
        right = np.array(
            [
                [rt, 0.0, 0.0, 0.0],
                [0.0, rt, 0.0, 0.0],
                [0.0, 0.0, r3, r4],
            ]
        )
        return left @ right / (p * q2 * rt)


def local_invariant_forms(data: LocalFrameData, structure: G2Structure | None = None) -> dict:
    """θ (dual to U) and ``α_i = ν θ_i - φ(U_j, U_k, ·)`` on the standard frame."""
    structure = structure or standard_g2()
    H = data.H
    if abs(np.linalg.det(H)) < 1e-14 or data.r_tilde_sq == 0:
        raise CollapsedOrbit("collapsed orbit: U1, U2, U3 are dependent")
    U = data.U
    g = structure.metric
    flat = U @ g
    theta_coeffs = np.linalg.solve(H, flat)
    theta = FormTriple.of(*(KForm.one_form(7, row) for row in theta_coeffs))
    nu = structure.phi.evaluate(*U)
    alpha = []
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        cross = interior(U[k], interior(U[j], structure.phi))
        alpha.append(nu * theta[i] - cross)
    return {"theta": theta, "alpha": FormTriple(tuple(alpha)), "nu": nu}


def local_invariant_forms_closed(data: LocalFrameData) -> dict:
    """The same forms from the displayed X-matrix expressions."""
    X = data.X
    theta = FormTriple.of(*(KForm.one_form(7, np.r_[X[i], 0, 0, 0]) for i in range(3)))
    # α = p q2 r4 X (e6, -e5, e4, -e3)^T
    targets = (6, 5, 4, 3)
    signs = (1.0, -1.0, 1.0, -1.0)
    scale = data.p * data.q2 * data.r4
    rows = []
    for i in range(3):
        v = np.zeros(7)
        for col, (t, sg) in enumerate(zip(targets, signs)):
            v[t - 1] += scale * sg * X[i, col]
        rows.append(KForm.one_form(7, v))
    return {"theta": theta, "alpha": FormTriple(tuple(rows))}
