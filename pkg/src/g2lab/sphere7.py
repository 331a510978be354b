"""The round seven-sphere as a nearly parallel G2 manifold with its maximal
torus action, the multi-moment map and its critical set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exterior import ContractViolation, KForm, interior, lie_derivative_linear, pullback, wedge
from .g2 import G2Structure, standard_phi, standard_star_phi

CRITICAL_TOL = 1e-9
NU_ZERO_TOL = 1e-9
RANK_TOL = 1e-8

# generator k of R^8 (coordinate x^k) is index k + 1
_EPS = (1, 1, -1, -1)


def _dx(*k: int) -> KForm:
    return KForm.basis(8, *(i + 1 for i in k))


def spin7_form() -> KForm:
    """``Ψ = dx^0 ∧ φ_0 + ⋆φ_0`` on R^8, with ``φ_0`` on ``x^1..x^7``."""
    return wedge(_dx(0), standard_phi(dim_offset=1, dim=8)) + standard_star_phi(dim_offset=1, dim=8)


def spin7_decomposition() -> KForm:
    """``dx^0123 - γ1∧β5 - γ2∧β6 - γ3∧β7 + dx^4567``."""
    g1, g2, g3 = _gammas()
    b5, b6, b7 = _betas()
    return _dx(0, 1, 2, 3) - g1 * b5 - g2 * b6 - g3 * b7 + _dx(4, 5, 6, 7)


def _gammas():
    return _dx(0, 1) + _dx(2, 3), _dx(0, 2) + _dx(3, 1), _dx(0, 3) + _dx(1, 2)


def _betas():
    return _dx(4, 5) + _dx(6, 7), _dx(4, 6) + _dx(7, 5), _dx(4, 7) + _dx(5, 6)


PSI = spin7_form()


def as_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (8,):
        raise ContractViolation("a sphere point has eight coordinates")
    if abs(np.linalg.norm(x) - 1.0) >= 1e-12:
        raise ContractViolation("point is not on the unit sphere")
    return x


# -- the torus action -----------------------------------------------------------


def rotation_generator(i: int) -> np.ndarray:
    """Matrix of ``V_i = -x^{2i+1} ∂_{2i} + x^{2i} ∂_{2i+1}``."""
    A = np.zeros((8, 8))
    A[2 * i, 2 * i + 1] = -1.0
    A[2 * i + 1, 2 * i] = 1.0
    return A


def torus_generators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    V = [rotation_generator(i) for i in range(4)]
    return V[0] + V[3], V[1] + V[3], V[2] - V[3]


@dataclass(frozen=True)
class TorusGenerators:
    point: np.ndarray
    V: np.ndarray = field(init=False)
    U: np.ndarray = field(init=False)

    def __post_init__(self):
        x = np.asarray(self.point, dtype=np.float64)
        V = np.array([rotation_generator(i) @ x for i in range(4)])
        U = np.array([A @ x for A in torus_generators()])
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "U", U)


def psi_lie_derivatives() -> list[KForm]:
    return [lie_derivative_linear(A, PSI) for A in torus_generators()]


def rotation_lie_derivatives() -> list[KForm]:
    return [lie_derivative_linear(rotation_generator(i), PSI) for i in range(4)]


def expected_rotation_lie_derivative(i: int) -> KForm:
    """``ε_i (γ3∧β6 - γ2∧β7)``."""
    _, g2, g3 = _gammas()
    _, b6, b7 = _betas()
    return _EPS[i] * (g3 * b6 - g2 * b7)


def torus_slice(x) -> tuple[np.ndarray, np.ndarray]:
    """Rotate ``x`` by the torus into ``x^1 = x^3 = x^5 = 0``, ``x^0, x^2, x^4 >= 0``.

    Returns the rotated point and the angles ``(t1, t2, t3)`` of
    ``exp(t1 U1 + t2 U2 + t3 U3)``.
    """
    x = np.asarray(x, dtype=np.float64)
    z = x[0::2] + 1j * x[1::2]
    t = -np.angle(z[:3])
    # pair k rotates by t_k (k < 3), the last pair by t1 + t2 - t3
    phases = np.array([t[0], t[1], t[2], t[0] + t[1] - t[2]])
    w = z * np.exp(1j * phases)
    out = np.empty(8)
    out[0::2] = w.real
    out[1::2] = w.imag
    out[[1, 3, 5]] = 0.0
    return out, t


# -- the multi-moment map ------------------------------------------------------


def _z(x):
    x = np.asarray(x, dtype=np.float64)
    return (
        x[..., 0] - 1j * x[..., 1],
        x[..., 2] - 1j * x[..., 3],
        x[..., 4] + 1j * x[..., 5],
        x[..., 6] + 1j * x[..., 7],
    )


# ∂z^k/∂x^m for the complex coordinates above
_DZ = np.array([1, -1j, 1, -1j, 1, 1j, 1, 1j])


def nu(x) -> np.ndarray | float:
    """``ν = 4 Im(z1 z2 z3 z4)``; vectorised over leading axes."""
    z1, z2, z3, z4 = _z(x)
    return 4.0 * np.imag(z1 * z2 * z3 * z4)


def nu_polynomial(x) -> float:
    """The real polynomial form of the same function."""
    x = np.asarray(x, dtype=np.float64)
    return 4.0 * (
        (x[0] * x[2] - x[1] * x[3]) * (x[4] * x[7] + x[5] * x[6])
        + (x[1] * x[2] + x[0] * x[3]) * (x[5] * x[7] - x[4] * x[6])
    )


def euclidean_gradient(x) -> np.ndarray:
    zs = _z(x)
    grad = np.empty(np.shape(x))
    for m in range(8):
        k = m // 2
        others = np.prod([zs[j] for j in range(4) if j != k], axis=0)
        grad[..., m] = 4.0 * np.imag(_DZ[m] * others)
    return grad


def euclidean_hessian(x) -> np.ndarray:
    zs = _z(x)
    D = np.zeros((8, 8))
    for a in range(8):
        for b in range(8):
            ka, kb = a // 2, b // 2
            if ka == kb:
                continue
            rest = [zs[j] for j in range(4) if j not in (ka, kb)]
            D[a, b] = 4.0 * np.imag(_DZ[a] * _DZ[b] * rest[0] * rest[1])
    return D


def grad_nu(x) -> np.ndarray:
    """Gradient of ν on the round sphere (tangent 8-vector)."""
    x = np.asarray(x, dtype=np.float64)
    g = euclidean_gradient(x)
    return g - (g @ x) * x


# -- the induced G2 structure ----------------------------------------------------


def tangent_frame(x) -> np.ndarray:
    """Orthonormal basis of ``x^⊥`` as columns, with ``det[x | T] = +1``."""
    x = as_point(x)
    M = np.column_stack([x, np.eye(8)])
    Q, _ = np.linalg.qr(M)
    if Q[:, 0] @ x < 0:
        Q = -Q
    T = Q[:, 1:8]
    if np.linalg.det(np.column_stack([x, T])) < 0:
        T = T.copy()
        T[:, -1] = -T[:, -1]
    return T


def phi_on_vectors(x, X, Y, Z) -> float:
    """``φ_x(X, Y, Z) = Ψ(E, X, Y, Z)`` at ``E = x``."""
    return PSI.evaluate(x, X, Y, Z)


def psi_on_vectors(W, X, Y, Z) -> float:
    return PSI.evaluate(W, X, Y, Z)


def induced_phi_at(x, frame=None) -> G2Structure:
    """``ι*(E⌟Ψ)`` expressed in a tangent frame (default: :func:`tangent_frame`).

    ``frame`` is an 8x7 matrix of tangent vectors (columns).
    """
    x = as_point(x)
    T = tangent_frame(x) if frame is None else np.asarray(frame, dtype=np.float64)
    if T.shape != (8, 7) or np.max(np.abs(x @ T)) > 1e-10:
        raise ContractViolation("frame must consist of seven tangent vectors")
    return G2Structure(pullback(interior(x, PSI), T))


def induced_psi_at(x, frame=None) -> KForm:
    x = as_point(x)
    T = tangent_frame(x) if frame is None else np.asarray(frame, dtype=np.float64)
    return pullback(PSI, T)


def nu_from_structure(x) -> float:
    U = TorusGenerators(x).U
    return phi_on_vectors(x, *U)


def dnu_from_structure(x) -> np.ndarray:
    """``-4 ψ(U1,U2,U3,·)`` turned into a tangent vector with the round metric."""
    x = np.asarray(x, dtype=np.float64)
    U = TorusGenerators(x).U
    covector = -4.0 * interior(U[2], interior(U[1], interior(U[0], PSI))).components()
    return covector - (covector @ x) * x


# -- critical points -------------------------------------------------------------


@dataclass
class CriticalReport:
    point: np.ndarray
    nu: float
    grad_norm: float
    classification: str
    hessian: np.ndarray | None = None
    hessian_rank: int | None = None


def u_rank(x, tol: float = RANK_TOL) -> int:
    U = TorusGenerators(x).U
    sv = np.linalg.svd(U, compute_uv=False)
    return int(np.sum(sv > tol * max(1.0, sv[0])))


def span_is_associative(x, tol: float = 1e-10) -> bool:
    x = as_point(x)
    T = tangent_frame(x)
    structure = induced_phi_at(x, T)
    U = TorusGenerators(x).U @ T
    return structure.is_associative(*U, tol=tol)


def critical_classify(x, tol: float = CRITICAL_TOL, nu_tol: float = NU_ZERO_TOL) -> CriticalReport:
    x = as_point(x)
    value = float(nu(x))
    gnorm = float(np.linalg.norm(grad_nu(x)))
    if gnorm >= tol:
        return CriticalReport(x, value, gnorm, "regular")
    if abs(value) > nu_tol:
        if not span_is_associative(x):
            raise AssertionError("critical point with ν ≠ 0 whose orbit plane is not associative")
        H, rank = hessian_at(x, tol)
        return CriticalReport(x, value, gnorm, "critical_nonzero_associative", H, rank)
    if u_rank(x) >= 3:
        raise AssertionError("critical point with ν = 0 but independent generators")
    H, rank = hessian_at(x, tol)
    return CriticalReport(x, value, gnorm, "critical_zero_degenerate", H, rank)


SPANNING_ORDER = (0, 2, 4, 7, 1, 3, 5, 6)


def spanning_matrix(epsilon: int) -> np.ndarray:
    """Columns: ``X_0, X_2, X_4, εX_7, X_1, X_3, -X_5, εX_6`` as coordinate vectors."""
    signs = (1, 1, 1, epsilon, 1, 1, -1, epsilon)
    S = np.zeros((8, 8))
    for col, (i, sg) in enumerate(zip(SPANNING_ORDER, signs)):
        S[i, col] = sg
    return S


def hessian_at(x, tol: float = CRITICAL_TOL) -> tuple[np.ndarray, int]:
    """``Hess(X_i, X_j) = X_i(X_j ν)`` at a critical point, with ``X_i = ∂_i - x^i E``.

    At a critical point this equals ``D²ν - 4ν Id - 8ν x x^T`` in coordinates;
    the result is given in the spanning set of :func:`spanning_matrix` with
    ``ε = sign(ν)`` (``+1`` on the zero level).
    """
    x = as_point(x)
    if np.linalg.norm(grad_nu(x)) >= tol:
        raise ContractViolation("Hessian requested at a non-critical point")
    value = float(nu(x))
    full = euclidean_hessian(x) - 4.0 * value * np.eye(8) - 8.0 * value * np.outer(x, x)
    eps = -1 if value < 0 else 1
    S = spanning_matrix(eps)
    H = S.T @ full @ S
    sv = np.linalg.svd(H, compute_uv=False)
    return H, int(np.sum(sv > RANK_TOL))


def printed_hessian(epsilon: int = 1) -> np.ndarray:
    """The block matrix ``ε diag(½(1 - 3 Id), -1)`` as printed in the source."""
    ones = np.ones((4, 4))
    H1 = 0.5 * (ones - 3.0 * np.eye(4))
    H2 = -ones
    return epsilon * np.block([[H1, np.zeros((4, 4))], [np.zeros((4, 4)), H2]])


def preferred_point(epsilon: int = 1) -> np.ndarray:
    return np.array([0.5, 0, 0.5, 0, 0.5, 0, 0, epsilon * 0.5])


# -- extrema and sampling ----------------------------------------------------------


def random_points(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(n, 8))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def polish(x, sign: int = 1, iterations: int = 200) -> np.ndarray:
    """Projected gradient ascent (``sign=+1``) or descent, then Gauss-Newton on
    the Lagrange system ``∇ν = λ x``, ``|x| = 1``."""
    x = np.asarray(x, dtype=np.float64)
    x = x / np.linalg.norm(x)
    for _ in range(iterations):
        g = grad_nu(x)
        if np.linalg.norm(g) < 1e-6:
            break
        x = x + 0.5 * sign * g
        x /= np.linalg.norm(x)
    for _ in range(50):
        g = euclidean_gradient(x)
        lam = g @ x
        F = np.r_[g - lam * x, 0.5 * (x @ x - 1.0)]
        if np.linalg.norm(F) < 1e-15:
            break
        D = euclidean_hessian(x)
        J = np.zeros((9, 9))
        J[:8, :8] = D - lam * np.eye(8)
        J[:8, 8] = -x
        J[8, :8] = x
        step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        x = x + step[:8]
    return x / np.linalg.norm(x)


def find_extrema(samples: int = 1_000_000, seed: int = 0, batch: int = 200_000) -> dict:
    """Monte Carlo search for the extreme values of ν followed by local polishing."""
    rng = np.random.default_rng(seed)
    best_max, best_min = None, None
    vmax, vmin = -np.inf, np.inf
    sample_max = -np.inf
    remaining = samples
    while remaining > 0:
        n = min(batch, remaining)
        pts = random_points(n, rng)
        vals = nu(pts)
        sample_max = max(sample_max, float(np.max(np.abs(vals))))
        i, j = int(np.argmax(vals)), int(np.argmin(vals))
        if vals[i] > vmax:
            vmax, best_max = float(vals[i]), pts[i]
        if vals[j] < vmin:
            vmin, best_min = float(vals[j]), pts[j]
        remaining -= n
    xmax = polish(best_max, +1)
    xmin = polish(best_min, -1)
    return {
        "max": float(nu(xmax)),
        "min": float(nu(xmin)),
        "argmax": xmax,
        "argmin": xmin,
        "sample_max_abs": sample_max,
        "samples": samples,
    }


def zero_level_sphere_points(i: int, j: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of ``S^7 ∩ {z^i = z^j = 0}`` (0-based complex indices)."""
    pts = random_points(n, rng)
    for k in (i, j):
        pts[:, 2 * k] = 0.0
        pts[:, 2 * k + 1] = 0.0
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)
