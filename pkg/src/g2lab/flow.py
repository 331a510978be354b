"""The first-order flow in ``s`` for ``(U, H)`` that rebuilds a nearly parallel
G2 structure from data on the torus quotient, with its consistency checks,
a fixed-step RK4 integrator and an independent end-to-end verifier."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exterior import (
    ContractViolation,
    FormTriple,
    KForm,
    SForm,
    adjugate,
    det3,
    exterior_derivative,
    from_natural_flat,
    natural_flat,
    norm,
    wedge,
    wedge_square,
)
from .g2 import NotAG2Form
from .reduction import (
    BaseGeometry,
    InvariantData,
    OutsideRegularRegime,
    _embed_triple,
    _E,
    assemble_seven,
    cofactor,
    curvature_matrix,
    seven_forms,
    seven_frame_generators,
    tau_matrix,
    theta_degree_parts,
)

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
SYMMETRY_FAIL = 1e-8
DET_U_MIN = 1e-30


class SingularRegime(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FlowState:
    s: float
    U: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "U", np.array(self.U, dtype=np.float64))
        object.__setattr__(self, "H", np.array(self.H, dtype=np.float64))

    @property
    def h(self) -> float:
        return det3(self.H)

    @property
    def rho(self) -> float:
        return self.h - self.s**2

    def data(self, base: BaseGeometry) -> InvariantData:
        return InvariantData(self.s, self.U, self.H, base)


# -- pointwise jets ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointwiseJet:
    """``d_3 α = B (α ⊼ α)`` and ``d_3 H_ia = Σ_p K[i, a, p] α_p`` at a point."""

    B: np.ndarray
    K: np.ndarray = field(default_factory=lambda: np.zeros((3, 3, 3)))

    def __post_init__(self):
        B = np.array(self.B, dtype=np.float64)
        K = np.array(self.K, dtype=np.float64)
        if B.shape != (3, 3) or K.shape != (3, 3, 3):
            raise ContractViolation("B is 3x3 and K is 3x3x3")
        if np.any(K != K.transpose(1, 0, 2)):
            raise ContractViolation("K must be symmetric in its first two indices")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "K", K)

    @property
    def R(self) -> np.ndarray:
        """``R_ia = K^b_ic - K^c_ib`` for cyclic ``(abc)``."""
        K = self.K
        R = np.empty((3, 3))
        for a, b, c in _CYCLIC:
            R[:, a] = K[:, c, b] - K[:, b, c]
        return R

    def S(self, H) -> np.ndarray:
        """``d_3 h = S^T α``."""
        return np.einsum("iap,ai->p", self.K, adjugate(H))

    def F(self, H) -> np.ndarray:
        """``d_3 h ∧ H α = F (α ⊼ α)``."""
        H = np.asarray(H, dtype=np.float64)
        S = self.S(H)
        F = np.empty((3, 3))
        for p, q, r in _CYCLIC:
            F[:, p] = H[:, r] * S[q] - H[:, q] * S[r]
        return F


def structure_coeffs(U, base: BaseGeometry, check: bool = False) -> np.ndarray:
    """``B`` with ``d_3(U e) = B (Ue ⊼ Ue)``: ``U Λ U^T / det U``."""
    U = np.asarray(U, dtype=np.float64)
    dU = det3(U)
    if not abs(dU) > DET_U_MIN:
        raise SingularRegime("near collapse: det U below threshold")
    B = U @ np.diag(base.lam) @ U.T / dU
    if check:
        alpha = U @ base.e
        frame = base.frame
        lhs = FormTriple.of(*(exterior_derivative(c, frame) for c in alpha))
        if (lhs - B @ wedge_square(alpha)).max_abs() > 1e-12 * max(1.0, np.max(np.abs(B))):
            raise AssertionError("structure coefficients inconsistent with the frame")
    return B


def homogeneous_jet(U, base: BaseGeometry) -> PointwiseJet:
    return PointwiseJet(structure_coeffs(U, base))


def A_matrix(s: float, H, jet: PointwiseJet) -> np.ndarray:
    """``α' = A α`` with
    ``A = -(5s/2ρ) Id - (s/(4hρ)) F^T + (s/4h)(R^T + B^T H)``."""
    H = np.asarray(H, dtype=np.float64)
    h = det3(H)
    rho = h - s * s
    A = -(5.0 * s / (2.0 * rho)) * np.eye(3) + (s / (4.0 * h)) * (jet.R.T + jet.B.T @ H)
    if np.any(jet.K):
        A = A - (s / (4.0 * h * rho)) * jet.F(H).T
    return A


def W_from_A(A) -> np.ndarray:
    """``(α ⊼ α)' = W (α ⊼ α)`` for ``α' = A α``."""
    A = np.asarray(A, dtype=np.float64)
    return -A.T + np.trace(A) * np.eye(3)


def A_from_W(W) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    return -W.T + 0.5 * np.trace(W) * np.eye(3)


def _check_regime(s: float, h: float, rho: float) -> None:
    if s == 0:
        raise SingularRegime("singular regime: s = 0")
    if h <= 0:
        raise SingularRegime("singular regime: h <= 0")
    if rho <= 0:
        raise SingularRegime("singular regime: rho <= 0")


def flow_rhs(state: FlowState, jet: PointwiseJet) -> dict:
    """``H' = -H/s + (ρ/4hs) HBH - (s/4h) RH``, ``U' = A U`` and ``h' = Tr(H' adj H)``."""
    s, H = state.s, state.H
    h = det3(H)
    rho = h - s * s
    _check_regime(s, h, rho)
    B = jet.B
    Hp = -H / s + (rho / (4.0 * h * s)) * (H @ B @ H)
    if np.any(jet.K):
        Hp = Hp - (s / (4.0 * h)) * (jet.R @ H)
    A = A_matrix(s, H, jet)
    Up = A @ state.U
    hp = float(np.sum(Hp.T * adjugate(H)))
    return {"U_prime": Up, "H_prime": Hp, "h_prime": hp, "A": A}


def h_prime_trace_form(state: FlowState, jet: PointwiseJet) -> float:
    """``h' = -3h/s + (ρ/4s) Tr(H B)``."""
    s, H = state.s, state.H
    h = det3(H)
    rho = h - s * s
    return -3.0 * h / s + rho / (4.0 * s) * float(np.trace(H @ jet.B))


def consistency_residuals(state: FlowState, jet: PointwiseJet) -> dict:
    s, H = state.s, state.H
    h = det3(H)
    rho = h - s * s
    S = jet.S(H)
    rhs = flow_rhs(state, jet)
    return {
        "h_prime": abs(rhs["h_prime"] - h_prime_trace_form(state, jet)),
        "b_natural": float(np.linalg.norm(natural_flat(jet.B) - (s * s / (h * rho)) * S)),
        "rh_natural": float(
            np.linalg.norm(natural_flat(jet.R @ H + H @ jet.B @ H) - adjugate(H) @ S / rho)
        ),
    }


_K_PAIRS = [(i, a) for i in range(3) for a in range(i, 3)]


def _K_from_vector(z) -> np.ndarray:
    K = np.zeros((3, 3, 3))
    n = 0
    for p in range(3):
        for i, a in _K_PAIRS:
            K[i, a, p] = K[a, i, p] = z[n]
            n += 1
    return K


def _jet_from_vector(z, B_sym) -> PointwiseJet:
    return PointwiseJet(B_sym + from_natural_flat(z[18:21]), _K_from_vector(z[:18]))


def _constraint_map(H, s) -> np.ndarray:
    """Matrix of the (linear, homogeneous) constraints on ``z = (K, B^♮)``."""
    h = det3(H)
    rho = h - s * s
    adjH = adjugate(H)
    cols = []
    for n in range(21):
        z = np.zeros(21)
        z[n] = 1.0
        jet = _jet_from_vector(z, np.zeros((3, 3)))
        S = jet.S(H)
        c1 = natural_flat(jet.B) - (s * s / (h * rho)) * S
        # (H B_sym H) is symmetric, so only B^♮ enters through HBH
        c2 = natural_flat(jet.R @ H + H @ jet.B @ H) - adjH @ S / rho
        cols.append(np.r_[c1, c2])
    return np.array(cols).T


def sample_consistent_jet(H, U, s: float, seed, zero_K: bool = False, retries: int = 10) -> PointwiseJet:
    """A jet satisfying both closure constraints, by minimum-norm projection.

    A symmetric ``B`` and a candidate ``(K, B^♮)`` are drawn from ``seed``;
    the candidate is projected onto the null space of the constraint map.
    """
    H = np.asarray(H, dtype=np.float64)
    h = det3(H)
    if np.linalg.eigvalsh(0.5 * (H + H.T))[0] <= 0 or h - s * s <= 0:
        raise OutsideRegularRegime("outside regular regime")
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        X = rng.normal(size=(3, 3))
        B_sym = 0.5 * (X + X.T)
        z0 = rng.normal(size=21)
        M = _constraint_map(H, s)
        if zero_K:
            z0[:18] = 0.0
            M = M[:, 18:]
            z0 = z0[18:]
        if np.linalg.matrix_rank(M) < min(M.shape):
            continue
        z = z0 - np.linalg.pinv(M) @ (M @ z0)
        if zero_K:
            z = np.r_[np.zeros(18), z]
        return _jet_from_vector(z, B_sym)
    raise SingularRegime("constraint system rank-deficient after retries")


def theta_prime_matrix(state: FlowState, U_prime) -> np.ndarray:
    """Coefficients over ``e`` of ``θ' = (1/s) α' + (1/ρ) α``."""
    return np.asarray(U_prime) / state.s + state.U / state.rho


def theta_prime(state: FlowState, jet: PointwiseJet, base: BaseGeometry | None = None) -> FormTriple:
    T = theta_prime_matrix(state, flow_rhs(state, jet)["U_prime"])
    e = (base or BaseGeometry()).e
    return T @ e


# -- integration -------------------------------------------------------------------


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 1e-4
    direction: int = 1
    rho_min: float = 1e-6
    u_min: float = 1e-8
    s_min: float = 1e-8
    max_steps: int = 1_000_000
    s_end: float | None = None
    min_step: float = 1e-15
    state_max: float = 1e6

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ContractViolation("direction must be +1 or -1")
        for name in ("step", "rho_min", "u_min", "s_min", "min_step", "state_max"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} must be positive")
        if self.max_steps <= 0:
            raise ContractViolation("max_steps must be positive")


@dataclass(eq=False)
class FlowSolution:
    base: BaseGeometry
    s: np.ndarray
    U: np.ndarray
    H: np.ndarray
    h_integrated: np.ndarray
    residuals: dict
    termination: str
    passed: bool = True

    def __len__(self) -> int:
        return len(self.s)

    def state(self, i: int) -> FlowState:
        return FlowState(self.s[i], self.U[i], self.H[i])

    @property
    def s_final(self) -> float:
        return float(self.s[-1])

    def u_measure(self) -> np.ndarray:
        return np.cbrt(np.abs(np.linalg.det(self.U)))

    def rho(self) -> np.ndarray:
        return np.linalg.det(self.H) - self.s**2


def _u_measure(U) -> float:
    return float(np.cbrt(abs(det3(U))))


def _homogeneous_rhs(s: float, U: np.ndarray, H: np.ndarray, lam: np.ndarray):
    """Lean version of :func:`flow_rhs` for left-invariant data (``K = 0``)."""
    h = det3(H)
    rho = h - s * s
    dU = det3(U)
    if not (s != 0 and h > 0 and rho > 0 and abs(dU) > DET_U_MIN):
        raise SingularRegime("singular regime")
    B = (U * lam) @ U.T / dU
    HB = H @ B
    Hp = -H / s + (rho / (4.0 * h * s)) * (HB @ H)
    A = (s / (4.0 * h)) * HB.T
    A[np.diag_indices(3)] -= 5.0 * s / (2.0 * rho)
    return A @ U, Hp, B, h, rho


def _derivative(s: float, y: np.ndarray, lam: np.ndarray) -> np.ndarray:
    U = y[:9].reshape(3, 3)
    H = y[9:18].reshape(3, 3)
    Up, Hp, B, _, _ = _homogeneous_rhs(s, U, H, lam)
    # the independent h equation is driven by the integrated h, not det H
    h_int = y[18]
    hp = -3.0 * h_int / s + (h_int - s * s) / (4.0 * s) * float(np.sum(H * B.T))
    out = np.empty(19)
    out[:9] = Up.ravel()
    out[9:18] = Hp.ravel()
    out[18] = hp
    return out


def _rk4(s: float, y: np.ndarray, dt: float, lam: np.ndarray) -> np.ndarray:
    k1 = _derivative(s, y, lam)
    k2 = _derivative(s + dt / 2, y + dt / 2 * k1, lam)
    k3 = _derivative(s + dt / 2, y + dt / 2 * k2, lam)
    k4 = _derivative(s + dt, y + dt * k3, lam)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _monitors(s: float, y: np.ndarray) -> dict:
    U = y[:9].reshape(3, 3)
    H = y[9:18].reshape(3, 3)
    size = max(float(np.max(np.abs(y[:18]))), 1e-300)
    return {
        "rho_floor": det3(H) - s * s,
        "u_floor": _u_measure(U),
        "s_floor": abs(s),
        "state_ceiling": 1.0 / size,
    }


def _sample_residuals(s: float, y: np.ndarray, lam: np.ndarray) -> tuple:
    U = y[:9].reshape(3, 3)
    H = y[9:18].reshape(3, 3)
    _, Hp, B, h, rho = _homogeneous_rhs(s, U, H, lam)
    hp_trace = -3.0 * h / s + rho / (4.0 * s) * float(np.sum(H * B.T))
    hp_adj = float(np.sum(Hp.T * adjugate(H)))
    # for left-invariant data S = 0, so both closure constraints reduce to
    # the antisymmetric parts of B and HBH
    return (
        abs(h - y[18]),
        float(np.max(np.abs(H - H.T))),
        abs(hp_adj - hp_trace),
        float(np.linalg.norm(natural_flat(B))),
        float(np.linalg.norm(natural_flat(H @ B @ H))),
    )


RESIDUAL_NAMES = ("h_check", "symmetry", "h_prime", "b_natural", "rh_natural")


def integrate(initial: FlowState, base: BaseGeometry, config: IntegratorConfig = IntegratorConfig()) -> FlowSolution:
    """Classical RK4 with a fixed step, halved whenever a trial step would
    cross (or come close to crossing too fast) a stop threshold.

    H is never re-symmetrised; a symmetry drift above ``1e-8`` ends the run
    as a failure.
    """
    s = initial.s
    if s == 0:
        raise ContractViolation("degenerate start s = 0")
    h0 = initial.h
    if h0 - s * s <= 0 or np.linalg.eigvalsh(0.5 * (initial.H + initial.H.T))[0] <= 0:
        raise OutsideRegularRegime("initial state outside regular regime")
    if abs(det3(initial.U)) < 1e-14:
        raise ContractViolation("initial U is singular")
    thresholds = {
        "rho_floor": config.rho_min,
        "u_floor": config.u_min,
        "s_floor": config.s_min,
        "state_ceiling": 1.0 / config.state_max,
    }
    lam = np.asarray(base.lam, dtype=np.float64)
    y = np.concatenate([initial.U.ravel(), initial.H.ravel(), [h0]])
    s_list, y_list, r_list = [s], [y], [_sample_residuals(s, y, lam)]
    dt = config.step
    reason = "max_steps"
    passed = True
    steps = 0
    while steps < config.max_steps:
        if config.s_end is not None:
            remaining = (config.s_end - s) * config.direction
            if remaining <= 1e-14 * max(1.0, abs(s)):
                reason = "s_end"
                break
            dt_try = min(dt, remaining)
        else:
            dt_try = dt
        current = _monitors(s, y)
        crossed = None
        halved = False
        while True:
            s_new = s + config.direction * dt_try
            try:
                y_new = _rk4(s, y, config.direction * dt_try, lam)
                ok = bool(np.all(np.isfinite(y_new)))
            except (SingularRegime, np.linalg.LinAlgError, ZeroDivisionError):
                ok = False
            crossed = None
            if ok:
                new = _monitors(s_new, y_new)
                for key, limit in thresholds.items():
                    if new[key] <= limit:
                        crossed = key
                        break
                    if current[key] < 10.0 * limit and new[key] < 0.5 * current[key]:
                        crossed = key
                        break
            else:
                crossed = min(thresholds, key=lambda k: current[k] / thresholds[k])
            if crossed is None:
                break
            dt_try /= 2.0
            halved = True
            if dt_try < config.min_step:
                break
        if crossed is not None:
            reason = crossed
            break
        if halved:
            dt = dt_try
        s, y = s_new, y_new
        steps += 1
        s_list.append(s)
        y_list.append(y)
        r = _sample_residuals(s, y, lam)
        r_list.append(r)
        if r[1] > SYMMETRY_FAIL:
            reason = "symmetry_drift"
            passed = False
            break
    Y = np.array(y_list)
    R = np.array(r_list)
    return FlowSolution(
        base,
        np.array(s_list),
        Y[:, :9].reshape(-1, 3, 3),
        Y[:, 9:18].reshape(-1, 3, 3),
        Y[:, 18],
        {name: R[:, k] for k, name in enumerate(RESIDUAL_NAMES)},
        reason,
        passed,
    )


def integrate_interval(initial: FlowState, base: BaseGeometry, s_lo: float, s_hi: float, step: float = 1e-4, **kw) -> FlowSolution:
    """Integrate from ``initial.s`` in both directions and join into one increasing grid."""
    parts = []
    for direction, target in ((-1, s_lo), (1, s_hi)):
        if (target - initial.s) * direction <= 0:
            continue
        cfg = IntegratorConfig(step=step, direction=direction, s_end=target, **kw)
        parts.append(integrate(initial, base, cfg))
    if not parts:
        raise ContractViolation("empty interval")
    if len(parts) == 1:
        sol = parts[0]
        if sol.s[0] > sol.s[-1]:
            return _reverse(sol)
        return sol
    back, fwd = _reverse(parts[0]), parts[1]
    return FlowSolution(
        base,
        np.r_[back.s, fwd.s[1:]],
        np.concatenate([back.U, fwd.U[1:]]),
        np.concatenate([back.H, fwd.H[1:]]),
        np.r_[back.h_integrated, fwd.h_integrated[1:]],
        {k: np.r_[back.residuals[k], fwd.residuals[k][1:]] for k in RESIDUAL_NAMES},
        fwd.termination if back.termination == "s_end" else back.termination,
        back.passed and fwd.passed,
    )


def _reverse(sol: FlowSolution) -> FlowSolution:
    return FlowSolution(
        sol.base,
        sol.s[::-1].copy(),
        sol.U[::-1].copy(),
        sol.H[::-1].copy(),
        sol.h_integrated[::-1].copy(),
        {k: v[::-1].copy() for k, v in sol.residuals.items()},
        sol.termination,
        sol.passed,
    )


def parallel_map(fn, items) -> list:
    """Map over independent tasks; ``G2LAB_THREADS`` caps the worker count."""
    items = list(items)
    try:
        workers = max(1, int(os.environ.get("G2LAB_THREADS", "1")))
    except ValueError:
        workers = 1
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- reference solutions -------------------------------------------------------------


def r3_closed_form(s, s0: float) -> dict:
    """``r = s0/s`` and ``u = (s0³ - s⁵)^{1/2} / (c0 s0^{3/2})``, ``c0 = (1 - s0²)^{1/2}``."""
    s = np.asarray(s, dtype=np.float64)
    c0 = np.sqrt(1.0 - s0**2)
    return {"r": s0 / s, "u": np.sqrt(s0**3 - s**5) / (c0 * s0**1.5), "c0": c0}


def r3_endpoint(s0: float) -> float:
    """Zero of ``ρ = (s0³ - s⁵)/s³``."""
    return s0 ** 0.6


def su2_rhs(s: float, r: float, u: float) -> tuple[float, float]:
    """Reduced equations for ``H = r Id``, ``α = u e`` on the SU(2) base."""
    rho = r**3 - s**2
    return -r / s + rho / (4.0 * s * r * u), s / (4.0 * r**2) - 5.0 * s * u / (2.0 * rho)


def su2_curvature_coefficient(s, r, u):
    return (u / s) * (1.0 - 4.0 * r**2 * u / (r**3 - s**2))


def su2_theta_prime_coefficient(s, r, u):
    return 1.0 / (4.0 * r**2) - 3.0 * u / (2.0 * (r**3 - s**2))


# -- verification ----------------------------------------------------------------------

_FD_WEIGHTS = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def _uniform_centres(s: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    idx = []
    for i in range(2, len(s) - 2):
        d = np.diff(s[i - 2 : i + 3])
        if np.all(np.abs(d - d[0]) <= rtol * abs(d[0])):
            idx.append(i)
    return np.array(idx, dtype=int)


def _fd(values, i: int, ds: float):
    """Fourth-order central difference of ``values[i-2..i+2]``."""
    stack = np.asarray([values[j] for j in range(i - 2, i + 3)])
    return np.tensordot(_FD_WEIGHTS, stack, axes=1) / ds


def _triple_from_matrix(M, e: FormTriple) -> FormTriple:
    return np.asarray(M) @ e


def commutation_residuals(solution: FlowSolution, window=(0.1, 0.9), max_samples: int = 200) -> np.ndarray:
    """``∂_s`` of the curvature coefficients minus ``d_3`` of ``θ'`` (finite differences)."""
    s = solution.s
    centres = _select(_uniform_centres(s), s, window, max_samples)
    base = solution.base
    curv = {}
    out = []
    for i in centres:
        ds = s[i + 1] - s[i]
        for j in range(i - 2, i + 3):
            if j not in curv:
                curv[j] = curvature_matrix(solution.state(j).data(base))
        Cp = _fd(curv, i, ds)
        Up = _fd(solution.U, i, ds)
        T = theta_prime_matrix(solution.state(i), Up)
        out.append(float(np.max(np.abs(Cp - T @ np.diag(base.lam)))))
    return np.array(out)


def _select(centres: np.ndarray, s: np.ndarray, window, max_samples: int) -> np.ndarray:
    lo, hi = s[0], s[-1]
    a = lo + window[0] * (hi - lo)
    b = lo + window[1] * (hi - lo)
    inside = centres[(s[centres] >= a) & (s[centres] <= b)]
    if len(inside) > max_samples:
        pick = np.linspace(0, len(inside) - 1, max_samples).round().astype(int)
        inside = inside[pick]
    return inside


def verify_solution(
    solution: FlowSolution,
    base: BaseGeometry | None = None,
    window=(0.1, 0.9),
    max_samples: int = 25,
) -> dict:
    """Assemble the seven-dimensional structure at interior samples and measure
    ``dφ - 4⋆φ``.  All s-derivatives come from fourth-order central differences
    on the sample grid; the flow equations themselves are not reused.
    """
    base = base or solution.base
    s = solution.s
    if len(s) < 5:
        raise ContractViolation("too few samples to verify")
    centres = _uniform_centres(s)
    chosen = _select(centres, s, window, max_samples)
    if len(chosen) == 0:
        raise ContractViolation("too few samples to verify")
    e3 = base.e
    frame3 = base.frame
    ds7, _, e7 = seven_frame_generators()
    cache: dict = {}

    def at(j):
        if j not in cache:
            data = solution.state(j).data(base)
            cache[j] = {
                "data": data,
                "phi": seven_forms(data)["phi"].array,
                "curv": curvature_matrix(data),
                "sigma": 4.0 * data.h / data.rho * cofactor(data.U),
                "tau": tau_matrix(data),
            }
        return cache[j]

    report = {"s": [], "nearly_parallel": [], "deg0": [], "d_sigma": [], "theta_degree": [],
              "sigma_prime": [], "tau_prime": [], "d_squared": []}
    for i in chosen:
        dsi = s[i + 1] - s[i]
        for j in range(i - 2, i + 3):
            at(j)
        data = cache[i]["data"]
        rho, h, si = data.rho, data.h, data.s
        Up = _fd(solution.U, i, dsi)
        hp = _fd(np.linalg.det(solution.H), i, dsi)
        phi_p = _fd({j: cache[j]["phi"] for j in range(i - 2, i + 3)}, i, dsi)
        Cm = cache[i]["curv"]
        Cp = _fd({j: cache[j]["curv"] for j in range(i - 2, i + 3)}, i, dsi)
        sq3 = wedge_square(e3)
        curv3 = Cm @ sq3
        T = theta_prime_matrix(FlowState(si, data.U, data.H), Up)
        report["s"].append(float(si))
        try:
            structure = assemble_seven(data, curv3, T @ e3, Cp @ sq3, enforce_d_squared=False)
        except (NotAG2Form, ContractViolation):
            # the lifted form is not a G2 structure here; count as a failed sample
            for key in ("d_squared", "nearly_parallel"):
                report[key].append(np.inf)
            report["theta_degree"].append([np.inf] * 4)
        else:
            report["d_squared"].append(structure.frame.check_d_squared())
            dphi = exterior_derivative(SForm(structure.phi, KForm(7, 3, phi_p)), structure.frame)
            r = dphi - 4.0 * structure.star_phi
            report["nearly_parallel"].append(norm(r, structure.g))
            parts = theta_degree_parts(r)
            report["theta_degree"].append([norm(parts[k], structure.g) for k in range(4)])
        # degree 0 in θ: (4/ρ) dh ∧ vol_α = dν ∧ (dθ)^T ∧ β
        alpha7 = data.U @ e7
        vol_alpha = det3(data.U) * wedge(wedge(e7[0], e7[1]), e7[2])
        beta7 = data.H @ alpha7
        curv7 = _embed_triple(curv3, _E)
        lhs = (4.0 / rho) * hp * wedge(ds7, vol_alpha)
        rhs = wedge(ds7, curv7.dot(beta7))
        report["deg0"].append((lhs - rhs).max_abs())
        # degree 1 in θ: dσ + ν dν ∧ d(β/ρ) = 0, split into its d_3 and ds parts
        sigma_m = cache[i]["sigma"]
        sigma_p = _fd({j: cache[j]["sigma"] for j in range(i - 2, i + 3)}, i, dsi)
        sigma3 = sigma_m @ sq3
        d3_sigma = max(exterior_derivative(c, frame3).max_abs() for c in sigma3)
        beta_rho = (data.H @ data.U / rho) @ e3
        d3_beta_rho = FormTriple.of(*(exterior_derivative(c, frame3) for c in beta_rho))
        ds_part = (sigma_p @ sq3) + d3_beta_rho.scale(si)
        report["d_sigma"].append(max(d3_sigma, ds_part.max_abs()))
        report["sigma_prime"].append(ds_part.max_abs())
        # τ' = τ/s - (1/s) d_3((h/ρ) α)
        tau_p = _fd({j: cache[j]["tau"] for j in range(i - 2, i + 3)}, i, dsi)
        h_alpha = (h / rho * data.U) @ e3
        d3_h_alpha = FormTriple.of(*(exterior_derivative(c, frame3) for c in h_alpha))
        expected = (cache[i]["tau"] @ sq3).scale(1.0 / si) - d3_h_alpha.scale(1.0 / si)
        report["tau_prime"].append((tau_p @ sq3 - expected).max_abs())
    summary = {k: float(np.max(v)) for k, v in report.items() if k not in ("s", "theta_degree")}
    summary["samples"] = len(chosen)
    summary["theta_degree"] = np.max(np.array(report["theta_degree"]), axis=0).tolist()
    summary["detail"] = report
    return summary


def frozen_H_solution(solution: FlowSolution) -> FlowSolution:
    """Copy of a solution with ``H`` held at its initial value (detection test)."""
    H = np.repeat(solution.H[:1], len(solution), axis=0)
    return FlowSolution(solution.base, solution.s, solution.U, H, solution.h_integrated,
                        solution.residuals, solution.termination, solution.passed)
