"""Dense exterior algebra over small frames (dimension <= 8).

A :class:`KForm` stores its coefficients in an array of length ``2**dim``
indexed by bitmask: generator ``e^i`` (1-based) is bit ``i - 1``.  All
operations return new objects; coefficient arrays are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._backend import kernels

MAX_DIM = 8
PRUNE_THRESHOLD = 1e-14
EQ_TOLERANCE = 1e-10


class ContractViolation(ValueError):
    """Raised when an operation's preconditions are not met."""


def set_prune_threshold(value: float) -> None:
    global PRUNE_THRESHOLD
    if value < 0:
        raise ValueError("prune threshold must be non-negative")
    PRUNE_THRESHOLD = float(value)


def _popcount(m: int) -> int:
    return bin(m).count("1")


def _mask_of(indices: Sequence[int], dim: int) -> tuple[int, float]:
    """Bitmask and permutation sign for an (unsorted) 1-based index tuple."""
    idx = list(indices)
    if any(i < 1 or i > dim for i in idx):
        raise ContractViolation(f"index out of range 1..{dim}: {indices}")
    if len(set(idx)) != len(idx):
        return 0, 0.0
    sign = 1.0
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                sign = -sign
    mask = 0
    for i in idx:
        mask |= 1 << (i - 1)
    return mask, sign


def mask_to_indices(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(MAX_DIM) if mask >> i & 1)


@lru_cache(maxsize=None)
def masks_of_degree(dim: int, degree: int) -> np.ndarray:
    return np.array(
        [m for m in range(1 << dim) if _popcount(m) == degree], dtype=np.int64
    )


class KForm:
    """A homogeneous exterior form of fixed degree on a ``dim``-dimensional frame."""

    __slots__ = ("dim", "degree", "_c")
    __hash__ = None  # equality is tolerance based

    def __init__(self, dim: int, degree: int, coeffs, prune: float | None = None):
        if not 1 <= dim <= MAX_DIM:
            raise ContractViolation(f"dimension must lie in 1..{MAX_DIM}, got {dim}")
        if not 0 <= degree <= dim:
            raise ContractViolation(f"degree {degree} invalid for dimension {dim}")
        c = np.array(coeffs, dtype=np.float64)
        if c.shape != (1 << dim,):
            raise ContractViolation("coefficient array has the wrong length")
        tol = PRUNE_THRESHOLD if prune is None else prune
        c[np.abs(c) < tol] = 0.0
        stray = np.flatnonzero(c)
        if stray.size and np.any(_POP[stray] != degree):
            raise ContractViolation("coefficient on an index set of the wrong degree")
        c.flags.writeable = False
        self.dim = dim
        self.degree = degree
        self._c = c

    # -- construction ---------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, degree: int) -> "KForm":
        return cls(dim, degree, np.zeros(1 << dim))

    @classmethod
    def scalar(cls, dim: int, value: float) -> "KForm":
        c = np.zeros(1 << dim)
        c[0] = value
        return cls(dim, 0, c)

    @classmethod
    def basis(cls, dim: int, *indices: int) -> "KForm":
        """``e^{i_1 ... i_k}``; repeated indices give zero, order sets the sign."""
        return cls.from_terms(dim, {tuple(indices): 1.0}, degree=len(indices))

    @classmethod
    def from_terms(
        cls,
        dim: int,
        terms: Mapping[Sequence[int], float],
        degree: int | None = None,
    ) -> "KForm":
        c = np.zeros(1 << dim)
        for idx, value in terms.items():
            idx = tuple(idx)
            if degree is None:
                degree = len(idx)
            elif len(idx) != degree:
                raise ContractViolation("mixed degrees in term map")
            mask, sign = _mask_of(idx, dim)
            if sign:
                c[mask] += sign * value
        if degree is None:
            raise ContractViolation("degree needed for an empty term map")
        return cls(dim, degree, c)

    @classmethod
    def one_form(cls, dim: int, vector: Sequence[float]) -> "KForm":
        c = np.zeros(1 << dim)
        for i, v in enumerate(vector):
            c[1 << i] = v
        return cls(dim, 1, c)

    # -- access ---------------------------------------------------------------
    @property
    def array(self) -> np.ndarray:
        return self._c

    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        return {mask_to_indices(int(m)): float(self._c[m]) for m in np.flatnonzero(self._c)}

    def coefficient(self, *indices: int) -> float:
        mask, sign = _mask_of(indices, self.dim)
        return sign * float(self._c[mask]) if sign else 0.0

    def components(self) -> np.ndarray:
        """Coefficients on the canonically ordered basis of this degree."""
        return self._c[masks_of_degree(self.dim, self.degree)]

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self._c) <= tol))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._c)))

    # -- arithmetic -----------------------------------------------------------
    def _check(self, other: "KForm") -> None:
        if not isinstance(other, KForm):
            raise TypeError("expected a KForm")
        if other.dim != self.dim:
            raise ContractViolation(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _same_degree(self, other: "KForm") -> None:
        self._check(other)
        if other.degree != self.degree and not (other.is_zero() or self.is_zero()):
            raise ContractViolation(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "KForm") -> "KForm":
        self._same_degree(other)
        deg = self.degree if not self.is_zero() else other.degree
        return KForm(self.dim, deg, self._c + other._c)

    def __sub__(self, other: "KForm") -> "KForm":
        self._same_degree(other)
        deg = self.degree if not self.is_zero() else other.degree
        return KForm(self.dim, deg, self._c - other._c)

    def __neg__(self) -> "KForm":
        return KForm(self.dim, self.degree, -self._c)

    def __mul__(self, scalar: float) -> "KForm":
        # form * form is the wedge product (binds tighter than +/-)
        if isinstance(scalar, KForm):
            return wedge(self, scalar)
        return KForm(self.dim, self.degree, float(scalar) * self._c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, KForm) or other.dim != self.dim:
            return False
        if self.degree != other.degree and not (self.is_zero() and other.is_zero()):
            return False
        return bool(np.max(np.abs(self._c - other._c)) < EQ_TOLERANCE)

    def allclose(self, other: "KForm", tol: float) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self._c - other._c)) <= tol)

    def __repr__(self) -> str:
        if self.is_zero():
            return f"KForm(dim={self.dim}, degree={self.degree}, 0)"
        parts = []
        for idx, v in self.terms.items():
            label = "e^" + "".join(str(i) for i in idx) if idx else "1"
            parts.append(f"{v:+.6g}*{label}")
        return f"KForm(dim={self.dim}, degree={self.degree}, " + " ".join(parts) + ")"

    # convenience wrappers
    def wedge(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def interior(self, v: Sequence[float]) -> "KForm":
        return interior(v, self)

    def evaluate(self, *vectors: Sequence[float]) -> float:
        """Full contraction ``a(v_1, ..., v_k)``."""
        if len(vectors) != self.degree:
            raise ContractViolation("number of vectors must equal the degree")
        out = self
        for v in vectors:
            out = interior(v, out)
        return float(out._c[0])


_POP = np.array([_popcount(m) for m in range(1 << MAX_DIM)], dtype=np.int64)


def wedge(a: KForm, b: KForm) -> KForm:
    """Exterior product ``a ^ b``."""
    a._check(b)
    deg = a.degree + b.degree
    if deg > a.dim:
        raise ContractViolation(f"degree {deg} exceeds dimension {a.dim}")
    return KForm(a.dim, deg, kernels.wedge(a._c, b._c, a.dim))


def wedge_all(forms: Iterable[KForm]) -> KForm:
    forms = list(forms)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def interior(v: Sequence[float], a: KForm) -> KForm:
    """Contraction ``v ⌟ a`` with a vector given in the dual basis ``E_1..E_n``."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (a.dim,):
        raise ContractViolation("vector length must equal the frame dimension")
    if a.degree == 0:
        return KForm.zero(a.dim, 0)
    vv = np.zeros(MAX_DIM)
    vv[: a.dim] = v
    return KForm(a.dim, a.degree - 1, kernels.interior(vv, a._c, a.dim))


# -- metric dependent operations --------------------------------------------


@lru_cache(maxsize=None)
def _index_table(dim: int, degree: int) -> np.ndarray:
    masks = masks_of_degree(dim, degree)
    return np.array([[i for i in range(dim) if m >> i & 1] for m in masks], dtype=np.int64).reshape(
        len(masks), degree
    )


def compound(matrix: np.ndarray, degree: int) -> np.ndarray:
    """``degree``-th compound matrix: all ``degree x degree`` minors."""
    n = matrix.shape[0]
    if degree == 0:
        return np.ones((1, 1))
    idx = _index_table(n, degree)
    sub = matrix[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def _check_metric(metric: np.ndarray, dim: int) -> np.ndarray:
    g = np.asarray(metric, dtype=np.float64)
    if g.shape != (dim, dim):
        raise ContractViolation("metric has the wrong shape")
    if not np.allclose(g, g.T, atol=1e-12, rtol=0):
        raise ContractViolation("metric must be symmetric")
    return g


def inner(a: KForm, b: KForm, metric: np.ndarray | None = None) -> float:
    """Induced inner product on forms of equal degree."""
    a._check(b)
    if metric is None:
        return float(np.dot(a._c, b._c)) if a.degree == b.degree else 0.0
    if a.degree != b.degree:
        return 0.0
    g = _check_metric(metric, a.dim)
    gram = compound(np.linalg.inv(g), a.degree)
    return float(a.components() @ gram @ b.components())


def norm(a: KForm, metric: np.ndarray | None = None) -> float:
    return float(np.sqrt(max(inner(a, a, metric), 0.0)))


@lru_cache(maxsize=64)
def _complement_signs(dim: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    full = (1 << dim) - 1
    masks = masks_of_degree(dim, degree)
    comp = np.array([full ^ int(m) for m in masks], dtype=np.int64)
    signs = np.array([kernels.wedge_sign(int(m), int(c)) for m, c in zip(masks, comp)])
    return comp, signs


def _star_matrix(g: np.ndarray, orientation: int, degree: int) -> np.ndarray:
    dim = g.shape[0]
    vol = orientation * np.sqrt(np.linalg.det(g))
    gram = compound(np.linalg.inv(g), degree)
    _, signs = _complement_signs(dim, degree)
    # rows: output mask (complement of K), columns: input mask I
    return vol * signs[:, None] * gram


def hodge_star(a: KForm, frame: "FrameAlgebra | np.ndarray | None" = None, orientation: int = 1) -> KForm:
    """Hodge star for the frame metric; ``a ^ *b = <a, b> vol``."""
    if isinstance(frame, FrameAlgebra):
        g, orientation = frame.metric, frame.orientation
    elif frame is None:
        g = np.eye(a.dim)
    else:
        g = _check_metric(frame, a.dim)
    if g.shape != (a.dim, a.dim):
        raise ContractViolation("dimension mismatch between form and metric")
    if np.linalg.eigvalsh(g)[0] <= 0:
        raise ContractViolation("metric must be positive-definite")
    star = _star_matrix(g, orientation, a.degree)
    comp, _ = _complement_signs(a.dim, a.degree)
    out = np.zeros(1 << a.dim)
    out[comp] = star @ a.components()
    return KForm(a.dim, a.dim - a.degree, out)


def volume_form(dim: int, metric: np.ndarray | None = None, orientation: int = 1) -> KForm:
    det = 1.0 if metric is None else float(np.linalg.det(metric))
    c = np.zeros(1 << dim)
    c[(1 << dim) - 1] = orientation * np.sqrt(det)
    return KForm(dim, dim, c)


# -- frames and the exterior derivative ---------------------------------------


@dataclass(frozen=True)
class SDependentScalar:
    value: float
    s_derivative: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.value) and np.isfinite(self.s_derivative)):
            raise ContractViolation("non-finite s-dependent scalar")


@dataclass(frozen=True)
class SForm:
    """A form with coefficients depending on the flow parameter ``s``."""

    value: KForm
    s_derivative: KForm

    @classmethod
    def from_terms(cls, dim: int, terms: Mapping[Sequence[int], SDependentScalar]) -> "SForm":
        degree = len(next(iter(terms))) if terms else 0
        val = KForm.from_terms(dim, {k: v.value for k, v in terms.items()}, degree)
        der = KForm.from_terms(dim, {k: v.s_derivative for k, v in terms.items()}, degree)
        return cls(val, der)


@dataclass(frozen=True, eq=False)
class FrameAlgebra:
    """A coframe ``e^1..e^n`` with prescribed differentials and a metric.

    ``s_index`` (1-based) marks the generator that plays the role of ``ds``;
    ``d_prime`` holds the s-derivatives of the generator differentials, needed
    only to check ``d^2 = 0`` when those differentials depend on ``s``.
    """

    dim: int
    d_of_generator: tuple
    metric: np.ndarray = None
    orientation: int = 1
    s_index: int | None = None
    d_prime: tuple | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.d_of_generator) != self.dim:
            raise ContractViolation("need one differential per generator")
        for i, f in enumerate(self.d_of_generator):
            if f is None:
                raise ContractViolation(f"generator {i + 1} has undefined differential")
            if f.dim != self.dim or (f.degree != 2 and not f.is_zero()):
                raise ContractViolation(f"d e^{i + 1} must be a 2-form on the frame")
        if self.metric is None:
            object.__setattr__(self, "metric", np.eye(self.dim))
        g = _check_metric(self.metric, self.dim)
        if np.linalg.eigvalsh(g)[0] <= 0:
            raise ContractViolation("metric must be positive-definite")
        g = g.copy()
        g.flags.writeable = False
        object.__setattr__(self, "metric", g)
        if self.orientation not in (1, -1):
            raise ContractViolation("orientation must be +1 or -1")
        if self.s_index is not None:
            if not self.d_of_generator[self.s_index - 1].is_zero():
                raise ContractViolation("the ds generator must be closed")

    @classmethod
    def bianchi(cls, lam: Sequence[float], metric=None) -> "FrameAlgebra":
        """Three-dimensional frame with ``d e^i = lam_i e^{jk}``."""
        d = tuple(
            float(lam[i]) * KForm.basis(3, j + 1, k + 1)
            for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1))
        )
        return cls(3, d, metric=metric)

    @classmethod
    def abelian(cls, dim: int, metric=None) -> "FrameAlgebra":
        return cls(dim, tuple(KForm.zero(dim, 2) for _ in range(dim)), metric=metric)

    def generator(self, i: int) -> KForm:
        return KForm.basis(self.dim, i)

    @property
    def volume(self) -> KForm:
        return volume_form(self.dim, self.metric, self.orientation)

    def d_matrix(self) -> np.ndarray:
        """Matrix of ``d`` acting on dense coefficient arrays (columns: d e^mask)."""
        D = self._cache.get("d")
        if D is None:
            size = 1 << self.dim
            cols: dict[int, np.ndarray] = {0: np.zeros(size)}
            gens = [f.array for f in self.d_of_generator]
            for m in range(1, size):
                low = m & -m
                i = low.bit_length() - 1
                rest = m ^ low
                # d(e^i ^ rest) = de^i ^ rest - e^i ^ d(rest)
                e_i = np.zeros(size)
                e_i[low] = 1.0
                rest_arr = np.zeros(size)
                rest_arr[rest] = 1.0
                cols[m] = kernels.wedge(gens[i], rest_arr, self.dim) - kernels.wedge(
                    e_i, cols[rest], self.dim
                )
            D = np.column_stack([cols[m] for m in range(size)])
            self._cache["d"] = D
        return D

    def check_d_squared(self) -> float:
        """Largest coefficient of ``d(d e^i)`` over all generators."""
        worst = 0.0
        for i, f in enumerate(self.d_of_generator):
            prime = None if self.d_prime is None else self.d_prime[i]
            dd = exterior_derivative(SForm(f, prime) if prime is not None else f, self)
            worst = max(worst, dd.max_abs())
        return worst


def exterior_derivative(a: KForm | SForm, frame: FrameAlgebra) -> KForm:
    """``d a`` on the frame; s-dependent coefficients contribute ``ds ^ a'``."""
    prime = None
    if isinstance(a, SForm):
        a, prime = a.value, a.s_derivative
    if a.dim != frame.dim:
        raise ContractViolation("dimension mismatch between form and frame")
    if a.degree + 1 > a.dim:
        return KForm.zero(a.dim, a.dim)
    out = frame.d_matrix() @ a.array
    if prime is not None and not prime.is_zero():
        if frame.s_index is None:
            raise ContractViolation("frame has no ds generator for s-dependent coefficients")
        out = out + kernels.wedge(KForm.basis(frame.dim, frame.s_index).array, prime.array, frame.dim)
    return KForm(a.dim, a.degree + 1, out)


# -- R^3-valued forms ----------------------------------------------------------

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


@dataclass(frozen=True, eq=False)
class FormTriple:
    """An R^3-valued form ``(γ_1, γ_2, γ_3)^T``; ``M @ triple`` mixes components."""

    components: tuple
    __array_ufunc__ = None  # let ndarray @ FormTriple reach __rmatmul__

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 3:
            raise ContractViolation("a FormTriple has exactly three components")
        dims = {c.dim for c in comps}
        degs = {c.degree for c in comps if not c.is_zero()}
        if len(dims) != 1 or len(degs) > 1:
            raise ContractViolation("components must share dimension and degree")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *forms: KForm) -> "FormTriple":
        return cls(tuple(forms))

    @classmethod
    def from_matrix(cls, matrix, basis: Sequence[KForm]) -> "FormTriple":
        """``γ_i = Σ_a M_ia b_a`` for a basis triple ``b``."""
        M = np.asarray(matrix, dtype=np.float64)
        dim = basis[0].dim
        deg = basis[0].degree
        out = []
        for i in range(3):
            c = sum((M[i, a] * basis[a].array for a in range(len(basis))), np.zeros(1 << dim))
            out.append(KForm(dim, deg, c))
        return cls(tuple(out))

    def __getitem__(self, i: int) -> KForm:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def degree(self) -> int:
        degs = [c.degree for c in self.components if not c.is_zero()]
        return degs[0] if degs else self.components[0].degree

    def __add__(self, other: "FormTriple") -> "FormTriple":
        return FormTriple(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "FormTriple") -> "FormTriple":
        return FormTriple(tuple(a - b for a, b in zip(self, other)))

    def __neg__(self) -> "FormTriple":
        return FormTriple(tuple(-a for a in self))

    def scale(self, c: float) -> "FormTriple":
        return FormTriple(tuple(c * a for a in self))

    def __rmatmul__(self, matrix) -> "FormTriple":
        M = np.asarray(matrix, dtype=np.float64)
        arrs = np.stack([c.array for c in self.components])
        new = M @ arrs
        return FormTriple(tuple(KForm(self.dim, self.degree, new[i]) for i in range(3)))

    def dot(self, other: "FormTriple") -> KForm:
        """``γ^T ∧ δ = Σ_i γ_i ∧ δ_i``."""
        out = wedge(self[0], other[0])
        for i in (1, 2):
            out = out + wedge(self[i], other[i])
        return out

    def wedge_left(self, form: KForm) -> "FormTriple":
        """``form ∧ γ_i`` componentwise."""
        return FormTriple(tuple(wedge(form, c) for c in self))

    def max_abs(self) -> float:
        return max(c.max_abs() for c in self)

    def allclose(self, other: "FormTriple", tol: float) -> bool:
        return all(a.allclose(b, tol) for a, b in zip(self, other))

    def coefficient_matrix(self, basis: Sequence[KForm]) -> np.ndarray:
        """Solve ``γ = M b`` for a basis triple (least squares on coefficients)."""
        Bm = np.stack([b.array for b in basis], axis=1)
        G = np.stack([c.array for c in self.components], axis=0)
        sol, *_ = np.linalg.lstsq(Bm, G.T, rcond=None)
        return sol.T


def wedge_square(gamma: FormTriple) -> FormTriple:
    """``(γ ⊼ γ)_i = γ_j ∧ γ_k`` for cyclic ``(ijk)``."""
    return barwedge(gamma, gamma)


def barwedge(gamma: FormTriple, delta: FormTriple) -> FormTriple:
    """``(γ ⊼ δ)_i = γ_j ∧ δ_k`` for cyclic ``(ijk)``."""
    return FormTriple(tuple(wedge(gamma[j], delta[k]) for _, j, k in _CYCLIC))


def natural_flat(X) -> np.ndarray:
    """``(X^♮)_i = X_jk - X_kj``; vanishes exactly on symmetric matrices."""
    X = np.asarray(X, dtype=np.float64)
    return np.array([X[j, k] - X[k, j] for _, j, k in _CYCLIC])


def from_natural_flat(v) -> np.ndarray:
    """Antisymmetric matrix ``Y`` with ``Y^♮ = v``."""
    Y = np.zeros((3, 3))
    for (i, j, k), vi in zip(_CYCLIC, v):
        Y[j, k] = vi / 2.0
        Y[k, j] = -vi / 2.0
    return Y


def adjugate(H) -> np.ndarray:
    """Classical adjugate, ``H @ adjugate(H) = det(H) Id``."""
    a = np.asarray(H, dtype=np.float64)
    if a.shape == (3, 3):
        return np.array(
            [
                [a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1], a[0, 2] * a[2, 1] - a[0, 1] * a[2, 2], a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1]],
                [a[1, 2] * a[2, 0] - a[1, 0] * a[2, 2], a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0], a[0, 2] * a[1, 0] - a[0, 0] * a[1, 2]],
                [a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0], a[0, 1] * a[2, 0] - a[0, 0] * a[2, 1], a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]],
            ]
        )
    n = a.shape[0]
    adj = np.empty_like(a)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, j, axis=0), i, axis=1)
            adj[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def det3(H) -> float:
    a = np.asarray(H, dtype=np.float64)
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def pullback(a: KForm, matrix) -> KForm:
    """Pull ``a`` back along a linear map whose columns are the images of the new
    basis vectors (``matrix`` has shape ``(a.dim, new_dim)``)."""
    M = np.asarray(matrix, dtype=np.float64)
    if M.shape[0] != a.dim:
        raise ContractViolation("matrix rows must match the form dimension")
    new_dim = M.shape[1]
    if a.degree > new_dim:
        raise ContractViolation("degree exceeds the target dimension")
    src = _index_table(a.dim, a.degree)
    dst = _index_table(new_dim, a.degree)
    if a.degree == 0:
        out = np.zeros(1 << new_dim)
        out[0] = a.array[0]
        return KForm(new_dim, 0, out)
    minors = np.linalg.det(M[src[:, None, :, None], dst[None, :, None, :]])
    out = np.zeros(1 << new_dim)
    out[masks_of_degree(new_dim, a.degree)] = a.components() @ minors
    return KForm(new_dim, a.degree, out)


def lie_derivative_linear(A, a: KForm) -> KForm:
    """Lie derivative of a constant-coefficient form along ``V(x) = A x``.

    ``L_V`` is the degree-zero derivation extending ``dx^i -> Σ_j A_ij dx^j``.
    """
    A = np.asarray(A, dtype=np.float64)
    out = KForm.zero(a.dim, a.degree)
    if a.degree == 0:
        return out
    basis = np.eye(a.dim)
    for k in range(a.dim):
        contracted = interior(basis[k], a)
        if contracted.is_zero():
            continue
        out = out + wedge(KForm.one_form(a.dim, A[k]), contracted)
    return out
