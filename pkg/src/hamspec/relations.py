"""Finite-dimensional linear relations (multivalued operators) on ``X = C^d``.

A relation ``T`` is a subspace of ``X^2 = C^{2d}``; it is stored as an
orthonormal basis whose columns stack ``f`` over ``g`` for pairs ``(f, g)``.
All subspace algebra reduces to SVD-based ranges, null spaces and
intersections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import PreconditionError, ShapeError
from .tolerances import DEFAULT_TOLERANCES

_RCOND = 1e-10


def _orth(A: np.ndarray, rows: int) -> np.ndarray:
    A = np.asarray(A, dtype=complex).reshape(rows, -1)
    if A.shape[1] == 0 or not np.any(A):
        return np.zeros((rows, 0), dtype=complex)
    return sla.orth(A, rcond=_RCOND)


def _null(A: np.ndarray, cols: int) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    scale = max(1.0, float(np.abs(A).max()))
    # null_space's rcond is relative to the largest singular value; use an
    # absolute floor instead so that a zero block gives the full space
    u, s, vh = np.linalg.svd(A / scale)
    rank = int(np.sum(s > _RCOND))
    return vh[rank:].conj().T


def same_subspace(A: np.ndarray, B: np.ndarray, tol: float = DEFAULT_TOLERANCES.subspace) -> bool:
    """Whether two orthonormal bases span the same subspace (principal angles < tol)."""
    if A.shape[1] != B.shape[1]:
        return False
    if A.shape[1] == 0:
        return True
    return bool(np.max(sla.subspace_angles(A, B)) < tol)


def intersect(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``span A ∩ span B``."""
    rows = A.shape[0]
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros((rows, 0), dtype=complex)
    K = _null(np.hstack([A, -B]), A.shape[1] + B.shape[1])
    return _orth(A @ K[: A.shape[1]], rows)


def complement(A: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span A``."""
    rows = A.shape[0]
    if A.shape[1] == 0:
        return np.eye(rows, dtype=complex)
    return _orth(_null(A.conj().T, rows), rows)


@dataclass(frozen=True)
class LinearRelation:
    """A subspace ``T`` of ``X^2``; columns of ``basis`` are ``(f; g)`` pairs."""

    d: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim != 2 or B.shape[0] != 2 * self.d:
            raise ShapeError(f"basis must have {2 * self.d} rows, got shape {B.shape}")
        B = _orth(B, 2 * self.d)
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_pairs(cls, F, G) -> "LinearRelation":
        """Span of the pairs ``(F[:, j], G[:, j])``."""
        F = np.atleast_2d(np.asarray(F, dtype=complex))
        G = np.atleast_2d(np.asarray(G, dtype=complex))
        if F.shape != G.shape:
            raise ShapeError("F and G must have the same shape")
        return cls(F.shape[0], np.vstack([F, G]))

    @classmethod
    def graph(cls, H) -> "LinearRelation":
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        return cls.from_pairs(np.eye(H.shape[0]), H)

    @classmethod
    def zero(cls, d: int) -> "LinearRelation":
        return cls(d, np.zeros((2 * d, 0)))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def F(self) -> np.ndarray:
        return self.basis[: self.d]

    @property
    def G(self) -> np.ndarray:
        return self.basis[self.d :]

    def domain(self) -> np.ndarray:
        return _orth(self.F, self.d)

    def kernel(self) -> np.ndarray:
        """``N(T) = {f : (f, 0) in T}``."""
        return _orth(self.F @ _null(self.G, self.dim), self.d)

    def multivalued_part(self) -> np.ndarray:
        """``T(0) = {g : (0, g) in T}``."""
        return _orth(self.G @ _null(self.F, self.dim), self.d)

    def contains(self, f, g, tol: float = DEFAULT_TOLERANCES.subspace) -> bool:
        x = np.concatenate([np.asarray(f, dtype=complex), np.asarray(g, dtype=complex)])
        r = x - self.basis @ (self.basis.conj().T @ x)
        return bool(np.linalg.norm(r) <= tol * max(1.0, np.linalg.norm(x)))

    def equals(self, other: "LinearRelation", tol: float = DEFAULT_TOLERANCES.subspace) -> bool:
        return self.d == other.d and same_subspace(self.basis, other.basis, tol)

    def shifted(self, lam: complex) -> "LinearRelation":
        """``T - lam I = {(f, g - lam f) : (f, g) in T}``."""
        return LinearRelation.from_pairs(self.F, self.G - lam * self.F) if self.dim else self

    def __matmul__(self, other: "LinearRelation") -> "LinearRelation":
        return product(self, other)


def adjoint(T: LinearRelation) -> LinearRelation:
    """``T* = {(h, k) : <g, h> = <f, k> for all (f, g) in T}``.

    The defining identity says ``(h, k)`` is orthogonal to ``(g, -f)``, so
    ``T*`` is the orthogonal complement of ``U T`` with ``U(f, g) = (g, -f)``.
    """
    UT = np.vstack([T.G, -T.F])
    return LinearRelation(T.d, complement(UT) if T.dim else np.eye(2 * T.d))


def is_self_adjoint(T: LinearRelation, tol: float = DEFAULT_TOLERANCES.subspace) -> bool:
    return T.equals(adjoint(T), tol)


def product(T1: LinearRelation, T2: LinearRelation) -> LinearRelation:
    """``T1 T2 = {(f, g) : (f, h) in T2 and (h, g) in T1 for some h}``.

    The intermediate ``h`` is eliminated through the null space of
    ``[H2, -H1]`` where ``H2`` and ``H1`` are the matching basis blocks.
    """
    if T1.d != T2.d:
        raise ShapeError("relations act on different spaces")
    d = T1.d
    if T1.dim == 0 or T2.dim == 0:
        return LinearRelation.zero(d)
    K = _null(np.hstack([T2.G, -T1.F]), T2.dim + T1.dim)
    x, y = K[: T2.dim], K[T2.dim :]
    return LinearRelation.from_pairs(T2.F @ x, T1.G @ y) if K.shape[1] else LinearRelation.zero(d)


def power(T: LinearRelation, k: int) -> LinearRelation:
    if k < 1:
        raise ValueError("k must be a positive integer")
    out = T
    for _ in range(k - 1):
        out = product(T, out)
    return out


def kernel_power(T: LinearRelation, lam: complex, k: int) -> np.ndarray:
    """Orthonormal basis of ``N((T - lam I)^k)``."""
    return power(T.shifted(lam), k).kernel()


def _split(T: LinearRelation) -> tuple[LinearRelation, LinearRelation]:
    d = T.d
    T0 = T.multivalued_part()
    perp = complement(T0)
    zeros = np.zeros((d, T0.shape[1]), dtype=complex)
    T_inf = intersect(T.basis, np.vstack([zeros, T0]))
    zp = np.zeros_like(perp)
    square = np.vstack([np.hstack([perp, zp]), np.hstack([zp, perp])])
    T_s = intersect(T.basis, square)
    return LinearRelation(d, T_s), LinearRelation(d, T_inf)


def decompose(T: LinearRelation, tol: float = DEFAULT_TOLERANCES.subspace) -> tuple[LinearRelation, LinearRelation]:
    """Operator part and purely multivalued part of a self-adjoint relation.

    ``T_inf = T ∩ ({0} x T(0))`` and ``T_s = T ∩ (T(0)^⊥)^2``. Besides the
    direct sum, checks that ``T_s`` is the graph of a Hermitian operator on
    ``T(0)^⊥``.
    """
    if not is_self_adjoint(T, tol):
        raise PreconditionError("decompose needs a self-adjoint relation")
    T_s, T_inf = _split(T)
    if T_s.dim + T_inf.dim != T.dim:
        raise PreconditionError(f"dim T_s + dim T_inf = {T_s.dim + T_inf.dim} != dim T = {T.dim}")
    if T_s.multivalued_part().shape[1]:
        raise PreconditionError("T_s is not single-valued")
    H = operator_matrix(T_s)
    if np.linalg.norm(H - H.conj().T) > 1e-8 * max(1.0, np.linalg.norm(H)):
        raise PreconditionError("T_s is not a Hermitian operator")
    return T_s, T_inf


def operator_matrix(T: LinearRelation) -> np.ndarray:
    """Matrix of a single-valued relation, extended by zero off its domain."""
    if T.dim == 0:
        return np.zeros((T.d, T.d), dtype=complex)
    return T.G @ np.linalg.pinv(T.F, rcond=_RCOND)


@dataclass(frozen=True)
class LemmaCertificate:
    passed: bool
    lam: complex
    k_max: int
    first_violation: int | None
    failed_identity: str | None
    kernel_dims: tuple[int, ...]
    operator_kernel_dims: tuple[int, ...]


def certify_lemma(
    T: LinearRelation, lam: complex, k_max: int = 3, tol: float = DEFAULT_TOLERANCES.subspace
) -> LemmaCertificate:
    """Check ``N((T-lam)^i) = N((T_s-lam)^i)`` and ``N(T-lam) = N((T-lam)^i)`` for ``i <= k_max``.

    Works for any relation, so a non-self-adjoint input serves as a negative
    control; the first ``i`` at which an identity breaks is reported.
    """
    base = kernel_power(T, lam, 1)
    if base.shape[1] == 0:
        raise PreconditionError(f"{lam} is not an eigenvalue of the relation")
    T_s, _ = _split(T)
    dims, op_dims = [], []
    first, which = None, None
    for i in range(1, k_max + 1):
        Ni = kernel_power(T, lam, i)
        Ns = kernel_power(T_s, lam, i) if T_s.dim else np.zeros((T.d, 0), dtype=complex)
        dims.append(Ni.shape[1])
        op_dims.append(Ns.shape[1])
        if first is None:
            if not same_subspace(Ni, Ns, tol):
                first, which = i, "N((T-lam)^i) != N((T_s-lam)^i)"
            elif not same_subspace(base, Ni, tol):
                first, which = i, "N(T-lam) != N((T-lam)^i)"
    return LemmaCertificate(first is None, complex(lam), k_max, first, which, tuple(dims), tuple(op_dims))


def random_self_adjoint(d: int, rng: np.random.Generator, multivalued_dim: int | None = None) -> tuple[LinearRelation, np.ndarray]:
    """A random self-adjoint relation on ``C^d`` and the eigenvalues of its operator part.

    A random unitary splits ``X`` into an operator space carrying a random
    Hermitian matrix and a multivalued part ``T(0)``. Eigenvalues are drawn
    from a small integer set so repeated eigenvalues occur regularly.
    """
    if multivalued_dim is None:
        multivalued_dim = int(rng.integers(0, d))
    r = multivalued_dim
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, _ = np.linalg.qr(Z)
    V, Wm = Q[:, : d - r], Q[:, d - r :]
    eigs = rng.integers(-3, 4, size=d - r).astype(float)
    Zs = rng.standard_normal((d - r, d - r)) + 1j * rng.standard_normal((d - r, d - r))
    Us = np.linalg.qr(Zs)[0] if d > r else np.zeros((0, 0), dtype=complex)
    S = Us @ np.diag(eigs) @ Us.conj().T
    F = np.hstack([V, np.zeros((d, r))])
    G = np.hstack([V @ S, Wm])
    return LinearRelation.from_pairs(F, G), np.unique(eigs)


def nilpotent_control() -> LinearRelation:
    """Graph of ``[[0, 1], [0, 0]]``: not self-adjoint, and its kernel grows at i = 2."""
    return LinearRelation.graph(np.array([[0.0, 1.0], [0.0, 0.0]]))


@dataclass(frozen=True)
class SelftestResult:
    seed: int
    count: int
    max_dim: int
    passed: int
    failures: tuple[dict, ...]
    control_violation: int | None

    @property
    def ok(self) -> bool:
        return self.passed == self.count and not self.failures and self.control_violation == 2


def selftest(seed: int = 0, count: int = 100, max_dim: int = 8, k_max: int = 3) -> SelftestResult:
    """Randomized check of the kernel identities on self-adjoint relations."""
    rng = np.random.default_rng(seed)
    passed = 0
    failures = []
    for j in range(count):
        d = int(rng.integers(1, max_dim + 1))
        T, eigs = random_self_adjoint(d, rng)
        ok = is_self_adjoint(T)
        bad = []
        for lam in eigs:
            cert = certify_lemma(T, lam, k_max)
            if not cert.passed:
                bad.append({"lambda": float(lam), "first_violation": cert.first_violation})
        if ok and not bad:
            passed += 1
        else:
            failures.append({"index": j, "d": d, "self_adjoint": ok, "violations": bad})
    control = certify_lemma(nilpotent_control(), 0.0, k_max)
    return SelftestResult(seed, count, max_dim, passed, tuple(failures), control.first_violation)
