"""The skew bracket and self-adjoint boundary conditions.

A boundary condition is a matrix pair ``(M, N)``. In *standard* coordinates it
reads ``M y(a) - N y(b) = 0``; in *bracket* coordinates it acts on the vectors
``((y, phi_j)(t))_j = Y0(t)* J y(t)`` built from the lambda = 0 frame. Both
forms are self-adjoint iff ``rank [M | N] = 2m`` and ``M J M* = N J N*``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, IntegrityError, ShapeError
from .propagation import FundamentalFrame
from .system import ValidationReport, Violation, symplectic_matrix
from .tolerances import DEFAULT_TOLERANCES, Tolerances

BRACKET = "bracket"
STANDARD = "standard"


def bracket(f, g) -> complex:
    """``(f, g) = g* J f``."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if f.shape != g.shape or f.ndim != 1 or f.size % 2:
        raise ShapeError(f"bracket needs two vectors of equal even length, got {f.shape}, {g.shape}")
    J = symplectic_matrix(f.size // 2)
    return complex(g.conj() @ J @ f)


@dataclass(frozen=True)
class BoundaryCondition:
    m: int
    M: np.ndarray
    N: np.ndarray
    coordinate_tag: str = STANDARD
    provenance: str = ""

    def __post_init__(self):
        M = np.array(self.M, dtype=complex)
        N = np.array(self.N, dtype=complex)
        shape = (2 * self.m, 2 * self.m)
        if M.shape != shape or N.shape != shape:
            raise ShapeError(f"M and N must be {shape}, got {M.shape} and {N.shape}")
        if self.coordinate_tag not in (BRACKET, STANDARD):
            raise ValueError(f"coordinate_tag must be {BRACKET!r} or {STANDARD!r}")
        M.setflags(write=False)
        N.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)

    def transformed(self, G) -> "BoundaryCondition":
        """The equivalent condition ``(G M, G N)`` for invertible ``G``."""
        G = np.asarray(G, dtype=complex)
        return BoundaryCondition(self.m, G @ self.M, G @ self.N, self.coordinate_tag, self.provenance)


@dataclass(frozen=True)
class BracketMatrix:
    value: np.ndarray
    point: float
    lam: complex


def bracket_matrix(frame_lambda: FundamentalFrame, frame_zero: FundamentalFrame, point) -> BracketMatrix:
    """``Y0(point)* J Y_lam(point)``; entry (j, i) is ``(phi_{i,lam}, phi_j)``."""
    if frame_zero.lam != 0:
        raise ValueError("frame_zero must be the lambda = 0 frame")
    same_spec = frame_lambda.spec is frame_zero.spec or (
        frame_lambda.spec.endpoints == frame_zero.spec.endpoints
    )
    if frame_lambda.anchor != frame_zero.anchor or not same_spec:
        raise IntegrityError("frames do not share spec and anchor")
    J = symplectic_matrix(frame_zero.spec.m)
    value = frame_zero.at(point).conj().T @ J @ frame_lambda.at(point)
    return BracketMatrix(value, point, frame_lambda.lam)


def validate_bc(bc: BoundaryCondition, tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    J = symplectic_matrix(bc.m)
    MN = np.hstack([bc.M, bc.N])
    s = np.linalg.svd(MN, compute_uv=False)
    rank = int(np.sum(s > tol.rank_bc * s[0])) if s[0] > 0 else 0
    defect = float(np.linalg.norm(bc.M @ J @ bc.M.conj().T - bc.N @ J @ bc.N.conj().T, 2))
    scale = float(np.linalg.norm(bc.M, 2) ** 2 + np.linalg.norm(bc.N, 2) ** 2)
    out = []
    if rank != 2 * bc.m:
        out.append(Violation("bc", "[M|N]", f"rank {rank} != {2 * bc.m}", float(s[-1])))
    if defect > tol.self_adjoint_bc * scale:
        out.append(Violation("bc", "MJM*-NJN*", "not zero", defect))
    return ValidationReport(tuple(out), {"rank": rank, "sa_defect": defect, "scale": scale})


def convert_standard_bc(M_std, N_std, frame_zero: FundamentalFrame, a_point=None, b_point=None) -> BoundaryCondition:
    """Bracket-coordinate pair equivalent to ``M_std y(a) - N_std y(b) = 0``.

    ``M = M_std (Y0(a)* J)^-1`` and likewise for ``N``; since ``Y0* J Y0 = J``
    the products ``M J M*`` and ``N J N*`` are unchanged.
    """
    spec = frame_zero.spec
    a, b = spec.endpoints if a_point is None else (a_point, b_point)
    J = symplectic_matrix(spec.m)
    M_std = np.asarray(M_std, dtype=complex)
    N_std = np.asarray(N_std, dtype=complex)
    out = []
    for X, p in ((M_std, a), (N_std, b)):
        K = frame_zero.at(p).conj().T @ J
        s = np.linalg.svd(K, compute_uv=False)
        if s[-1] <= 1e-12 * s[0]:
            raise IntegrityError(f"lambda = 0 frame is singular at {p}")
        # X K^{-1} computed as a right solve
        out.append(sla.solve(K.T, X.T).T)
    return BoundaryCondition(spec.m, out[0], out[1], BRACKET, "converted from standard coordinates")


# --------------------------------------------------------------------------
# constructors (standard coordinates)


def _blocks(m):
    return np.eye(m), np.zeros((m, m))


def dirichlet(m: int) -> BoundaryCondition:
    """``u(a) = 0`` and ``u(b) = 0``."""
    I, Z = _blocks(m)
    M = np.block([[I, Z], [Z, Z]])
    N = np.block([[Z, Z], [I, Z]])
    return BoundaryCondition(m, M, N, STANDARD, "dirichlet")


def neumann(m: int) -> BoundaryCondition:
    """``v(a) = 0`` and ``v(b) = 0``."""
    I, Z = _blocks(m)
    M = np.block([[Z, I], [Z, Z]])
    N = np.block([[Z, Z], [Z, I]])
    return BoundaryCondition(m, M, N, STANDARD, "neumann")


def separated(S_a, S_b) -> BoundaryCondition:
    """``u(a) + S_a v(a) = 0`` and ``u(b) + S_b v(b) = 0`` for Hermitian ``S_a, S_b``.

    Rows ``[I, S]`` span a Lagrangian subspace exactly when ``S`` is Hermitian.
    """
    S_a = np.atleast_2d(np.asarray(S_a, dtype=complex))
    S_b = np.atleast_2d(np.asarray(S_b, dtype=complex))
    m = S_a.shape[0]
    I, Z = _blocks(m)
    M = np.block([[I, S_a], [Z, Z]])
    N = np.block([[Z, Z], [-I, -S_b]])
    return BoundaryCondition(m, M, N, STANDARD, "separated")


def periodic(m: int) -> BoundaryCondition:
    return BoundaryCondition(m, np.eye(2 * m), np.eye(2 * m), STANDARD, "periodic")


def twisted_periodic(gamma: float, K=None, m: int | None = None) -> BoundaryCondition:
    """``y(a) = e^{i gamma} K y(b)`` with ``K`` real symplectic (identity by default)."""
    if K is None:
        if m is None:
            raise DomainError("give K or m")
        K = np.eye(2 * m)
    K = np.asarray(K, dtype=float)
    m = K.shape[0] // 2
    J = symplectic_matrix(m).real
    if np.linalg.norm(K.T @ J @ K - J) > 1e-10 * max(1.0, np.linalg.norm(K) ** 2):
        raise DomainError("K is not symplectic")
    return BoundaryCondition(m, np.eye(2 * m), np.exp(1j * gamma) * K, STANDARD, f"twisted_periodic(gamma={gamma})")


def from_matrices(M, N, coordinates: str = STANDARD) -> BoundaryCondition:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] % 2:
        raise ShapeError("M must be a 2m x 2m matrix")
    return BoundaryCondition(M.shape[0] // 2, M, N, coordinates, "user")


CONSTRUCTORS = {
    "dirichlet": dirichlet,
    "neumann": neumann,
    "periodic": periodic,
    "twisted_periodic": twisted_periodic,
    "separated": separated,
}
