"""The characteristic function ``Gamma(lam) = det(M Phi_lam(a) - N Phi_lam(b))``.

With ``Phi_lam(t) = Y0(t)* J Y_lam(t)`` the matrix inside the determinant is
``G(lam) = L_a Y_lam(a) - L_b Y_lam(b)`` where ``L_a = M Y0(a)* J`` and
``L_b = N Y0(b)* J`` do not depend on ``lam``; they are computed once per
problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bc import BRACKET, BoundaryCondition, convert_standard_bc, validate_bc
from .errors import PreconditionError
from .propagation import FundamentalFrame, fundamental_frames
from .system import SystemSpec, symplectic_matrix
from .tolerances import DEFAULT_TOLERANCES, Tolerances


ZERO_FRAME_RTOL = 1e-12


def zero_frame(spec: SystemSpec, tol: Tolerances = DEFAULT_TOLERANCES) -> FundamentalFrame:
    """The lambda = 0 frame at both endpoints.

    It is integrated more tightly than the default so that bracket
    coordinates inherit ``Y0* J Y0 = J`` essentially to rounding; one extra
    frame is cheap.
    """
    rtol = min(tol.rtol, ZERO_FRAME_RTOL)
    return fundamental_frames(spec, [0.0], spec.endpoints, rtol=rtol, atol=min(tol.atol, rtol * 1e-3))[0]


@dataclass(frozen=True)
class CharacteristicProblem:
    """A system, a bracket-coordinate boundary condition and solver settings.

    Build it with :func:`make_problem`, which converts standard-coordinate
    conditions and checks self-adjointness.
    """

    spec: SystemSpec
    bc: BoundaryCondition
    tol: Tolerances = DEFAULT_TOLERANCES
    zero_frame: FundamentalFrame = field(default=None, repr=False)
    L_a: np.ndarray = field(default=None, repr=False)
    L_b: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.bc.coordinate_tag != BRACKET:
            raise PreconditionError("CharacteristicProblem needs bracket coordinates; use make_problem")
        if self.bc.m != self.spec.m:
            raise PreconditionError("boundary condition and system have different m")
        report = validate_bc(self.bc, self.tol)
        if not report.ok:
            raise PreconditionError(f"boundary condition is not self-adjoint: {report.violations}")
        if self.zero_frame is None:
            object.__setattr__(
                self, "zero_frame", zero_frame(self.spec, self.tol)
            )
        J = symplectic_matrix(self.spec.m)
        a, b = self.endpoints
        L_a = self.bc.M @ self.zero_frame.at(a).conj().T @ J
        L_b = self.bc.N @ self.zero_frame.at(b).conj().T @ J
        L_a.setflags(write=False)
        L_b.setflags(write=False)
        object.__setattr__(self, "L_a", L_a)
        object.__setattr__(self, "L_b", L_b)

    @property
    def endpoints(self):
        return self.spec.endpoints

    @property
    def anchor(self):
        return self.spec.anchor

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def rtol(self) -> float:
        return self.tol.rtol

    @property
    def noise_level(self) -> float:
        """Expected relative error of the frame values."""
        if self.spec.kind == "continuous":
            return max(self.tol.rtol, self.tol.atol)
        return 1e-14 * (self.spec.size + 1)

    @property
    def boundary_threshold(self) -> float:
        """Smallest trusted ``sigma_min(G) / ||G||``-type modulus on a contour.

        ``tol.boundary`` is stated for the default integration tolerance and
        scales with the actual noise level, so exact discrete recursions are
        not held to the continuous integrator's accuracy.
        """
        return self.tol.boundary * self.noise_level / DEFAULT_TOLERANCES.rtol

    def with_tolerances(self, **overrides) -> "CharacteristicProblem":
        tol = self.tol.updated(**overrides)
        zero = self.zero_frame if tol.rtol == self.tol.rtol else None
        return CharacteristicProblem(self.spec, self.bc, tol, zero)

    def transformed(self, G) -> "CharacteristicProblem":
        """Same problem with ``(M, N)`` replaced by ``(G M, G N)``."""
        return CharacteristicProblem(self.spec, self.bc.transformed(G), self.tol, self.zero_frame)


def make_problem(spec: SystemSpec, bc: BoundaryCondition, tol: Tolerances = DEFAULT_TOLERANCES) -> CharacteristicProblem:
    if bc.m != spec.m:
        raise PreconditionError("boundary condition and system have different m")
    zero = zero_frame(spec, tol)
    if bc.coordinate_tag != BRACKET:
        report = validate_bc(bc, tol)
        if not report.ok:
            raise PreconditionError(f"boundary condition is not self-adjoint: {report.violations}")
        bc = convert_standard_bc(bc.M, bc.N, zero)
    return CharacteristicProblem(spec, bc, tol, zero)


@dataclass(frozen=True)
class GammaBatch:
    """Characteristic data for a batch of ``lam`` values.

    ``scale`` is ``(||L_a Y(a)|| + ||L_b Y(b)||)^(2m)``, a Hadamard-type bound
    for ``|Gamma|``. ``rel_moduli`` is ``sigma_min(G) / (||L_a Y(a)|| + ||L_b Y(b)||)``,
    the relative distance of ``G`` to a singular matrix; it stays meaningful
    when the frame mixes growing and decaying modes, where ``|Gamma| / scale``
    collapses even though ``Gamma`` is computed accurately.
    """

    lams: np.ndarray
    values: np.ndarray
    scales: np.ndarray
    G: np.ndarray
    g_scales: np.ndarray
    rel_moduli: np.ndarray
    derivatives: np.ndarray | None = None
    dG: np.ndarray | None = None
    dg_scales: np.ndarray | None = None
    frames: list | None = None


def adjugate(G: np.ndarray) -> np.ndarray:
    """Adjugate of a (batch of) square matrices, stable at singular ``G``."""
    U, s, Vh = np.linalg.svd(G)
    n = s.shape[-1]
    prods = np.empty_like(s)
    for i in range(n):
        prods[..., i] = np.prod(np.delete(s, i, axis=-1), axis=-1)
    phase = np.linalg.det(U) * np.linalg.det(Vh)
    adj = np.conj(np.swapaxes(Vh, -1, -2)) @ (prods[..., :, None] * np.conj(np.swapaxes(U, -1, -2)))
    return phase[..., None, None] * adj


def gamma_batch(
    problem: CharacteristicProblem,
    lams,
    derivative: bool = False,
    keep_frames: bool = False,
    points=None,
) -> GammaBatch:
    lams = np.asarray(lams, dtype=complex).reshape(-1)
    a, b = problem.endpoints
    pts = [a, b] if points is None else np.concatenate([[a, b], np.asarray(points, dtype=float)])
    frames = fundamental_frames(problem.spec, lams, pts, derivative=derivative, rtol=problem.rtol)
    Ya = np.array([f.at(a) for f in frames])
    Yb = np.array([f.at(b) for f in frames])
    Ga = problem.L_a[None] @ Ya
    Gb = problem.L_b[None] @ Yb
    G = Ga - Gb
    g_scales = np.linalg.norm(Ga, 2, axis=(1, 2)) + np.linalg.norm(Gb, 2, axis=(1, 2))
    values = np.linalg.det(G)
    scales = g_scales ** problem.dim
    smin = np.linalg.svd(G, compute_uv=False)[:, -1]
    rel = np.where(g_scales > 0, smin / np.where(g_scales > 0, g_scales, 1.0), 0.0)
    out = dict(lams=lams, values=values, scales=scales, G=G, g_scales=g_scales, rel_moduli=rel)
    if derivative:
        dGa = problem.L_a[None] @ np.array([f.derivative_at(a) for f in frames])
        dGb = problem.L_b[None] @ np.array([f.derivative_at(b) for f in frames])
        dG = dGa - dGb
        out["dG"] = dG
        out["dg_scales"] = np.linalg.norm(dGa, 2, axis=(1, 2)) + np.linalg.norm(dGb, 2, axis=(1, 2))
        out["derivatives"] = np.einsum("lij,lji->l", adjugate(G), dG)
    if keep_frames:
        out["frames"] = frames
    return GammaBatch(**out)


def gamma(problem: CharacteristicProblem, lam) -> complex:
    return complex(gamma_batch(problem, [lam]).values[0])


def gamma_with_scale(problem: CharacteristicProblem, lam) -> tuple[complex, float]:
    batch = gamma_batch(problem, [lam])
    return complex(batch.values[0]), float(batch.scales[0])


def gamma_matrix(problem: CharacteristicProblem, lam) -> np.ndarray:
    """``G(lam) = M Phi_lam(a) - N Phi_lam(b)``."""
    return gamma_batch(problem, [lam]).G[0]


def gamma_derivative(problem: CharacteristicProblem, lam) -> complex:
    """``Gamma'(lam) = tr(adj(G) G')`` (Jacobi's formula)."""
    return complex(gamma_batch(problem, [lam], derivative=True).derivatives[0])
