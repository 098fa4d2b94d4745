"""Continuous and discrete linear Hamiltonian systems.

Continuous:  J y'(t) = (P(t) + lam W(t)) y(t),  t in [a, b].
Discrete:    J (y(n+1) - y(n)) = (P(n) + lam W(n)) R(y)(n),  n in [n_lo, n_hi],

with ``y = (u, v)``, ``R(y)(n) = (u(n+1), v(n))``, ``P(n) = [[-C, A*], [A, B]]``
and ``W(n) = diag(W1, W2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from scipy.integrate import simpson

from .coefficients import Coefficient, as_coefficient
from .errors import DomainError, PreconditionError, ShapeError
from .tolerances import DEFAULT_TOLERANCES, Tolerances


def symplectic_matrix(m: int) -> np.ndarray:
    """The 2m x 2m matrix ``[[0, -I], [I, 0]]``."""
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, -eye], [eye, zero]]).astype(complex)


@dataclass(frozen=True)
class SymplecticForm:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be a positive integer")

    @property
    def matrix(self) -> np.ndarray:
        return symplectic_matrix(self.m)


@dataclass(frozen=True)
class ContinuousSystem:
    m: int
    interval: tuple[float, float]
    P: Coefficient
    W: Coefficient
    anchor: float | None = None

    kind = "continuous"

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be a positive integer")
        a, b = (float(x) for x in self.interval)
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise DomainError(f"interval must be finite with a < b, got {self.interval}")
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "P", as_coefficient(self.P, 2 * self.m))
        object.__setattr__(self, "W", as_coefficient(self.W, 2 * self.m))
        anchor = a if self.anchor is None else float(self.anchor)
        if not a <= anchor <= b:
            raise DomainError(f"anchor {anchor} outside [{a}, {b}]")
        object.__setattr__(self, "anchor", anchor)

    @property
    def endpoints(self) -> tuple[float, float]:
        return self.interval

    @property
    def dim(self) -> int:
        return 2 * self.m

    def breakpoints(self) -> tuple[float, ...]:
        a, b = self.interval
        return tuple(sorted(set(self.P.breakpoints(a, b)) | set(self.W.breakpoints(a, b))))

    def check_points(self) -> np.ndarray:
        a, b = self.interval
        return np.unique(np.concatenate([self.P.check_points(a, b), self.W.check_points(a, b)]))

    def with_anchor(self, anchor: float) -> "ContinuousSystem":
        return ContinuousSystem(self.m, self.interval, self.P, self.W, anchor)

    def conj_transpose(self) -> "ContinuousSystem":
        return ContinuousSystem(
            self.m, self.interval, self.P.conj_transpose(), self.W.conj_transpose(), self.anchor
        )


SequenceInput = Union[np.ndarray, Sequence, Mapping[int, object]]


def _sequence(name: str, value, m: int, window: tuple[int, int]) -> np.ndarray:
    lo, hi = window
    count = hi - lo + 1
    if isinstance(value, Mapping):
        out = np.empty((count, m, m), dtype=complex)
        for n in range(lo, hi + 1):
            if n not in value:
                raise DomainError(f"sequence {name} has no entry for n={n}")
            out[n - lo] = np.asarray(value[n], dtype=complex)
    else:
        arr = np.asarray(value, dtype=complex)
        if arr.ndim == 0:
            arr = arr * np.eye(m)
        if arr.ndim == 2:
            out = np.broadcast_to(arr, (count,) + arr.shape).copy()
        elif arr.ndim == 3:
            if arr.shape[0] != count:
                missing = lo + min(arr.shape[0], count)
                raise DomainError(
                    f"sequence {name} has {arr.shape[0]} entries for a window of {count}; "
                    f"first problem at n={missing}"
                )
            out = arr.copy()
        else:
            raise ShapeError(f"sequence {name} must be a matrix or a list of matrices")
    if out.shape[1:] != (m, m):
        raise ShapeError(f"sequence {name} entries must be {m}x{m}, got {out.shape[1:]}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DiscreteSystem:
    m: int
    window: tuple[int, int]
    A: SequenceInput
    B: SequenceInput
    C: SequenceInput
    W1: SequenceInput
    W2: SequenceInput
    anchor: int | None = None

    kind = "discrete"

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be a positive integer")
        lo, hi = (int(x) for x in self.window)
        if lo > hi:
            raise DomainError(f"window must satisfy n_lo <= n_hi, got {self.window}")
        object.__setattr__(self, "window", (lo, hi))
        for name in ("A", "B", "C", "W1", "W2"):
            object.__setattr__(self, name, _sequence(name, getattr(self, name), self.m, (lo, hi)))
        anchor = lo if self.anchor is None else int(self.anchor)
        if not lo <= anchor <= hi + 1:
            raise DomainError(f"anchor {anchor} outside [{lo}, {hi + 1}]")
        object.__setattr__(self, "anchor", anchor)

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.window[0], self.window[1] + 1

    @property
    def dim(self) -> int:
        return 2 * self.m

    @property
    def size(self) -> int:
        return self.window[1] - self.window[0] + 1

    def index(self, n: int) -> int:
        lo, hi = self.window
        if not lo <= n <= hi:
            raise DomainError(f"n={n} outside window [{lo}, {hi}]")
        return n - lo

    def P(self, n: int) -> np.ndarray:
        k = self.index(n)
        A, B, C = self.A[k], self.B[k], self.C[k]
        return np.block([[-C, A.conj().T], [A, B]])

    def W(self, n: int) -> np.ndarray:
        k = self.index(n)
        z = np.zeros((self.m, self.m), dtype=complex)
        return np.block([[self.W1[k], z], [z, self.W2[k]]])

    def with_anchor(self, anchor: int) -> "DiscreteSystem":
        return DiscreteSystem(self.m, self.window, self.A, self.B, self.C, self.W1, self.W2, anchor)

    def conj_transpose(self) -> "DiscreteSystem":
        """Entry-wise conjugate transpose of B, C, W1, W2 (A is left alone)."""
        ct = lambda s: np.conj(np.swapaxes(s, 1, 2))
        return DiscreteSystem(
            self.m, self.window, self.A, ct(self.B), ct(self.C), ct(self.W1), ct(self.W2), self.anchor
        )


SystemSpec = Union[ContinuousSystem, DiscreteSystem]


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    location: float | int
    matrix: str
    kind: str
    magnitude: float

    def __str__(self):
        return f"{self.matrix} {self.kind} at {self.location} (magnitude {self.magnitude:.3g})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    details: Mapping[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def locations(self, matrix: str | None = None, kind: str | None = None) -> list:
        return [
            v.location
            for v in self.violations
            if (matrix is None or v.matrix == matrix) and (kind is None or v.kind == kind)
        ]


def _hermitian_defect(X: np.ndarray) -> tuple[float, float]:
    return float(np.linalg.norm(X - X.conj().T, 2)), float(np.linalg.norm(X, 2))


def _check_matrix(out, loc, name, X, tol: Tolerances, psd: bool):
    defect, scale = _hermitian_defect(X)
    if defect > tol.herm * scale:
        out.append(Violation(loc, name, "not Hermitian", defect))
        return
    if psd and X.size:
        lo = float(np.linalg.eigvalsh(0.5 * (X + X.conj().T))[0])
        if lo < -tol.psd * max(scale, np.finfo(float).tiny):
            out.append(Violation(loc, name, "not positive semidefinite", -lo))


def validate_continuous(spec: ContinuousSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """Check Hermitian P, W and W >= 0 at grid nodes and quadrature nodes.

    Raises :class:`EvaluationError` if a coefficient cannot be evaluated.
    """
    out: list[Violation] = []
    points = spec.check_points()
    for t in points:
        _check_matrix(out, float(t), "P", spec.P(t), tol, psd=False)
        _check_matrix(out, float(t), "W", spec.W(t), tol, psd=True)
    return ValidationReport(tuple(out), {"checked_points": len(points)})


def validate_discrete(spec: DiscreteSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """Check Hermitian B, C, W1, W2, W_i >= 0, and invertibility of I - A(n)."""
    out: list[Violation] = []
    eye = np.eye(spec.m)
    lo, hi = spec.window
    for n in range(lo, hi + 1):
        k = n - lo
        _check_matrix(out, n, "B", spec.B[k], tol, psd=False)
        _check_matrix(out, n, "C", spec.C[k], tol, psd=False)
        _check_matrix(out, n, "W1", spec.W1[k], tol, psd=True)
        _check_matrix(out, n, "W2", spec.W2[k], tol, psd=True)
        s = np.linalg.svd(eye - spec.A[k], compute_uv=False)
        if s[-1] <= 1e-12 * max(1.0, s[0]):
            out.append(Violation(n, "I-A", "singular (B1 fails)", float(s[-1])))
    return ValidationReport(tuple(out), {"checked_points": hi - lo + 1})


def validate(spec: SystemSpec, tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    if spec.kind == "continuous":
        return validate_continuous(spec, tol)
    return validate_discrete(spec, tol)


# --------------------------------------------------------------------------
# trajectories and the weighted semi-inner product


@dataclass(frozen=True)
class Trajectory:
    """Samples of a 2m-vector function: ``values[k]`` at ``points[k]``."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 2 or pts.ndim != 1 or len(pts) != len(vals):
            raise ShapeError(
                f"trajectory needs points (N,) and values (N, 2m); got {pts.shape}, {vals.shape}"
            )
        pts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __mul__(self, c):
        return Trajectory(self.points, c * self.values)

    __rmul__ = __mul__

    def __add__(self, other: "Trajectory"):
        return Trajectory(self.points, self.values + other.values)


def discrete_trajectory(spec: DiscreteSystem, values) -> Trajectory:
    lo, hi = spec.endpoints
    return Trajectory(np.arange(lo, hi + 1), values)


def _discrete_weighted_sum(spec: DiscreteSystem, f: np.ndarray, g: np.ndarray, lo: int, hi: int):
    """sum_{n=lo}^{hi} R(g)(n)* W(n) R(f)(n); f, g indexed from spec.window[0]."""
    m = spec.m
    base = spec.window[0]
    total = 0j
    for n in range(lo, hi + 1):
        k = n - base
        rf = np.concatenate([f[k + 1, :m], f[k, m:]])
        rg = np.concatenate([g[k + 1, :m], g[k, m:]])
        total += rg.conj() @ spec.W(n) @ rf
    return total


def weighted_inner_product(f: Trajectory, g: Trajectory, spec: SystemSpec) -> complex:
    """The semi-inner product ``<f, g>`` weighted by W (linear in ``f``).

    Continuous: composite Simpson quadrature of ``g* W f`` on the sample points.
    Discrete: ``sum R(g)* W R(f)`` over the whole window; trajectories must
    cover ``n_lo .. n_hi + 1``.
    """
    if f.values.shape != g.values.shape or not np.array_equal(f.points, g.points):
        raise ShapeError("trajectories are sampled differently")
    if f.values.shape[1] != spec.dim:
        raise ShapeError(f"trajectory dimension {f.values.shape[1]} != {spec.dim}")
    if spec.kind == "discrete":
        lo, hi = spec.endpoints
        if len(f.points) != hi - lo + 1 or f.points[0] != lo:
            raise ShapeError(f"discrete trajectory must cover n = {lo} .. {hi}")
        return complex(_discrete_weighted_sum(spec, f.values, g.values, lo, hi - 1))
    if len(f.points) < 2:
        raise ShapeError("continuous trajectory needs at least two points")
    integrand = np.array(
        [gv.conj() @ spec.W(t) @ fv for t, fv, gv in zip(f.points, f.values, g.values)]
    )
    return complex(simpson(integrand, x=f.points))


def weighted_norm(f: Trajectory, spec: SystemSpec) -> float:
    return float(np.sqrt(max(weighted_inner_product(f, f, spec).real, 0.0)))


# --------------------------------------------------------------------------
# definiteness probes


@dataclass(frozen=True)
class DefinitenessProbe:
    """Sampling probe for the definiteness conditions.

    Continuous windows are subintervals ``(s, t)``; discrete windows are index
    ranges ``(s, t)`` summed over ``n = s .. t``.
    """

    windows: tuple[tuple[float, float], ...]
    lambda_samples: tuple[complex, ...] = (0.0, 1.0)
    combination_count: int = 8
    seed: int = 0
    samples_per_window: int = 129

    def __post_init__(self):
        if not self.windows:
            raise PreconditionError("definiteness probe needs at least one window")
        object.__setattr__(self, "windows", tuple(tuple(w) for w in self.windows))
        object.__setattr__(self, "lambda_samples", tuple(complex(x) for x in self.lambda_samples))


@dataclass(frozen=True)
class DefinitenessEntry:
    lam: complex
    window: tuple
    min_norm: float
    min_ratio: float


@dataclass(frozen=True)
class DefinitenessReport:
    verdict: str
    entries: tuple[DefinitenessEntry, ...]
    note: str = "sampled certificate"

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


def check_definiteness(
    spec: SystemSpec,
    probe: DefinitenessProbe,
    frame_provider: Callable | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DefinitenessReport:
    """Sample weighted norms of solutions over each probe window.

    ``frame_provider(spec, lam, points)`` must return a fundamental frame
    storing every requested point; it defaults to
    :func:`hamspec.propagation.fundamental_matrix`.
    """
    if frame_provider is None:
        from .propagation import fundamental_matrix as frame_provider
    rng = np.random.default_rng(probe.seed)
    dim = spec.dim
    coeffs = [np.eye(dim)[:, i] for i in range(dim)]
    for _ in range(probe.combination_count):
        c = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        coeffs.append(c / np.linalg.norm(c))

    if spec.kind == "continuous":
        a, b = spec.interval
        grids = []
        for s, t in probe.windows:
            if not (a <= s < t <= b):
                raise DomainError(f"probe window ({s}, {t}) not inside [{a}, {b}]")
            n = probe.samples_per_window | 1
            grids.append(np.linspace(s, t, n))
        points = np.unique(np.concatenate(grids))
    else:
        lo, hi = spec.window
        for s, t in probe.windows:
            if not (lo <= s <= t <= hi):
                raise DomainError(f"probe window ({s}, {t}) not inside [{lo}, {hi}]")
        points = None

    entries = []
    passed = True
    for lam in probe.lambda_samples:
        frame = frame_provider(spec, lam, points)
        for w_index, window in enumerate(probe.windows):
            min_norm = np.inf
            min_ratio = np.inf
            for c in coeffs:
                if spec.kind == "continuous":
                    pts = grids[w_index]
                    ys = np.array([frame.at(t) @ c for t in pts])
                    traj = Trajectory(pts, ys)
                    norm2 = weighted_inner_product(traj, traj, spec).real
                    wmax = max(np.linalg.norm(spec.W(t), 2) for t in pts[:: max(1, len(pts) // 16)])
                    scale = np.max(np.sum(np.abs(ys) ** 2, axis=1)) * wmax * (pts[-1] - pts[0])
                else:
                    s, t = window
                    ys = np.array([frame.at(n) @ c for n in range(spec.window[0], spec.endpoints[1] + 1)])
                    norm2 = _discrete_weighted_sum(spec, ys, ys, int(s), int(t)).real
                    seg = ys[int(s) - spec.window[0]: int(t) - spec.window[0] + 2]
                    wmax = max(np.linalg.norm(spec.W(n), 2) for n in range(int(s), int(t) + 1))
                    scale = np.max(np.sum(np.abs(seg) ** 2, axis=1)) * wmax * (t - s + 1)
                ratio = norm2 / scale if scale > 0 else 0.0
                min_norm = min(min_norm, norm2)
                min_ratio = min(min_ratio, ratio)
            if not min_ratio > tol.definiteness:
                passed = False
            entries.append(DefinitenessEntry(lam, tuple(window), float(min_norm), float(min_ratio)))
    return DefinitenessReport("PASS" if passed else "FAIL", tuple(entries))
