"""Fundamental solution frames and their lambda-derivatives.

Continuous frames solve ``Y' = -J (P(t) + lam W(t)) Y`` with ``Y(anchor) = I``
using an embedded Dormand-Prince 5(4) pair. Several values of ``lam`` are
integrated together on one shared step sequence, which keeps contour sweeps
cheap and makes finite differences in ``lam`` taken inside one batch smooth.

Discrete frames iterate the one-step map obtained by solving the difference
equation for ``y(n+1)`` (or ``y(n)`` when stepping backwards).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, StepError, StiffnessError
from .system import ContinuousSystem, DiscreteSystem, SystemSpec, symplectic_matrix
from .tolerances import DEFAULT_TOLERANCES


class StepDirection(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class FundamentalFrame:
    """Values of ``Y_lam`` (and optionally ``dY_lam/dlam``) at stored points."""

    spec: SystemSpec
    lam: complex
    anchor: float
    points: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray | None = None
    stats: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("points", "values", "derivative_values"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    def index(self, point) -> int:
        pts = self.points
        k = int(np.searchsorted(pts, point))
        scale = 1e-12 * max(1.0, abs(float(point)))
        for j in (k - 1, k):
            if 0 <= j < len(pts) and abs(pts[j] - point) <= scale:
                return j
        raise LookupError(f"frame does not store point {point}")

    def at(self, point) -> np.ndarray:
        return self.values[self.index(point)]

    def derivative_at(self, point) -> np.ndarray:
        if self.derivative_values is None:
            raise LookupError("frame was built without lambda-derivatives")
        return self.derivative_values[self.index(point)]

    def has(self, point) -> bool:
        try:
            self.index(point)
        except LookupError:
            return False
        return True

    def solution(self, c) -> np.ndarray:
        """Samples of ``Y(t) c`` at every stored point, shape (N, 2m)."""
        return self.values @ np.asarray(c, dtype=complex)


# --------------------------------------------------------------------------
# continuous: batched Dormand-Prince 5(4)

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array(_A[6] + [0.0])
_E = _B5 - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


class _ContinuousIntegrator:
    def __init__(self, spec: ContinuousSystem, lams, derivative: bool, rtol: float, atol: float):
        self.spec = spec
        self.lams = np.asarray(lams, dtype=complex).reshape(-1)
        self.derivative = derivative
        self.rtol = rtol
        self.atol = atol
        self.J = symplectic_matrix(spec.m)
        self.constant = spec.P.is_constant and spec.W.is_constant
        self._cached = self._base(spec.anchor) if self.constant else None
        self.accepted = 0
        self.rejected = 0

    def _base(self, t):
        P = self.spec.P(t)
        W = self.spec.W(t)
        return -self.J @ P, -self.J @ W

    def _system(self, t):
        KP, KW = self._cached if self.constant else self._base(t)
        return KP[None] + self.lams[:, None, None] * KW[None], KW

    def _rhs(self, t, state):
        A, KW = self._system(t)
        if not self.derivative:
            return A @ state
        dim = self.spec.dim
        Y, dY = state[:, :dim], state[:, dim:]
        return np.concatenate([A @ Y, A @ dY + KW[None] @ Y], axis=1)

    def _error_norm(self, err, y0, y1):
        dim = self.spec.dim
        e, a, b = err[:, :dim], y0[:, :dim], y1[:, :dim]
        scale = self.atol + self.rtol * np.maximum(
            np.abs(a).max(axis=(1, 2)), np.abs(b).max(axis=(1, 2))
        )
        rms = np.sqrt(np.mean(np.abs(e) ** 2, axis=(1, 2)))
        return float(np.max(rms / scale))

    def run(self, targets: Sequence[float]) -> list[np.ndarray]:
        """Integrate from the anchor through ``targets`` (monotone, same side)."""
        spec = self.spec
        dim = spec.dim
        L = len(self.lams)
        rows = 2 * dim if self.derivative else dim
        y = np.zeros((L, rows, dim), dtype=complex)
        y[:, :dim] = np.eye(dim)
        t = spec.anchor
        out = []
        if not targets:
            return out
        direction = 1.0 if targets[-1] >= t else -1.0
        stops = sorted(
            {float(x) for x in spec.breakpoints()} | {float(x) for x in targets},
            key=lambda s: direction * s,
        )
        stops = [s for s in stops if direction * (s - t) > 0 or s == t]
        span = abs(targets[-1] - t)
        nudge = lambda s: s + direction * 1e-13 * max(1.0, abs(s))
        f0 = self._rhs(nudge(t), y)
        scale_f = float(np.max(np.abs(f0))) + 1e-300
        h = min(span, 0.01 / scale_f * max(1.0, float(np.max(np.abs(y))))) if span > 0 else 0.0
        h = max(h, 1e-6 * span)
        target_set = {float(x) for x in targets}
        hmin_rel = 1e-13
        for stop in stops:
            while direction * (stop - t) > 0:
                remaining = abs(stop - t)
                land = h >= remaining * (1 - 1e-12)
                step = remaining if land else h
                if step <= hmin_rel * max(1.0, abs(t)):
                    raise StiffnessError(f"step size underflow at t={t}", t=t)
                dt = direction * step
                ks = [f0]
                for i in range(1, 7):
                    yi = y + dt * sum(a * k for a, k in zip(_A[i], ks) if a != 0.0)
                    ti = t + _C[i] * dt
                    if i == 6:
                        ynew = yi
                        # one-sided limit at the step end (coefficients may jump there)
                        ti = t + dt * (1 - 1e-13)
                    ks.append(self._rhs(ti, yi))
                err = dt * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
                en = self._error_norm(err, y, ynew)
                if not np.isfinite(en):
                    raise StiffnessError(f"non-finite solution near t={t}", t=t)
                if en <= 1.0:
                    self.accepted += 1
                    t = stop if land else t + dt
                    y = ynew
                    f0 = ks[6] if self.constant or not land else self._rhs(nudge(t), y)
                    fac = 0.9 * en ** -0.2 if en > 0 else 5.0
                    if not land:
                        h = step * min(5.0, max(0.2, fac))
                    else:
                        h = max(h, step * min(5.0, max(0.2, fac)))
                else:
                    self.rejected += 1
                    h = step * max(0.2, 0.9 * en ** -0.2)
                if self.accepted + self.rejected > 2_000_000:
                    raise StiffnessError(f"step budget exhausted at t={t}", t=t)
            if stop in target_set:
                out.append(y.copy())
        return out


def _continuous_frames(spec: ContinuousSystem, lams, points, derivative: bool, rtol, atol):
    a, b = spec.interval
    pts = np.asarray([a, b] if points is None else points, dtype=float).reshape(-1)
    eps = 1e-12 * max(1.0, abs(a), abs(b))
    bad = pts[(pts < a - eps) | (pts > b + eps)]
    if bad.size:
        raise DomainError(f"point {bad[0]} outside [{a}, {b}]")
    pts = np.unique(np.concatenate([np.clip(pts, a, b), [spec.anchor]]))
    c0 = spec.anchor
    lams = np.asarray(lams, dtype=complex).reshape(-1)
    dim = spec.dim
    rows = 2 * dim if derivative else dim
    L = len(lams)
    values = np.zeros((L, len(pts), rows, dim), dtype=complex)
    integ = _ContinuousIntegrator(spec, lams, derivative, rtol, atol)
    anchor_idx = int(np.searchsorted(pts, c0))
    values[:, anchor_idx, :dim] = np.eye(dim)
    fwd = [float(x) for x in pts[anchor_idx + 1:]]
    bwd = [float(x) for x in pts[:anchor_idx][::-1]]
    for k, y in enumerate(integ.run(fwd)):
        values[:, anchor_idx + 1 + k] = y
    integ_b = _ContinuousIntegrator(spec, lams, derivative, rtol, atol)
    for k, y in enumerate(integ_b.run(bwd)):
        values[:, anchor_idx - 1 - k] = y
    stats = {
        "accepted_steps": integ.accepted + integ_b.accepted,
        "rejected_steps": integ.rejected + integ_b.rejected,
        "rtol": rtol,
        "atol": atol,
        "method": "dopri5",
    }
    frames = []
    for i, lam in enumerate(lams):
        frames.append(
            FundamentalFrame(
                spec,
                complex(lam),
                c0,
                pts,
                values[i, :, :dim],
                values[i, :, dim:] if derivative else None,
                stats,
            )
        )
    return frames


# --------------------------------------------------------------------------
# discrete


def _solve(M: np.ndarray, rhs: np.ndarray, n: int, what: str) -> np.ndarray:
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= 1e-13 * max(1.0, s[0]):
        raise StepError(f"{what} is singular at n={n}", n=n)
    return np.linalg.solve(M, rhs)


def discrete_step(
    spec: DiscreteSystem,
    lam,
    state,
    n: int,
    direction: StepDirection | str = StepDirection.FORWARD,
    derivative=None,
):
    """Advance a state from ``n`` to ``n + 1`` (forward) or ``n - 1`` (backward).

    ``state`` is a 2m-vector or a 2m x k matrix. When ``derivative`` (the
    lambda-derivative of ``state``) is given, returns ``(state, derivative)``
    at the new index.
    """
    direction = StepDirection(direction)
    m = spec.m
    lo, hi = spec.window
    target = n + 1 if direction is StepDirection.FORWARD else n - 1
    if not (lo <= n <= hi + 1 and lo <= target <= hi + 1):
        raise DomainError(f"step {n} -> {target} leaves [{lo}, {hi + 1}]")
    k = (n if direction is StepDirection.FORWARD else target) - lo
    lam = complex(lam)
    x = np.asarray(state, dtype=complex)
    vec = x.ndim == 1
    if vec:
        x = x[:, None]
    if x.shape[0] != 2 * m:
        raise DomainError(f"state must have leading dimension {2 * m}")
    A, B, C, W1, W2 = spec.A[k], spec.B[k], spec.C[k], spec.W1[k], spec.W2[k]
    eye = np.eye(m)
    Bl = B + lam * W2
    Cl = C - lam * W1
    dx = None if derivative is None else np.asarray(derivative, dtype=complex).reshape(x.shape)
    if direction is StepDirection.FORWARD:
        u, v = x[:m], x[m:]
        u1 = _solve(eye - A, u + Bl @ v, target - 1, "I - A(n)")
        v1 = v + Cl @ u1 - A.conj().T @ v
        out = np.vstack([u1, v1])
        if dx is not None:
            du, dv = dx[:m], dx[m:]
            du1 = _solve(eye - A, du + W2 @ v + Bl @ dv, target - 1, "I - A(n)")
            dv1 = dv - W1 @ u1 + Cl @ du1 - A.conj().T @ dv
            dout = np.vstack([du1, dv1])
    else:
        u1, v1 = x[:m], x[m:]
        v = _solve(eye - A.conj().T, v1 - Cl @ u1, target, "I - A*(n)")
        u = (eye - A) @ u1 - Bl @ v
        out = np.vstack([u, v])
        if dx is not None:
            du1, dv1 = dx[:m], dx[m:]
            dv = _solve(eye - A.conj().T, dv1 + W1 @ u1 - Cl @ du1, target, "I - A*(n)")
            du = (eye - A) @ du1 - W2 @ v - Bl @ dv
            dout = np.vstack([du, dv])
    if vec:
        out = out[:, 0]
        if dx is not None:
            dout = dout[:, 0]
    return out if dx is None else (out, dout)


def _discrete_frames(spec: DiscreteSystem, lams, points, derivative: bool):
    lo, hi = spec.window
    n_end = hi + 1
    if points is not None:
        for p in np.asarray(points).reshape(-1):
            if not lo <= p <= n_end:
                raise DomainError(f"point {p} outside [{lo}, {n_end}]")
    lams = np.asarray(lams, dtype=complex).reshape(-1)
    m, dim = spec.m, spec.dim
    L = len(lams)
    count = n_end - lo + 1
    Y = np.zeros((L, count, dim, dim), dtype=complex)
    dY = np.zeros_like(Y)
    n0 = spec.anchor
    Y[:, n0 - lo] = np.eye(dim)
    eye = np.eye(m)
    lam3 = lams[:, None, None]
    for n in range(n0, n_end):
        k = n - lo
        A, B, C, W1, W2 = spec.A[k], spec.B[k], spec.C[k], spec.W1[k], spec.W2[k]
        E = _solve(eye - A, np.eye(m), n, "I - A(n)")
        Ah = A.conj().T
        Bl = B[None] + lam3 * W2[None]
        Cl = C[None] - lam3 * W1[None]
        y, dy = Y[:, k], dY[:, k]
        u, v = y[:, :m], y[:, m:]
        u1 = E @ (u + Bl @ v)
        v1 = v + Cl @ u1 - Ah @ v
        Y[:, k + 1, :m], Y[:, k + 1, m:] = u1, v1
        if derivative:
            du, dv = dy[:, :m], dy[:, m:]
            du1 = E @ (du + W2 @ v + Bl @ dv)
            dY[:, k + 1, :m] = du1
            dY[:, k + 1, m:] = dv - W1 @ u1 + Cl @ du1 - Ah @ dv
    for n in range(n0, lo, -1):
        k = n - 1 - lo
        A, B, C, W1, W2 = spec.A[k], spec.B[k], spec.C[k], spec.W1[k], spec.W2[k]
        F = _solve(eye - A.conj().T, np.eye(m), n - 1, "I - A*(n)")
        Bl = B[None] + lam3 * W2[None]
        Cl = C[None] - lam3 * W1[None]
        y1, dy1 = Y[:, k + 1], dY[:, k + 1]
        u1, v1 = y1[:, :m], y1[:, m:]
        v = F @ (v1 - Cl @ u1)
        u = (eye - A) @ u1 - Bl @ v
        Y[:, k, :m], Y[:, k, m:] = u, v
        if derivative:
            du1, dv1 = dy1[:, :m], dy1[:, m:]
            dv = F @ (dv1 + W1 @ u1 - Cl @ du1)
            dY[:, k, :m] = (eye - A) @ du1 - W2 @ v - Bl @ dv
            dY[:, k, m:] = dv
    pts = np.arange(lo, n_end + 1)
    stats = {"steps": count - 1, "method": "recursion"}
    return [
        FundamentalFrame(spec, complex(lam), n0, pts, Y[i], dY[i] if derivative else None, stats)
        for i, lam in enumerate(lams)
    ]


# --------------------------------------------------------------------------
# public entry points


def fundamental_frames(
    spec: SystemSpec,
    lams,
    points=None,
    derivative: bool = False,
    rtol: float | None = None,
    atol: float | None = None,
) -> list[FundamentalFrame]:
    """Frames for several ``lam`` at once, on one shared step sequence."""
    if spec.kind == "continuous":
        rtol = DEFAULT_TOLERANCES.rtol if rtol is None else rtol
        atol = DEFAULT_TOLERANCES.atol if atol is None else atol
        return _continuous_frames(spec, lams, points, derivative, rtol, atol)
    return _discrete_frames(spec, lams, points, derivative)


def propagate_continuous(spec: ContinuousSystem, lam, points, rtol: float | None = None) -> FundamentalFrame:
    return fundamental_frames(spec, [lam], points, rtol=rtol)[0]


def fundamental_matrix(spec: SystemSpec, lam, points=None, rtol: float | None = None) -> FundamentalFrame:
    return fundamental_frames(spec, [lam], points, rtol=rtol)[0]


def fundamental_with_dlambda(spec: SystemSpec, lam, points=None, rtol: float | None = None) -> FundamentalFrame:
    return fundamental_frames(spec, [lam], points, derivative=True, rtol=rtol)[0]


def residual(spec: SystemSpec, frame: FundamentalFrame, point, h: float = 1e-4) -> float:
    """How well stored frame values satisfy the equation at ``point``.

    Continuous: central difference with step ``h`` (one-sided at the ends), so
    ``point +- h`` must be stored. Discrete: exact, needs ``point`` and
    ``point + 1``.
    """
    J = symplectic_matrix(spec.m)
    lam = frame.lam
    if spec.kind == "discrete":
        n = int(point)
        m = spec.m
        Y0, Y1 = frame.at(n), frame.at(n + 1)
        RY = np.vstack([Y1[:m], Y0[m:]])
        r = J @ (Y1 - Y0) - (spec.P(n) + lam * spec.W(n)) @ RY
        return float(np.linalg.norm(r, 2))
    t = float(point)
    Y = frame.at(t)
    if frame.has(t - h) and frame.has(t + h):
        dY = (frame.at(t + h) - frame.at(t - h)) / (2 * h)
    elif frame.has(t + h) and frame.has(t + 2 * h):
        dY = (-3 * Y + 4 * frame.at(t + h) - frame.at(t + 2 * h)) / (2 * h)
    elif frame.has(t - h) and frame.has(t - 2 * h):
        dY = (3 * Y - 4 * frame.at(t - h) + frame.at(t - 2 * h)) / (2 * h)
    else:
        raise LookupError(f"frame lacks neighbours of {t} at spacing {h}")
    r = J @ dY - (spec.P(t) + lam * spec.W(t)) @ Y
    return float(np.linalg.norm(r, 2))


def symplectic_defect(frame: FundamentalFrame, partner: FundamentalFrame | None = None) -> float:
    """max over stored points of ``|| Y_conj(lam)* J Y_lam - J ||``.

    ``partner`` is the frame at ``conj(lam)``; real ``lam`` pairs with itself.
    """
    if partner is None:
        if abs(frame.lam.imag) > 0:
            raise ValueError("complex lambda needs the frame at conj(lambda)")
        partner = frame
    if abs(partner.lam - np.conj(frame.lam)) > 1e-14 * (1 + abs(frame.lam)):
        raise ValueError("partner frame is not at conj(lambda)")
    if not np.allclose(partner.points, frame.points):
        raise ValueError("frames store different points")
    J = symplectic_matrix(frame.spec.m)
    prod = np.conj(np.swapaxes(partner.values, 1, 2)) @ J[None] @ frame.values
    return float(np.max(np.linalg.norm(prod - J[None], ord=2, axis=(1, 2))))
