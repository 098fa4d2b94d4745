"""Eigenvalues as zeros of the characteristic function, and their multiplicities.

Analytic multiplicity is a winding number of ``Gamma`` around a small circle.
Geometric multiplicity is the null-space dimension of ``G(lam0)``. The reduced
determinant check rebuilds ``G`` in a basis whose first columns span the
eigenvectors and replaces those columns by their first Taylor coefficients;
a nonzero determinant there means the zero of ``Gamma`` has exactly the order
of the null space.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .characteristic import CharacteristicProblem, gamma_batch
from .errors import (
    BasisError,
    BoundaryError,
    ConsistencyError,
    ContourError,
    ConvergenceError,
    DegenerateProblemError,
    HamspecError,
    IndeterminateCountError,
    PreconditionError,
)
from .system import Trajectory, weighted_norm

log = logging.getLogger(__name__)

_SPLIT_FRACTIONS = (0.5, 0.5371, 0.4629, 0.5893, 0.4107, 0.6377, 0.3623)


@dataclass(frozen=True)
class SearchRegion:
    """The box ``[lam_min, lam_max] x [-half_height, half_height]``.

    Each edge starts with at least ``samples_per_edge`` samples and with a
    spacing no larger than ``half_height / 4``, so that a real zero changes
    the argument by at most about a quarter radian between neighbours.
    """

    lam_min: float
    lam_max: float
    half_height: float = 1.0
    max_depth: int = 48
    samples_per_edge: int = 16
    max_refinement: int = 14

    def __post_init__(self):
        if not self.lam_min < self.lam_max:
            raise PreconditionError("search region needs lam_min < lam_max")
        if not self.half_height > 0:
            raise PreconditionError("search region needs half_height > 0")


@dataclass(frozen=True)
class Contour:
    """The circle of radius ``radius`` around ``center``."""

    center: complex
    radius: float
    samples_per_turn: int = 32
    max_refinement: int = 14

    def __post_init__(self):
        if not self.radius > 0:
            raise ContourError("contour radius must be positive")


@dataclass(frozen=True)
class WindingResult:
    count: int
    min_relative_modulus: float
    margin: float
    samples: int


class _GammaCache:
    """Memo of Gamma values for one search; local to a call, never shared."""

    def __init__(self, problem: CharacteristicProblem):
        self.problem = problem
        self.values: dict[complex, tuple[complex, float]] = {}

    def __call__(self, lams) -> tuple[np.ndarray, np.ndarray]:
        lams = [complex(x) for x in lams]
        missing = list(dict.fromkeys(x for x in lams if x not in self.values))
        if missing:
            batch = gamma_batch(self.problem, missing)
            for lam, v, r in zip(missing, batch.values, batch.rel_moduli):
                self.values[lam] = (complex(v), float(r))
        vals = np.array([self.values[x][0] for x in lams])
        rel = np.array([self.values[x][1] for x in lams])
        return vals, rel

    def on_horizontal(self, y: float, x0: float, x1: float) -> list[complex]:
        return [k for k in self.values if k.imag == y and x0 < k.real < x1]

    def on_vertical(self, x: float, y0: float, y1: float) -> list[complex]:
        return [k for k in self.values if k.real == x and y0 < k.imag < y1]


def _adaptive_winding(cache, lam_of, params, period, boundary_tol, max_levels) -> tuple[WindingResult, np.ndarray, np.ndarray]:
    """Winding number along the closed curve ``s -> lam_of(s)``, ``s in [0, period)``.

    Refines until every consecutive argument increment is below pi/2.
    """
    params = np.unique(np.asarray(params, dtype=float) % period)
    lams = np.array([lam_of(s) for s in params])
    vals, rels = cache(lams)
    for _ in range(max_levels + 1):
        nxt_vals = np.roll(vals, -1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dargs = np.angle(nxt_vals / vals)
        bad = np.abs(dargs) >= math.pi / 2
        rel = rels
        if np.min(rel) <= boundary_tol:
            k = int(np.argmin(rel))
            raise BoundaryError(
                f"characteristic function nearly vanishes on the contour at {lams[k]}", lam=lams[k]
            )
        if not bad.any():
            total = float(np.sum(dargs)) / (2 * math.pi)
            count = int(round(total))
            if abs(total - count) > 1e-6:
                raise IndeterminateCountError(f"non-integer winding {total}")
            margin = math.pi / 2 - float(np.max(np.abs(dargs)))
            return WindingResult(count, float(np.min(rel)), margin, len(lams)), lams, vals
        idx = np.nonzero(bad)[0]
        nxt = np.roll(params, -1)
        nxt[-1] += period
        mids = 0.5 * (params[idx] + nxt[idx])
        mid_lams = np.array([lam_of(s % period) for s in mids])
        mvals, mrels = cache(mid_lams)
        params = np.concatenate([params, mids % period])
        lams = np.concatenate([lams, mid_lams])
        vals = np.concatenate([vals, mvals])
        rels = np.concatenate([rels, mrels])
        order = np.argsort(params, kind="stable")
        params, lams, vals, rels = params[order], lams[order], vals[order], rels[order]
    raise IndeterminateCountError(f"refinement budget exhausted ({max_levels} levels)")


def _box_winding(cache, x0, x1, h, n_edge, boundary_tol, max_levels):
    W = x1 - x0
    H = 2 * h
    period = 2 * W + 2 * H

    def lam_of(s):
        if s < W:
            return complex(x0 + s, -h)
        if s < W + H:
            return complex(x1, -h + (s - W))
        if s < 2 * W + H:
            return complex(x1 - (s - W - H), h)
        return complex(x0, h - (s - 2 * W - H))

    params = [0.0, W, W + H, 2 * W + H]
    edges = [
        (cache.on_horizontal(-h, x0, x1), lambda z: z.real - x0, 0.0, W),
        (cache.on_vertical(x1, -h, h), lambda z: W + (z.imag + h), W, H),
        (cache.on_horizontal(h, x0, x1), lambda z: W + H + (x1 - z.real), W + H, W),
        (cache.on_vertical(x0, -h, h), lambda z: 2 * W + H + (h - z.imag), 2 * W + H, H),
    ]
    for known, to_param, start, length in edges:
        have = np.array([to_param(z) for z in known])
        params.extend(have)
        # reused samples may bunch up on part of the edge; keep uniform coverage
        n = max(n_edge, int(math.ceil(4 * length / h)))
        spacing = length / n
        for s in start + length * np.arange(1, n) / n:
            if have.size == 0 or np.min(np.abs(have - s)) > 0.5 * spacing:
                params.append(s)
    return _adaptive_winding(cache, lam_of, params, period, boundary_tol, max_levels)


def _circle_winding(cache, contour: Contour, boundary_tol):
    c, r = complex(contour.center), contour.radius
    n = contour.samples_per_turn
    lam_of = lambda s: c + r * complex(math.cos(s), math.sin(s))
    params = 2 * math.pi * np.arange(n) / n
    return _adaptive_winding(cache, lam_of, params, 2 * math.pi, boundary_tol, contour.max_refinement)


def count_zeros(problem: CharacteristicProblem, region: SearchRegion | Contour) -> int:
    """Number of zeros (with multiplicity) enclosed, by the argument principle."""
    cache = _GammaCache(problem)
    tol = problem.boundary_threshold
    if isinstance(region, Contour):
        return _circle_winding(cache, region, tol)[0].count
    return _box_winding(
        cache, region.lam_min, region.lam_max, region.half_height,
        region.samples_per_edge, tol, region.max_refinement,
    )[0].count


def _moment_estimate(lams, vals) -> complex | None:
    """Root estimate from a boundary enclosing one zero: (1/2 pi i) int lam dlog Gamma."""
    nxt = np.roll(vals, -1)
    dlog = np.log(np.abs(nxt) / np.abs(vals)) + 1j * np.angle(nxt / vals)
    mid = 0.5 * (lams + np.roll(lams, -1))
    mid[-1] = 0.5 * (lams[-1] + lams[0])
    est = np.sum(mid * dlog) / (2j * math.pi)
    return complex(est) if np.isfinite(est) else None


def _newton(problem: CharacteristicProblem, lam: complex, lo: float, hi: float, max_iter: int = 40):
    """Newton iteration for a simple zero known to lie in ``[lo, hi]``."""
    width = hi - lo
    lam = complex(lam)
    for _ in range(max_iter):
        batch = gamma_batch(problem, [lam], derivative=True)
        g, dg, scale = batch.values[0], batch.derivatives[0], batch.scales[0]
        if g == 0:
            return lam, 0.0
        if dg == 0 or not np.isfinite(dg):
            break
        step = g / dg
        if abs(step) > 0.5 * width:
            step *= 0.5 * width / abs(step)
        lam = lam - step
        if not lo - width <= lam.real <= hi + width:
            break
        if abs(step) <= 1e-13 * (1 + abs(lam)):
            break
    batch = gamma_batch(problem, [lam])
    return lam, float(abs(batch.values[0]) / batch.scales[0])


def circle_moments(problem: CharacteristicProblem, center: complex, radius: float, n: int = 128):
    """Zero count, centroid and variance of the zeros inside a circle.

    Uses the trapezoid rule for ``(1/2 pi i) int (lam - c)^p Gamma'/Gamma``,
    which converges geometrically; ``n`` and ``n/2`` point results are
    compared and the larger discrepancy returned as ``error``.
    """
    theta = 2 * math.pi * np.arange(n) / n
    z = radius * np.exp(1j * theta)
    batch = gamma_batch(problem, center + z, derivative=True)
    ratio = batch.derivatives / batch.values

    def moments(step):
        zz, rr = z[::step], ratio[::step]
        return [np.mean(zz ** p * rr * zz) for p in range(3)]

    fine, coarse = moments(1), moments(2)
    s0, s1, s2 = fine
    err = max(abs(f - c) / radius ** p for p, (f, c) in enumerate(zip(fine, coarse)))
    count = s0.real
    mean = s1 / s0 if abs(s0) > 0.5 else 0.0
    var = s2 / s0 - mean ** 2 if abs(s0) > 0.5 else 0.0
    return dict(count=count, centroid=center + mean, variance=var, error=err,
                min_relative_modulus=float(np.min(batch.rel_moduli)))


@dataclass
class _Box:
    x0: float
    x1: float
    count: int
    depth: int
    lams: np.ndarray = None
    vals: np.ndarray = None


def _split_point(cache, box: _Box, h, region: SearchRegion, tol):
    width = box.x1 - box.x0
    last = None
    for frac in _SPLIT_FRACTIONS:
        xs = box.x0 + frac * width
        try:
            left = _box_winding(cache, box.x0, xs, h, region.samples_per_edge, tol, region.max_refinement)
            right = _box_winding(cache, xs, box.x1, h, region.samples_per_edge, tol, region.max_refinement)
        except (BoundaryError, IndeterminateCountError) as exc:
            last = exc
            continue
        if left[0].count + right[0].count != box.count:
            raise ConsistencyError(
                f"winding not additive on [{box.x0}, {box.x1}]: "
                f"{left[0].count} + {right[0].count} != {box.count}"
            )
        return (
            _Box(box.x0, xs, left[0].count, box.depth + 1, left[1], left[2]),
            _Box(xs, box.x1, right[0].count, box.depth + 1, right[1], right[2]),
        )
    raise IndeterminateCountError(f"no clean split of [{box.x0}, {box.x1}]: {last}")


def _check_real(problem, lam) -> float:
    if abs(lam.imag) > problem.tol.root_tol(lam):
        raise ConsistencyError(f"located zero {lam} is not real within tolerance")
    return float(lam.real)


def _resolve(problem, cache, box: _Box, region: SearchRegion) -> list[tuple[float, int]]:
    tol = problem.tol
    h = region.half_height
    if box.count == 0:
        return []
    width = box.x1 - box.x0
    if box.count == 1:
        start = _moment_estimate(box.lams, box.vals) if box.lams is not None else None
        if start is None or not box.x0 <= start.real <= box.x1:
            start = complex(0.5 * (box.x0 + box.x1))
        lam, rel = _newton(problem, complex(start.real, 0.0), box.x0, box.x1)
        inside = box.x0 <= lam.real <= box.x1 and abs(lam.imag) < h
        if inside and rel <= tol.root_tol(lam):
            return [(_check_real(problem, lam), 1)]
        if box.depth >= region.max_depth:
            raise ConvergenceError(f"Newton failed near {lam}", residual=rel)
    else:
        center = 0.5 * (box.x0 + box.x1)
        if width <= 4 * h:
            mom = circle_moments(problem, center, 0.55 * width)
            spread = math.sqrt(abs(mom["variance"]))
            if (
                abs(mom["count"] - box.count) < 1e-3
                and mom["error"] < 1e-6
                and spread <= tol.cluster * (1 + abs(mom["centroid"]))
            ):
                return [(_check_real(problem, complex(mom["centroid"])), box.count)]
        if width < tol.cluster or box.depth >= region.max_depth:
            return [(center, box.count)]
    left, right = _split_point(cache, box, h, region, problem.boundary_threshold)
    return _resolve(problem, cache, left, region) + _resolve(problem, cache, right, region)


@dataclass(frozen=True)
class LocateResult:
    roots: tuple[tuple[float, int], ...]
    total: int
    region: SearchRegion
    winding: WindingResult


def _region_winding(problem, cache, region: SearchRegion):
    tol = problem.boundary_threshold
    width = region.lam_max - region.lam_min
    attempts = [(0.0, 0.0), (1e-3, 1e-3), (2.3e-3, 1.7e-3), (4.1e-3, 5.3e-3)]
    last = None
    tiny = 0
    for dlo, dhi in attempts:
        reg = replace(region, lam_min=region.lam_min - dlo * width, lam_max=region.lam_max + dhi * width)
        try:
            res = _box_winding(cache, reg.lam_min, reg.lam_max, reg.half_height,
                               reg.samples_per_edge, tol, reg.max_refinement)
            return reg, res
        except BoundaryError as exc:
            last = exc
            _, rels = cache(list(cache.values))
            if np.all(rels <= tol):
                tiny += 1
    if tiny == len(attempts):
        raise DegenerateProblemError(
            "characteristic function vanishes on every attempted contour; "
            "re-check the definiteness probes"
        )
    raise last


def locate(problem: CharacteristicProblem, region: SearchRegion) -> LocateResult:
    cache = _GammaCache(problem)
    reg, (wind, lams, vals) = _region_winding(problem, cache, region)
    box = _Box(reg.lam_min, reg.lam_max, wind.count, 0, lams, vals)
    roots = sorted(_resolve(problem, cache, box, reg))
    if sum(k for _, k in roots) != wind.count:
        raise ConsistencyError("multiplicities of located roots do not add up to the region count")
    return LocateResult(tuple(roots), wind.count, reg, wind)


def locate_eigenvalues(problem: CharacteristicProblem, region: SearchRegion) -> list[tuple[float, int]]:
    """Eigenvalues in the region with their zero orders, sorted by value."""
    return list(locate(problem, region).roots)


def isolation_radius(lam0: float, others: Sequence[float], region: SearchRegion | None = None, cap: float = 0.5) -> float:
    """Largest convenient radius keeping other known zeros outside ``2 rho``."""
    rho = cap * (1 + abs(lam0)) ** 0.5
    gaps = [abs(lam0 - x) for x in others if x != lam0]
    if gaps:
        rho = min(rho, 0.45 * min(gaps))
    if region is not None:
        edge = min(lam0 - region.lam_min, region.lam_max - lam0)
        if edge > 0:
            rho = min(rho, 0.9 * edge)
    return rho


def analytic_multiplicity(problem: CharacteristicProblem, lambda0, rho: float, known_roots: Sequence[float] = ()) -> int:
    for x in known_roots:
        if x != lambda0 and abs(x - lambda0) < 2 * rho:
            raise ContourError(f"root {x} lies within 2*rho of {lambda0}")
    return analytic_winding(problem, lambda0, rho).count


def analytic_winding(problem: CharacteristicProblem, lambda0, rho: float) -> WindingResult:
    cache = _GammaCache(problem)
    return _circle_winding(cache, Contour(complex(lambda0), rho), problem.boundary_threshold)[0]


# --------------------------------------------------------------------------
# geometric multiplicity and certificates


@dataclass(frozen=True)
class NullSpace:
    lambda0: float
    tau2: int
    basis: np.ndarray
    complement: np.ndarray
    singular_values: np.ndarray
    g_scale: float
    gray_zone: bool
    G: np.ndarray
    dG: np.ndarray
    dg_scale: float
    gamma_relative: float
    frame: object = field(repr=False, default=None)


def _sample_points(problem: CharacteristicProblem, n: int = 401):
    if problem.spec.kind == "discrete":
        return None
    a, b = problem.endpoints
    return np.linspace(a, b, n | 1)


def null_space(problem: CharacteristicProblem, lambda0) -> NullSpace:
    tol = problem.tol
    points = _sample_points(problem)
    batch = gamma_batch(problem, [lambda0], derivative=True, keep_frames=True, points=points)
    G = batch.G[0]
    U, s, Vh = np.linalg.svd(G)
    g_scale = float(batch.g_scales[0])
    small = s < tol.rank * g_scale
    tau2 = int(np.sum(small))
    gray = bool(np.any((s >= tol.rank * g_scale) & (s < 10 * tol.rank * g_scale)))
    V = Vh.conj().T
    return NullSpace(
        lambda0=lambda0,
        tau2=tau2,
        basis=V[:, s.size - tau2:],
        complement=V[:, : s.size - tau2],
        singular_values=s,
        g_scale=g_scale,
        gray_zone=gray,
        G=G,
        dG=batch.dG[0],
        dg_scale=float(batch.dg_scales[0]),
        gamma_relative=float(abs(batch.values[0]) / batch.scales[0]),
        frame=batch.frames[0],
    )


def geometric_multiplicity(problem: CharacteristicProblem, lambda0) -> tuple[int, np.ndarray]:
    """``(tau2, eigenbasis)``; the basis columns are coefficient vectors in the frame basis."""
    ns = null_space(problem, lambda0)
    if ns.tau2 == 0:
        raise PreconditionError(f"{lambda0} is not an eigenvalue: G(lambda0) has full rank")
    return ns.tau2, ns.basis


def reduced_gamma(ns: NullSpace, tol) -> tuple[complex, str, float]:
    """Reduced determinant at ``lambda0`` from a :class:`NullSpace`.

    Returns ``(value, verdict, hadamard_ratio)``. The basis ``C = [E | Q]`` is
    unitary; the first ``tau2`` columns of ``G C`` are replaced by ``G' E``.
    """
    E, Q = ns.basis, ns.complement
    C = np.hstack([E, Q])
    s = np.linalg.svd(C, compute_uv=False)
    if s[-1] < 1e-8:
        raise BasisError("completed eigenbasis is rank deficient")
    Mt = np.hstack([ns.dG @ E, ns.G @ Q])
    value = np.linalg.det(Mt) / np.linalg.det(C)
    hadamard = float(np.prod(np.linalg.norm(Mt, axis=0)))
    ratio = float(abs(value) * abs(np.linalg.det(C)) / hadamard) if hadamard > 0 else 0.0
    verdict = "NONZERO" if ratio > tol.reduced else "ZERO"
    return complex(value), verdict, ratio


def reduced_gamma_check(problem: CharacteristicProblem, record) -> tuple[complex, str]:
    ns = record.null_space if isinstance(record, EigenvalueRecord) else null_space(problem, record)
    if ns.tau2 == 0:
        raise PreconditionError("record has no eigenvectors")
    value, verdict, _ = reduced_gamma(ns, problem.tol)
    return value, verdict


@dataclass(frozen=True)
class ProbeResult:
    weighted_norm: float
    bc_residual: float
    normalized_residual: float
    projected_residual: float
    passed: bool


def dlambda_solution_probe(problem: CharacteristicProblem, record, c) -> ProbeResult:
    """Probe the lambda-derivative of ``z = Y_lam E c`` at ``lambda0``.

    ``weighted_norm`` is the W-norm of ``dz/dlam``; ``bc_residual`` is
    ``|| G'(lambda0) E c ||`` (the boundary defect of ``dz/dlam``), and
    ``normalized_residual`` divides it by ``||c||`` times the size of the
    derivative terms. ``projected_residual`` also allows adding any
    combination of the remaining solutions and is zero iff the reduced
    determinant vanishes along ``c``.
    """
    ns = record.null_space if isinstance(record, EigenvalueRecord) else record
    c = np.asarray(c, dtype=complex).reshape(-1)
    if c.size != ns.tau2:
        raise PreconditionError(f"c must have {ns.tau2} entries")
    cnorm = float(np.linalg.norm(c))
    if cnorm == 0:
        raise PreconditionError("c must be nonzero")
    w = ns.basis @ c
    frame = ns.frame
    dz = frame.derivative_values @ w
    traj = Trajectory(frame.points, dz)
    wnorm = weighted_norm(traj, problem.spec)
    r = ns.dG @ w
    raw = float(np.linalg.norm(r))
    denom = cnorm * ns.dg_scale
    normalized = raw / denom if denom > 0 else 0.0
    U, s, _ = np.linalg.svd(ns.G)
    rank = s.size - ns.tau2
    Qr = U[:, :rank]
    projected = float(np.linalg.norm(r - Qr @ (Qr.conj().T @ r))) / denom if denom > 0 else 0.0
    return ProbeResult(wnorm, raw, normalized, projected, normalized > problem.tol.probe)


# --------------------------------------------------------------------------
# records and certification


@dataclass(frozen=True)
class EigenvalueRecord:
    lambda0: float
    analytic_mult: int
    geometric_mult: int
    eigenbasis: np.ndarray
    eigenfunctions: tuple
    residuals: dict
    reduced_gamma_abs: float
    reduced_verdict: str
    probes: tuple
    verdict: str
    warnings: tuple = ()
    null_space: NullSpace = field(default=None, repr=False, compare=False)

    def summary(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "tau1": self.analytic_mult,
            "tau2": self.geometric_mult,
            "reduced_gamma_abs": self.reduced_gamma_abs,
            "reduced_verdict": self.reduced_verdict,
            "verdict": self.verdict,
            "residuals": self.residuals,
            "probes": [
                {
                    "weighted_norm": p.weighted_norm,
                    "bc_residual": p.bc_residual,
                    "normalized_residual": p.normalized_residual,
                    "projected_residual": p.projected_residual,
                    "passed": p.passed,
                }
                for p in self.probes
            ],
            "warnings": list(self.warnings),
        }


def eigenfunction(ns: NullSpace, i: int) -> Trajectory:
    frame = ns.frame
    return Trajectory(frame.points, frame.values @ ns.basis[:, i])


def certify_root(problem: CharacteristicProblem, lambda0: float, rho: float) -> EigenvalueRecord:
    """All multiplicity certificates for one located eigenvalue."""
    tol = problem.tol
    warnings = []
    wind = analytic_winding(problem, lambda0, rho)
    tau1 = wind.count
    ns = null_space(problem, lambda0)
    if ns.gray_zone:
        warnings.append("singular value in the rank gray zone")
    if ns.tau2 == 0:
        raise PreconditionError(f"{lambda0} is not an eigenvalue: G(lambda0) has full rank")
    funcs = tuple(eigenfunction(ns, i) for i in range(ns.tau2))
    norms = [weighted_norm(f, problem.spec) for f in funcs]
    sup = [float(np.max(np.abs(f.values))) for f in funcs]
    bc_res = [float(np.linalg.norm(ns.G @ ns.basis[:, i]) / ns.g_scale) for i in range(ns.tau2)]
    value, verdict, ratio = reduced_gamma(ns, tol)
    probes = tuple(dlambda_solution_probe(problem, ns, np.eye(ns.tau2)[:, i]) for i in range(ns.tau2))
    residuals = {
        "gamma_relative": ns.gamma_relative,
        "winding_margin": wind.margin,
        "winding_min_modulus": wind.min_relative_modulus,
        "contour_radius": rho,
        "bc_residuals": bc_res,
        "eigenfunction_norms": norms,
        "singular_values": [float(x) for x in ns.singular_values / ns.g_scale],
        "reduced_hadamard_ratio": ratio,
    }
    definite = all(n > 0 and n ** 2 > tol.definiteness * s ** 2 * 1e-6 for n, s in zip(norms, sup))
    ok = (
        tau1 == ns.tau2
        and verdict == "NONZERO"
        and all(p.passed for p in probes)
        and all(r <= tol.bc_residual for r in bc_res)
        and definite
    )
    if ns.gray_zone:
        status = "INDETERMINATE"
    else:
        status = "PASS" if ok else "FAIL"
    return EigenvalueRecord(
        lambda0=float(lambda0),
        analytic_mult=tau1,
        geometric_mult=ns.tau2,
        eigenbasis=ns.basis,
        eigenfunctions=funcs,
        residuals=residuals,
        reduced_gamma_abs=abs(value),
        reduced_verdict=verdict,
        probes=probes,
        verdict=status,
        warnings=tuple(warnings),
        null_space=ns,
    )


@dataclass(frozen=True)
class RootFailure:
    lambda0: float
    located_mult: int
    error: str
    verdict: str = "INDETERMINATE"

    def summary(self) -> dict:
        return {"lambda0": self.lambda0, "tau1": self.located_mult, "verdict": self.verdict, "error": self.error}


@dataclass(frozen=True)
class CertificationReport:
    region: SearchRegion
    records: tuple
    total_count: int
    verdict: str
    notes: tuple = ()

    @property
    def roots(self) -> list[tuple[float, int, int]]:
        return [
            (r.lambda0, r.analytic_mult, r.geometric_mult)
            for r in self.records
            if isinstance(r, EigenvalueRecord)
        ]


def _bumped(problem: CharacteristicProblem) -> CharacteristicProblem:
    return problem.with_tolerances(rtol=problem.tol.rtol * 1e-2, atol=problem.tol.atol * 1e-2)


def _certify_one(problem, lam, mult, others, region):
    rho = isolation_radius(lam, others, region)
    try:
        rec = certify_root(problem, lam, rho)
    except HamspecError as exc:
        rec = RootFailure(lam, mult, f"{type(exc).__name__}: {exc}")
    if rec.verdict == "INDETERMINATE":
        # one automatic tolerance bump: tighter integration and a re-polished root
        bumped = _bumped(problem)
        try:
            if mult == 1:
                lam2, _ = _newton(bumped, complex(lam), lam - rho, lam + rho)
                lam = _check_real(bumped, lam2)
            rec2 = certify_root(bumped, lam, rho)
            rec = replace(rec2, warnings=rec2.warnings + ("tolerance bumped once",))
        except HamspecError as exc:
            rec = RootFailure(lam, mult, f"after tolerance bump: {type(exc).__name__}: {exc}")
    return rec


def verify_equality(problem: CharacteristicProblem, region: SearchRegion, workers: int = 1) -> CertificationReport:
    """Locate every eigenvalue in ``region`` and certify ``tau1 == tau2`` at each."""
    located = locate(problem, region)
    lams = [lam for lam, _ in located.roots]
    tasks = [(problem, lam, k, lams, located.region) for lam, k in located.roots]
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda a: _certify_one(*a), tasks))
    else:
        records = [_certify_one(*a) for a in tasks]
    notes = []
    tau1_sum = sum(r.analytic_mult for r in records if isinstance(r, EigenvalueRecord))
    consistent = tau1_sum == located.total and all(isinstance(r, EigenvalueRecord) for r in records)
    if not consistent:
        notes.append(f"sum of analytic multiplicities {tau1_sum} vs region count {located.total}")
    for rec, (_, k) in zip(records, located.roots):
        if isinstance(rec, EigenvalueRecord) and rec.analytic_mult != k:
            notes.append(f"located order {k} differs from circle winding {rec.analytic_mult} at {rec.lambda0}")
    verdicts = {r.verdict for r in records}
    if "FAIL" in verdicts or (not consistent and "INDETERMINATE" not in verdicts):
        verdict = "FAIL"
    elif "INDETERMINATE" in verdicts:
        verdict = "INDETERMINATE"
    else:
        verdict = "PASS"
    return CertificationReport(located.region, tuple(records), located.total, verdict, tuple(notes))


def eigenfunction_overlap(problem: CharacteristicProblem, rec1: EigenvalueRecord, rec2: EigenvalueRecord) -> float:
    """``|<y1, y2>_W| / (|y1|_W |y2|_W)`` for the first eigenfunctions of two records."""
    from .system import weighted_inner_product

    f, g = rec1.eigenfunctions[0], rec2.eigenfunctions[0]
    ip = weighted_inner_product(f, g, problem.spec)
    return abs(ip) / (weighted_norm(f, problem.spec) * weighted_norm(g, problem.spec))
