"""Brute-force pencil oracle for discrete problems.

All step equations over the window and the boundary rows are stacked into
one square matrix ``A0 + lam A1`` acting on ``(y(lo), ..., y(hi + 1))``. Its
determinant is a polynomial in ``lam``; it is sampled at Chebyshev points,
interpolated, and its roots are clustered into eigenvalues with
multiplicities. Nothing here shares code with the shooting solver except the
boundary-condition conversion for bracket-coordinate input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Chebyshev

from .bc import BRACKET, BoundaryCondition
from .errors import PreconditionError, SizeError
from .system import DiscreteSystem, symplectic_matrix
from .tolerances import DEFAULT_TOLERANCES, Tolerances

MAX_ROWS = 400


@dataclass(frozen=True)
class Pencil:
    A0: np.ndarray
    A1: np.ndarray

    def __call__(self, lam) -> np.ndarray:
        return self.A0 + lam * self.A1

    @property
    def degree_bound(self) -> int:
        """Number of rows carrying ``lam``; bounds the degree of the determinant."""
        return int(np.count_nonzero(np.any(self.A1 != 0, axis=1)))


@dataclass(frozen=True)
class OracleResult:
    roots: tuple[tuple[complex, int], ...]
    degree: int
    interval: tuple[float, float]
    raw_roots: np.ndarray

    @property
    def real_roots(self) -> list[tuple[float, int]]:
        return [(float(z.real), k) for z, k in self.roots if abs(z.imag) <= 1e-8 * (1 + abs(z))]

    @property
    def total(self) -> int:
        return sum(k for _, k in self.roots)


def standard_bc(spec: DiscreteSystem, bc: BoundaryCondition) -> tuple[np.ndarray, np.ndarray]:
    if bc.coordinate_tag != BRACKET:
        return np.asarray(bc.M), np.asarray(bc.N)
    from .propagation import fundamental_matrix

    zero = fundamental_matrix(spec, 0.0, spec.endpoints)
    J = symplectic_matrix(spec.m)
    a, b = spec.endpoints
    return bc.M @ zero.at(a).conj().T @ J, bc.N @ zero.at(b).conj().T @ J


def build_pencil(spec: DiscreteSystem, bc: BoundaryCondition) -> Pencil:
    """Stack ``J (y(n+1) - y(n)) - (P(n) + lam W(n)) R(y)(n) = 0`` and the boundary rows."""
    m, K = spec.m, spec.size
    d = 2 * m
    if d * (K + 2) > MAX_ROWS:
        raise SizeError(f"pencil would have 2m(K+2) = {d * (K + 2)} > {MAX_ROWS} rows")
    J = symplectic_matrix(m)
    S1 = np.diag([1.0] * m + [0.0] * m)  # picks u(n+1)
    S0 = np.diag([0.0] * m + [1.0] * m)  # picks v(n)
    size = d * (K + 1)
    A0 = np.zeros((size, size), dtype=complex)
    A1 = np.zeros((size, size), dtype=complex)
    lo = spec.window[0]
    for k in range(K):
        n = lo + k
        P, W = spec.P(n), spec.W(n)
        rows = slice(d * k, d * (k + 1))
        cur = slice(d * k, d * (k + 1))
        nxt = slice(d * (k + 1), d * (k + 2))
        A0[rows, nxt] = J - P @ S1
        A0[rows, cur] = -J - P @ S0
        A1[rows, nxt] = -W @ S1
        A1[rows, cur] = -W @ S0
    M, N = standard_bc(spec, bc)
    rows = slice(d * K, d * (K + 1))
    A0[rows, 0:d] = M
    A0[rows, d * K : d * (K + 1)] = -N
    return Pencil(A0, A1)


def _cluster(roots: np.ndarray, tol: Tolerances) -> list[tuple[complex, int]]:
    """Greedy clustering of nearby roots into (mean, count) pairs."""
    order = np.argsort(roots.real + 1e-3 * roots.imag)
    pending = [complex(z) for z in roots[order]]
    out = []
    while pending:
        seed = pending.pop(0)
        group = [seed]
        radius = tol.cluster * (1 + abs(seed))
        rest = []
        for z in pending:
            (group if abs(z - seed) <= radius else rest).append(z)
        pending = rest
        out.append((complex(np.mean(group)), len(group)))
    out.sort(key=lambda p: (p[0].real, p[0].imag))
    return out


def _log_derivative(pencil: Pencil, lam: complex) -> complex:
    """``p'(lam) / p(lam) = tr((A0 + lam A1)^-1 A1)`` for ``p = det(A0 + lam A1)``."""
    return complex(np.trace(np.linalg.solve(pencil(lam), pencil.A1)))


def _polish(pencil: Pencil, roots: np.ndarray, max_iter: int = 200) -> np.ndarray:
    """Aberth iteration on ``det(A0 + lam A1)`` started from the interpolated roots.

    Interpolation over a wide interval loses accuracy when the roots sit far
    from the ends; the exact log-derivative of the pencil restores it, and
    the mutual repulsion keeps distinct roots from merging.
    """
    z = roots.astype(complex).copy()
    n = z.size
    for _ in range(max_iter):
        biggest = 0.0
        for i in range(n):
            try:
                ratio = _log_derivative(pencil, z[i])
            except np.linalg.LinAlgError:
                continue  # landed exactly on a root
            others = np.delete(z, i)
            rep = np.sum(1.0 / (z[i] - others)) if n > 1 else 0.0
            denom = ratio - rep
            if not np.isfinite(denom) or denom == 0:
                continue
            w = 1.0 / denom
            z[i] -= w
            biggest = max(biggest, abs(w) / (1 + abs(z[i])))
        if biggest <= 1e-15:
            break
    if not np.all(np.isfinite(z)):
        return roots
    return z


def assemble_discrete_pencil(
    spec: DiscreteSystem,
    bc: BoundaryCondition,
    interval: tuple[float, float] | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> OracleResult:
    """Roots of ``det(A0 + lam A1)`` with multiplicities.

    The determinant is sampled at ``deg + 1`` Chebyshev points of
    ``interval`` (default ``[-4, 4]``), where ``deg`` is the number of rows
    that carry ``lam``, and interpolated in the Chebyshev basis. Trailing
    coefficients that are negligible relative to the largest are trimmed
    before the companion-matrix root solve.
    """
    if not isinstance(spec, DiscreteSystem):
        raise PreconditionError("the pencil oracle needs a discrete system")
    pencil = build_pencil(spec, bc)
    deg = pencil.degree_bound
    lo, hi = (-4.0, 4.0) if interval is None else (float(interval[0]), float(interval[1]))
    if deg == 0:
        return OracleResult((), 0, (lo, hi), np.zeros(0))
    k = np.arange(deg + 1)
    x = np.cos(np.pi * (2 * k + 1) / (2 * (deg + 1)))
    lams = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
    values = np.array([np.linalg.det(pencil(lam)) for lam in lams])
    peak = np.max(np.abs(values))
    if peak == 0:
        raise PreconditionError("pencil determinant vanishes identically")
    coef = np.polynomial.chebyshev.chebfit(x, values / peak, deg)
    cmax = np.max(np.abs(coef))
    while len(coef) > 1 and abs(coef[-1]) <= 1e-11 * cmax:
        coef = coef[:-1]
    if len(coef) == 1:
        raw = np.zeros(0, dtype=complex)
    else:
        poly = Chebyshev(coef, domain=[lo, hi])
        raw = _polish(pencil, np.asarray(poly.roots(), dtype=complex))
    roots = _cluster(raw, tol) if raw.size else []
    return OracleResult(tuple(roots), len(coef) - 1, (lo, hi), raw)


@dataclass(frozen=True)
class OracleComparison:
    matched: int
    expected: int
    max_error: float
    unmatched_oracle: tuple
    unmatched_solver: tuple
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.matched == self.expected and not self.unmatched_oracle and not self.unmatched_solver

    def message(self) -> str:
        return f"{self.matched}/{self.expected} roots matched within {self.tolerance:g}"


def compare_roots(oracle_roots, solver_roots, tol: float = 1e-10) -> OracleComparison:
    """Match ``(lam, multiplicity)`` lists; each oracle root pairs with the nearest unused solver root."""
    remaining = list(solver_roots)
    matched, worst = 0, 0.0
    missing = []
    for lam, k in oracle_roots:
        if not remaining:
            missing.append((lam, k))
            continue
        j = int(np.argmin([abs(lam - s) for s, _ in remaining]))
        s, ks = remaining[j]
        err = abs(lam - s)
        if err <= tol * (1 + abs(lam)) and ks == k:
            matched += 1
            worst = max(worst, err)
            remaining.pop(j)
        else:
            missing.append((lam, k))
    return OracleComparison(matched, len(oracle_roots), worst, tuple(missing), tuple(remaining), tol)
