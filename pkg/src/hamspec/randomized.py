"""Seeded random problems for the equality suites.

Continuous problems are matrix Sturm-Liouville systems on ``[0, 1]``::

    P(t) = [[-Q(t), S*], [S, R]],  W = diag(W1, 0)

with ``R`` and ``W1`` positive definite, which makes every nontrivial
solution visible to the weight. ``Q`` varies linearly in ``t`` so the
integrator sees a non-constant coefficient. Discrete problems use the same
block pattern with small ``A(n)`` so that ``I - A(n)`` stays invertible.

Frames are anchored mid-interval: growing solutions then only build up over
half the domain in each direction, which keeps ``|Y|`` and hence the rounding
floor ``eps |Y|^2`` of the symplectic invariant small.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .bc import BoundaryCondition, separated, twisted_periodic
from .coefficients import PiecewisePolynomial
from .spectral import SearchRegion
from .system import ContinuousSystem, DiscreteSystem, SystemSpec

CONTINUOUS_RANGE = (-20.0, 50.0)
DISCRETE_RANGE = (-10.0, 20.0)


def random_hermitian(rng: np.random.Generator, m: int, scale: float = 1.0) -> np.ndarray:
    X = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return scale * (X + X.conj().T) / 2


def random_positive(rng: np.random.Generator, m: int, low: float = 0.5, high: float = 2.0) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    return Q @ np.diag(rng.uniform(low, high, m)) @ Q.conj().T


@dataclass(frozen=True)
class RandomProblem:
    seed: int
    kind: str
    bc_kind: str
    m: int
    spec: SystemSpec
    bc: BoundaryCondition
    region: SearchRegion

    @property
    def label(self) -> str:
        return f"{self.kind}/{self.bc_kind}/m={self.m}/seed={self.seed}"


def _random_bc(rng, bc_kind: str, m: int) -> BoundaryCondition:
    if bc_kind == "separated":
        return separated(random_hermitian(rng, m, 0.5), random_hermitian(rng, m, 0.5))
    gamma = float(rng.uniform(0.2, np.pi - 0.2))
    return twisted_periodic(gamma, m=m)


def random_continuous(seed: int, bc_kind: str = "separated", m: int = 1) -> RandomProblem:
    rng = np.random.default_rng(seed)
    Q0 = random_hermitian(rng, m, 2.0)
    Q1 = random_hermitian(rng, m, 2.0)
    S = 0.5 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    R = random_positive(rng, m)
    W1 = random_positive(rng, m)
    Z = np.zeros((m, m))
    P0 = np.block([[-Q0, S.conj().T], [S, R]])
    P1 = np.block([[-Q1, Z], [Z, Z]])
    P = PiecewisePolynomial([0.0, 1.0], [[P0, P1]])
    W = np.block([[W1, Z], [Z, Z]])
    spec = ContinuousSystem(m, (0.0, 1.0), P, W, anchor=0.5)
    bc = _random_bc(rng, bc_kind, m)
    return RandomProblem(seed, "continuous", bc_kind, m, spec, bc, SearchRegion(*CONTINUOUS_RANGE))


def random_discrete(seed: int, bc_kind: str = "separated", m: int = 1, size: int = 6) -> RandomProblem:
    rng = np.random.default_rng(seed)
    A = [0.3 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2 * m) for _ in range(size)]
    B = [random_positive(rng, m) for _ in range(size)]
    C = [random_hermitian(rng, m) for _ in range(size)]
    W1 = [random_positive(rng, m) for _ in range(size)]
    W2 = np.zeros((m, m))
    spec = DiscreteSystem(m, (0, size - 1), A, B, C, W1, W2, anchor=size // 2)
    bc = _random_bc(rng, bc_kind, m)
    return RandomProblem(seed, "discrete", bc_kind, m, spec, bc, SearchRegion(*DISCRETE_RANGE))


def equality_suite(seed: int = 0, per_class: int = 3) -> list[RandomProblem]:
    """``per_class`` problems for every (kind, bc, m) combination; seeds derive from ``seed``."""
    out = []
    classes = list(product(("continuous", "discrete"), ("separated", "twisted_periodic"), (1, 2)))
    for c, (kind, bc_kind, m) in enumerate(classes):
        for j in range(per_class):
            s = seed * 1000 + 10 * c + j
            make = random_continuous if kind == "continuous" else random_discrete
            out.append(make(s, bc_kind, m))
    return out
