from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across the package.

    All values are relative unless the name says otherwise; see the
    individual consumers for what each one is relative to.
    """

    herm: float = 1e-10
    psd: float = 1e-10
    definiteness: float = 1e-8
    symplectic: float = 1e-8
    rank_bc: float = 1e-9
    self_adjoint_bc: float = 1e-9
    rtol: float = 1e-10
    atol: float = 1e-13
    root: float = 1e-8
    cluster: float = 1e-6
    rank: float = 1e-8
    reduced: float = 1e-8
    probe: float = 1e-4
    boundary: float = 1e-9
    bc_residual: float = 1e-7
    ortho: float = 1e-6
    subspace: float = 1e-9

    def root_tol(self, lam: complex) -> float:
        return self.root * (1.0 + abs(lam))

    def updated(self, **overrides) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **overrides)


DEFAULT_TOLERANCES = Tolerances()
