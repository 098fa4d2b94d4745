"""Matrix-valued coefficient functions t -> C^{n x n}.

Four representations are supported: constants, uniform-grid samples with
linear or cubic interpolation, piecewise polynomials, and arbitrary callables.
Each knows its own breakpoints (where it may be non-smooth) so the integrator
can land on them exactly, and which points a validator should inspect.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, EvaluationError, ShapeError

_GAUSS3 = np.polynomial.legendre.leggauss(3)[0]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _gauss_nodes(edges: np.ndarray) -> np.ndarray:
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    return (mid[:, None] + half[:, None] * _GAUSS3[None, :]).ravel()


class Coefficient:
    """Base class; subclasses implement ``_eval``."""

    size: int
    is_constant = False

    def __call__(self, t: float) -> np.ndarray:
        try:
            value = np.asarray(self._eval(float(t)), dtype=complex)
        except EvaluationError:
            raise
        except Exception as exc:  # user callables can fail arbitrarily
            raise EvaluationError(f"coefficient not evaluable at t={t}: {exc}", t=t) from exc
        if value.shape != (self.size, self.size):
            raise EvaluationError(
                f"coefficient returned shape {value.shape} at t={t}, "
                f"expected {(self.size, self.size)}",
                t=t,
            )
        if not np.all(np.isfinite(value)):
            raise EvaluationError(f"coefficient is not finite at t={t}", t=t)
        return value

    def _eval(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self, a: float, b: float) -> tuple[float, ...]:
        return ()

    def check_points(self, a: float, b: float) -> np.ndarray:
        edges = np.linspace(a, b, 65)
        return np.unique(np.concatenate([edges, _gauss_nodes(edges)]))

    def conj_transpose(self) -> "Coefficient":
        raise NotImplementedError


class ConstantCoefficient(Coefficient):
    is_constant = True

    def __init__(self, matrix):
        matrix = _frozen(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ShapeError(f"constant coefficient must be square, got {matrix.shape}")
        self.matrix = matrix
        self.size = matrix.shape[0]

    def _eval(self, t):
        return self.matrix

    def check_points(self, a, b):
        return np.array([a, b], dtype=float)

    def conj_transpose(self):
        return ConstantCoefficient(self.matrix.conj().T)

    def __repr__(self):
        return f"ConstantCoefficient({self.matrix.tolist()!r})"


class GridCoefficient(Coefficient):
    """Samples on a uniform grid over ``[start, stop]``.

    ``interpolation`` is ``"linear"`` (breakpoints at every node) or
    ``"cubic"`` (not-a-knot spline, smooth between nodes).
    """

    def __init__(self, start: float, stop: float, samples, interpolation: str = "linear"):
        samples = _frozen(samples)
        if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
            raise ShapeError(f"grid samples must have shape (n, k, k), got {samples.shape}")
        if samples.shape[0] < 2:
            raise ShapeError("grid coefficient needs at least two samples")
        if not stop > start:
            raise DomainError(f"grid requires start < stop, got [{start}, {stop}]")
        if interpolation not in ("linear", "cubic"):
            raise ValueError(f"unknown interpolation {interpolation!r}")
        if interpolation == "cubic" and samples.shape[0] < 4:
            raise ShapeError("cubic interpolation needs at least four samples")
        self.start, self.stop = float(start), float(stop)
        self.samples = samples
        self.interpolation = interpolation
        self.size = samples.shape[1]
        self.nodes = np.linspace(self.start, self.stop, samples.shape[0])
        self._spline = (
            CubicSpline(self.nodes, samples, axis=0) if interpolation == "cubic" else None
        )

    def _eval(self, t):
        tol = 1e-12 * (self.stop - self.start)
        if t < self.start - tol or t > self.stop + tol:
            raise EvaluationError(f"t={t} outside grid [{self.start}, {self.stop}]", t=t)
        t = min(max(t, self.start), self.stop)
        if self._spline is not None:
            return self._spline(t)
        h = self.nodes[1] - self.nodes[0]
        k = min(int((t - self.start) / h), len(self.nodes) - 2)
        w = (t - self.nodes[k]) / h
        return (1.0 - w) * self.samples[k] + w * self.samples[k + 1]

    def breakpoints(self, a, b):
        if self.interpolation == "cubic":
            return ()
        return tuple(float(x) for x in self.nodes if a < x < b)

    def check_points(self, a, b):
        nodes = self.nodes[(self.nodes >= a) & (self.nodes <= b)]
        edges = np.unique(np.concatenate([[a, b], nodes]))
        return np.unique(np.concatenate([edges, _gauss_nodes(edges)]))

    def conj_transpose(self):
        return GridCoefficient(
            self.start, self.stop, np.conj(np.swapaxes(self.samples, 1, 2)), self.interpolation
        )


class PiecewisePolynomial(Coefficient):
    """``sum_p pieces[j][p] * (t - breaks[j])**p`` on ``[breaks[j], breaks[j+1]]``."""

    def __init__(self, breaks: Sequence[float], pieces):
        breaks = np.asarray(breaks, dtype=float)
        pieces = _frozen(pieces)
        if breaks.ndim != 1 or len(breaks) < 2 or np.any(np.diff(breaks) <= 0):
            raise DomainError("breaks must be a strictly increasing list of length >= 2")
        if pieces.ndim != 4 or pieces.shape[0] != len(breaks) - 1 or pieces.shape[2] != pieces.shape[3]:
            raise ShapeError(
                "pieces must have shape (len(breaks) - 1, degree + 1, k, k), "
                f"got {pieces.shape}"
            )
        breaks.setflags(write=False)
        self.breaks = breaks
        self.pieces = pieces
        self.size = pieces.shape[2]

    def _eval(self, t):
        tol = 1e-12 * (self.breaks[-1] - self.breaks[0])
        if t < self.breaks[0] - tol or t > self.breaks[-1] + tol:
            raise EvaluationError(
                f"t={t} outside piecewise range [{self.breaks[0]}, {self.breaks[-1]}]", t=t
            )
        j = int(np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.pieces) - 1))
        s = t - self.breaks[j]
        out = np.zeros((self.size, self.size), dtype=complex)
        for c in self.pieces[j][::-1]:
            out = out * s + c
        return out

    def breakpoints(self, a, b):
        return tuple(float(x) for x in self.breaks[1:-1] if a < x < b)

    def check_points(self, a, b):
        inner = self.breaks[(self.breaks > a) & (self.breaks < b)]
        edges = np.unique(np.concatenate([[a, b], inner]))
        fine = np.unique(np.concatenate([edges, np.linspace(a, b, 33)]))
        return np.unique(np.concatenate([fine, _gauss_nodes(fine)]))

    def conj_transpose(self):
        return PiecewisePolynomial(self.breaks, np.conj(np.swapaxes(self.pieces, 2, 3)))


class FunctionCoefficient(Coefficient):
    def __init__(self, func: Callable[[float], np.ndarray], size: int, breakpoints=()):
        self.func = func
        self.size = int(size)
        self._breaks = tuple(sorted(float(x) for x in breakpoints))

    def _eval(self, t):
        return self.func(t)

    def breakpoints(self, a, b):
        return tuple(x for x in self._breaks if a < x < b)

    def check_points(self, a, b):
        edges = np.unique(np.concatenate([np.linspace(a, b, 65), self.breakpoints(a, b)]))
        return np.unique(np.concatenate([edges, _gauss_nodes(edges)]))

    def conj_transpose(self):
        f = self.func
        return FunctionCoefficient(lambda t: np.conj(np.asarray(f(t))).T, self.size, self._breaks)


def as_coefficient(value, size: int | None = None) -> Coefficient:
    """Coerce a matrix, callable or :class:`Coefficient` into a coefficient."""
    if isinstance(value, Coefficient):
        coeff = value
    elif callable(value):
        if size is None:
            raise ShapeError("size is required for callable coefficients")
        coeff = FunctionCoefficient(value, size)
    else:
        coeff = ConstantCoefficient(value)
    if size is not None and coeff.size != size:
        raise ShapeError(f"coefficient has size {coeff.size}, expected {size}")
    return coeff
