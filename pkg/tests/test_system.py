import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamspec.coefficients import FunctionCoefficient, GridCoefficient, PiecewisePolynomial
from hamspec.errors import DomainError, EvaluationError, ShapeError
from hamspec.system import (
    ContinuousSystem,
    DefinitenessProbe,
    DiscreteSystem,
    SymplecticForm,
    Trajectory,
    check_definiteness,
    discrete_trajectory,
    validate,
    validate_continuous,
    validate_discrete,
    weighted_inner_product,
)

from oracles import P_HARMONIC, W_HARMONIC


@pytest.mark.parametrize("m", [1, 2, 3])
def test_symplectic_form(m):
    J = SymplecticForm(m).matrix
    assert np.allclose(J.conj().T, -J)
    assert np.allclose(J @ J, -np.eye(2 * m))
    assert np.all(J.imag == 0)


def test_symplectic_form_rejects_zero():
    with pytest.raises(DomainError):
        SymplecticForm(0)


def test_validate_harmonic_is_clean(harmonic_spec):
    assert validate_continuous(harmonic_spec).ok


def test_negative_weight_reported_everywhere():
    spec = ContinuousSystem(1, (0, np.pi), P_HARMONIC, np.diag([-1.0, 0.0]))
    rep = validate_continuous(spec)
    assert not rep.ok
    locs = rep.locations("W", "not positive semidefinite")
    assert len(locs) == rep.details["checked_points"]
    assert all(v.magnitude == pytest.approx(1.0) for v in rep.violations)


def test_non_hermitian_p_reported():
    spec = ContinuousSystem(1, (0, 1), np.array([[0, 1j], [0, 0]]), W_HARMONIC)
    rep = validate_continuous(spec)
    assert rep.locations("P", "not Hermitian")
    assert rep.violations[0].magnitude == pytest.approx(1.0)


def test_unevaluable_coefficient_names_t():
    def P(t):
        if t > 0.5:
            raise RuntimeError("boom")
        return P_HARMONIC

    spec = ContinuousSystem(1, (0, 1), FunctionCoefficient(P, 2), W_HARMONIC)
    with pytest.raises(EvaluationError) as info:
        validate_continuous(spec)
    assert info.value.t > 0.5


def test_discrete_chain_clean():
    spec = DiscreteSystem(1, (0, 9), 0, 1, 0, 1, 0)
    assert validate_discrete(spec).ok


def test_discrete_b1_failure_at_3():
    A = {n: np.array([[1.0 if n == 3 else 0.0]]) for n in range(10)}
    rep = validate_discrete(DiscreteSystem(1, (0, 9), A, 1, 0, 1, 0))
    assert rep.locations("I-A") == [3]


def test_discrete_b_not_hermitian_at_2():
    B = [np.array([[1j if n == 2 else 1.0]]) for n in range(10)]
    rep = validate(DiscreteSystem(1, (0, 9), 0, B, 0, 1, 0))
    assert rep.locations("B", "not Hermitian") == [2]


def test_discrete_missing_entry_names_n():
    A = {n: np.zeros((1, 1)) for n in range(10) if n != 7}
    with pytest.raises(DomainError, match="n=7"):
        DiscreteSystem(1, (0, 9), A, 1, 0, 1, 0)


def test_shape_mismatch_rejected():
    with pytest.raises(ShapeError):
        ContinuousSystem(1, (0, 1), np.eye(3), W_HARMONIC)


def test_hermitian_check_involutive():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    for P in (X + X.conj().T, X):
        spec = ContinuousSystem(1, (0, 1), P, W_HARMONIC)
        assert validate(spec).ok == validate(spec.conj_transpose()).ok


def test_grid_and_piecewise_coefficients_evaluate():
    samples = np.array([np.eye(2) * t for t in np.linspace(0, 1, 5)])
    lin = GridCoefficient(0, 1, samples)
    cub = GridCoefficient(0, 1, samples, "cubic")
    assert np.allclose(lin(0.3), 0.3 * np.eye(2))
    assert np.allclose(cub(0.3), 0.3 * np.eye(2))
    pp = PiecewisePolynomial([0, 1, 2], [[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    assert np.allclose(pp(0.5), 0.5 * np.eye(2))
    assert np.allclose(pp(1.5), np.eye(2))
    assert pp.breakpoints(0, 2) == (1.0,)
    with pytest.raises(EvaluationError):
        lin(1.5)


# weighted inner product


def test_inner_product_zero():
    spec = DiscreteSystem(1, (0, 2), 0, 1, 0, 1, 0)
    f = discrete_trajectory(spec, np.zeros((4, 2)))
    assert weighted_inner_product(f, f, spec) == 0


def test_inner_product_continuous_closed_form(harmonic_spec):
    t = np.linspace(0, np.pi, 401)
    f = Trajectory(t, np.stack([np.sin(t), np.cos(t)], axis=1))
    assert weighted_inner_product(f, f, harmonic_spec) == pytest.approx(np.pi / 2, rel=1e-9)


def test_inner_product_discrete_hand_sum():
    spec = DiscreteSystem(1, (0, 2), 0, 1, 0, 1, 0)
    u = np.arange(4.0)
    f = discrete_trajectory(spec, np.stack([u, np.zeros(4)], axis=1))
    assert weighted_inner_product(f, f, spec) == pytest.approx(14.0)


def test_inner_product_length_mismatch(harmonic_spec):
    f = Trajectory(np.linspace(0, 1, 5), np.ones((5, 2)))
    g = Trajectory(np.linspace(0, 1, 6), np.ones((6, 2)))
    with pytest.raises(ShapeError):
        weighted_inner_product(f, g, harmonic_spec)


complex_st = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), complex_st)
def test_inner_product_sesquilinear(seed, c):
    rng = np.random.default_rng(seed)
    spec = DiscreteSystem(2, (0, 3), 0, np.eye(2), 0, np.eye(2), 0.5 * np.eye(2))
    vals = lambda: rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    f, g = discrete_trajectory(spec, vals()), discrete_trajectory(spec, vals())
    fg = weighted_inner_product(f, g, spec)
    assert np.isclose(weighted_inner_product(g, f, spec), np.conj(fg), rtol=1e-12, atol=1e-12)
    assert np.isclose(weighted_inner_product(c * f, g, spec), c * fg, rtol=1e-12, atol=1e-10)
    assert np.isclose(weighted_inner_product(f, c * g, spec), np.conj(c) * fg, rtol=1e-12, atol=1e-10)
    ff = weighted_inner_product(f, f, spec)
    assert abs(ff.imag) <= 1e-12 * abs(ff) and ff.real >= -1e-12


# definiteness


def test_definiteness_harmonic_passes(harmonic_spec):
    rep = check_definiteness(harmonic_spec, DefinitenessProbe([(0, np.pi)], (0.0, 1.0)))
    assert rep.passed
    assert rep.note == "sampled certificate"


def test_definiteness_zero_weight_fails():
    spec = ContinuousSystem(1, (0, np.pi), P_HARMONIC, np.zeros((2, 2)))
    rep = check_definiteness(spec, DefinitenessProbe([(0, 1), (1, 2)]))
    assert not rep.passed
    assert all(e.min_norm == 0 for e in rep.entries)


def test_definiteness_discrete_chain(chain_spec):
    rep = check_definiteness(chain_spec, DefinitenessProbe([(0, 1), (2, 3)], (0.0,)))
    assert rep.passed


def test_definiteness_scale_invariant(harmonic_spec):
    from hamspec.propagation import fundamental_matrix

    def scaled(spec, lam, points):
        fr = fundamental_matrix(spec, lam, points)
        return type(fr)(fr.spec, fr.lam, fr.anchor, fr.points, 1e6 * fr.values)

    probe = DefinitenessProbe([(0, 1.0)], (0.0,))
    a = check_definiteness(harmonic_spec, probe)
    b = check_definiteness(harmonic_spec, probe, scaled)
    assert a.verdict == b.verdict
    assert a.entries[0].min_ratio == pytest.approx(b.entries[0].min_ratio, rel=1e-9)


def test_definiteness_window_outside(harmonic_spec):
    with pytest.raises(DomainError):
        check_definiteness(harmonic_spec, DefinitenessProbe([(0, 5.0)]))
