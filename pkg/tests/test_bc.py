import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamspec.bc import (
    BRACKET,
    BoundaryCondition,
    bracket,
    bracket_matrix,
    convert_standard_bc,
    dirichlet,
    from_matrices,
    neumann,
    periodic,
    separated,
    twisted_periodic,
    validate_bc,
)
from hamspec.characteristic import zero_frame
from hamspec.errors import DomainError, IntegrityError, ShapeError
from hamspec.propagation import fundamental_frames, fundamental_matrix
from hamspec.randomized import random_continuous, random_discrete, random_hermitian
from hamspec.system import symplectic_matrix

vectors = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=4, max_size=4
)


def test_bracket_examples():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert bracket(e1, e1) == 0
    assert bracket(e1, e2) == 1
    assert bracket([1, 1j], [1, 0]) == pytest.approx(-1j)
    with pytest.raises(ShapeError):
        bracket([1, 0], [1, 0, 0, 0])


@given(vectors, vectors)
def test_bracket_skew_hermitian(f, g):
    assert bracket(f, g) == pytest.approx(-np.conj(bracket(g, f)), abs=1e-9)


def test_bracket_matrix_at_anchor_is_J(harmonic_spec):
    f1, f0 = fundamental_frames(harmonic_spec, [2.0, 0.0], [0.0, np.pi])
    assert np.allclose(bracket_matrix(f1, f0, 0.0).value, symplectic_matrix(1))


def test_bracket_matrix_harmonic(harmonic_spec):
    f1, f0 = fundamental_frames(harmonic_spec, [1.0, 0.0], [np.pi])
    bm = bracket_matrix(f1, f0, np.pi)
    # [[1, 0], [pi, 1]] J (-I)
    assert np.allclose(bm.value, [[0, 1], [-1, np.pi]], atol=1e-8)
    assert bm.lam == 1.0 and bm.point == np.pi


def test_bracket_matrix_entries_are_brackets(harmonic_spec):
    f1, f0 = fundamental_frames(harmonic_spec, [3.0 + 1j, 0.0], [1.0])
    bm = bracket_matrix(f1, f0, 1.0).value
    Y, Y0 = f1.at(1.0), f0.at(1.0)
    for i in range(2):
        for j in range(2):
            assert bm[j, i] == pytest.approx(bracket(Y[:, i], Y0[:, j]))


def test_bracket_matrix_zero_is_J_everywhere():
    rp = random_continuous(4, m=2)
    f0 = fundamental_matrix(rp.spec, 0.0, np.linspace(0, 1, 5))
    for t in f0.points:
        assert np.allclose(bracket_matrix(f0, f0, t).value, symplectic_matrix(2), atol=1e-8)


def test_bracket_matrix_anchor_mismatch(harmonic_spec):
    f1 = fundamental_matrix(harmonic_spec, 1.0, [1.0])
    f0 = fundamental_matrix(harmonic_spec.with_anchor(1.0), 0.0, [1.0])
    with pytest.raises(IntegrityError):
        bracket_matrix(f1, f0, 1.0)
    with pytest.raises(ValueError):
        bracket_matrix(f1, f1, 1.0)


def test_validate_examples():
    assert validate_bc(periodic(1)).ok
    report = validate_bc(BoundaryCondition(1, np.eye(2), np.zeros((2, 2))))
    assert not report.ok
    d = dirichlet(1)
    assert np.allclose(d.M, [[1, 0], [0, 0]]) and np.allclose(d.N, [[0, 0], [1, 0]])
    report = validate_bc(d)
    assert report.ok and report.details["rank"] == 2


def test_rank_deficient_rejected():
    report = validate_bc(BoundaryCondition(1, np.zeros((2, 2)), np.zeros((2, 2))))
    assert not report.ok


@pytest.mark.parametrize("m", [1, 2, 3])
def test_constructors_valid(m):
    rng = np.random.default_rng(m)
    bcs = [
        dirichlet(m),
        neumann(m),
        periodic(m),
        twisted_periodic(0.7, m=m),
        separated(random_hermitian(rng, m), random_hermitian(rng, m)),
    ]
    for bc in bcs:
        assert validate_bc(bc).ok, bc.provenance


def test_separated_needs_hermitian():
    assert not validate_bc(separated([[1j]], [[0.0]])).ok


def test_twisted_periodic_rejects_non_symplectic():
    with pytest.raises(DomainError):
        twisted_periodic(0.3, K=np.diag([2.0, 1.0]))
    with pytest.raises(DomainError):
        twisted_periodic(0.3)
    K = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert validate_bc(twisted_periodic(0.3, K=K)).ok


def test_shape_checks():
    with pytest.raises(ShapeError):
        BoundaryCondition(1, np.eye(3), np.eye(3))
    with pytest.raises(ShapeError):
        from_matrices(np.eye(3), np.eye(3))


@pytest.mark.parametrize("seed", range(10))
def test_validity_invariant_under_left_multiplication(seed):
    rng = np.random.default_rng(seed)
    m = 1 + seed % 3
    G = rng.standard_normal((2 * m, 2 * m)) + 1j * rng.standard_normal((2 * m, 2 * m))
    good = twisted_periodic(rng.uniform(0, 3), m=m)
    bad = BoundaryCondition(m, np.eye(2 * m), 0.5 * np.eye(2 * m))
    assert validate_bc(good.transformed(G)).ok
    assert not validate_bc(bad.transformed(G)).ok


def test_convert_at_anchor(harmonic_spec):
    f0 = fundamental_matrix(harmonic_spec, 0.0, harmonic_spec.endpoints)
    d = dirichlet(1)
    out = convert_standard_bc(d.M, d.N, f0)
    J = symplectic_matrix(1)
    assert out.coordinate_tag == BRACKET
    assert np.allclose(out.M, -d.M @ J)


def test_convert_reproduces_standard_residual(harmonic_spec):
    f0, fl = fundamental_frames(harmonic_spec, [0.0, 2.3], harmonic_spec.endpoints)
    rng = np.random.default_rng(0)
    d = twisted_periodic(0.4, m=1)
    out = convert_standard_bc(d.M, d.N, f0)
    J = symplectic_matrix(1)
    a, b = harmonic_spec.endpoints
    c = rng.standard_normal(2)
    ya, yb = fl.at(a) @ c, fl.at(b) @ c
    lhs = out.M @ (f0.at(a).conj().T @ J @ ya) - out.N @ (f0.at(b).conj().T @ J @ yb)
    assert np.allclose(lhs, d.M @ ya - d.N @ yb, atol=1e-9)


def _defect(M, N, J):
    return np.linalg.norm(M @ J @ M.conj().T - N @ J @ N.conj().T)


@pytest.mark.parametrize("seed", range(10))
def test_convert_preserves_defect(seed):
    rng = np.random.default_rng(100 + seed)
    rp = random_continuous(seed, m=2) if seed % 2 else random_discrete(seed, m=2)
    m = 2
    J = symplectic_matrix(m)
    f0 = zero_frame(rp.spec)
    M = rng.standard_normal((2 * m, 2 * m)) + 1j * rng.standard_normal((2 * m, 2 * m))
    N = rng.standard_normal((2 * m, 2 * m)) + 1j * rng.standard_normal((2 * m, 2 * m))
    out = convert_standard_bc(M, N, f0)
    before, after = _defect(M, N, J), _defect(out.M, out.N, J)
    assert abs(before - after) <= 1e-10 * before


def test_convert_periodic_valid(harmonic_periodic_spec):
    f0 = fundamental_matrix(harmonic_periodic_spec, 0.0, harmonic_periodic_spec.endpoints)
    assert validate_bc(convert_standard_bc(np.eye(2), np.eye(2), f0)).ok
