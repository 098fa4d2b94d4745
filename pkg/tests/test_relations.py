import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamspec.errors import PreconditionError
from hamspec.relations import (
    LinearRelation,
    adjoint,
    certify_lemma,
    decompose,
    is_self_adjoint,
    kernel_power,
    nilpotent_control,
    operator_matrix,
    power,
    product,
    random_self_adjoint,
    same_subspace,
    selftest,
)

E1 = np.array([[1.0], [0.0]])
E2 = np.array([[0.0], [1.0]])


def split_relation():
    """{((a, 0), (0, b))}: operator 0 on span e1 plus multivalued part span e2."""
    F = np.array([[1.0, 0.0], [0.0, 0.0]])
    G = np.array([[0.0, 0.0], [0.0, 1.0]])
    return LinearRelation.from_pairs(F, G)


def test_adjoint_examples():
    H = np.array([[2.0, 1j], [-1j, 0.5]])
    T = LinearRelation.graph(H)
    assert adjoint(T).equals(T)
    S = split_relation()
    assert adjoint(S).equals(S)
    N = nilpotent_control()
    assert adjoint(N).equals(LinearRelation.graph(np.array([[0.0, 0.0], [1.0, 0.0]])))
    assert not adjoint(N).equals(N)
    assert [is_self_adjoint(x) for x in (T, S, N)] == [True, True, False]


def test_domain_kernel_multivalued():
    S = split_relation()
    assert same_subspace(S.domain(), E1)
    assert same_subspace(S.kernel(), E1)
    assert same_subspace(S.multivalued_part(), E2)
    assert S.contains([1, 0], [0, 5])
    assert not S.contains([0, 1], [0, 0])


def test_decompose_examples():
    H = np.diag([1.0, -2.0])
    T_s, T_inf = decompose(LinearRelation.graph(H))
    assert T_s.equals(LinearRelation.graph(H)) and T_inf.dim == 0
    T_s, T_inf = decompose(split_relation())
    assert T_inf.equals(LinearRelation.from_pairs(np.zeros((2, 1)), E2))
    assert T_s.equals(LinearRelation.from_pairs(E1, np.zeros((2, 1))))
    pure = LinearRelation.from_pairs([[0.0]], [[1.0]])
    T_s, T_inf = decompose(pure)
    assert T_s.dim == 0 and T_inf.equals(pure)
    with pytest.raises(PreconditionError):
        decompose(nilpotent_control())


def test_kernel_power_examples():
    T = LinearRelation.graph(np.diag([1.0, 2.0]))
    assert same_subspace(kernel_power(T, 1.0, 1), E1)
    S = split_relation()
    assert same_subspace(kernel_power(S, 0.0, 2), E1)
    N = nilpotent_control()
    assert same_subspace(kernel_power(N, 0.0, 1), E1)
    assert kernel_power(N, 0.0, 2).shape[1] == 2


def test_product_of_graphs():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3))
    P = product(LinearRelation.graph(A), LinearRelation.graph(B))
    assert np.allclose(operator_matrix(P), A @ B)
    assert (LinearRelation.graph(A) @ LinearRelation.graph(B)).equals(P)
    assert np.allclose(operator_matrix(power(LinearRelation.graph(A), 3)), A @ A @ A)


def test_certify_examples():
    T = LinearRelation.graph(np.diag([1.0, 1.0, 2.0]))
    cert = certify_lemma(T, 1.0, 3)
    assert cert.passed and cert.kernel_dims == (2, 2, 2)
    assert certify_lemma(split_relation(), 0.0, 3).passed
    cert = certify_lemma(nilpotent_control(), 0.0, 3)
    assert not cert.passed and cert.first_violation == 2
    with pytest.raises(PreconditionError):
        certify_lemma(T, 5.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 8))
def test_random_relation_laws(seed, d):
    rng = np.random.default_rng(seed)
    T, eigs = random_self_adjoint(d, rng)
    assert is_self_adjoint(T)
    # involution and dimension law hold for any relation; also try a non-self-adjoint one
    X = rng.standard_normal((2 * d, d)) + 1j * rng.standard_normal((2 * d, d))
    R = LinearRelation(d, X[:, : int(rng.integers(0, d + 1))])
    for rel in (T, R):
        assert rel.dim + adjoint(rel).dim == 2 * d
        assert adjoint(adjoint(rel)).equals(rel)
    T_s, T_inf = decompose(T)
    both = np.hstack([T_s.basis, T_inf.basis])
    assert same_subspace(both, T.basis)
    for lam in eigs:
        assert certify_lemma(T, lam, 3).passed


def test_selftest():
    result = selftest(seed=0, count=100, max_dim=8)
    assert result.ok, result.failures
    assert result.control_violation == 2
