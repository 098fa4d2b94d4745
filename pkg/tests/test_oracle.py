import numpy as np
import pytest

from hamspec.bc import dirichlet, periodic
from hamspec.characteristic import make_problem
from hamspec.errors import PreconditionError, SizeError
from hamspec.oracle import assemble_discrete_pencil, build_pencil, compare_roots
from hamspec.randomized import random_continuous, random_discrete
from hamspec.spectral import SearchRegion, locate_eigenvalues
from hamspec.system import DiscreteSystem

from oracles import chain_eigenvalues, periodic_chain_eigenvalues


def test_chain_dirichlet(chain_spec):
    result = assemble_discrete_pencil(chain_spec, dirichlet(1))
    roots = result.real_roots
    assert [k for _, k in roots] == [1, 1, 1, 1]
    assert np.allclose([x for x, _ in roots], chain_eigenvalues(5), atol=1e-10)
    assert result.total == 4


def test_chain_periodic_matches_solver(chain_spec):
    result = assemble_discrete_pencil(chain_spec, periodic(1))
    expected = periodic_chain_eigenvalues(5)
    assert [k for _, k in result.real_roots] == [1, 2, 2]
    assert np.allclose([x for x, _ in result.real_roots], np.unique(expected.round(12)), atol=1e-8)
    solver = locate_eigenvalues(make_problem(chain_spec, periodic(1)), SearchRegion(-0.5, 4.5))
    assert compare_roots(result.real_roots, solver, tol=1e-8).ok


def test_single_step_window():
    spec = DiscreteSystem(1, (0, 0), 0, 1, 0, 1, 0)
    # Dirichlet: u(0) = u(1) = 0; u(1) = u(0) + v(0) forces v(0) = 0, no eigenvalue
    assert assemble_discrete_pencil(spec, dirichlet(1)).roots == ()
    # periodic: y(0) = y(1); by hand the only root is 0
    result = assemble_discrete_pencil(spec, periodic(1))
    assert result.degree <= 2
    assert len(result.real_roots) == 1
    assert result.real_roots[0][0] == pytest.approx(0.0, abs=1e-12)


def test_degree_bound(chain_spec):
    pencil = build_pencil(chain_spec, dirichlet(1))
    assert pencil.degree_bound == 5
    assert pencil(0.0).shape == (12, 12)


@pytest.mark.parametrize("seed", range(6))
def test_random_discrete_agreement(seed):
    rp = random_discrete(seed, ("separated", "twisted_periodic")[seed % 2], 1 + seed // 3)
    lo, hi = rp.region.lam_min, rp.region.lam_max
    oracle = assemble_discrete_pencil(rp.spec, rp.bc, (lo, hi))
    roots = [(x, k) for x, k in oracle.real_roots if lo < x < hi]
    solver = locate_eigenvalues(make_problem(rp.spec, rp.bc), rp.region)
    cmp = compare_roots(roots, solver, tol=1e-8)
    assert cmp.ok, (cmp.message(), roots, solver)


def test_size_limit():
    spec = DiscreteSystem(2, (0, 99), 0, np.eye(2), 0, np.eye(2), 0)
    with pytest.raises(SizeError):
        assemble_discrete_pencil(spec, dirichlet(2))


def test_continuous_refused():
    rp = random_continuous(0)
    with pytest.raises(PreconditionError):
        assemble_discrete_pencil(rp.spec, rp.bc)


def test_compare_roots_reports_mismatch():
    cmp = compare_roots([(1.0, 1), (2.0, 2)], [(1.0, 1), (2.0, 1)])
    assert not cmp.ok and cmp.matched == 1
    assert cmp.message() == "1/2 roots matched within 1e-10"
    assert compare_roots([(1.0, 1)], [(1.0 + 1e-12, 1)]).ok
    assert not compare_roots([(1.0, 1)], [(1.0, 1), (3.0, 1)]).ok
