import numpy as np
import pytest

from hamspec.characteristic import gamma_derivative, make_problem
from hamspec.errors import ContourError, PreconditionError
from hamspec.randomized import random_continuous, random_discrete
from hamspec.spectral import (
    Contour,
    SearchRegion,
    analytic_multiplicity,
    certify_root,
    count_zeros,
    dlambda_solution_probe,
    eigenfunction_overlap,
    geometric_multiplicity,
    locate_eigenvalues,
    null_space,
    reduced_gamma_check,
    verify_equality,
)

from oracles import chain_eigenvalues, d2gamma_periodic, dlambda_norm_dirichlet_at_one


# counting


def test_count_rectangle(dirichlet_problem):
    assert count_zeros(dirichlet_problem, SearchRegion(0.5, 4.5, 1.0)) == 2
    assert count_zeros(dirichlet_problem, SearchRegion(0.1, 0.9, 0.2)) == 0


def test_count_circle_double(periodic_problem):
    assert count_zeros(periodic_problem, Contour(1.0, 0.5)) == 2


def test_winding_additivity(dirichlet_problem):
    whole = count_zeros(dirichlet_problem, SearchRegion(0.5, 10.0))
    parts = sum(count_zeros(dirichlet_problem, SearchRegion(lo, hi)) for lo, hi in [(0.5, 2.5), (2.5, 6.1), (6.1, 10.0)])
    assert whole == parts == 3


def test_contour_radius_positive():
    with pytest.raises(ContourError):
        Contour(1.0, 0.0)


def test_region_validation():
    with pytest.raises(PreconditionError):
        SearchRegion(2.0, 1.0)
    with pytest.raises(PreconditionError):
        SearchRegion(0.0, 1.0, 0.0)


# locating


def test_locate_dirichlet(dirichlet_problem):
    roots = locate_eigenvalues(dirichlet_problem, SearchRegion(0.5, 10.0))
    assert [k for _, k in roots] == [1, 1, 1]
    assert np.allclose([lam for lam, _ in roots], [1, 4, 9], atol=1e-8)


def test_locate_periodic(periodic_problem):
    roots = locate_eigenvalues(periodic_problem, SearchRegion(0.5, 5.0))
    assert [k for _, k in roots] == [2, 2]
    assert np.allclose([lam for lam, _ in roots], [1, 4], atol=1e-6)


def test_locate_chain(chain_problem):
    roots = locate_eigenvalues(chain_problem, SearchRegion(-0.5, 4.5))
    assert [k for _, k in roots] == [1] * 4
    assert np.allclose([lam for lam, _ in roots], chain_eigenvalues(5), atol=1e-10)


def test_basis_change_invariance(dirichlet_problem):
    rng = np.random.default_rng(3)
    G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a = locate_eigenvalues(dirichlet_problem, SearchRegion(0.5, 10.0))
    b = locate_eigenvalues(dirichlet_problem.transformed(G), SearchRegion(0.5, 10.0))
    assert [k for _, k in a] == [k for _, k in b]
    assert np.allclose([x for x, _ in a], [x for x, _ in b], atol=1e-8)


# multiplicities


def test_analytic_multiplicity(dirichlet_problem, periodic_problem):
    assert analytic_multiplicity(dirichlet_problem, 1.0, 0.5) == 1
    assert analytic_multiplicity(periodic_problem, 1.0, 0.5) == 2
    assert analytic_multiplicity(periodic_problem, 0.0, 0.4) == 1


def test_analytic_multiplicity_isolation(dirichlet_problem):
    with pytest.raises(ContourError):
        analytic_multiplicity(dirichlet_problem, 1.0, 2.0, known_roots=[1.0, 4.0])


def test_geometric_dirichlet(dirichlet_problem):
    tau2, basis = geometric_multiplicity(dirichlet_problem, 1.0)
    assert tau2 == 1
    rec = certify_root(dirichlet_problem, 1.0, 0.5)
    f = rec.eigenfunctions[0]
    # proportional to (sin t, cos t)
    ref = np.stack([np.sin(f.points), np.cos(f.points)], axis=1)
    ratio = f.values[50, 0] / ref[50, 0]
    assert np.allclose(f.values, ratio * ref, atol=1e-7)


def test_geometric_periodic(periodic_problem):
    tau2, basis = geometric_multiplicity(periodic_problem, 1.0)
    assert tau2 == 2 and basis.shape == (2, 2)
    assert np.abs(null_space(periodic_problem, 1.0).G).max() <= 1e-7


def test_geometric_refuses_non_eigenvalue(dirichlet_problem):
    with pytest.raises(PreconditionError):
        geometric_multiplicity(dirichlet_problem, 0.5)


# reduced determinant and probe


def test_reduced_gamma_values(dirichlet_problem, periodic_problem):
    value, verdict = reduced_gamma_check(dirichlet_problem, 1.0)
    assert verdict == "NONZERO"
    assert abs(value) == pytest.approx(np.pi / 2, rel=1e-6)
    assert abs(value) == pytest.approx(abs(gamma_derivative(dirichlet_problem, 1.0)), rel=1e-6)
    value, verdict = reduced_gamma_check(periodic_problem, 1.0)
    assert verdict == "NONZERO"
    assert abs(value) == pytest.approx(abs(d2gamma_periodic(1.0)) / 2, rel=1e-6)
    value, _ = reduced_gamma_check(periodic_problem, 0.0)
    assert abs(value) == pytest.approx(4 * np.pi ** 2, rel=1e-6)


def test_reduced_gamma_matches_derivative_random():
    for seed in range(3):
        rp = random_continuous(seed)
        problem = make_problem(rp.spec, rp.bc)
        lam = locate_eigenvalues(problem, SearchRegion(-20, 30))[0][0]
        value, verdict = reduced_gamma_check(problem, lam)
        assert verdict == "NONZERO"
        assert abs(value) == pytest.approx(abs(gamma_derivative(problem, lam)), rel=1e-6)


def test_probe_dirichlet(dirichlet_problem):
    ns = null_space(dirichlet_problem, 1.0)
    probe = dlambda_solution_probe(dirichlet_problem, ns, [1.0])
    assert probe.passed
    assert probe.normalized_residual >= 0.1
    assert probe.weighted_norm == pytest.approx(dlambda_norm_dirichlet_at_one(), rel=1e-6)
    double = dlambda_solution_probe(dirichlet_problem, ns, [2.0])
    assert double.weighted_norm == pytest.approx(2 * probe.weighted_norm, rel=1e-12)
    assert double.bc_residual == pytest.approx(2 * probe.bc_residual, rel=1e-12)
    with pytest.raises(PreconditionError):
        dlambda_solution_probe(dirichlet_problem, ns, [0.0])


def test_probe_periodic_all_directions(periodic_problem):
    ns = null_space(periodic_problem, 4.0)
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert dlambda_solution_probe(periodic_problem, ns, c).passed


# certification


def test_verify_dirichlet(dirichlet_problem):
    report = verify_equality(dirichlet_problem, SearchRegion(0.5, 10.0))
    assert report.verdict == "PASS"
    assert [(round(l), a, g) for l, a, g in report.roots] == [(1, 1, 1), (4, 1, 1), (9, 1, 1)]
    assert report.total_count == 3


def test_verify_periodic_with_workers(periodic_problem):
    report = verify_equality(periodic_problem, SearchRegion(0.5, 5.0), workers=2)
    assert report.verdict == "PASS"
    assert [(a, g) for _, a, g in report.roots] == [(2, 2), (2, 2)]


def test_verify_chain(chain_problem):
    report = verify_equality(chain_problem, SearchRegion(-0.5, 4.5))
    assert report.verdict == "PASS"
    assert np.allclose([r[0] for r in report.roots], chain_eigenvalues(5), atol=1e-10)


@pytest.mark.parametrize("make", [random_continuous, random_discrete])
def test_verify_random_twisted(make):
    rp = make(11, "twisted_periodic", 2)
    problem = make_problem(rp.spec, rp.bc)
    report = verify_equality(problem, rp.region)
    assert report.verdict == "PASS", report.notes
    for rec in report.records:
        assert rec.analytic_mult == rec.geometric_mult


def test_orthogonality(dirichlet_problem):
    recs = verify_equality(dirichlet_problem, SearchRegion(0.5, 10.0)).records
    for i in range(len(recs)):
        for j in range(i + 1, len(recs)):
            assert eigenfunction_overlap(dirichlet_problem, recs[i], recs[j]) <= 1e-6


def test_orthogonality_discrete():
    rp = random_discrete(5, "separated", 2)
    problem = make_problem(rp.spec, rp.bc)
    recs = verify_equality(problem, rp.region).records
    assert len(recs) >= 2
    for i in range(len(recs)):
        for j in range(i + 1, len(recs)):
            assert eigenfunction_overlap(problem, recs[i], recs[j]) <= 1e-8


def test_record_summary(dirichlet_problem):
    rec = certify_root(dirichlet_problem, 4.0, 0.5)
    s = rec.summary()
    assert s["tau1"] == s["tau2"] == 1
    assert s["verdict"] == "PASS"
    assert s["residuals"]["bc_residuals"][0] <= 1e-8
