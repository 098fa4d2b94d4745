"""Eigenvalue certification for linear Hamiltonian systems.

Continuous systems ``J y' = (P + lam W) y`` and discrete systems
``J dy(n) = (P(n) + lam W(n)) R(y)(n)`` with self-adjoint boundary
conditions: fundamental frames, the characteristic determinant, zero
location by the argument principle, and certificates that analytic and
geometric multiplicities agree.
"""

__version__ = "0.1.0"

from .bc import (
    BoundaryCondition,
    bracket,
    bracket_matrix,
    convert_standard_bc,
    dirichlet,
    neumann,
    periodic,
    separated,
    twisted_periodic,
    validate_bc,
)
from .characteristic import (
    CharacteristicProblem,
    gamma,
    gamma_batch,
    gamma_derivative,
    gamma_matrix,
    make_problem,
)
from .coefficients import ConstantCoefficient, FunctionCoefficient, GridCoefficient, PiecewisePolynomial
from .errors import HamspecError, InputError, NumericalError
from .oracle import assemble_discrete_pencil
from .problem import ProblemDocument, load_problem, parse_problem, serialize_problem
from .propagation import FundamentalFrame, fundamental_matrix, fundamental_with_dlambda, symplectic_defect
from .relations import LinearRelation, adjoint, certify_lemma, decompose, is_self_adjoint, kernel_power
from .spectral import (
    Contour,
    EigenvalueRecord,
    SearchRegion,
    analytic_multiplicity,
    count_zeros,
    dlambda_solution_probe,
    geometric_multiplicity,
    locate_eigenvalues,
    reduced_gamma_check,
    verify_equality,
)
from .system import (
    ContinuousSystem,
    DefinitenessProbe,
    DiscreteSystem,
    SymplecticForm,
    check_definiteness,
    validate,
    validate_continuous,
    validate_discrete,
    weighted_inner_product,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances
