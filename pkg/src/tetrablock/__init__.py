"""Finite-dimensional numerics for tetrablock contractions."""
from .decomposition import canonical_decompose, unitary_subspace, wold_split
from .errors import (BoundaryModulus, DegenerateDefect, DimensionMismatch, HypothesisViolated,
                     NonSquare, NotAContraction, NotIsometricInterior, NotUnimodular,
                     ParseError, SymbolConditionsViolated, TetraError, ValidationError)
from .fundamental import adjoint_fundamentals, commutator_report, fundamental_operators
from .geometry import (TetraPoint, bidisc_zero_oracle, in_bE, in_closed_E, in_open_E,
                       rotate, sample_closed_E, solve_certificate, sup_norm_estimate)
from .harness import GeneratorSpec, gen_e_contraction, gen_e_unitary, run_suite
from .io import emit_triple, parse_triple
from .models import (build_coisometry_model, build_dilation, build_toeplitz_pure_isometry,
                     verify_dilation)
from .numkit import DEFAULT_TOL, ToleranceProfile, defect_operator, kernel_intersection, op_norm
from .polynomials import Polynomial3
from .triples import (OperatorTriple, classify, classify_E_isometry, classify_E_unitary,
                      purity, rho_check, vn_falsifier)

__version__ = "0.1.0"
