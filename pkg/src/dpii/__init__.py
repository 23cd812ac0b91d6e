"""Discrete Painleve II: solver, tronquee shooting and certification."""
from .kernels import BACKEND
from .errors import (BallEscapes, BoundaryPoint, BracketFailure, Degenerate,
                     DomainError, DpiiError, GridCoverage, IndexRange, NoConvergence,
                     NoPole, NotDominant, NumericalFailure, ParseError,
                     SingularPivot, StepFailure)
from .special import airy_ai
from .pii import (PiiForm, PiiTrajectory, asymptotic_init, convert, identity_residual,
                  integrate, pii_rhs, region_classify)
from .tronquee import (NuSeries, PoleMap, TronqueeKey, b_of_pole, f_ode_residual,
                       hastings_mcleod, lower_bound_margin, monotonicity_check,
                       nu_omega, nu_series, pole_of)
from .discrete import (DpiiInstance, DpiiState, TridiagMatrix, f_jacobian, f_map,
                       gradient, hamiltonian, hessian_s, solve, tridiag_solve)
from .approx import ApproxConfig, b_transform, build_a0, f_error_profile
from .certify import (KantorovichCertificate, gamma_rows, kantorovich_certificate,
                      lipschitz_M, varah_bound)
from .scaling import ScalingConfig, ScalingReport, figure1_data, run_scaling, slope_fit

__version__ = "0.1.0"
