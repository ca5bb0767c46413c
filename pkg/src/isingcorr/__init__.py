"""High-precision diagonal correlations of the anisotropic triangular-lattice
Ising model, with the square-lattice column and diagonal specializations.

Three mutually cross-validating routes:

* dense Toeplitz determinants over quadrature moments (the ground truth),
* the linear moment recurrences driven by the weight's spectral data,
* the coupled nonlinear recurrence systems with reflection-coefficient
  recovery (triangular, column, and the one-parameter diagonal pair).
"""

from .errors import (AmbiguousRegime, ComplexDiscriminant, DenominatorVanishes,
                     GuardBracketZero, GuardSZero, InitDenominatorZero,
                     InvalidFlipPattern, IsingCorrError, IterationAborted,
                     LeadingCoefficientZero, MissingMoments, NoConvergence,
                     NonFiniteInput, NumericalFailure, OrderDropIndex,
                     RegimeRefusal, SingularMatrix, StencilCrossesCritical,
                     WindowTooSmall, ZeroF)
from .lattice import (Couplings, LatticeData, MomentParity, Regime, classify,
                      classify_couplings, derive, symmetry_transform)
from .moments import (MomentTable, Source, extend_by_recurrence,
                      moment_quadrature, moment_window, recurrence_residual)
from .toeplitz import (CorrelationSeries, Method, det_ratio_check,
                       determinant_series)
from .garnier import (AuxRS, GarnierRun, GarnierState, RecoveryState, aux_rs,
                      garnier_series, init_state, iterate, step_f, step_g)
from .square import (ColumnParams, ColumnRun, DPVRun, DPVState, LimitReport,
                     SigmaReport, boundary_series_coefficient,
                     boundary_series_reference, column_iterate, column_system,
                     dpv_iterate, dpv_system, limit_order_fit,
                     sigma_pvi_residual, sigma_residual_at_t,
                     triangular_limit_check)
from .verify import CHECK_GROUPS, GRID, VerifyResult, run_verify
from .weights import (SquareColumnWeight, SquareDiagonalWeight,
                      TriangularWeight, spectral_from_singularities)

__version__ = "0.1.0"
