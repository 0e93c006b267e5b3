"""spikelab: closed-form generalization risk for spiked-covariance linear
regression, verified against a seeded Monte Carlo laboratory."""

__version__ = "0.1.0"

from .errors import (DomainError, GammaNearZero, InvalidConfig, InvalidMatrix,
                     MuZeroDivergent, NonZeroMu, OutOfDomain, RegimeBoundary,
                     SpikeLabError)
from .linalg import (MeyerHelpers, SvdFactors, augmented_svd, meyer_helpers,
                     pinv, rank_one_pinv_update)
from .mp import (ShapeParams, SpectralMoments, bbp_top_eigenvalue, mp_cdf,
                 mp_density, mp_stieltjes, mp_stieltjes_d1, mp_stieltjes_d2,
                 mp_support, spectral_moments)
from .quadforms import (QuadFormExpectations, TheoryCombinators, combinators,
                        quad_form_expectations, zero_forms_list)
from .risk import (ModelConfig, RiskBreakdown,
                   dd_peak_location, risk_isotropic_limit, risk_so,
                   risk_so_unregularized, risk_spn,
                   spn_asymptotic_no_correction, spn_spike_correction)
from .simulate import (DatasetInstance, MonteCarloEstimate, QuadFormSample,
                       bulk_spectrum, empirical_risk, gen_instance,
                       measure_quad_forms, monte_carlo_risk, solve_so,
                       solve_spn, spiked_wishart_top_eigenvalue)
from .sweep import CSV_COLUMNS, ResultRow, SweepSpec, render_svg, run_sweep, write_csv
from .verify import VerificationReport, run_verification

__all__ = [name for name in dir() if not name.startswith("_")]
