"""Numerical Dunkl analysis on the real line.

The Dunkl kernel, the Dunkl transform with its weighted quadrature,
iterated Dunkl operators on Chebyshev proxies and spectral syntheses, and
the Paley-Wiener / Bang-type experiments built on them.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (ConfigError, DunklError, IllConditionedError, InstabilityError,
                     KernelRangeError, QuadratureError, TruncationError)
from .kernel import (KernelSeries, KernelValue, Multiplicity, gamma_seq, kernel_apply, kernel_eval,
                     kernel_residual, kernel_series, psi)
from .funcrep import (Bump, ChebProxy, Gaussian, Indicator, PolyGaussian, Zero, cheb_fit,
                      differentiate, dunkl_apply, dunkl_power, moment_average, odd_div_x, reflect,
                      sup_norm)
from .quadrature import QuadratureGrid
from .transform import (BandLimited, SpectralProfile, WeightedMeasure, band_limited_synthesize,
                        dunkl_transform, inverse_transform, lp_norm, spectral_power_norm,
                        spectral_power_norms, spectral_source, weight_constant,
                        weight_constant_closed, weighted_inner)
from .analysis import (INF, BangSequence, GrowthCertificate, SupportEstimate, bang_sequence,
                       gamma_ratio_factor, growth_certify, identity_suite, support_radius,
                       upper_bound_curve)
