"""Generalized Weyl quantization, star products and Wigner functions on the
cylinder, with number-phase Wigner functions for a single bosonic mode."""

__version__ = "0.1.0"

from .core import (Config, AngleGrid, MomentumBand, CylinderFunction, CylinderOperator,
                   DensityOperator, ValidationError, integrate_angle, random_density)
from .kernels import (Kernel, KernelError, AdmissibilityError, get_kernel, kernel_weyl,
                      kernel_symmetric, check_kernel_conditions, check_admissibility,
                      kernel_report)
from .quantizer import (QuantizerSet, u_operator, gsw_quantizer, quantize, weyl_symbol,
                        k_hat_apply, quantizer_property_report, trace_identity_report)
from .star import star_product, star_product_trace, moyal_bracket, poisson_bracket, stargen_residual
from .wigner import WignerGrid, MarginalPair, wigner_function, expectation, marginals, reconstruct_density
from .numberphase import (FockVector, FockDensity, NumberPhaseWigner, embed, project,
                          number_phase_wigner, phase_state, phase_distribution,
                          number_distribution, phase_expectation, pov_interval_probability)
from .states import StateSpec, build_state, hermite, exact_number_phase_wigner, figure_data
