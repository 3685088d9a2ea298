"""Information-flux analysis of quantum state transfer in spin chains."""

from .chains import (
    ChainSpec,
    apply_phase_correction,
    build_generic,
    build_heisenberg_chain,
    build_xx_chain,
    christandl_couplings,
)
from .closure import ClosureGraph, GeneratorMatrix, build_closure, export_dot, generator_matrix
from .flux import (
    CoefficientVector,
    FluxSeries,
    ProductState,
    closed_form_coefficients,
    evolve_exact,
    evolve_taylor,
    flux_series,
    information_flux,
    product_expectation,
)
from .pauli import PauliString, PauliSum, PhasedPauli, commutator, commutator_with_sum, multiply, site_letter

__version__ = "0.1.0"
