"""Toolkit for a one-parameter family of phase-space distributions.

A single real parameter selects the operator-ordering convention; the
package provides the matching symbol calculus, numerical distribution
transforms, cross-picture expectation checks, and time evolution of
the joint phase-space field, plus deterministic file formats and a
small CLI.
"""

from .coeffs import HbarPoly
from .distributions import (ChiField, DistributionField, SeparableSolution,
                            assemble_separable, centroid, compute_distribution,
                            compute_distribution_shifted, field_diagnostics,
                            marginals, standard_distribution, wigner)
from .dynamics import (EPSGenerator, EvolutionResult, GeneratorTerm,
                       HamiltonianPolynomial, apply_generator, build_generator,
                       estimate_spectral_radius, evolve, separable_evolution)
from .errors import (InputError, InvariantError, ParseError, QuasidistError,
                     StabilityError)
from .expectation import (ExpectationReport, expect_hilbert,
                          expect_phase_space, expectation_report)
from .fileio import (load_density, load_field, load_json, load_state,
                     render_json, save_density, save_field, save_state,
                     write_json)
from .grids import (DensityMatrix, MomentumState, PositionState, UniformGrid,
                    coherent_state, density_from_pure, from_momentum, mix,
                    oscillator_eigenstate, to_momentum)
from .operators import (OperatorExpr, OperatorMonomial, PhaseSpaceSymbol,
                        SymbolTerm, alpha_quantize, alpha_symbol,
                        matrix_representation, multiply)
from .parsing import parse_operator, parse_symbol

__version__ = "0.1.0"

__all__ = [
    "HbarPoly",
    "ChiField", "DistributionField", "SeparableSolution",
    "assemble_separable", "centroid", "compute_distribution",
    "compute_distribution_shifted", "field_diagnostics", "marginals",
    "standard_distribution", "wigner",
    "EPSGenerator", "EvolutionResult", "GeneratorTerm",
    "HamiltonianPolynomial", "apply_generator", "build_generator",
    "estimate_spectral_radius", "evolve", "separable_evolution",
    "InputError", "InvariantError", "ParseError", "QuasidistError",
    "StabilityError",
    "ExpectationReport", "expect_hilbert", "expect_phase_space",
    "expectation_report",
    "load_density", "load_field", "load_json", "load_state", "render_json",
    "save_density", "save_field", "save_state", "write_json",
    "DensityMatrix", "MomentumState", "PositionState", "UniformGrid",
    "coherent_state", "density_from_pure", "from_momentum", "mix",
    "oscillator_eigenstate", "to_momentum",
    "OperatorExpr", "OperatorMonomial", "PhaseSpaceSymbol", "SymbolTerm",
    "alpha_quantize", "alpha_symbol", "matrix_representation", "multiply",
    "parse_operator", "parse_symbol",
    "__version__",
]
