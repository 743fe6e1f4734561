"""Phase-space (Wigner/Moyal) and Segal-Bargmann treatments of the Aharonov-Bohm effect."""

from .aharonov_bohm import (ElectricScenario, GaugeWorldline, MagneticScenario, ScenarioResult,
                            apply_phase_operator, electric_ab_closed_form, gauge_phase,
                            gauge_transform_check, intertwining_residual, magnetic_phase_closed_form,
                            simulate_electric_ab, simulate_magnetic_ring)
from .bargmann import (HusimiField, PlaneGrid, SBFunction, harmonic_spectrum, husimi_from_sb,
                       husimi_from_wigner, sb_apply, sb_evolve, sb_inner, sb_inverse, sb_transform)
from .errors import *  # noqa: F401,F403
from .moyal import (HamiltonianSpec, ScalarSchedule, classical_limit_probe, evolve_wigner,
                    moyal_bracket, stable_dt, star, star_grid, star_mixed, star_poly,
                    stargen_residual)
from .states import (MomentumWaveFunction, PhaseGrid, PhysicalConstants, WaveFunction,
                     make_gaussian_packet, make_ring_mode, to_momentum, to_position)
from .symbols import GridSymbol, PolySymbol, poisson_bracket
from .wigner import (CrossWignerField, OperatorMatrix, WignerField, cross_wigner, expectation,
                     marginal_momentum,
                     marginal_position, matrix_to_poly, matrix_to_symbol, purity, symbol_to_matrix,
                     weyl_to_matrix, wigner_from_momentum, wigner_from_position)

__version__ = "0.1.0"
