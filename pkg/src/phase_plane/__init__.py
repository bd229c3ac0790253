from src.phase_plane.pair import PairGapReport, error_term_gap, pair_gap_estimates
from src.phase_plane.path import PhasePath, integrate_phase
from src.phase_plane.shooting import (
    RadialSolution,
    error_term,
    even_center_value,
    ode_residual,
    solve_energy_profile,
    solve_large_solution,
)
