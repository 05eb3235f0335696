from src.services.aggregation import aggregate_log, record_votes, sufficiency_check
from src.services.fairpairs import apply_flip_plan, assign_pairs, draw_flip_plan, extract_preferences
from src.services.learner import minimize_error_exhaustive, minimize_error_greedy
from src.services.simulation import run_convergence, run_simulation
from src.services.probe import run_probe_experiment

__all__ = [
    'aggregate_log', 'record_votes', 'sufficiency_check',
    'apply_flip_plan', 'assign_pairs', 'draw_flip_plan', 'extract_preferences',
    'minimize_error_exhaustive', 'minimize_error_greedy',
    'run_convergence', 'run_simulation',
    'run_probe_experiment',
]
