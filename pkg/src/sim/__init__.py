"""Monte Carlo simulation of the coded cooperation protocol."""
from .simulator import (
    NetworkConfig,
    StopRule,
    RoundOutcome,
    FrameOutcome,
    SimPoint,
    SimResult,
    BudgetEstimate,
    BudgetExceededError,
    MonteCarloSimulator,
    simulate_frame,
    run_round,
    run_sweep,
    relay_position_sweep,
    estimate_budget,
    check_budget,
    sweep_beta_table,
    wilson_radius,
)

__all__ = [
    'NetworkConfig', 'StopRule', 'RoundOutcome', 'FrameOutcome', 'SimPoint', 'SimResult',
    'BudgetEstimate', 'BudgetExceededError', 'MonteCarloSimulator',
    'simulate_frame', 'run_round', 'run_sweep', 'relay_position_sweep',
    'estimate_budget', 'check_budget', 'sweep_beta_table', 'wilson_radius',
]
