"""Closed-form error probabilities and end-to-end BER bounds."""
from .bounds import (
    BoundInputs,
    BoundBreakdown,
    PepFactors,
    SeriesBound,
    relay_bit_error,
    relay_bit_error_asymptotic,
    failure_probability,
    failure_probability_asymptotic,
    failure_constant,
    direct_path_ber,
    direct_path_ber_asymptotic,
    pep_z_factor,
    success_ber_bound,
    end_to_end_bound,
)
from .study import (
    AsymptoteFit,
    asymptotic_pb,
    bound_table,
    fit_asymptote,
    log_log_slope,
    packet_length_study,
)

__all__ = [
    'BoundInputs', 'BoundBreakdown', 'PepFactors', 'SeriesBound',
    'relay_bit_error', 'relay_bit_error_asymptotic',
    'failure_probability', 'failure_probability_asymptotic', 'failure_constant',
    'direct_path_ber', 'direct_path_ber_asymptotic',
    'pep_z_factor', 'success_ber_bound', 'end_to_end_bound',
    'AsymptoteFit', 'asymptotic_pb', 'bound_table', 'fit_asymptote',
    'log_log_slope', 'packet_length_study',
]
