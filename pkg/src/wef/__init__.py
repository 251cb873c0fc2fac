"""Modified weight enumerators, free distance and diversity order."""
from .enumerator import (
    ModifiedWEF,
    DominantPattern,
    DiversityRegime,
    NetworkFigures,
    EnumerationBudgetError,
    EnumerationIncompleteError,
    InconclusiveError,
    enumerate_wef,
    free_distance,
    dominant_pattern,
    diversity_order,
    diversity_regime,
    lnc_baseline,
    cncc_figures,
)

__all__ = [
    'ModifiedWEF', 'DominantPattern', 'DiversityRegime', 'NetworkFigures',
    'EnumerationBudgetError', 'EnumerationIncompleteError', 'InconclusiveError',
    'enumerate_wef', 'free_distance', 'dominant_pattern', 'diversity_order',
    'diversity_regime', 'lnc_baseline', 'cncc_figures',
]
