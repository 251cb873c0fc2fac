"""
Weight Enumerator Module

Counts the error events of a systematic convolutional code and derives the
quantities the error analysis needs:
1. Modified bit weight enumerator B_{d1,d2} (systematic weight d1, parity
   weight d2) by exact path enumeration over the split-zero state diagram
2. Free distance
3. Dominant error pattern (argmin of d1 + M*d2) with a horizon certificate
4. Diversity order of the coded network and the LNC baseline

Enumeration is truncated by total weight d1 + d2: every path is extended one
trellis step at a time, merged with other paths that share (state, d1, d2),
and dropped once its weight passes the horizon.

Design Philosophy:
- Exact integer counts, never floating point
- Never return a silently wrong minimizer: an insufficient horizon raises
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from convcodec import Trellis

logger = logging.getLogger(__name__)

DEFAULT_STATE_BUDGET = 5_000_000


class EnumerationIncompleteError(ValueError):
    """Raised when a quantity needs at least one enumerated term and there are none."""


class InconclusiveError(RuntimeError):
    """Raised when the horizon is too small to certify the dominant pattern."""


class EnumerationBudgetError(RuntimeError):
    """Raised when enumeration exceeds its work budget; carries the partial result."""

    def __init__(self, message: str, partial: "ModifiedWEF"):
        super().__init__(message)
        self.partial = partial


class DiversityRegime(Enum):
    """Whether the Nakagami parameter or the code limits the diversity."""
    WEAK = "weak"
    STRONG = "strong"


@dataclass
class ModifiedWEF:
    """
    Sparse modified bit weight enumerator.

    Attributes:
        terms: (d1, d2) -> B_{d1,d2} = d1 * A_{d1,d2}
        path_counts: (d1, d2) -> A_{d1,d2}, number of error events
        horizon: Largest total weight d1 + d2 enumerated
        complete: False when enumeration stopped early on its budget
    """
    terms: Dict[Tuple[int, int], int] = field(default_factory=dict)
    path_counts: Dict[Tuple[int, int], int] = field(default_factory=dict)
    horizon: int = 0
    complete: bool = True

    @property
    def dfree(self) -> Optional[int]:
        if not self.terms:
            return None
        return min(d1 + d2 for d1, d2 in self.terms)

    def sorted_terms(self) -> List[Tuple[int, int, int]]:
        """(d1, d2, B) sorted by total weight, then by d1."""
        keys = sorted(self.terms, key=lambda k: (k[0] + k[1], k[0]))
        return [(d1, d2, self.terms[(d1, d2)]) for d1, d2 in keys]

    def truncated(self, horizon: int) -> "ModifiedWEF":
        """Copy restricted to terms with d1 + d2 <= horizon."""
        keep = {k: v for k, v in self.terms.items() if k[0] + k[1] <= horizon}
        counts = {k: self.path_counts[k] for k in keep}
        return ModifiedWEF(terms=keep, path_counts=counts,
                           horizon=min(horizon, self.horizon), complete=self.complete)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.sorted_terms(), columns=['d1', 'd2', 'B'])


def _popcount_table(values: np.ndarray) -> np.ndarray:
    return np.array([bin(int(v)).count("1") for v in values.ravel()], dtype=np.int64).reshape(values.shape)


def enumerate_wef(trellis: Trellis, horizon: int,
                  state_budget: int = DEFAULT_STATE_BUDGET) -> ModifiedWEF:
    """
    Enumerate the modified BWEF up to a total-weight horizon.

    Counts zero-to-zero paths that leave the zero state on the first step and
    do not revisit it before their last step.

    Args:
        trellis: Code trellis
        horizon: Largest d1 + d2 to enumerate (>= 1)
        state_budget: Maximum number of (state, d1, d2) entries expanded

    Returns:
        ModifiedWEF with exact coefficients for every d1 + d2 <= horizon

    Raises:
        ValueError: If horizon < 1
        EnumerationBudgetError: If the budget runs out (partial result attached)
    """
    if horizon < 1:
        raise ValueError(f"Horizon must be at least 1, got {horizon}")

    S, U = trellis.state_count, trellis.input_count
    input_weight = _popcount_table(np.arange(U))
    sys_weight = trellis.systematic.sum(axis=1).astype(np.int64)
    if not np.array_equal(input_weight, sys_weight):
        raise RuntimeError("Trellis is not systematic: input weight differs from d1")
    par_weight = trellis.parity.sum(axis=2).astype(np.int64)  # (S, U)
    next_state = trellis.next_state

    counts: Dict[Tuple[int, int], int] = {}
    frontier: Dict[Tuple[int, int, int], int] = {}

    def extend(state: int, d1: int, d2: int, multiplicity: int, inputs):
        for u in inputs:
            w1 = d1 + int(sys_weight[u])
            w2 = d2 + int(par_weight[state, u])
            if w1 + w2 > horizon:
                continue
            nxt = int(next_state[state, u])
            if nxt == 0:
                counts[(w1, w2)] = counts.get((w1, w2), 0) + multiplicity
            else:
                key = (nxt, w1, w2)
                frontier[key] = frontier.get(key, 0) + multiplicity

    extend(0, 0, 0, 1, range(1, U))

    expanded = 0
    steps = 1
    while frontier:
        current = frontier
        frontier = {}
        expanded += len(current)
        if expanded > state_budget:
            wef = _finish(counts, horizon, complete=False)
            logger.warning("Enumeration budget of %d states exhausted after %d steps", state_budget, steps)
            raise EnumerationBudgetError(
                f"Enumeration to horizon {horizon} exceeded the budget of {state_budget} states",
                wef,
            )
        for (state, d1, d2), multiplicity in current.items():
            extend(state, d1, d2, multiplicity, range(U))
        steps += 1
        logger.debug("Enumeration step %d: %d live entries", steps, len(frontier))

    wef = _finish(counts, horizon, complete=True)
    logger.info("Enumerated %d weight pairs up to horizon %d (dfree=%s)",
                len(wef.terms), horizon, wef.dfree)
    return wef


def _finish(counts: Dict[Tuple[int, int], int], horizon: int, complete: bool) -> ModifiedWEF:
    terms = {(d1, d2): d1 * a for (d1, d2), a in counts.items()}
    return ModifiedWEF(terms=terms, path_counts=dict(counts), horizon=horizon, complete=complete)


def free_distance(wef: ModifiedWEF) -> int:
    """
    Minimum total weight over enumerated terms.

    Raises:
        EnumerationIncompleteError: If no term was enumerated
    """
    if not wef.terms:
        raise EnumerationIncompleteError(
            f"No error events with weight <= {wef.horizon}; raise the horizon"
        )
    return wef.dfree


@dataclass(frozen=True)
class DominantPattern:
    """
    Weight pairs minimizing d1 + M*d2.

    Attributes:
        pairs: Minimizing (d1, d2) pairs sorted by total weight then d1
        Dstar: Minimum objective d1 + M*d2 (success-situation diversity exponent)
        M: Relay antenna count the objective was evaluated for
    """
    pairs: Tuple[Tuple[int, int], ...]
    Dstar: int
    M: int


def dominant_pattern(wef: ModifiedWEF, M: int) -> DominantPattern:
    """
    Find every (d1, d2) minimizing d1 + M*d2.

    The minimizer is certified when the best objective is at most the
    horizon: an unenumerated pair has d1 + d2 > horizon, hence an objective
    above the horizon as well.

    Raises:
        ValueError: If M < 1
        InconclusiveError: If the horizon cannot certify the minimizer
    """
    if M < 1:
        raise ValueError(f"Antenna count M must be at least 1, got {M}")
    if not wef.complete:
        raise InconclusiveError("Weight enumerator is incomplete; dominant pattern cannot be certified")
    if not wef.terms:
        raise InconclusiveError(f"No error events with weight <= {wef.horizon}")

    objective = {pair: pair[0] + M * pair[1] for pair in wef.terms}
    best = min(objective.values())
    if best > wef.horizon:
        raise InconclusiveError(
            f"Best objective {best} exceeds horizon {wef.horizon}; enumerate to at least {best}"
        )
    pairs = sorted((p for p, v in objective.items() if v == best), key=lambda k: (k[0] + k[1], k[0]))
    return DominantPattern(pairs=tuple(pairs), Dstar=best, M=M)


def diversity_order(Dstar: int, M: int, m: int) -> int:
    """
    Diversity order of the coded network: min(D*, M*m + 1).

    Raises:
        ValueError: If M or m is not a positive integer
    """
    if M < 1:
        raise ValueError(f"Antenna count M must be at least 1, got {M}")
    if m < 1 or int(m) != m:
        raise ValueError(f"Nakagami parameter m must be a positive integer, got {m}")
    return min(Dstar, M * int(m) + 1)


def diversity_regime(m: int) -> DiversityRegime:
    """Rayleigh relay links (m=1) are the weak regime; deeper-than-Rayleigh links are strong."""
    return DiversityRegime.WEAK if m == 1 else DiversityRegime.STRONG


@dataclass(frozen=True)
class NetworkFigures:
    """Diversity and throughput of one scheme on one network."""
    scheme: str
    diversity: int
    throughput: Fraction


def lnc_baseline(N: int, M: int) -> NetworkFigures:
    """Linear network coding with M parity packets: diversity M+1, throughput N/(N+M)."""
    return NetworkFigures(scheme="LNC", diversity=M + 1, throughput=Fraction(N, N + M))


def cncc_figures(N: int, M_prime: int, Dstar: int, M: int, m: int) -> NetworkFigures:
    return NetworkFigures(scheme="CNCC", diversity=diversity_order(Dstar, M, m),
                          throughput=Fraction(N, N + M_prime))
