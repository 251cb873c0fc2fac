"""
Bound Studies Module

Tabulates the end-to-end bound over SNR grids and extracts diversity:
1. Bound table over an R-D SNR grid (dB) with a per-row log-log slope
2. Fitted high-SNR asymptote whose slope is -min(D*, Mm + 1)
3. Packet-length study comparing the bound for several n
"""

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.special import gammaln

from channel import db_to_linear
from wef import dominant_pattern

from .bounds import BoundInputs, end_to_end_bound

logger = logging.getLogger(__name__)

DEFAULT_REFERENCE_SNR = 1e8


def log_log_slope(snr_db: Sequence[float], values: Sequence[float], decade_db: float = 10.0) -> np.ndarray:
    """
    Slope of log10(value) against log10(SNR) for every grid point.

    Each row is compared with the grid point closest to `decade_db` below it
    (at least half a decade away); rows without such a point get NaN. On an
    ascending grid the last row therefore holds the top-decade slope.
    """
    db = np.asarray(snr_db, dtype=float)
    vals = np.asarray(values, dtype=float)
    slopes = np.full(db.shape, np.nan)
    with np.errstate(divide='ignore', invalid='ignore'):
        logs = np.log10(vals)
    for i in range(len(db)):
        lower = np.flatnonzero(db <= db[i] - decade_db / 2.0)
        if lower.size == 0:
            continue
        j = lower[np.argmin(np.abs(db[lower] - (db[i] - decade_db)))]
        slopes[i] = (logs[i] - logs[j]) / ((db[i] - db[j]) / 10.0)
    return slopes


def bound_table(inputs: BoundInputs, gamma_rd_db: Sequence[float], variant: str = "tight") -> pd.DataFrame:
    """
    Evaluate the end-to-end bound on an R-D SNR grid.

    The S-D SNR of each point is recovered from the relay geometry. Columns:
    gamma_rd_dB, Pe, Pf, PbGivenF, PbGivenS_bound, Pb_bound, Pb_bound_raw,
    slope_estimate, truncated.
    """
    grid = np.asarray(list(gamma_rd_db), dtype=float)
    if grid.size == 0:
        raise ValueError("SNR grid must not be empty")
    gamma_bar = inputs.geometry.gamma_bar_for_rd(db_to_linear(grid))
    breakdown = end_to_end_bound(inputs, gamma_bar, variant=variant)
    frame = breakdown.to_dataframe()
    frame['gamma_rd_dB'] = grid
    frame.insert(7, 'slope_estimate', log_log_slope(grid, frame['Pb_bound_raw'].to_numpy()))
    return frame


@dataclass(frozen=True)
class AsymptoteFit:
    """
    High-SNR model K' g^(-d1*) (M! g^(-M))^(d2*) + K'' g^(-(Mm+1)).

    Attributes:
        log_success_constant: log K'
        log_failure_constant: log K''
        d1star, d2star: Dominant weight pair
        M: Antenna count
        failure_exponent: Mm + 1
        reference: S-D SNR the constants were fitted at
    """
    log_success_constant: float
    log_failure_constant: float
    d1star: int
    d2star: int
    M: int
    failure_exponent: int
    reference: float

    @property
    def diversity(self) -> int:
        return min(self.d1star + self.M * self.d2star, self.failure_exponent)

    def evaluate(self, gamma_bar) -> np.ndarray:
        log_g = np.log(np.asarray(gamma_bar, dtype=float))
        log_success = (self.log_success_constant - self.d1star * log_g
                       + self.d2star * (gammaln(self.M + 1) - self.M * log_g))
        log_failure = self.log_failure_constant - self.failure_exponent * log_g
        return np.exp(log_success) + np.exp(log_failure)


def fit_asymptote(inputs: BoundInputs, reference: float = DEFAULT_REFERENCE_SNR) -> AsymptoteFit:
    """
    Fit K' and K'' so the asymptote matches each bound term at `reference`.

    Raises:
        InconclusiveError: If the dominant pattern cannot be certified
    """
    pattern = dominant_pattern(inputs.wef, inputs.M)
    d1star, d2star = pattern.pairs[0]
    exact = end_to_end_bound(inputs, reference)
    log_ref = np.log(reference)

    log_success_term = np.log(exact.PbGivenS_bound_raw) + np.log(exact.Ps)
    log_shape = -d1star * log_ref + d2star * (gammaln(inputs.M + 1) - inputs.M * log_ref)
    failure_exponent = inputs.M * inputs.m + 1
    log_failure_term = np.log(exact.PbGivenF) + np.log(exact.Pf)

    fit = AsymptoteFit(
        log_success_constant=float(log_success_term - log_shape),
        log_failure_constant=float(log_failure_term + failure_exponent * log_ref),
        d1star=d1star,
        d2star=d2star,
        M=inputs.M,
        failure_exponent=failure_exponent,
        reference=reference,
    )
    logger.debug("Asymptote fitted at gamma=%g: diversity %d", reference, fit.diversity)
    return fit


def asymptotic_pb(inputs: BoundInputs, gamma_bar, reference: float = DEFAULT_REFERENCE_SNR):
    """
    High-SNR approximation of the end-to-end bound, for slope extraction.

    Args:
        inputs: Code, network and geometry parameters
        gamma_bar: Average S-D SNR (linear), scalar or array
        reference: S-D SNR at which the constants are fitted
    """
    values = fit_asymptote(inputs, reference).evaluate(gamma_bar)
    return float(values) if np.ndim(gamma_bar) == 0 else values


def packet_length_study(inputs: BoundInputs, n_values: Sequence[int],
                        gamma_rd_db: Sequence[float], variant: str = "tight") -> pd.DataFrame:
    """
    End-to-end bound for several packet lengths.

    Returns:
        Long-format DataFrame with columns n, gamma_rd_dB, Pf, Pb_bound, Pb_bound_raw
    """
    frames = []
    for n in n_values:
        table = bound_table(replace(inputs, n=int(n)), gamma_rd_db, variant=variant)
        table.insert(0, 'n', int(n))
        frames.append(table[['n', 'gamma_rd_dB', 'Pf', 'Pb_bound', 'Pb_bound_raw']])
    if not frames:
        raise ValueError("Packet-length study needs at least one packet length")
    return pd.concat(frames, ignore_index=True)
