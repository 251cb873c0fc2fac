"""
Error Probability Bounds Module

Closed-form error analysis of the coded relay network:
1. Relay bit error under M-antenna MRC over Nakagami-m links, and its
   high-SNR approximation
2. Relay failure probability for a round of N packets of n bits
3. Direct-path BPSK error over Rayleigh fading (the failure-round BER)
4. Pairwise-error factors of the relay-destination branch (tight and loose)
5. Union bound on the success-round BER from the modified weight enumerator
6. End-to-end bound combining the success and failure situations

All functions accept scalars or numpy arrays of linear SNRs and return the
same shape. Small probabilities are assembled in log space so they stay
finite deep into the high-SNR region.

Design Philosophy:
- Reported bounds are clamped to [0, 1]; raw values are always retained
- A truncated union bound is flagged, never silently accepted
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Union

import numpy as np
import pandas as pd
from scipy.special import gammaln

from channel import SnrGeometry, linear_to_db
from wef import ModifiedWEF, dominant_pattern

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# relative size of the estimated series remainder that flags a bound as truncated
TRUNCATION_TOLERANCE = 0.01


def _binomial(n: int, k: int) -> float:
    """Binomial coefficient as a float; log-space above n = 64."""
    if n <= 64:
        return float(math.comb(n, k))
    return float(np.exp(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)))


def _like(value: np.ndarray, reference) -> ArrayLike:
    return float(value) if np.ndim(reference) == 0 else value


def _positive(values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if np.any(~(values > 0)):
        raise ValueError(f"{name} must be positive, got {values}")
    return values


def _check_diversity_params(m: int, M: int) -> None:
    if M < 1:
        raise ValueError(f"Antenna count M must be at least 1, got {M}")
    if m < 1 or int(m) != m:
        raise ValueError(f"Nakagami parameter m must be a positive integer, got {m}")


def relay_bit_error(m: int, M: int, gamma_sr: ArrayLike) -> ArrayLike:
    """
    Bit error probability at the relay after MRC of M Nakagami-m branches.

    P_e = [(1-mu)/2]^(Mm) * sum_{w<Mm} C(Mm-1+w, w) [(1+mu)/2]^w,
    mu = sqrt(gamma_sr / (m + gamma_sr)).

    Args:
        m: Nakagami parameter (integer >= 1)
        M: Relay antenna count
        gamma_sr: Average per-antenna S-R SNR (linear)
    """
    _check_diversity_params(m, M)
    g = _positive(gamma_sr, "gamma_sr")
    L = M * int(m)
    mu = np.sqrt(g / (m + g))
    # (1 - mu)/2 rewritten without the cancellation of 1 - mu near mu = 1
    lower = 0.5 * (m / (m + g)) / (1.0 + mu)
    upper = 0.5 * (1.0 + mu)
    series = np.zeros_like(g)
    for w in range(L):
        series = series + _binomial(L - 1 + w, w) * upper ** w
    return _like(np.exp(L * np.log(lower) + np.log(series)), gamma_sr)


def relay_bit_error_asymptotic(m: int, M: int, gamma_sr: ArrayLike) -> ArrayLike:
    """High-SNR form C(2Mm-1, Mm) * (m / (4 gamma_sr))^(Mm)."""
    _check_diversity_params(m, M)
    g = _positive(gamma_sr, "gamma_sr")
    L = M * int(m)
    return _like(_binomial(2 * L - 1, L) * (m / (4.0 * g)) ** L, gamma_sr)


def failure_probability(Pe: ArrayLike, n: int, N: int) -> ArrayLike:
    """
    Probability that at least one of the N*n source bits is wrong at the relay.

    P_f = 1 - (1 - Pe)^(N n), evaluated as -expm1(N n log1p(-Pe)).
    """
    pe = np.asarray(Pe, dtype=float)
    if np.any((pe < 0) | (pe > 1)):
        raise ValueError(f"Pe must lie in [0, 1], got {Pe}")
    if n < 1 or N < 1:
        raise ValueError(f"Packet length n and source count N must be positive, got n={n}, N={N}")
    with np.errstate(divide='ignore'):
        pf = -np.expm1(N * n * np.log1p(-pe))
    return _like(pf, Pe)


def failure_constant(m: int, M: int, n: int, N: int) -> float:
    """K = n N C(2Mm-1, Mm) (m/4)^(Mm)."""
    _check_diversity_params(m, M)
    L = M * int(m)
    return n * N * _binomial(2 * L - 1, L) * (m / 4.0) ** L


def failure_probability_asymptotic(m: int, M: int, n: int, N: int, gamma_sr: ArrayLike) -> ArrayLike:
    """High-SNR failure probability K * gamma_sr^(-Mm)."""
    g = _positive(gamma_sr, "gamma_sr")
    return _like(failure_constant(m, M, n, N) * g ** (-(M * int(m))), gamma_sr)


def direct_path_ber(gamma_sd: ArrayLike) -> ArrayLike:
    """BPSK over one Rayleigh link: (1 - sqrt(g / (1 + g))) / 2."""
    return relay_bit_error(1, 1, gamma_sd)


def direct_path_ber_asymptotic(gamma_sd: ArrayLike) -> ArrayLike:
    g = _positive(gamma_sd, "gamma_sd")
    return _like(1.0 / (4.0 * g), gamma_sd)


class PepFactors(NamedTuple):
    """Per-parity-bit PEP factor of the best-antenna R-D link."""
    tight: ArrayLike
    loose: ArrayLike


def pep_z_factor(M: int, gamma_rd: ArrayLike) -> PepFactors:
    """
    Z = M sum_w C(M-1, w) (-1)^w / (1 + w + gamma_rd) and its loose bound.

    The alternating sum equals M! / prod_{w<M} (1 + w + gamma_rd) by partial
    fractions; that product form is what gets evaluated. The loose variant is
    M (M-1)! / gamma_rd^M.
    """
    if M < 1:
        raise ValueError(f"Antenna count M must be at least 1, got {M}")
    g = _positive(gamma_rd, "gamma_rd")
    log_factorial = gammaln(M + 1)
    log_tight = log_factorial - sum(np.log(1.0 + w + g) for w in range(M))
    log_loose = log_factorial - M * np.log(g)
    return PepFactors(tight=_like(np.exp(log_tight), gamma_rd), loose=_like(np.exp(log_loose), gamma_rd))


@dataclass(frozen=True)
class SeriesBound:
    """
    Truncated union bound.

    Attributes:
        value: Sum of the enumerated terms
        tail_estimate: Geometric estimate of the omitted remainder
        truncated: True when the remainder estimate exceeds 1% of the value
    """
    value: ArrayLike
    tail_estimate: ArrayLike
    truncated: Union[bool, np.ndarray]


def success_ber_bound(wef: ModifiedWEF, N: int, gamma_sd: ArrayLike, gamma_rd: ArrayLike,
                      M: int, variant: str = "tight") -> SeriesBound:
    """
    Union bound on the BER of a success round.

    P_b|s < (1/2N) sum B_{d1,d2} Y^d1 Z^d2, Y = 1/(1 + gamma_sd), with Z the
    tight or loose PEP factor.

    Every term left out by the enumerator has d1 + M d2 > horizon and is at
    most lambda^(d1 + M d2) with lambda = max(Y, Z^(1/M)). The remainder is
    estimated as a geometric series in that exponent, with the coefficient
    growth per unit taken from the enumerated terms. At high SNR the estimate
    falls off one power of gamma faster than the dominant term for every unit
    the horizon exceeds D*.

    Raises:
        ValueError: On an unknown variant
        InconclusiveError: If the enumerator cannot certify the dominant term for M
    """
    if variant not in ("tight", "loose"):
        raise ValueError(f"Unknown bound variant {variant!r}; use 'tight' or 'loose'")
    gsd = _positive(gamma_sd, "gamma_sd")
    factors = pep_z_factor(M, gamma_rd)
    z = np.asarray(factors.tight if variant == "tight" else factors.loose, dtype=float)
    gsd, z = np.broadcast_arrays(gsd, z)
    reference = gamma_sd if np.ndim(gamma_sd) else gamma_rd

    if not wef.terms:
        zero = np.zeros_like(gsd)
        return SeriesBound(_like(zero, reference), _like(zero, reference),
                           False if np.ndim(reference) == 0 else np.zeros(gsd.shape, dtype=bool))

    pattern = dominant_pattern(wef, M)

    log_y = -np.log1p(gsd)
    log_z = np.log(z)
    terms = [np.exp(math.log(b) + d1 * log_y + d2 * log_z) for (d1, d2), b in wef.terms.items()]
    value = np.sum(terms, axis=0) / (2.0 * N)

    # an unenumerated term has d1 + d2 > horizon, so its objective d1 + M d2 does too
    by_objective: Dict[int, int] = {}
    for (d1, d2), b in wef.terms.items():
        by_objective[d1 + M * d2] = by_objective.get(d1 + M * d2, 0) + b
    e0 = pattern.Dstar
    c0 = by_objective[e0]
    log_growth = max([0.0] + [(math.log(c) - math.log(c0)) / (e - e0)
                              for e, c in by_objective.items() if e > e0])
    log_lambda = np.maximum(log_y, log_z / M)
    log_ratio = log_growth + log_lambda
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        log_tail = (math.log(c0) + e0 * log_lambda + (wef.horizon + 1 - e0) * log_ratio
                    - np.log(-np.expm1(np.minimum(log_ratio, 0.0))) - math.log(2.0 * N))
        tail = np.where(log_ratio < 0.0, np.exp(log_tail), np.inf)
    truncated = tail > TRUNCATION_TOLERANCE * value

    if np.ndim(reference) == 0:
        return SeriesBound(float(value), float(tail), bool(truncated))
    return SeriesBound(value, tail, truncated)


@dataclass(frozen=True)
class BoundInputs:
    """
    Everything the end-to-end bound needs besides the SNR.

    Attributes:
        wef: Modified weight enumerator of the network code
        N: Sources
        M: Relay antennas
        M_prime: Parity packets per round
        m: Nakagami parameter of the S-R links
        n: Bits per packet
        geometry: Relay position and path loss (its gamma_bar is ignored by
                  end_to_end_bound, which takes the SNR explicitly)
    """
    wef: ModifiedWEF
    N: int
    M: int
    M_prime: int
    m: int
    n: int
    geometry: SnrGeometry

    def __post_init__(self):
        for name in ("N", "M", "M_prime", "m", "n"):
            value = getattr(self, name)
            if value < 1 or int(value) != value:
                raise ValueError(f"{name} must be a positive integer, got {value}")


@dataclass(frozen=True)
class BoundBreakdown:
    """
    Terms of the end-to-end bound at one or more SNR points.

    Pb_bound_raw = PbGivenS_bound_raw * (1 - Pf) + PbGivenF * Pf holds exactly;
    the unsuffixed bounds are the raw values clamped to [0, 1].
    """
    gamma_bar: ArrayLike
    gamma_sr: ArrayLike
    gamma_rd: ArrayLike
    Pe: ArrayLike
    Pf: ArrayLike
    Ps: ArrayLike
    PbGivenF: ArrayLike
    PbGivenS_bound_raw: ArrayLike
    PbGivenS_bound: ArrayLike
    Pb_bound_raw: ArrayLike
    Pb_bound: ArrayLike
    tail_estimate: ArrayLike
    truncated: Union[bool, np.ndarray]
    Pe_asymptotic: ArrayLike
    Pf_asymptotic: ArrayLike
    PbGivenF_asymptotic: ArrayLike

    def to_dataframe(self) -> pd.DataFrame:
        gamma_rd = np.atleast_1d(self.gamma_rd)
        return pd.DataFrame({
            'gamma_rd_dB': linear_to_db(gamma_rd),
            'Pe': np.atleast_1d(self.Pe),
            'Pf': np.atleast_1d(self.Pf),
            'PbGivenF': np.atleast_1d(self.PbGivenF),
            'PbGivenS_bound': np.atleast_1d(self.PbGivenS_bound),
            'Pb_bound': np.atleast_1d(self.Pb_bound),
            'Pb_bound_raw': np.atleast_1d(self.Pb_bound_raw),
            'truncated': np.atleast_1d(self.truncated),
        })


def end_to_end_bound(inputs: BoundInputs, gamma_bar: ArrayLike, variant: str = "tight") -> BoundBreakdown:
    """
    Upper bound on the end-to-end source BER.

    P_b < P_b|s(bound) * (1 - P_f) + P_b|f * P_f with the S-R and R-D SNRs
    derived from gamma_bar through the relay geometry.

    Args:
        inputs: Code, network and geometry parameters
        gamma_bar: Average S-D SNR (linear), scalar or array
        variant: 'tight' or 'loose' PEP factor

    Raises:
        InconclusiveError: If the enumerator cannot certify the dominant term
    """
    g = _positive(gamma_bar, "gamma_bar")
    gsd, gsr, grd = inputs.geometry.link_snrs(g)
    pe = np.asarray(relay_bit_error(inputs.m, inputs.M, gsr))
    pf = np.asarray(failure_probability(pe, inputs.n, inputs.N))
    pb_f = np.asarray(direct_path_ber(gsd))
    success = success_ber_bound(inputs.wef, inputs.N, gsd, grd, inputs.M, variant=variant)
    pb_s_raw = np.asarray(success.value)

    ps = np.exp(inputs.N * inputs.n * np.log1p(-pe))
    pb_raw = pb_s_raw * ps + pb_f * pf
    if np.any(np.asarray(success.truncated)):
        logger.info("Union bound flagged truncated at %d of %d SNR points",
                    int(np.sum(success.truncated)), np.size(g))

    def out(value):
        return _like(np.asarray(value, dtype=float), gamma_bar)

    truncated = success.truncated if np.ndim(gamma_bar) else bool(np.asarray(success.truncated))
    return BoundBreakdown(
        gamma_bar=out(gsd),
        gamma_sr=out(gsr),
        gamma_rd=out(grd),
        Pe=out(pe),
        Pf=out(pf),
        Ps=out(ps),
        PbGivenF=out(pb_f),
        PbGivenS_bound_raw=out(pb_s_raw),
        PbGivenS_bound=out(np.clip(pb_s_raw, 0.0, 1.0)),
        Pb_bound_raw=out(pb_raw),
        Pb_bound=out(np.clip(pb_raw, 0.0, 1.0)),
        tail_estimate=out(success.tail_estimate),
        truncated=truncated,
        Pe_asymptotic=out(relay_bit_error_asymptotic(inputs.m, inputs.M, gsr)),
        Pf_asymptotic=out(failure_probability_asymptotic(inputs.m, inputs.M, inputs.n, inputs.N, gsr)),
        PbGivenF_asymptotic=out(direct_path_ber_asymptotic(gsd)),
    )
