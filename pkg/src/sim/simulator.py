"""
Monte Carlo Simulator Module

Link-level simulation of the coded cooperation protocol:
1. Sources broadcast interleaved BPSK packets; the relay combines its M
   antennas (MRC) and checks every packet against the ground truth
2. On success the relay encodes the round, appends the termination tail and
   sends each parity bit from its strongest antenna; the destination runs the
   Viterbi decoder over systematic and parity observations
3. On failure the relay stays silent and the destination decides each bit
   from its direct observation
4. Bit errors, relay success rate and throughput are accumulated per SNR
   point until the stop rule fires

The unit of randomness is the interleaving frame (depth rounds). Every frame
draws all of its channels, noise and payload from streams keyed by
(seed, point, frame, link), so any frame can be regenerated in isolation.
Frames are grouped in chunks; chunks may run in worker processes, but the
stop rule consumes them strictly in order and discards speculative extras,
so results do not depend on the worker count.

Design Philosophy:
- Draw everything for every round, whatever the outcome, so streams never shift
- Track success and failure rounds separately for later analysis
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from analysis import BoundInputs, end_to_end_bound
from channel import (
    FadingBlock,
    Interleaver,
    Link,
    SnrGeometry,
    db_to_linear,
    linear_to_db,
    random_stream,
    sample_nakagami,
    select_best,
)
from convcodec import SoftObservation, Trellis, build_trellis, encode_batch, viterbi_decode
from gf2core import GeneratorMatrix
from wef import enumerate_wef

logger = logging.getLogger(__name__)

NOISE_VARIANCE = 0.5  # N0/2 with N0 = 1
BIT_ENERGY = 1.0
OVERRIDE_LINKS = ('sd', 'sr', 'rd')


class BudgetExceededError(RuntimeError):
    """Raised when the expected runtime of a sweep exceeds the configured budget."""

    def __init__(self, message: str, suggested_grid: List[float]):
        super().__init__(message)
        self.suggested_grid = suggested_grid


@dataclass
class NetworkConfig:
    """
    One coded cooperative network.

    Attributes:
        generator: Systematic generator matrix of the network code
        N: Number of sources
        M: Relay antennas
        M_prime: Parity packets per round
        m: Nakagami parameter of the S-R links
        n: Bits per packet (also the coherence block length)
        l: Packets per source (reporting only)
        eta: Path-loss exponent
        beta: Distance ratio d_sd / d_sr
        interleaver_depth: Rounds per interleaving frame
        seed: Master seed
    """
    generator: GeneratorMatrix
    N: int
    M: int
    M_prime: int
    m: int = 1
    n: int = 10
    l: int = 100
    eta: float = 2.0
    beta: float = 5.0
    interleaver_depth: int = 100
    seed: int = 2024

    def __post_init__(self):
        if self.generator.N != self.N or self.generator.M_prime != self.M_prime:
            raise ValueError(
                f"Generator is ({self.generator.N} inputs, {self.generator.M_prime} parity) "
                f"but the network declares N={self.N}, M'={self.M_prime}"
            )
        for name in ("N", "M", "M_prime", "m", "n", "interleaver_depth"):
            value = getattr(self, name)
            if value < 1 or int(value) != value:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        SnrGeometry(gamma_bar=1.0, eta=self.eta, beta=self.beta)

    @cached_property
    def trellis(self) -> Trellis:
        return build_trellis(self.generator)

    def geometry(self, gamma_bar: float) -> SnrGeometry:
        return SnrGeometry(gamma_bar=gamma_bar, eta=self.eta, beta=self.beta)

    def gamma_bar_for_rd_db(self, gamma_rd_db: float) -> float:
        return SnrGeometry.from_relay_destination(float(db_to_linear(gamma_rd_db)), self.eta, self.beta).gamma_bar


@dataclass(frozen=True)
class StopRule:
    """Stop a point once `stop_errors` bit errors or `max_rounds` rounds are reached."""
    stop_errors: int = 200
    max_rounds: int = 10_000_000

    def __post_init__(self):
        if self.stop_errors < 1 or self.max_rounds < 1:
            raise ValueError(f"Stop rule needs positive limits, got {self}")


@dataclass(frozen=True)
class RoundOutcome:
    """
    Result of one protocol round.

    Attributes:
        relay_success: All N packets decoded correctly at the relay
        bit_errors_per_source: Information-bit errors of each source packet
        bits_counted: Information bits in the round (N * n)
        channel_uses: Packet slots used (N on failure, N + M' on success)
        tail_intervals: Extra bit intervals spent on termination (success only)
    """
    relay_success: bool
    bit_errors_per_source: Tuple[int, ...]
    bits_counted: int
    channel_uses: int
    tail_intervals: int


@dataclass
class FrameOutcome:
    """Per-round results of one or more frames."""
    success: np.ndarray  # (rounds,) bool
    errors: np.ndarray   # (rounds, N) int

    @classmethod
    def concat(cls, parts: Sequence["FrameOutcome"]) -> "FrameOutcome":
        return cls(success=np.concatenate([p.success for p in parts]),
                   errors=np.concatenate([p.errors for p in parts]))

    def head(self, rounds: int) -> "FrameOutcome":
        return FrameOutcome(success=self.success[:rounds], errors=self.errors[:rounds])


def simulate_frame(cfg: NetworkConfig, trellis: Trellis, point: int, frame: int,
                   gamma_bar: float, overrides: Optional[Dict[str, float]] = None) -> FrameOutcome:
    """
    Simulate the `interleaver_depth` rounds of one frame.

    Args:
        cfg: Network configuration
        trellis: Trellis of cfg.generator
        point: Index of the operating point (selects the random streams)
        frame: Frame index within the point
        gamma_bar: Average S-D SNR (linear)
        overrides: Optional constant gains for links 'sd', 'sr' or 'rd'
    """
    overrides = overrides or {}
    unknown = set(overrides) - set(OVERRIDE_LINKS)
    if unknown:
        raise ValueError(f"Unknown gain override(s) {sorted(unknown)}; use {OVERRIDE_LINKS}")

    D, N, n, M, Mp = cfg.interleaver_depth, cfg.N, cfg.n, cfg.M, cfg.M_prime
    T = trellis.tail_length
    n_t = n + T
    gamma_sd, gamma_sr, gamma_rd = (float(v) for v in cfg.geometry(gamma_bar).link_snrs())

    def stream(link: Link) -> np.random.Generator:
        return random_stream(cfg.seed, point, frame, link)

    payload = stream(Link.PAYLOAD).integers(0, 2, size=(D, N, n), dtype=np.uint8)

    # source packets: one interleaving frame per source, shared by relay and destination
    source_positions = Interleaver(D, n).transmit_positions()
    sd = FadingBlock.draw(1, gamma_sd, (N,), D, n, stream(Link.SOURCE_DESTINATION))
    sr = FadingBlock.draw(cfg.m, gamma_sr, (N, M), D, n, stream(Link.SOURCE_RELAY))
    h_sd = np.moveaxis(sd.gains_at(source_positions), 0, 1)            # (D, N, n)
    h_sr = np.transpose(sr.gains_at(source_positions), (2, 0, 1, 3))   # (D, N, M, n)

    # parity packets: one interleaving frame per parity stream, per-bit antenna selection
    parity_positions = Interleaver(D, n_t).transmit_positions()
    rd_blocks = math.ceil(D * n_t / n)
    rd = FadingBlock.draw(1, gamma_rd, (Mp, M), rd_blocks, n, stream(Link.RELAY_DESTINATION))
    h_rd = np.transpose(rd.gains_at(parity_positions), (2, 0, 3, 1))   # (D, Mp, n_t, M)
    _, h_sel = select_best(h_rd)                                       # (D, Mp, n_t)

    h_tail = sample_nakagami(1, gamma_sd, size=(D, N, T), rng=stream(Link.TAIL))

    noise_rng = stream(Link.NOISE)
    sigma = math.sqrt(NOISE_VARIANCE)
    z_relay = noise_rng.normal(0.0, sigma, size=(D, N, M, n))
    z_sd = noise_rng.normal(0.0, sigma, size=(D, N, n))
    z_tail = noise_rng.normal(0.0, sigma, size=(D, N, T))
    z_rd = noise_rng.normal(0.0, sigma, size=(D, Mp, n_t))

    if 'sd' in overrides:
        h_sd = np.full_like(h_sd, overrides['sd'])
        h_tail = np.full_like(h_tail, overrides['sd'])
    if 'sr' in overrides:
        h_sr = np.full_like(h_sr, overrides['sr'])
    if 'rd' in overrides:
        h_sel = np.full_like(h_sel, overrides['rd'])

    amplitude = math.sqrt(BIT_ENERGY)
    x = 1.0 - 2.0 * payload

    # relay: MRC over antennas, per-bit decision, genie packet check
    y_relay = amplitude * h_sr * x[:, :, None, :] + z_relay
    combined = np.sum(h_sr * y_relay, axis=2)
    relay_bits = (combined < 0).astype(np.uint8)
    success = np.all(relay_bits == payload, axis=(1, 2))

    y_sd = amplitude * h_sd * x + z_sd
    decoded = (y_sd < 0).astype(np.uint8)

    idx = np.flatnonzero(success)
    if idx.size:
        codeword = encode_batch(trellis, payload[idx])
        y_tail = amplitude * h_tail[idx] * (1.0 - 2.0 * codeword.tail_inputs) + z_tail[idx]
        y_rd = amplitude * h_sel[idx] * (1.0 - 2.0 * codeword.parity) + z_rd[idx]
        y = np.concatenate([np.concatenate([y_sd[idx], y_tail], axis=2), y_rd], axis=1)
        h = np.concatenate([np.concatenate([h_sd[idx], h_tail[idx]], axis=2), h_sel[idx]], axis=1)
        obs = SoftObservation(y=np.swapaxes(y, 1, 2), h=np.swapaxes(h, 1, 2),
                              noise_var=NOISE_VARIANCE, Eb=BIT_ENERGY)
        decoded[idx] = viterbi_decode(trellis, obs, n=n)

    errors = np.sum(decoded != payload, axis=2).astype(np.int64)
    return FrameOutcome(success=success, errors=errors)


def _simulate_chunk(task) -> FrameOutcome:
    cfg, trellis, point, first_frame, frames, gamma_bar, overrides = task
    return FrameOutcome.concat([
        simulate_frame(cfg, trellis, point, frame, gamma_bar, overrides)
        for frame in range(first_frame, first_frame + frames)
    ])


@dataclass
class SimPoint:
    """Statistics of one operating point."""
    gamma_rd_dB: float
    gamma_bar: float
    rounds: int
    relay_successes: int
    bit_errors: int
    bits: int
    errors_success: int
    bits_success: int
    errors_failure: int
    bits_failure: int
    throughput_net: float
    throughput_gross: float
    flagged: bool
    beta: float = float('nan')

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else float('nan')

    @property
    def ci_radius(self) -> float:
        return wilson_radius(self.bit_errors, self.bits)

    @property
    def ps_empirical(self) -> float:
        return self.relay_successes / self.rounds if self.rounds else float('nan')

    @property
    def ber_given_success(self) -> float:
        return self.errors_success / self.bits_success if self.bits_success else float('nan')

    @property
    def ber_given_failure(self) -> float:
        return self.errors_failure / self.bits_failure if self.bits_failure else float('nan')


def wilson_radius(errors: int, trials: int, confidence: float = 0.95) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return float('nan')
    z = norm.ppf(0.5 + confidence / 2.0)
    p = errors / trials
    return z / (1.0 + z * z / trials) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))


@dataclass
class SimResult:
    """Per-point statistics of a sweep."""
    points: List[SimPoint] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return any(p.flagged for p in self.points)

    def to_dataframe(self) -> pd.DataFrame:
        rows = []
        for p in self.points:
            rows.append({
                'gamma_rd_dB': p.gamma_rd_dB,
                'trials': p.rounds,
                'bit_errors': p.bit_errors,
                'ber': p.ber,
                'ci_radius': p.ci_radius,
                'ps_empirical': p.ps_empirical,
                'throughput_net': p.throughput_net,
                'throughput_gross': p.throughput_gross,
                'ber_given_success': p.ber_given_success,
                'ber_given_failure': p.ber_given_failure,
                'beta': p.beta,
                'flagged': p.flagged,
            })
        return pd.DataFrame(rows)


class MonteCarloSimulator:
    """
    Runs protocol rounds for one network and accumulates per-point statistics.
    """

    def __init__(self, cfg: NetworkConfig, workers: int = 1, batch_frames: int = 10,
                 overrides: Optional[Dict[str, float]] = None):
        """
        Args:
            cfg: Network configuration
            workers: Worker processes (1 runs inline)
            batch_frames: Frames per chunk handed to a worker
            overrides: Optional constant gains for links 'sd', 'sr' or 'rd'
        """
        if workers < 1 or batch_frames < 1:
            raise ValueError(f"workers and batch_frames must be positive, got {workers}, {batch_frames}")
        self.cfg = cfg
        self.trellis = cfg.trellis
        self.workers = workers
        self.batch_frames = batch_frames
        self.overrides = dict(overrides or {})

    def run_round(self, round_index: int, gamma_bar: float, point: int = 0) -> RoundOutcome:
        """Regenerate the frame holding `round_index` and return that round."""
        D = self.cfg.interleaver_depth
        frame = simulate_frame(self.cfg, self.trellis, point, round_index // D, gamma_bar, self.overrides)
        row = round_index % D
        success = bool(frame.success[row])
        cfg = self.cfg
        return RoundOutcome(
            relay_success=success,
            bit_errors_per_source=tuple(int(e) for e in frame.errors[row]),
            bits_counted=cfg.N * cfg.n,
            channel_uses=cfg.N + cfg.M_prime if success else cfg.N,
            tail_intervals=(cfg.N + cfg.M_prime) * self.trellis.tail_length if success else 0,
        )

    def _chunks(self, point: int, gamma_bar: float) -> Iterator[FrameOutcome]:
        """Chunk outcomes in frame order; workers run ahead speculatively."""
        def task(chunk: int):
            return (self.cfg, self.trellis, point, chunk * self.batch_frames,
                    self.batch_frames, gamma_bar, self.overrides)

        if self.workers == 1:
            chunk = 0
            while True:
                yield _simulate_chunk(task(chunk))
                chunk += 1
        else:
            yield from self._pooled_chunks(task)

    def _pooled_chunks(self, task) -> Iterator[FrameOutcome]:
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            pending = [pool.submit(_simulate_chunk, task(c)) for c in range(self.workers)]
            next_chunk = self.workers
            try:
                while True:
                    outcome = pending.pop(0).result()
                    pending.append(pool.submit(_simulate_chunk, task(next_chunk)))
                    next_chunk += 1
                    yield outcome
            finally:
                for future in pending:
                    future.cancel()

    def run_point(self, gamma_rd_db: float, gamma_bar: float, stop_rule: StopRule,
                  point: int = 0) -> SimPoint:
        """Simulate one operating point until the stop rule fires."""
        collected: List[FrameOutcome] = []
        rounds = 0
        errors = 0
        chunks = self._chunks(point, gamma_bar)
        try:
            for outcome in chunks:
                collected.append(outcome)
                rounds += outcome.success.size
                errors += int(outcome.errors.sum())
                logger.debug("Point %d: %d rounds, %d errors", point, rounds, errors)
                if errors >= stop_rule.stop_errors or rounds >= stop_rule.max_rounds:
                    break
        finally:
            chunks.close()

        total = FrameOutcome.concat(collected).head(stop_rule.max_rounds)
        result = self._summarize(total, gamma_rd_db, gamma_bar, stop_rule)
        logger.info("gamma_rd=%.2f dB: %d rounds, %d errors, BER %.3e%s", gamma_rd_db,
                    result.rounds, result.bit_errors, result.ber,
                    " (unresolved)" if result.flagged else "")
        return result

    def _summarize(self, outcome: FrameOutcome, gamma_rd_db: float, gamma_bar: float,
                   stop_rule: StopRule) -> SimPoint:
        cfg = self.cfg
        N, n, Mp = cfg.N, cfg.n, cfg.M_prime
        n_t = n + self.trellis.tail_length
        rounds = int(outcome.success.size)
        successes = int(outcome.success.sum())
        failures = rounds - successes
        per_round = outcome.errors.sum(axis=1)
        errors_success = int(per_round[outcome.success].sum())
        errors_failure = int(per_round[~outcome.success].sum())
        bit_errors = errors_success + errors_failure

        intervals = successes * (N + Mp) * n_t + failures * N * n
        slots = successes * (N + Mp) + failures * N
        return SimPoint(
            gamma_rd_dB=float(gamma_rd_db),
            gamma_bar=float(gamma_bar),
            rounds=rounds,
            relay_successes=successes,
            bit_errors=bit_errors,
            bits=rounds * N * n,
            errors_success=errors_success,
            bits_success=successes * N * n,
            errors_failure=errors_failure,
            bits_failure=failures * N * n,
            throughput_net=rounds * N * n / intervals,
            throughput_gross=rounds * N / slots,
            flagged=bit_errors < stop_rule.stop_errors,
        )

    def run_sweep(self, snr_grid_db: Sequence[float], stop_rule: StopRule = StopRule()) -> SimResult:
        """Simulate every R-D SNR of the grid (dB); point i uses stream index i."""
        grid = [float(v) for v in snr_grid_db]
        if not grid:
            raise ValueError("SNR grid must not be empty")
        result = SimResult()
        for point, gamma_rd_db in enumerate(grid):
            gamma_bar = self.cfg.gamma_bar_for_rd_db(gamma_rd_db)
            sim_point = self.run_point(gamma_rd_db, gamma_bar, stop_rule, point)
            sim_point.beta = self.cfg.beta
            result.points.append(sim_point)
        return result


def run_round(cfg: NetworkConfig, round_index: int, gamma_bar: float, point: int = 0,
              overrides: Optional[Dict[str, float]] = None) -> RoundOutcome:
    """One protocol round, reproducible from (seed, point, round_index)."""
    return MonteCarloSimulator(cfg, overrides=overrides).run_round(round_index, gamma_bar, point)


def run_sweep(cfg: NetworkConfig, snr_grid_db: Sequence[float], stop_rule: StopRule = StopRule(),
              workers: int = 1, batch_frames: int = 10,
              overrides: Optional[Dict[str, float]] = None) -> SimResult:
    """
    BER versus R-D SNR.

    Args:
        cfg: Network configuration
        snr_grid_db: R-D SNRs in dB
        stop_rule: Per-point stop rule
        workers: Worker processes; results are identical for any value
        batch_frames: Frames per chunk
        overrides: Optional constant gains for links 'sd', 'sr' or 'rd'
    """
    simulator = MonteCarloSimulator(cfg, workers=workers, batch_frames=batch_frames, overrides=overrides)
    return simulator.run_sweep(snr_grid_db, stop_rule)


def relay_position_sweep(cfg: NetworkConfig, beta_grid: Sequence[float], fixed_gamma_rd_db: float,
                         stop_rule: StopRule = StopRule(), workers: int = 1,
                         batch_frames: int = 10) -> SimResult:
    """
    BER versus relay position at a fixed R-D SNR.

    For each beta the S-D and S-R SNRs are recomputed from the geometry.
    Point i of the beta grid uses stream index i.
    """
    betas = [float(b) for b in beta_grid]
    if not betas:
        raise ValueError("Beta grid must not be empty")
    result = SimResult()
    for point, beta in enumerate(betas):
        point_cfg = replace(cfg, beta=beta)
        simulator = MonteCarloSimulator(point_cfg, workers=workers, batch_frames=batch_frames)
        sim_point = simulator.run_point(fixed_gamma_rd_db, point_cfg.gamma_bar_for_rd_db(fixed_gamma_rd_db),
                                        stop_rule, point)
        sim_point.beta = beta
        result.points.append(sim_point)
    return result


@dataclass(frozen=True)
class BudgetEstimate:
    """Expected rounds and runtime per grid point."""
    grid_db: Tuple[float, ...]
    expected_rounds: Tuple[int, ...]
    seconds: Tuple[float, ...]

    @property
    def total_seconds(self) -> float:
        return float(sum(self.seconds))


def estimate_budget(cfg: NetworkConfig, snr_grid_db: Sequence[float], stop_rule: StopRule,
                    round_cost_s: float, horizon: int = 12) -> BudgetEstimate:
    """
    Expected simulation effort from the analytic bound.

    rounds ~= stop_errors / (N n Pb_bound), capped by max_rounds.
    """
    wef = enumerate_wef(cfg.trellis, horizon)
    inputs = BoundInputs(wef=wef, N=cfg.N, M=cfg.M, M_prime=cfg.M_prime, m=cfg.m, n=cfg.n,
                         geometry=cfg.geometry(1.0))
    grid = tuple(float(v) for v in snr_grid_db)
    gamma_bar = np.array([cfg.gamma_bar_for_rd_db(v) for v in grid])
    pb = np.atleast_1d(end_to_end_bound(inputs, gamma_bar).Pb_bound)
    rounds = []
    for p in pb:
        expected = stop_rule.max_rounds if p <= 0 else stop_rule.stop_errors / (cfg.N * cfg.n * p)
        rounds.append(int(min(math.ceil(expected), stop_rule.max_rounds)))
    return BudgetEstimate(grid_db=grid, expected_rounds=tuple(rounds),
                          seconds=tuple(r * round_cost_s for r in rounds))


def check_budget(cfg: NetworkConfig, snr_grid_db: Sequence[float], stop_rule: StopRule,
                 runtime_budget_s: float, round_cost_s: float, horizon: int = 12) -> BudgetEstimate:
    """
    Refuse grids whose expected runtime exceeds the budget.

    Raises:
        BudgetExceededError: With the largest prefix of the grid (in the given
                             order) that fits the budget
    """
    estimate = estimate_budget(cfg, snr_grid_db, stop_rule, round_cost_s, horizon)
    if estimate.total_seconds <= runtime_budget_s:
        return estimate
    suggested = []
    spent = 0.0
    for snr, seconds in zip(estimate.grid_db, estimate.seconds):
        if spent + seconds > runtime_budget_s:
            break
        suggested.append(snr)
        spent += seconds
    logger.warning("Refusing grid: expected %.0f s exceeds budget %.0f s", estimate.total_seconds, runtime_budget_s)
    raise BudgetExceededError(
        f"Expected runtime {estimate.total_seconds:.0f} s exceeds budget {runtime_budget_s:.0f} s; "
        f"suggested grid: {suggested}",
        suggested,
    )


def sweep_beta_table(result: SimResult) -> pd.DataFrame:
    """Relay-position sweep as a table keyed by beta."""
    frame = result.to_dataframe()
    frame['gamma_bar_dB'] = [float(linear_to_db(p.gamma_bar)) for p in result.points]
    ordered = ['beta', 'gamma_rd_dB', 'gamma_bar_dB'] + [c for c in frame.columns
                                                         if c not in ('beta', 'gamma_rd_dB', 'gamma_bar_dB')]
    return frame[ordered]
