"""
Viterbi Decoder Module

Coherent maximum-likelihood decoding over the terminated trellis with known
channel gains. The branch metric is the squared Euclidean distance
sum (y - sqrt(Eb) * h * x)^2 with x = +1 for bit 0 and x = -1 for bit 1.
Erased positions contribute nothing. Ties go to the lowest-numbered
predecessor state.

Observations are step-major: axis -2 is the trellis step (n + tail), axis -1
the N systematic then M' parity positions. Any leading axes are decoded as
independent rounds in one vectorized pass.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .encoder import ShapeError, encode_batch
from .trellis import Trellis


@dataclass(frozen=True)
class SoftObservation:
    """
    Received values for one or more rounds.

    Attributes:
        y: (..., n_t, N + M') received amplitudes
        h: Fading amplitudes, broadcastable to y
        noise_var: Real noise variance N0/2
        Eb: Energy per bit
        erased: Optional boolean mask, broadcastable to y; True positions are
                excluded from the metric
    """
    y: np.ndarray
    h: np.ndarray
    noise_var: float = 0.5
    Eb: float = 1.0
    erased: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.noise_var <= 0:
            raise ValueError(f"Noise variance must be positive, got {self.noise_var}")
        if self.Eb <= 0:
            raise ValueError(f"Eb must be positive, got {self.Eb}")
        if np.any(np.asarray(self.h) < 0):
            raise ValueError("Fading gains must be nonnegative")

    def bit_costs(self):
        """Per-position costs of sending bit 0 and bit 1."""
        y = np.asarray(self.y, dtype=float)
        a = np.sqrt(self.Eb) * np.broadcast_to(np.asarray(self.h, dtype=float), y.shape)
        c0 = (y - a) ** 2
        c1 = (y + a) ** 2
        if self.erased is not None:
            keep = ~np.broadcast_to(np.asarray(self.erased, dtype=bool), y.shape)
            c0 = c0 * keep
            c1 = c1 * keep
        return c0, c1


def _check_shape(trellis: Trellis, obs: SoftObservation, n: Optional[int]) -> int:
    y = np.asarray(obs.y)
    if y.ndim < 2 or y.shape[-1] != trellis.width:
        raise ShapeError(f"Observation width must be {trellis.width}, got shape {y.shape}")
    n_t = y.shape[-2]
    data_steps = n_t - trellis.tail_length
    if data_steps < 0 or (n is not None and data_steps != n):
        raise ShapeError(
            f"Observation has {n_t} steps; expected n + {trellis.tail_length} tail steps"
        )
    try:
        np.broadcast_to(np.asarray(obs.h), y.shape)
        if obs.erased is not None:
            np.broadcast_to(np.asarray(obs.erased), y.shape)
    except ValueError as exc:
        raise ShapeError(f"Gains or erasure mask do not broadcast to {y.shape}") from exc
    return data_steps


def viterbi_decode(trellis: Trellis, obs: SoftObservation, n: Optional[int] = None) -> np.ndarray:
    """
    Decode the N source packets of one or more rounds.

    Args:
        trellis: Code trellis
        obs: Step-major observation with n + tail steps
        n: Expected packet length; inferred from the observation when omitted

    Returns:
        (..., N, n) decoded bits

    Raises:
        ShapeError: If the observation does not fit the trellis
    """
    data_steps = _check_shape(trellis, obs, n)
    c0, c1 = obs.bit_costs()
    lead = c0.shape[:-2]
    n_t, W = c0.shape[-2:]
    c0 = c0.reshape(-1, n_t, W)
    c1 = c1.reshape(-1, n_t, W)
    B = c0.shape[0]

    S, U = trellis.state_count, trellis.input_count
    outputs = trellis.branch_outputs().astype(float)  # (S*U, W)
    source = np.repeat(np.arange(S), U)

    # branch metrics for every step: base cost of all-zero output plus per-bit deltas
    branch_metric = c0.sum(axis=-1)[..., None] + (c1 - c0) @ outputs.T  # (B, n_t, S*U)

    tail_mask = np.full(S * U, np.inf)
    tail_mask[np.arange(S) * U + trellis.termination_input] = 0.0

    metric = np.full((B, S), np.inf)
    metric[:, 0] = 0.0
    survivors = np.zeros((n_t, B, S), dtype=np.int64)
    for t in range(n_t):
        candidate = metric[:, source] + branch_metric[:, t, :]
        if t >= data_steps:
            candidate = candidate + tail_mask
        entering = candidate[:, trellis.incoming]  # (B, S, U)
        pick = entering.argmin(axis=-1)
        survivors[t] = trellis.incoming[np.arange(S)[None, :], pick]
        metric = np.take_along_axis(entering, pick[..., None], axis=-1)[..., 0]

    decoded = np.zeros((B, trellis.N, data_steps), dtype=np.uint8)
    state = np.zeros(B, dtype=np.int64)
    rows = np.arange(B)
    for t in range(n_t - 1, -1, -1):
        branch = survivors[t, rows, state]
        if t < data_steps:
            decoded[:, :, t] = trellis.systematic[branch % U]
        state = branch // U
    return decoded.reshape(lead + (trellis.N, data_steps))


def path_metric(trellis: Trellis, obs: SoftObservation, packets: np.ndarray) -> np.ndarray:
    """
    Metric of the terminated codeword carrying `packets` under `obs`.

    Args:
        packets: (N, n) or (B, N, n) bits

    Returns:
        Scalar or (B,) array of metrics
    """
    packets = np.asarray(packets)
    single = packets.ndim == 2
    batch = packets[None] if single else packets
    bits = encode_batch(trellis, batch).steps().astype(bool)
    c0, c1 = obs.bit_costs()
    total = np.where(bits, c1, c0).sum(axis=(-1, -2))
    return total[0] if single and total.ndim else total
