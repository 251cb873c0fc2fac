"""
Encoder Module

Encodes one round of N source packets into M' parity packets. Every round is
an independent codeword: the encoder starts in the zero state and is driven
back to it by the trellis termination policy after the n data steps.
"""

from dataclasses import dataclass

import numpy as np

from .trellis import Trellis


class ShapeError(ValueError):
    """Raised when packet or observation dimensions do not match the trellis."""


@dataclass(frozen=True)
class Codeword:
    """
    Terminated codeword of one round (leading batch axes allowed).

    Attributes:
        systematic: (..., N, n) source packets
        parity: (..., M', n + tail) parity packets
        tail_inputs: (..., N, tail) termination input bits
    """
    systematic: np.ndarray
    parity: np.ndarray
    tail_inputs: np.ndarray

    @property
    def n(self) -> int:
        return self.systematic.shape[-1]

    @property
    def n_t(self) -> int:
        return self.parity.shape[-1]

    def steps(self) -> np.ndarray:
        """
        Transmitted bits in trellis-step-major order.

        Returns:
            (..., n_t, N + M') array; step t carries bit t of every packet,
            with the tail input bits in the systematic columns of tail steps
        """
        sys_all = np.concatenate([self.systematic, self.tail_inputs], axis=-1)
        stacked = np.concatenate([sys_all, self.parity], axis=-2)
        return np.swapaxes(stacked, -1, -2)

    def weight(self) -> np.ndarray:
        """Hamming weight of the full terminated codeword."""
        return self.steps().sum(axis=(-1, -2))


def _blocks_from_bits(bits: np.ndarray) -> np.ndarray:
    """(..., N) bits -> (...) input block integers (bit i = source i)."""
    N = bits.shape[-1]
    weights = (1 << np.arange(N)).astype(np.int64)
    return (bits.astype(np.int64) * weights).sum(axis=-1)


def encode_batch(trellis: Trellis, packets: np.ndarray) -> Codeword:
    """
    Encode a batch of rounds.

    Args:
        trellis: Code trellis
        packets: (B, N, n) bits

    Returns:
        Codeword with a leading batch axis

    Raises:
        ShapeError: If the packet array does not have N rows of equal length
    """
    packets = np.asarray(packets)
    if packets.ndim != 3 or packets.shape[1] != trellis.N:
        raise ShapeError(f"Expected packets of shape (batch, {trellis.N}, n), got {packets.shape}")
    B, N, n = packets.shape
    tail = trellis.tail_length
    packets = packets.astype(np.uint8) & 1

    parity = np.zeros((B, trellis.M_prime, n + tail), dtype=np.uint8)
    tail_inputs = np.zeros((B, N, tail), dtype=np.uint8)
    state = np.zeros(B, dtype=np.int64)

    blocks = _blocks_from_bits(np.swapaxes(packets, 1, 2))  # (B, n)
    for t in range(n):
        u = blocks[:, t]
        parity[:, :, t] = trellis.parity[state, u]
        state = trellis.next_state[state, u]
    for k in range(tail):
        u = trellis.termination_input[state]
        tail_inputs[:, :, k] = trellis.systematic[u]
        parity[:, :, n + k] = trellis.parity[state, u]
        state = trellis.next_state[state, u]

    if (state != 0).any():
        raise RuntimeError("Termination policy failed to return to the zero state")
    return Codeword(systematic=packets, parity=parity, tail_inputs=tail_inputs)


def encode(trellis: Trellis, packets: np.ndarray) -> Codeword:
    """
    Encode N equal-length packets into a terminated codeword.

    Args:
        trellis: Code trellis
        packets: (N, n) bits, one row per source packet

    Raises:
        ShapeError: On a packet count or length mismatch
    """
    if isinstance(packets, (list, tuple)):
        lengths = {len(p) for p in packets}
        if len(lengths) > 1:
            raise ShapeError(f"Packets must share one length, got lengths {sorted(lengths)}")
    packets = np.asarray(packets)
    if packets.ndim != 2:
        raise ShapeError(f"Expected a 2-D packet array, got shape {packets.shape}")
    cw = encode_batch(trellis, packets[None, :, :])
    return Codeword(systematic=cw.systematic[0], parity=cw.parity[0], tail_inputs=cw.tail_inputs[0])
