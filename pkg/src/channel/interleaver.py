"""
Interleaver Module

Row-column block interleaver. A frame holds `depth` packets of `packet_bits`
bits written as rows and transmitted column by column, so bit c of row r goes
out at position c * depth + r. Consecutive bits of a packet are exactly
`depth` positions apart on the air.
"""

from dataclasses import dataclass

import numpy as np


class ShapeError(ValueError):
    """Raised when a bit stream does not fill whole interleaver spans."""


@dataclass(frozen=True)
class Interleaver:
    """
    Attributes:
        depth: Packets (rows) per interleaving frame
        packet_bits: Bits per packet (row length)
    """
    depth: int
    packet_bits: int

    def __post_init__(self):
        if self.depth < 1 or self.packet_bits < 1:
            raise ValueError(f"Interleaver needs positive depth and packet length, "
                             f"got depth={self.depth}, packet_bits={self.packet_bits}")

    @property
    def span(self) -> int:
        return self.depth * self.packet_bits

    def transmit_positions(self) -> np.ndarray:
        """(depth, packet_bits) array: on-air position of every bit of every row."""
        rows = np.arange(self.depth)[:, None]
        cols = np.arange(self.packet_bits)[None, :]
        return cols * self.depth + rows

    def _check(self, bits: np.ndarray) -> None:
        if bits.shape[-1] % self.span != 0:
            raise ShapeError(f"Stream length {bits.shape[-1]} is not a multiple of the span {self.span}")


def interleave(bits: np.ndarray, iv: Interleaver) -> np.ndarray:
    """Permute the last axis span by span (rows in, columns out)."""
    bits = np.asarray(bits)
    iv._check(bits)
    lead = bits.shape[:-1]
    frames = bits.reshape(lead + (-1, iv.depth, iv.packet_bits))
    return np.swapaxes(frames, -1, -2).reshape(bits.shape)


def deinterleave(bits: np.ndarray, iv: Interleaver) -> np.ndarray:
    """Inverse of interleave."""
    bits = np.asarray(bits)
    iv._check(bits)
    lead = bits.shape[:-1]
    frames = bits.reshape(lead + (-1, iv.packet_bits, iv.depth))
    return np.swapaxes(frames, -1, -2).reshape(bits.shape)
