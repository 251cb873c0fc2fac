"""
Fading Module

Block-fading channel sampling for the Monte Carlo simulator:
1. Nakagami-m amplitudes drawn through Gamma-distributed power (integer m)
2. Maximal-ratio combining SNR and best-antenna selection
3. Reproducible random streams keyed by (seed, point, frame, link), built on
   a counter-based bit generator so any worker can regenerate any frame

Every coherence block of n transmitted bits shares one fading draw per link.
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Tuple, Union

import numpy as np


class Link(IntEnum):
    """Stream identifiers for the independent random sources of one frame."""
    SOURCE_DESTINATION = 0
    SOURCE_RELAY = 1
    RELAY_DESTINATION = 2
    NOISE = 3
    PAYLOAD = 4
    TAIL = 5


def random_stream(seed: int, point: int, frame: int, link: int) -> np.random.Generator:
    """
    Independent generator for one (operating point, frame, link).

    Streams are derived with SeedSequence and driven by Philox, so they do not
    depend on the order in which frames are generated.
    """
    sequence = np.random.SeedSequence([int(seed), int(point), int(frame), int(link)])
    return np.random.Generator(np.random.Philox(sequence))


def sample_nakagami(m: int, omega: float, size=None,
                    rng: Optional[np.random.Generator] = None) -> Union[float, np.ndarray]:
    """
    Draw Nakagami-m fading amplitudes.

    h^2 follows a Gamma(m, omega/m) law, so E[h^2] = omega and
    Var(h^2) = omega^2 / m.

    Args:
        m: Integer shape parameter >= 1 (m = 1 is Rayleigh)
        omega: Mean square value E[h^2] > 0
        size: Output shape
        rng: Random generator (a fresh default_rng() when omitted)

    Raises:
        ValueError: If m is not a positive integer or omega <= 0
    """
    if m < 1 or int(m) != m:
        raise ValueError(f"Nakagami parameter m must be a positive integer, got {m}")
    if not omega > 0:
        raise ValueError(f"Mean square omega must be positive, got {omega}")
    rng = rng if rng is not None else np.random.default_rng()
    return np.sqrt(rng.gamma(shape=float(m), scale=omega / m, size=size))


def mrc_snr(gains: np.ndarray, ebn0: float) -> Union[float, np.ndarray]:
    """Post-combining SNR (Eb/N0) * sum_j h_j^2 over the last axis."""
    gains = np.asarray(gains, dtype=float)
    if gains.ndim == 0 or gains.shape[-1] < 1:
        raise ValueError("mrc_snr needs at least one antenna gain")
    return ebn0 * np.sum(gains ** 2, axis=-1)


def select_best(gains: np.ndarray) -> Tuple[Union[int, np.ndarray], Union[float, np.ndarray]]:
    """
    Strongest antenna over the last axis.

    Returns:
        Tuple of (1-based antenna index, amplitude); ties go to the lowest index
    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim == 0 or gains.shape[-1] < 1:
        raise ValueError("select_best needs at least one antenna gain")
    index = np.argmax(gains ** 2, axis=-1)
    amplitude = np.take_along_axis(gains, np.expand_dims(index, -1), axis=-1)[..., 0]
    if gains.ndim == 1:
        return int(index) + 1, float(amplitude)
    return index + 1, amplitude


@dataclass(frozen=True)
class FadingBlock:
    """
    Block-fading gains of one link bundle over one frame.

    Attributes:
        gains: (..., blocks) amplitudes; the last axis indexes coherence blocks
        block_depth: Bits per coherence block (n)
    """
    gains: np.ndarray
    block_depth: int

    @classmethod
    def draw(cls, m: int, omega: float, shape: Tuple[int, ...], blocks: int,
             block_depth: int, rng: np.random.Generator) -> "FadingBlock":
        return cls(gains=sample_nakagami(m, omega, size=tuple(shape) + (blocks,), rng=rng),
                   block_depth=block_depth)

    def gains_at(self, positions: np.ndarray) -> np.ndarray:
        """Per-bit gains for transmit positions: (..., *positions.shape)."""
        return self.gains[..., np.asarray(positions) // self.block_depth]
