"""
SNR Geometry Module

Average link SNRs of the relay network from a single S-D reference SNR,
a path-loss exponent and the relay position. The relay sits on the line
between the sources and the destination at distance d_sr = d_sd / beta.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class GeometryError(ValueError):
    """Raised for relay positions or path-loss settings outside the model."""


def db_to_linear(db: ArrayLike) -> ArrayLike:
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(value: ArrayLike) -> ArrayLike:
    return 10.0 * np.log10(np.asarray(value, dtype=float))


@dataclass(frozen=True)
class SnrGeometry:
    """
    Link SNRs for one operating point.

    Attributes:
        gamma_bar: Average S-D SNR (linear)
        eta: Path-loss exponent
        beta: Distance ratio d_sd / d_sr (> 1)
    """
    gamma_bar: float
    eta: float = 2.0
    beta: float = 5.0

    def __post_init__(self):
        if not self.beta > 1:
            raise GeometryError(f"Relay must lie strictly between sources and destination (beta > 1), got {self.beta}")
        if self.eta < 0:
            raise GeometryError(f"Path-loss exponent must be nonnegative, got {self.eta}")
        if not self.gamma_bar > 0:
            raise GeometryError(f"Average SNR must be positive, got {self.gamma_bar}")

    @classmethod
    def from_db(cls, snr_db: float, eta: float = 2.0, beta: float = 5.0) -> "SnrGeometry":
        return cls(gamma_bar=float(db_to_linear(snr_db)), eta=eta, beta=beta)

    @classmethod
    def from_relay_destination(cls, gamma_rd: float, eta: float = 2.0, beta: float = 5.0) -> "SnrGeometry":
        """Geometry whose R-D average SNR equals `gamma_rd` (linear)."""
        if not beta > 1:
            raise GeometryError(f"Relay must lie strictly between sources and destination (beta > 1), got {beta}")
        return cls(gamma_bar=float(gamma_rd) * ((beta - 1.0) / beta) ** eta, eta=eta, beta=beta)

    def link_snrs(self, gamma_bar: ArrayLike = None):
        """
        (S-D, S-R, R-D) average SNRs for this relay position.

        Args:
            gamma_bar: Optional S-D SNR (scalar or array) replacing the stored one

        Returns:
            Tuple of three arrays broadcast like gamma_bar
        """
        gamma = np.asarray(self.gamma_bar if gamma_bar is None else gamma_bar, dtype=float)
        return (gamma,
                self.beta ** self.eta * gamma,
                (self.beta / (self.beta - 1.0)) ** self.eta * gamma)

    def gamma_bar_for_rd(self, gamma_rd: ArrayLike) -> ArrayLike:
        """S-D SNR giving the requested R-D SNR at this relay position."""
        return np.asarray(gamma_rd, dtype=float) * ((self.beta - 1.0) / self.beta) ** self.eta

    @property
    def gamma_sd(self) -> float:
        return self.gamma_bar

    @property
    def gamma_sr(self) -> float:
        return self.beta ** self.eta * self.gamma_bar

    @property
    def gamma_rd(self) -> float:
        return (self.beta / (self.beta - 1.0)) ** self.eta * self.gamma_bar
