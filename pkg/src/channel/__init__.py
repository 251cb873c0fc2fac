"""Fading channels, SNR geometry and interleaving."""
from .geometry import SnrGeometry, GeometryError, db_to_linear, linear_to_db
from .fading import (
    FadingBlock,
    Link,
    random_stream,
    sample_nakagami,
    mrc_snr,
    select_best,
)
from .interleaver import Interleaver, ShapeError, interleave, deinterleave

__all__ = [
    'SnrGeometry', 'GeometryError', 'db_to_linear', 'linear_to_db',
    'FadingBlock', 'Link', 'random_stream', 'sample_nakagami', 'mrc_snr', 'select_best',
    'Interleaver', 'ShapeError', 'interleave', 'deinterleave',
]
