"""Trellis construction, encoding and Viterbi decoding."""
from .trellis import Trellis, build_trellis
from .encoder import Codeword, ShapeError, encode, encode_batch
from .viterbi import SoftObservation, viterbi_decode, path_metric

__all__ = [
    'Trellis', 'build_trellis',
    'Codeword', 'ShapeError', 'encode', 'encode_batch',
    'SoftObservation', 'viterbi_decode', 'path_metric',
]
