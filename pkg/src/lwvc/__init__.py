"""Scalable wavelet video codec built on motion-compensated temporal filtering."""

from .codec import CodecConfig, EncodeResult, decode_sequence, encode, encode_sequence, select_gop_size
from .errors import ArgumentError, ConfigError, FormatError, LwvcError
from .media_io import Frame, VideoSequence, parse_y4m, write_y4m
from .quant import QuantConfig

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "CodecConfig",
    "ConfigError",
    "EncodeResult",
    "FormatError",
    "Frame",
    "LwvcError",
    "QuantConfig",
    "VideoSequence",
    "decode_sequence",
    "encode",
    "encode_sequence",
    "parse_y4m",
    "select_gop_size",
    "write_y4m",
]
