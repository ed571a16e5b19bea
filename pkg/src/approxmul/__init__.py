"""Bit-exact simulation and analysis of approximate 4:2 compressors,
8x8 unsigned multipliers built from them, and LUT-based quantized
neural-network inference."""

__version__ = "0.1.0"
