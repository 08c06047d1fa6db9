"""Bit-vector helpers.

Bit vectors are little-endian throughout the toolkit: position 0 is the
least-significant bit, so ``dec((1, 0, 1)) == 5``.  On the command line a
vector is written as a 0/1 string with index 0 leftmost.
"""

from __future__ import annotations

from typing import Sequence

from .errors import InvalidParameterError


def dec(bits: Sequence[int]) -> int:
    """Integer encoded by a little-endian bit vector."""
    value = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise InvalidParameterError(f"bit {i} is {b!r}, expected 0 or 1")
        value |= b << i
    return value


def binary(value: int, width: int) -> tuple[int, ...]:
    """Little-endian ``width``-bit encoding of ``value``; inverse of :func:`dec`."""
    if width < 0:
        raise InvalidParameterError(f"width must be >= 0, got {width}")
    if value < 0 or value >= (1 << width):
        raise InvalidParameterError(f"value {value} does not fit in {width} bits")
    return tuple((value >> i) & 1 for i in range(width))


def parse_bits(text: str) -> tuple[int, ...]:
    """Parse a 0/1 string (index 0 leftmost, least significant)."""
    if not text or any(ch not in "01" for ch in text):
        raise InvalidParameterError(f"not a 0/1 string: {text!r}")
    return tuple(int(ch) for ch in text)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


def hamming(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) != len(b):
        raise InvalidParameterError("length mismatch")
    return sum(1 for x, y in zip(a, b) if x != y)
