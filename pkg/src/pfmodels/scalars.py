"""Scalar modes shared by every container in the library.

Exact values are `fractions.Fraction` (always lowest terms, positive
denominator -- the Fraction type guarantees both).  Floating values are
plain Python floats.  A container is either wholly exact or wholly float;
mixing the two raises `ScalarModeError` instead of silently coercing.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

EXACT = "exact"
FLOAT = "float"

Scalar = Union[Fraction, float]


class ScalarModeError(TypeError):
    """Raised when exact and floating scalars are mixed in one computation."""


def mode_of(value) -> str:
    if isinstance(value, bool):
        raise ScalarModeError(f"bool is not a scalar: {value!r}")
    if isinstance(value, (Fraction, int)):
        return EXACT
    if isinstance(value, float):
        return FLOAT
    raise ScalarModeError(f"unsupported scalar type {type(value).__name__}")


def common_mode(values: Iterable, default: str = EXACT) -> str:
    """Mode shared by all values; raises on a mix, `default` when empty."""
    mode = None
    for v in values:
        m = mode_of(v)
        if mode is None:
            mode = m
        elif mode != m:
            raise ScalarModeError("exact and float scalars mixed in one container")
    return default if mode is None else mode


def normalize(value, mode: str) -> Scalar:
    """Coerce ints into the container's mode; reject cross-mode values."""
    if mode == EXACT:
        if isinstance(value, bool) or not isinstance(value, (Fraction, int)):
            raise ScalarModeError(f"expected exact scalar, got {value!r}")
        return Fraction(value)
    if mode == FLOAT:
        if isinstance(value, bool) or not isinstance(value, (float, int)):
            raise ScalarModeError(f"expected float scalar, got {value!r}")
        return float(value)
    raise ValueError(f"unknown scalar mode {mode!r}")


def zero(mode: str) -> Scalar:
    return Fraction(0) if mode == EXACT else 0.0


def one(mode: str) -> Scalar:
    return Fraction(1) if mode == EXACT else 1.0


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or "p" into a Fraction."""
    return Fraction(text.strip())


def format_scalar(value: Scalar) -> str:
    """Render exact scalars as "p/q" (or "p"), floats with repr round-trip."""
    if isinstance(value, (Fraction, int)):
        return str(Fraction(value))
    return repr(float(value))


def to_float(value: Scalar) -> float:
    return float(value)
