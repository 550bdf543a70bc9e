"""Dense univariate polynomials over exact rationals or floats.

Coefficients are stored degree-ascending.  These are the basis functions
f_i, g_i of the eigenvalue models; everything here is evaluation, formal
calculus and exact definite integration -- no root finding.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .scalars import EXACT, Scalar, ScalarModeError, common_mode, normalize, zero


class Poly:
    """Polynomial with homogeneous (exact or float) coefficients."""

    __slots__ = ("coeffs", "mode")

    def __init__(self, coeffs: Sequence[Scalar], mode: str | None = None):
        coeffs = list(coeffs)
        if mode is None:
            mode = common_mode(coeffs, default=EXACT)
        coeffs = [normalize(c, mode) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)
        self.mode = mode

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __call__(self, x):
        acc = zero(self.mode)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs and self.mode == other.mode

    def __hash__(self):
        return hash((self.coeffs, self.mode))

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"

    def _check(self, other: "Poly"):
        if self.mode != other.mode:
            raise ScalarModeError("cannot combine exact and float polynomials")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [zero(self.mode)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [zero(self.mode)] * (n - len(other.coeffs))
        return Poly([x + y for x, y in zip(a, b)], self.mode)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs], self.mode)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            if self.is_zero() or other.is_zero():
                return Poly([], self.mode)
            out = [zero(self.mode)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return Poly(out, self.mode)
        c = normalize(other, self.mode)
        return Poly([c * a for a in self.coeffs], self.mode)

    __rmul__ = __mul__

    def derivative(self) -> "Poly":
        """Formal derivative; (x^k)' = k x^(k-1)."""
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:], self.mode)

    def antiderivative(self) -> "Poly":
        """Antiderivative with zero constant term (exact mode stays exact)."""
        if self.mode == EXACT:
            out = [Fraction(0)] + [c / Fraction(k + 1) for k, c in enumerate(self.coeffs)]
        else:
            out = [0.0] + [c / (k + 1) for k, c in enumerate(self.coeffs)]
        return Poly(out, self.mode)

    def integral(self, a, b):
        """Definite integral over [a, b]."""
        anti = self.antiderivative()
        return anti(b) - anti(a)


def polyval_array(p: Poly, xs):
    """Vectorized float evaluation (numpy), safe for the zero polynomial."""
    import numpy as np
    xs = np.asarray(xs, dtype=float)
    if not p.coeffs:
        return np.zeros_like(xs)
    return np.polynomial.polynomial.polyval(xs, [float(c) for c in p.coeffs])


def monomial(k: int, mode: str = EXACT) -> Poly:
    """The monic monomial x^k."""
    if k < 0:
        raise ValueError("monomial degree must be >= 0")
    return Poly([zero(mode)] * k + [normalize(1, mode)], mode)


def monic_descending_basis(n: int, mode: str = EXACT) -> list[Poly]:
    """Basis (x^(n-1), ..., x, 1): the i-th entry has degree n-1-i."""
    return [monomial(n - 1 - i, mode) for i in range(n)]
