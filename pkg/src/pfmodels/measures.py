"""One-dimensional measures, two-variable pairing kernels, discretization.

Uniform and discrete measures have exact rational moments, so every
pairing against the sgn / delta / zero / polynomial kernels is an exact
rational; the Cauchy-type kernels and custom weights go through
Gauss-Legendre quadrature.  The Hilbert-transform helpers split
integrals of p(x)/(z-x)^(1,2) into an exact rational part plus an exact
rational multiple of one logarithm, which is what keeps the dual-kernel
sums stable at high degree.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .polynomials import Poly, polyval_array
from .scalars import EXACT, FLOAT, Scalar, normalize, one, zero

DEFAULT_QUADRATURE = 64


class SupportError(ValueError):
    """Raised when an evaluation point or kernel violates support constraints."""


class Measure:
    """Uniform-interval, discrete, or custom-weight measure on the line."""

    __slots__ = ("variant", "a", "b", "points", "weights", "weight_fn", "mode")

    def __init__(self, variant, a=None, b=None, points=None, weights=None,
                 weight_fn=None, mode=EXACT):
        self.variant = variant
        self.a = a
        self.b = b
        self.points = points
        self.weights = weights
        self.weight_fn = weight_fn
        self.mode = mode

    @classmethod
    def uniform(cls, a, b) -> "Measure":
        """Lebesgue measure dx restricted to [a, b] (mass b - a)."""
        try:
            a, b = Fraction(a), Fraction(b)
            mode = EXACT
        except (TypeError, ValueError):
            a, b = float(a), float(b)
            mode = FLOAT
        if not a < b:
            raise ValueError("need a < b")
        return cls("uniform", a=a, b=b, mode=mode)

    @classmethod
    def discrete(cls, points: Sequence, weights: Sequence) -> "Measure":
        if len(points) != len(weights) or not points:
            raise ValueError("points and weights must be equal-length and nonempty")
        pts = [Fraction(p) for p in points]
        wts = [Fraction(w) for w in weights]
        if any(w <= 0 for w in wts):
            raise ValueError("point masses must be positive")
        if len(set(pts)) != len(pts):
            raise ValueError("repeated support points")
        return cls("discrete", points=tuple(pts), weights=tuple(wts))

    @classmethod
    def custom(cls, weight_fn: Callable[[np.ndarray], np.ndarray], a, b) -> "Measure":
        """Float-only measure weight_fn(x) dx on [a, b]."""
        return cls("custom", a=float(a), b=float(b), weight_fn=weight_fn, mode=FLOAT)

    # -- structure ---------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.variant in ("uniform", "discrete") and self.mode == EXACT

    def same_as(self, other: "Measure") -> bool:
        if self.variant != other.variant:
            return False
        if self.variant == "uniform":
            return self.a == other.a and self.b == other.b
        if self.variant == "discrete":
            return self.points == other.points and self.weights == other.weights
        return self is other

    def bounds(self) -> tuple[float, float]:
        if self.variant in ("uniform", "custom"):
            return float(self.a), float(self.b)
        return float(min(self.points)), float(max(self.points))

    def contains(self, z) -> bool:
        lo, hi = self.bounds()
        if self.variant == "discrete":
            return float(z) in [float(p) for p in self.points]
        return lo <= float(z) <= hi

    def separated_from(self, other: "Measure") -> bool:
        lo1, hi1 = self.bounds()
        lo2, hi2 = other.bounds()
        return hi1 < lo2 or hi2 < lo1

    def __eq__(self, other):
        return isinstance(other, Measure) and self.same_as(other)

    def __repr__(self):
        if self.variant == "uniform":
            return f"Measure.uniform({self.a}, {self.b})"
        if self.variant == "discrete":
            return f"Measure.discrete({list(self.points)}, {list(self.weights)})"
        return f"Measure.custom([{self.a}, {self.b}])"

    # -- integration -------------------------------------------------------

    def moment(self, k: int) -> Scalar:
        """Integral of x^k; exact for uniform and discrete measures."""
        if k < 0:
            raise ValueError("moment degree must be >= 0")
        if self.variant == "uniform":
            if self.mode == EXACT:
                return (self.b ** (k + 1) - self.a ** (k + 1)) / Fraction(k + 1)
            return (self.b ** (k + 1) - self.a ** (k + 1)) / (k + 1)
        if self.variant == "discrete":
            return sum((w * p ** k for p, w in zip(self.points, self.weights)),
                       Fraction(0))
        x, w = self.quadrature(DEFAULT_QUADRATURE)
        return float(np.sum(w * x ** k))

    def mass(self) -> Scalar:
        return self.moment(0)

    def poly_integral(self, p: Poly) -> Scalar:
        """Integral of a polynomial against the measure."""
        if self.variant == "uniform":
            if self.mode == EXACT and p.mode == EXACT:
                return p.integral(self.a, self.b)
            return Poly([float(c) for c in p.coeffs], FLOAT).integral(float(self.a), float(self.b))
        if self.variant == "discrete":
            if p.mode == EXACT:
                return sum((w * p(pt) for pt, w in zip(self.points, self.weights)),
                           Fraction(0))
            return float(sum(float(w) * p(float(pt)) for pt, w in zip(self.points, self.weights)))
        x, w = self.quadrature(DEFAULT_QUADRATURE)
        return float(np.sum(w * polyval_array(p, x)))

    def quadrature(self, q: int = DEFAULT_QUADRATURE) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights integrating dmu (Gauss-Legendre for intervals)."""
        if self.variant == "discrete":
            return (np.array([float(p) for p in self.points]),
                    np.array([float(w) for w in self.weights]))
        t, w = np.polynomial.legendre.leggauss(q)
        a, b = float(self.a), float(self.b)
        x = 0.5 * (b - a) * t + 0.5 * (a + b)
        w = 0.5 * (b - a) * w
        if self.variant == "custom":
            w = w * np.asarray(self.weight_fn(x), dtype=float)
        return x, w


def moment(mu: Measure, k: int) -> Scalar:
    return mu.moment(k)


# ---------------------------------------------------------------------------
# Hilbert transforms  (integrals against 1/(z-x) and 1/(z-x)^2)
# ---------------------------------------------------------------------------

def _require_outside(mu: Measure, z):
    if mu.contains(z):
        raise SupportError(f"evaluation point {z} lies inside the measure support")


def hilbert_moment(mu: Measure, k: int, z) -> float:
    """Integral of x^k / (z - x) dmu(x) for z outside the support."""
    if k < 0:
        raise ValueError("degree must be >= 0")
    _require_outside(mu, z)
    if mu.variant == "discrete":
        return float(sum(float(w) * float(p) ** k / (float(z) - float(p))
                         for p, w in zip(mu.points, mu.weights)))
    if mu.variant == "uniform":
        a, b, zf = float(mu.a), float(mu.b), float(z)
        log_term = math.log(abs((zf - a) / (zf - b)))
        acc = zf ** k * log_term
        for m in range(k):
            acc -= zf ** m * (b ** (k - m) - a ** (k - m)) / (k - m)
        return acc
    x, w = mu.quadrature(DEFAULT_QUADRATURE)
    return float(np.sum(w * x ** k / (float(z) - x)))


def hilbert_log_split(coeffs: Sequence[Fraction], z: Fraction, mu: Measure):
    """Exact split of integral p(x)/(z-x) dx over uniform [a, b].

    Returns (c_log, c_rat) with value = c_log * log((z-a)/(z-b)) + c_rat,
    both exact rationals.  Requires rational z outside [a, b].
    """
    if mu.variant != "uniform" or mu.mode != EXACT:
        raise ValueError("exact Hilbert split needs an exact uniform measure")
    z = Fraction(z)
    _require_outside(mu, z)
    a, b = mu.a, mu.b
    c_log = Fraction(0)
    c_rat = Fraction(0)
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        c = Fraction(c)
        c_log += c * z ** k
        for m in range(k):
            c_rat -= c * z ** m * (b ** (k - m) - a ** (k - m)) / (k - m)
    return c_log, c_rat


def hilbert2_log_split(coeffs: Sequence[Fraction], z: Fraction, mu: Measure):
    """Exact split of integral p(x)/(z-x)^2 dx over uniform [a, b].

    Same return convention as `hilbert_log_split`.
    """
    if mu.variant != "uniform" or mu.mode != EXACT:
        raise ValueError("exact Hilbert split needs an exact uniform measure")
    z = Fraction(z)
    _require_outside(mu, z)
    a, b = mu.a, mu.b
    base = Fraction(1) / (z - b) - Fraction(1) / (z - a)
    # I2_k = S_k * log + T_k with S_k = z S_{k-1} - z^(k-1), T_k = z T_{k-1} + R_{k-1},
    # where H_{k-1} = z^(k-1) * log - R_{k-1} is the first-order transform.
    max_k = len(coeffs) - 1
    s, t = Fraction(0), base
    c_log = coeffs[0] * s if coeffs else Fraction(0)
    c_rat = coeffs[0] * t if coeffs else Fraction(0)
    r = Fraction(0)  # R_{k-1} accumulator
    for k in range(1, max_k + 1):
        r_prev = Fraction(0)
        for m in range(k - 1):
            r_prev += z ** m * (b ** (k - 1 - m) - a ** (k - 1 - m)) / (k - 1 - m)
        s = z * s - z ** (k - 1)
        t = z * t + r_prev
        c = Fraction(coeffs[k])
        if c != 0:
            c_log += c * s
            c_rat += c * t
    return c_log, c_rat


# ---------------------------------------------------------------------------
# pairing kernels
# ---------------------------------------------------------------------------

class PairKernel:
    """Two-variable kernel K(x, y) with an antisymmetry flag.

    Variants: sgn, delta, cauchy (1/(x-y)^power), zero, poly (finite
    coefficient grid sum c_ab x^a y^b), matrix2x2 (four scalar kernels),
    custom (float-only callable).  `negated`/`swapped` implement -K and
    the argument transpose without new variants.
    """

    __slots__ = ("variant", "antisymmetric", "power", "coeffs", "blocks",
                 "fn", "negated", "swapped")

    def __init__(self, variant, antisymmetric, power=1, coeffs=None, blocks=None,
                 fn=None, negated=False, swapped=False):
        self.variant = variant
        self.antisymmetric = antisymmetric
        self.power = power
        self.coeffs = coeffs
        self.blocks = blocks
        self.fn = fn
        self.negated = negated
        self.swapped = swapped

    def __repr__(self):
        extra = "" if not (self.negated or self.swapped) else \
            f", negated={self.negated}, swapped={self.swapped}"
        if self.variant == "cauchy" and self.power != 1:
            return f"PairKernel(cauchy^{self.power}{extra})"
        return f"PairKernel({self.variant}{extra})"

    # -- wrappers ----------------------------------------------------------

    def __neg__(self) -> "PairKernel":
        return PairKernel(self.variant, self.antisymmetric, self.power, self.coeffs,
                          self.blocks, self.fn, not self.negated, self.swapped)

    def transpose(self) -> "PairKernel":
        return PairKernel(self.variant, self.antisymmetric, self.power, self.coeffs,
                          self.blocks, self.fn, self.negated, not self.swapped)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, x, y):
        """Pointwise value; rejected for delta (not a function)."""
        if self.swapped:
            x, y = y, x
        v = self._evaluate_raw(x, y)
        return -v if self.negated else v

    def _evaluate_raw(self, x, y):
        if self.variant == "sgn":
            if x == y:
                return 0 * x
            return type(x - y)(1) if x > y else type(x - y)(-1)
        if self.variant == "zero":
            return 0 * (x + y)
        if self.variant == "cauchy":
            return 1 / (x - y) ** self.power if isinstance(x, float) or isinstance(y, float) \
                else Fraction(1) / (Fraction(x) - Fraction(y)) ** self.power
        if self.variant == "poly":
            acc = 0
            for a, row in enumerate(self.coeffs):
                for b, c in enumerate(row):
                    if c:
                        acc += c * x ** a * y ** b
            return acc
        if self.variant == "custom":
            return float(self.fn(float(x), float(y)))
        if self.variant == "delta":
            raise ValueError("delta kernel has no pointwise values")
        raise ValueError(f"cannot evaluate variant {self.variant}")

    def eval_grid(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorized K(x_a, y_b) on float grids."""
        if self.swapped:
            out = self._grid_raw(ys, xs).T
        else:
            out = self._grid_raw(xs, ys)
        return -out if self.negated else out

    def _grid_raw(self, xs, ys):
        X = np.asarray(xs, dtype=float)[:, None]
        Y = np.asarray(ys, dtype=float)[None, :]
        if self.variant == "sgn":
            return np.sign(X - Y)
        if self.variant == "zero":
            return np.zeros((X.shape[0], Y.shape[1]))
        if self.variant == "cauchy":
            return 1.0 / (X - Y) ** self.power
        if self.variant == "poly":
            acc = np.zeros((X.shape[0], Y.shape[1]))
            for a, row in enumerate(self.coeffs):
                for b, c in enumerate(row):
                    if c:
                        acc = acc + float(c) * X ** a * Y ** b
            return acc
        if self.variant == "custom":
            return np.asarray(self.fn(X, Y), dtype=float)
        raise ValueError(f"cannot grid-evaluate variant {self.variant}")


def sgn_kernel() -> PairKernel:
    return PairKernel("sgn", antisymmetric=True)


def delta_kernel() -> PairKernel:
    return PairKernel("delta", antisymmetric=False)


def cauchy_kernel(power: int = 1) -> PairKernel:
    if power not in (1, 2):
        raise ValueError("cauchy power must be 1 or 2")
    return PairKernel("cauchy", antisymmetric=(power == 1), power=power)


def zero_kernel() -> PairKernel:
    return PairKernel("zero", antisymmetric=True)


def poly_kernel(coeffs) -> PairKernel:
    """Polynomial kernel sum c[a][b] x^a y^b with exact coefficients."""
    grid = tuple(tuple(Fraction(c) for c in row) for row in coeffs)
    n = max(len(grid), max((len(r) for r in grid), default=0))
    anti = all(
        (grid[a][b] if a < len(grid) and b < len(grid[a]) else Fraction(0))
        == -(grid[b][a] if b < len(grid) and a < len(grid[b]) else Fraction(0))
        for a in range(n) for b in range(n))
    return PairKernel("poly", antisymmetric=anti, coeffs=grid)


def custom_kernel(fn, antisymmetric: bool = False) -> PairKernel:
    return PairKernel("custom", antisymmetric=antisymmetric, fn=fn)


class MatrixKernel:
    """2x2 block kernel [[k11, k12], [k21, k22]] acting on function pairs."""

    __slots__ = ("k11", "k12", "k21", "k22")

    def __init__(self, k11: PairKernel, k12: PairKernel, k21: PairKernel, k22: PairKernel):
        self.k11, self.k12, self.k21, self.k22 = k11, k12, k21, k22

    @classmethod
    def skew_assembled(cls, a: PairKernel, s: PairKernel, b: PairKernel) -> "MatrixKernel":
        """The canonical block form [[A, S], [-S^T, B]] with A, B antisymmetric."""
        if not a.antisymmetric or not b.antisymmetric:
            raise ValueError("diagonal blocks must be antisymmetric")
        return cls(a, s, -(s.transpose()), b)

    def blocks(self):
        return (self.k11, self.k12, self.k21, self.k22)


def beta4_matrix_kernel(a: PairKernel, s: PairKernel, b: PairKernel) -> MatrixKernel:
    return MatrixKernel.skew_assembled(a, s, b)


# ---------------------------------------------------------------------------
# pairings <f | K | g>
# ---------------------------------------------------------------------------

def _sgn_against(g: Poly, mu2: Measure):
    """Pieces of x -> integral sgn(x - y) g(y) dmu2(y) for uniform mu2.

    Returns (a2, b2, G) with the value G(min(max(x, a2), b2))*2 - G(a2) - G(b2)
    where G is the antiderivative of g.
    """
    G = g.antiderivative()
    return mu2.a, mu2.b, G


def _pair_sgn_closed(f: Poly, g: Poly, mu1: Measure, mu2: Measure):
    """Closed-form sgn pairing; exact when everything is exact."""
    if mu1.variant == "discrete" and mu2.variant == "discrete":
        acc = 0
        for p1, w1 in zip(mu1.points, mu1.weights):
            for p2, w2 in zip(mu2.points, mu2.weights):
                if p1 == p2:
                    continue
                s = 1 if p1 > p2 else -1
                acc += w1 * w2 * f(p1) * g(p2) * s
        return acc
    if mu1.variant != "uniform" or mu2.variant != "uniform":
        raise ValueError("closed-form sgn pairing needs uniform or discrete measures")
    a2, b2, G = _sgn_against(g, mu2)
    ga, gb = G(a2), G(b2)
    acc = 0
    # below the support of mu2: sgn factor is -1 throughout
    lo, hi = mu1.a, min(mu1.b, a2)
    if lo < hi:
        acc += (ga - gb) * f.integral(lo, hi)
    # inside: 2 G(x) - G(a2) - G(b2)
    lo, hi = max(mu1.a, a2), min(mu1.b, b2)
    if lo < hi:
        inner = f * (G * 2)
        acc += inner.integral(lo, hi) - (ga + gb) * f.integral(lo, hi)
    # above: +1 throughout
    lo, hi = max(mu1.a, b2), mu1.b
    if lo < hi:
        acc += (gb - ga) * f.integral(lo, hi)
    return acc


def _pair_quadrature(f: Poly, kernel: PairKernel, g: Poly, mu1, mu2, q) -> float:
    x1, w1 = mu1.quadrature(q)
    x2, w2 = mu2.quadrature(q)
    fv = polyval_array(f, x1)
    gv = polyval_array(g, x2)
    grid = kernel.eval_grid(x1, x2)
    return float((w1 * fv) @ grid @ (w2 * gv))


def pair(f: Poly, kernel: PairKernel, g: Poly, mu1: Measure, mu2: Measure,
         q: int = DEFAULT_QUADRATURE) -> Scalar:
    """The double integral f(x) K(x, y) g(y) dmu1(x) dmu2(y).

    Exact rational for sgn/delta/zero/poly kernels on exact measures with
    exact polynomials; Gauss-Legendre product quadrature otherwise.  The
    Cauchy kernel requires support-separated measures (no principal value).
    """
    if kernel.swapped:
        # <f | K^T | g> over mu1 x mu2 equals <g | K | f> over mu2 x mu1
        return pair(g, PairKernel(kernel.variant, kernel.antisymmetric, kernel.power,
                                  kernel.coeffs, kernel.blocks, kernel.fn,
                                  kernel.negated, False), f, mu2, mu1, q)
    if kernel.negated:
        return -pair(f, PairKernel(kernel.variant, kernel.antisymmetric, kernel.power,
                                   kernel.coeffs, kernel.blocks, kernel.fn,
                                   False, False), g, mu1, mu2, q)

    exactable = (mu1.is_exact and mu2.is_exact and f.mode == EXACT and g.mode == EXACT)
    if kernel.variant == "zero":
        return Fraction(0) if exactable else 0.0
    if kernel.variant == "delta":
        if not mu1.same_as(mu2):
            raise ValueError("delta kernel pairing needs a shared measure")
        return mu1.poly_integral(f * g) if exactable else \
            float(mu1.poly_integral(Poly([float(c) for c in (f * g).coeffs], FLOAT)))
    if kernel.variant == "sgn":
        if exactable:
            return _pair_sgn_closed(f, g, mu1, mu2)
        if mu1.variant in ("uniform", "discrete") and mu2.variant in ("uniform", "discrete"):
            fe = Poly([float(c) for c in f.coeffs], FLOAT)
            ge = Poly([float(c) for c in g.coeffs], FLOAT)
            return float(_pair_sgn_closed(fe, ge, mu1, mu2))
        return _pair_quadrature(f, kernel, g, mu1, mu2, q)
    if kernel.variant == "poly":
        if exactable:
            acc = Fraction(0)
            for a, row in enumerate(kernel.coeffs):
                for b, c in enumerate(row):
                    if c:
                        acc += c * mu1.poly_integral(f * Poly([0] * a + [1])) \
                                 * mu2.poly_integral(g * Poly([0] * b + [1]))
            return acc
        return _pair_quadrature(f, kernel, g, mu1, mu2, q)
    if kernel.variant == "cauchy":
        if not mu1.separated_from(mu2):
            raise SupportError("cauchy kernel requires support-separated measures")
        return _pair_quadrature(f, kernel, g, mu1, mu2, q)
    if kernel.variant == "custom":
        return _pair_quadrature(f, kernel, g, mu1, mu2, q)
    raise ValueError(f"cannot pair against variant {kernel.variant}")


def pair_block(fg1: tuple[Poly, Poly], kernel: MatrixKernel, fg2: tuple[Poly, Poly],
               mu1: Measure, mu2: Measure, q: int = DEFAULT_QUADRATURE) -> Scalar:
    """<(f, g) | K | (ftilde, gtilde)> as the sum of the four scalar pairings."""
    f, g = fg1
    ft, gt = fg2
    return (pair(f, kernel.k11, ft, mu1, mu2, q)
            + pair(f, kernel.k12, gt, mu1, mu2, q)
            + pair(g, kernel.k21, ft, mu1, mu2, q)
            + pair(g, kernel.k22, gt, mu1, mu2, q))


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------

def kernel_matrix(kernel: PairKernel, mu1: Measure, mu2: Measure,
                  q: int = DEFAULT_QUADRATURE) -> np.ndarray:
    """Weighted node matrix W with v^T W u ~ <v | K | u> for value vectors.

    W[a, b] = w1_a K(x_a, y_b) w2_b; the delta kernel collapses to the
    diagonal weight matrix (shared measure required).  sgn is exact only
    for polynomial integrands through `pair`; its node matrix here is
    low-order accurate and chains use `operator_apply_matrix` instead.
    """
    x1, w1 = mu1.quadrature(q)
    x2, w2 = mu2.quadrature(q)
    if kernel.variant == "delta":
        if not mu1.same_as(mu2):
            raise ValueError("delta kernel needs a shared measure")
        d = np.diag(w1)
        return -d if kernel.negated else d
    if kernel.variant == "cauchy" and not mu1.separated_from(mu2):
        raise SupportError("cauchy kernel requires support-separated measures")
    return w1[:, None] * kernel.eval_grid(x1, x2) * w2[None, :]


def _legendre_antiderivative_matrix(mu: Measure, q: int) -> np.ndarray:
    """Matrix T with (T u)_a = integral over [a_lo, x_a] of the degree<q
    Legendre interpolant of the node values u."""
    x, w = mu.quadrature(q)
    a, b = float(mu.a), float(mu.b)
    t = (2 * x - (a + b)) / (b - a)
    # values -> Legendre coefficients (exact for the interpolant)
    P = np.stack([np.polynomial.legendre.legval(t, [0] * k + [1]) for k in range(q)])
    coeff_map = ((2 * np.arange(q) + 1)[:, None] / (b - a)) * (P * w[None, :])
    # antiderivatives of P_k evaluated at the nodes
    rows = []
    for k in range(q):
        if k == 0:
            vals = t + 1.0
        else:
            pk1 = np.polynomial.legendre.legval(t, [0] * (k + 1) + [1])
            pkm = np.polynomial.legendre.legval(t, [0] * (k - 1) + [1])
            vals = (pk1 - pkm) / (2 * k + 1)
        rows.append(vals * (b - a) / 2.0)
    A = np.stack(rows, axis=1)  # A[a, k] = integral to x_a of P_k
    return A @ coeff_map


def operator_apply_matrix(kernel: PairKernel, mu: Measure, q: int = DEFAULT_QUADRATURE,
                          mu_from: Optional[Measure] = None) -> np.ndarray:
    """Matrix T with (K u)(x_a) ~ sum_b T[a, b] u(y_b).

    Maps node values on `mu` (the integration side) to node values on
    `mu_from` (defaults to `mu`).  delta gives the identity (shared
    measure); sgn uses a spectrally accurate Legendre antiderivative so
    that chains with a sgn terminal converge like the smooth kernels.
    """
    src = mu
    dst = mu_from if mu_from is not None else mu
    if kernel.variant == "delta":
        if not src.same_as(dst):
            raise ValueError("delta operator needs matching measures")
        t = np.eye(len(src.quadrature(q)[0]))
        return -t if kernel.negated else t
    if kernel.variant == "sgn":
        if not src.same_as(dst) or src.variant != "uniform":
            raise ValueError("sgn operator matrix implemented for a shared uniform measure")
        anti = _legendre_antiderivative_matrix(src, q)
        total = src.quadrature(q)[1][None, :]  # full-interval integral row
        t = 2 * anti - np.ones((anti.shape[0], 1)) @ total
        if kernel.swapped:
            t = -t  # sgn is antisymmetric
        return -t if kernel.negated else t
    if kernel.variant == "cauchy" and not src.separated_from(dst):
        raise SupportError("cauchy kernel requires support-separated measures")
    x_from = dst.quadrature(q)[0]
    x_to, w_to = src.quadrature(q)
    return kernel.eval_grid(x_from, x_to) * w_to[None, :]
