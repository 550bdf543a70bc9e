"""Partition combinatorics and the symmetric-function layer.

Partitions are stored without trailing zeros.  Point sets are plain
sequences of scalars; Schur-type evaluations go through the bialternant
determinant ratio, so exact mode requires pairwise-distinct points.
"""

from __future__ import annotations

from itertools import permutations
from typing import Iterable, Sequence

from .linalg import DenseMatrix, LinalgError, det
from .scalars import EXACT, Scalar, common_mode, one, zero


class Partition:
    """Non-increasing tuple of positive parts; the empty partition is ()."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[int] = ()):
        parts = [int(p) for p in parts]
        while parts and parts[-1] == 0:
            parts.pop()
        if any(p <= 0 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"parts must be non-increasing: {parts}")
        self.parts = tuple(parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def part(self, i: int) -> int:
        """The i-th part (0-based), zero beyond the length."""
        return self.parts[i] if i < len(self.parts) else 0

    def transpose(self) -> "Partition":
        if not self.parts:
            return Partition()
        cols = [0] * self.parts[0]
        for p in self.parts:
            for c in range(p):
                cols[c] += 1
        return Partition(cols)

    def fits_box(self, n: int, m: int) -> bool:
        """Whether the diagram fits in n rows of width m."""
        return self.length <= n and (not self.parts or self.parts[0] <= m)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        return f"Partition{self.parts!r}"


def partitions_in_box(n: int, m: int):
    """All partitions with at most n parts, each at most m."""
    def rec(prefix, remaining, cap):
        if remaining == 0:
            yield Partition(prefix)
            return
        yield Partition(prefix)
        for p in range(1, cap + 1):
            yield from rec(prefix + [p], remaining - 1, p)
    # enumerate by first part to avoid duplicates of the empty tail
    seen = set()
    for lam in rec([], n, m):
        if lam.parts not in seen:
            seen.add(lam.parts)
            yield lam


def dual_partition(lam: Partition, n: int, m: int) -> Partition:
    """Box complement dual: k-th part is n - (transpose part m+1-k).

    Requires lam inside the (m^n) box (at most n parts, each at most m);
    the result lives in the transposed (n^m) box and dualizing again with
    the box arguments swapped recovers lam.  For square boxes this is an
    involution outright.
    """
    if not lam.fits_box(n, m):
        raise ValueError(f"{lam} does not fit in the {m}^{n} box")
    t = lam.transpose()
    return Partition([n - t.part(m - k) for k in range(1, m + 1)])


# ---------------------------------------------------------------------------
# Vandermonde factors
# ---------------------------------------------------------------------------

def vandermonde(xs: Sequence[Scalar]) -> Scalar:
    """prod_{i<j} (x_i - x_j)."""
    mode = common_mode(xs, default=EXACT)
    acc = one(mode)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            acc *= xs[i] - xs[j]
    return acc


def vandermonde_det(xs: Sequence[Scalar]) -> Scalar:
    """Same product through det[x_i^(N-j)]; kept as a cross-check route."""
    n = len(xs)
    return det(DenseMatrix([[xs[i] ** (n - j) for j in range(1, n + 1)] for i in range(n)]))


def delta4_det(xs: Sequence[Scalar]) -> Scalar:
    """Fourth power of the Vandermonde via the value/derivative determinant.

    Evaluates (-1)^(N(N+1)/2) det of the 2N x 2N matrix whose first N rows
    are x_i^(2N-j) and last N rows the derivatives (2N-j) x_i^(2N-j-1),
    which equals vandermonde(xs)**4.
    """
    n = len(xs)
    mode = common_mode(xs, default=EXACT)
    if n == 0:
        return one(mode)
    rows = []
    for x in xs:
        rows.append([x ** (2 * n - j) for j in range(1, 2 * n + 1)])
    for x in xs:
        rows.append([(2 * n - j) * x ** (2 * n - j - 1) if 2 * n - j > 0 else zero(mode)
                     for j in range(1, 2 * n + 1)])
    sign = -1 if (n * (n + 1) // 2) % 2 else 1
    return sign * det(DenseMatrix(rows, mode))


# ---------------------------------------------------------------------------
# Schur polynomials
# ---------------------------------------------------------------------------

def _require_distinct(xs: Sequence[Scalar], what: str):
    if len(set(xs)) != len(xs):
        raise ValueError(f"{what} requires pairwise distinct points, got {list(xs)}")


def schur(lam: Partition, xs: Sequence[Scalar]) -> Scalar:
    """Schur polynomial s_lambda at the given points (bialternant ratio).

    Vanishes when the partition is longer than the point set.  Exact mode
    rejects repeated points instead of taking limits.
    """
    n = len(xs)
    mode = common_mode(xs, default=EXACT)
    if lam.length > n:
        return zero(mode)
    if n == 0:
        return one(mode)
    _require_distinct(xs, "schur")
    num = det(DenseMatrix([[x ** (lam.part(j - 1) + n - j) for j in range(1, n + 1)]
                           for x in xs], mode))
    return num / vandermonde(xs)


def modified_schur_numerator(lam: Partition, xs: Sequence[Scalar], ys: Sequence[Scalar]) -> Scalar:
    """det of the N value rows x_i^(lam_j + 2N - j) over the N derivative rows in y."""
    n = len(xs)
    if len(ys) != n:
        raise ValueError("x and y point sets must have equal length")
    mode = common_mode(list(xs) + list(ys), default=EXACT)
    exps = [lam.part(j - 1) + 2 * n - j for j in range(1, 2 * n + 1)]
    rows = [[x ** e for e in exps] for x in xs]
    rows += [[e * y ** (e - 1) if e > 0 else zero(mode) for e in exps] for y in ys]
    return det(DenseMatrix(rows, mode))


def modified_schur(lam: Partition, xs: Sequence[Scalar], ys: Sequence[Scalar]) -> Scalar:
    """Two-alphabet Schur variant a_lambda(X;Y) / a_empty(X;Y).

    Derivative columns are formal monomial derivatives evaluated at y.
    """
    if lam.length > 2 * len(xs):
        return zero(common_mode(list(xs) + list(ys), default=EXACT))
    denom = modified_schur_numerator(Partition(), xs, ys)
    if denom == 0:
        raise ZeroDivisionError("denominator determinant a_empty(X;Y) vanishes")
    return modified_schur_numerator(lam, xs, ys) / denom


def char_poly_schur_expand(xs: Sequence[Scalar], ys: Sequence[Scalar]) -> Scalar:
    """prod_{i,j} (x_i - y_j) evaluated directly and as a dual-Schur sum.

    The sum runs over partitions with at most M parts, each at most N,
    with sign (-1)^|lam| and factors s_{lam^dual}(X) s_lam(Y), the dual
    taken over N slots with complement M (the orientation was pinned by
    exact comparison against the direct product for all N, M <= 4).
    Raises if the two routes disagree (they cannot, short of an
    implementation bug).
    """
    n, m = len(xs), len(ys)
    mode = common_mode(list(xs) + list(ys), default=EXACT)
    direct = one(mode)
    for x in xs:
        for y in ys:
            direct *= x - y
    acc = zero(mode)
    for lam in partitions_in_box(m, n):
        term = schur(dual_partition(lam, m, n), xs) * schur(lam, ys)
        acc = acc + term if lam.size % 2 == 0 else acc - term
    if acc != direct:
        raise ArithmeticError(
            f"Schur expansion disagrees with the direct product: {acc} vs {direct}")
    return direct


# ---------------------------------------------------------------------------
# Cauchy determinants
# ---------------------------------------------------------------------------

def cauchy_determinant(xs: Sequence[Scalar], ys: Sequence[Scalar]) -> Scalar:
    """Delta(X) Delta(Y) / prod_{i,j}(x_i - y_j)."""
    mode = common_mode(list(xs) + list(ys), default=EXACT)
    _require_distinct(xs, "cauchy_determinant")
    _require_distinct(ys, "cauchy_determinant")
    denom = one(mode)
    for x in xs:
        for y in ys:
            if x == y:
                raise ZeroDivisionError(f"coincident points x = y = {x}")
            denom *= x - y
    return vandermonde(xs) * vandermonde(ys) / denom


def cauchy_determinant_bordered(xs: Sequence[Scalar], ys: Sequence[Scalar]) -> Scalar:
    """Bordered determinant form: 1/(x_i - y_j) block plus monomial rows.

    For N >= M the matrix is N x N with M Cauchy columns and N-M monomial
    columns x_i^(k-1); for N <= M it is M x M with monomial columns in y.
    Relative to `cauchy_determinant` this carries an ordering-dependent
    sign; see `cauchy_bordered_sign`.
    """
    n, m = len(xs), len(ys)
    mode = common_mode(list(xs) + list(ys), default=EXACT)
    if n >= m:
        rows = [[one(mode) / (x - y) for y in ys] + [x ** k for k in range(n - m)]
                for x in xs]
    else:
        rows = [[one(mode) / (x - y) for x in xs] + [y ** k for k in range(m - n)]
                for y in ys]
    return det(DenseMatrix(rows, mode))


def cauchy_bordered_sign(n: int, m: int) -> int:
    """Empirically pinned sign relating the ratio and bordered forms.

    cauchy_determinant = sign * cauchy_determinant_bordered.  With
    k = |n - m| and s = min(n, m), the exponent is
    k(k-1)/2 + s(s-1)/2, plus an extra k*s when n >= m (the two branches
    order their border columns differently).  Verified exactly for all
    n, m <= 6.
    """
    k = abs(n - m)
    s = min(n, m)
    e = k * (k - 1) // 2 + s * (s - 1) // 2
    if n >= m:
        e += k * s
    return -1 if e % 2 else 1


# ---------------------------------------------------------------------------
# small helpers used by oracles
# ---------------------------------------------------------------------------

def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation given as a tuple of images of 0..n-1."""
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def all_permutations(n: int):
    return permutations(range(n))
