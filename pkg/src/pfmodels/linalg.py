"""Dense exact/float linear algebra for the skew-symmetric machinery.

Exact determinants use fraction-free Bareiss elimination after clearing
denominators; exact Pfaffians use the analogous fraction-free skew
elimination, where every intermediate entry is a Pfaffian minor of the
cleared matrix, so each division is exact over the integers.  A recursive
first-row expansion is kept as an independent cross-check for small sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .scalars import EXACT, FLOAT, Scalar, common_mode, normalize, one, zero


class LinalgError(ValueError):
    pass


class SingularMatrixError(LinalgError):
    pass


# Relative pivot threshold for singularity detection in float mode.
DEFAULT_PIVOT_RTOL = 1e-12


class DenseMatrix:
    """Rectangular matrix with homogeneous scalar entries (row-major)."""

    __slots__ = ("rows", "nrows", "ncols", "mode")

    def __init__(self, rows: Sequence[Sequence[Scalar]], mode: str | None = None):
        rows = [list(r) for r in rows]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise LinalgError("ragged rows")
        flat = [v for r in rows for v in r]
        if mode is None:
            mode = common_mode(flat, default=EXACT)
        self.rows = [[normalize(v, mode) for v in r] for r in rows]
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        self.mode = mode

    @classmethod
    def zeros(cls, nrows: int, ncols: int, mode: str = EXACT) -> "DenseMatrix":
        z = zero(mode)
        return cls([[z] * ncols for _ in range(nrows)], mode)

    @classmethod
    def identity(cls, n: int, mode: str = EXACT) -> "DenseMatrix":
        m = cls.zeros(n, n, mode)
        for i in range(n):
            m.rows[i][i] = one(mode)
        return m

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def transpose(self) -> "DenseMatrix":
        return DenseMatrix([[self.rows[i][j] for i in range(self.nrows)]
                            for j in range(self.ncols)], self.mode)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "DenseMatrix":
        return DenseMatrix([[self.rows[i][j] for j in col_idx] for i in row_idx], self.mode)

    def hstack(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.nrows != other.nrows:
            raise LinalgError("row count mismatch in hstack")
        return DenseMatrix([self.rows[i] + other.rows[i] for i in range(self.nrows)], self.mode)

    def matmul(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.ncols != other.nrows:
            raise LinalgError("shape mismatch in matmul")
        out = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                acc = zero(self.mode)
                for k in range(self.ncols):
                    acc += self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            out.append(row)
        return DenseMatrix(out, self.mode)

    def scaled(self, c: Scalar) -> "DenseMatrix":
        c = normalize(c, self.mode)
        return DenseMatrix([[c * v for v in r] for r in self.rows], self.mode)

    def __eq__(self, other):
        return (isinstance(other, DenseMatrix) and self.mode == other.mode
                and self.rows == other.rows)

    def __repr__(self):
        return f"DenseMatrix({self.rows!r})"


class SkewMatrix:
    """Skew-symmetric matrix stored as its strict upper triangle.

    Entry (i, j) with i < j is read from storage; (j, i) is its negative and
    the diagonal is identically zero.  Odd dimension is allowed (Pfaffian 0).
    """

    __slots__ = ("dim", "upper", "mode")

    def __init__(self, dim: int, upper: Sequence[Scalar], mode: str | None = None):
        expected = dim * (dim - 1) // 2
        upper = list(upper)
        if len(upper) != expected:
            raise LinalgError(f"need {expected} strict upper entries for dim {dim}, got {len(upper)}")
        if mode is None:
            mode = common_mode(upper, default=EXACT)
        self.dim = dim
        self.upper = [normalize(v, mode) for v in upper]
        self.mode = mode

    @classmethod
    def from_entry_fn(cls, dim: int, fn, mode: str | None = None) -> "SkewMatrix":
        return cls(dim, [fn(i, j) for i in range(dim) for j in range(i + 1, dim)], mode)

    @classmethod
    def from_dense(cls, m: DenseMatrix, check: bool = True) -> "SkewMatrix":
        if not m.is_square():
            raise LinalgError("skew matrix must be square")
        if check:
            for i in range(m.nrows):
                if m.rows[i][i] != 0:
                    raise LinalgError("nonzero diagonal in skew matrix")
                for j in range(i + 1, m.ncols):
                    if m.rows[i][j] != -m.rows[j][i]:
                        raise LinalgError("matrix is not skew-symmetric")
        return cls(m.nrows, [m.rows[i][j] for i in range(m.nrows)
                             for j in range(i + 1, m.ncols)], m.mode)

    @classmethod
    def zeros(cls, dim: int, mode: str = EXACT) -> "SkewMatrix":
        return cls(dim, [zero(mode)] * (dim * (dim - 1) // 2), mode)

    def _offset(self, i: int, j: int) -> int:
        # storage index of (i, j), i < j
        return i * (2 * self.dim - i - 1) // 2 + (j - i - 1)

    def __getitem__(self, ij):
        i, j = ij
        if i == j:
            return zero(self.mode)
        if i < j:
            return self.upper[self._offset(i, j)]
        return -self.upper[self._offset(j, i)]

    def to_dense(self) -> DenseMatrix:
        return DenseMatrix([[self[i, j] for j in range(self.dim)]
                            for i in range(self.dim)], self.mode)

    def principal(self, idx: Sequence[int]) -> "SkewMatrix":
        """Principal submatrix on rows/columns `idx` (ascending order expected)."""
        idx = list(idx)
        return SkewMatrix(len(idx), [self[idx[a], idx[b]] for a in range(len(idx))
                                     for b in range(a + 1, len(idx))], self.mode)

    def swap(self, i: int, j: int) -> "SkewMatrix":
        """Simultaneous row and column swap (flips the Pfaffian sign)."""
        d = self.to_dense()
        d.rows[i], d.rows[j] = d.rows[j], d.rows[i]
        for r in d.rows:
            r[i], r[j] = r[j], r[i]
        return SkewMatrix.from_dense(d, check=False)

    def __repr__(self):
        return f"SkewMatrix(dim={self.dim}, upper={self.upper!r})"


def skew_from_blocks(a: SkewMatrix, b: DenseMatrix, a2: SkewMatrix) -> SkewMatrix:
    """Assemble [[a, b], [-b^T, a2]]."""
    if b.nrows != a.dim or b.ncols != a2.dim:
        raise LinalgError("incompatible block shapes")
    n, m = a.dim, a2.dim

    def entry(i, j):
        if i < n and j < n:
            return a[i, j]
        if i < n <= j:
            return b[i, j - n]
        if j < n <= i:
            return -b[j, i - n]
        return a2[i - n, j - n]

    return SkewMatrix.from_entry_fn(n + m, entry)


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------

def _clear_denominators(rows: list[list[Fraction]]) -> tuple[list[list[int]], Fraction]:
    """Scale the whole matrix to integers; returns (int rows, scale factor)."""
    lcm = 1
    for r in rows:
        for v in r:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    out = [[int(v * lcm) for v in r] for r in rows]
    return out, Fraction(lcm)


def _det_bareiss_int(a: list[list[int]]) -> int:
    n = len(a)
    a = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _det_float(rows: list[list[float]], rtol: float) -> float:
    n = len(rows)
    a = [row[:] for row in rows]
    scale = max((abs(v) for r in a for v in r), default=0.0)
    if scale == 0.0:
        return 0.0
    det = 1.0
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        if abs(a[p][k]) <= rtol * scale:
            return 0.0
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k + 1, n):
                a[i][j] -= f * a[k][j]
    return det


def det(m: DenseMatrix, rtol: float = DEFAULT_PIVOT_RTOL) -> Scalar:
    """Determinant: fraction-free Bareiss (exact) or partial-pivot LU (float)."""
    if not m.is_square():
        raise LinalgError(f"determinant of non-square {m.nrows}x{m.ncols} matrix")
    if m.nrows == 0:
        return one(m.mode)
    if m.mode == EXACT:
        ints, lcm = _clear_denominators(m.rows)
        return Fraction(_det_bareiss_int(ints)) / lcm ** m.nrows
    return _det_float(m.rows, rtol)


def det_cofactor(m: DenseMatrix) -> Scalar:
    """Brute-force cofactor expansion; independent oracle for small sizes."""
    if not m.is_square():
        raise LinalgError("determinant of non-square matrix")
    n = m.nrows
    if n == 0:
        return one(m.mode)
    if n == 1:
        return m.rows[0][0]
    acc = zero(m.mode)
    cols = list(range(1, n))
    for i in range(n):
        minor = m.submatrix([r for r in range(n) if r != i], cols)
        term = m.rows[i][0] * det_cofactor(minor)
        acc = acc + term if i % 2 == 0 else acc - term
    return acc


# ---------------------------------------------------------------------------
# Pfaffians
# ---------------------------------------------------------------------------

def _pf_fraction_free_int(a: list[list[int]]) -> int:
    """Pfaffian of an integer skew matrix by fraction-free skew elimination.

    After processing pivot pair (k, k+1) every remaining entry equals the
    Pfaffian minor on rows/columns (0..k+1, i, j); the Sylvester-type
    identity makes the division by the previous pivot exact.
    """
    n = len(a)
    if n % 2 == 1:
        return 0
    if n == 0:
        return 1
    a = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(0, n - 2, 2):
        if a[k][k + 1] == 0:
            for j in range(k + 2, n):
                if a[k][j] != 0:
                    # simultaneous swap of rows/cols k+1 and j
                    a[k + 1], a[j] = a[j], a[k + 1]
                    for row in a:
                        row[k + 1], row[j] = row[j], row[k + 1]
                    sign = -sign
                    break
            else:
                return 0  # whole row k is zero
        piv = a[k][k + 1]
        for i in range(k + 2, n):
            for j in range(i + 1, n):
                val = (piv * a[i][j] - a[k][i] * a[k + 1][j] + a[k][j] * a[k + 1][i]) // prev
                a[i][j] = val
                a[j][i] = -val
        prev = piv
    return sign * a[n - 2][n - 1]


def _pf_float(m: SkewMatrix, rtol: float) -> float:
    n = m.dim
    if n % 2 == 1:
        return 0.0
    if n == 0:
        return 1.0
    a = [row[:] for row in m.to_dense().rows]
    scale = max((abs(v) for r in a for v in r), default=0.0)
    if scale == 0.0:
        return 0.0
    pf = 1.0
    for k in range(0, n - 2, 2):
        p = max(range(k + 1, n), key=lambda j: abs(a[k][j]))
        if abs(a[k][p]) <= rtol * scale:
            return 0.0
        if p != k + 1:
            a[k + 1], a[p] = a[p], a[k + 1]
            for row in a:
                row[k + 1], row[p] = row[p], row[k + 1]
            pf = -pf
        piv = a[k][k + 1]
        pf *= piv
        for i in range(k + 2, n):
            for j in range(i + 1, n):
                val = a[i][j] + (a[k + 1][i] * a[k][j] - a[k][i] * a[k + 1][j]) / piv
                a[i][j] = val
                a[j][i] = -val
    return pf * a[n - 2][n - 1]


def pf(m: SkewMatrix, rtol: float = DEFAULT_PIVOT_RTOL) -> Scalar:
    """Pfaffian; odd dimension gives 0, the empty matrix gives 1."""
    if m.dim % 2 == 1:
        return zero(m.mode)
    if m.dim == 0:
        return one(m.mode)
    if m.mode == EXACT:
        ints, lcm = _clear_denominators(m.to_dense().rows)
        skew_ints = [[ints[i][j] for j in range(m.dim)] for i in range(m.dim)]
        return Fraction(_pf_fraction_free_int(skew_ints)) / lcm ** (m.dim // 2)
    return _pf_float(m, rtol)


def pf_recursive(m: SkewMatrix) -> Scalar:
    """First-row Pfaffian expansion; independent oracle for dim <= 8."""
    n = m.dim
    if n % 2 == 1:
        return zero(m.mode)
    if n == 0:
        return one(m.mode)
    acc = zero(m.mode)
    rest = list(range(1, n))
    for t, j in enumerate(rest):
        sub = m.principal([k for k in rest if k != j])
        term = m[0, j] * pf_recursive(sub)
        acc = acc + term if t % 2 == 0 else acc - term
    return acc


# ---------------------------------------------------------------------------
# inverses
# ---------------------------------------------------------------------------

def inverse(m: DenseMatrix, rtol: float = DEFAULT_PIVOT_RTOL) -> DenseMatrix:
    """Gauss-Jordan inverse (exact or partial-pivot float)."""
    if not m.is_square():
        raise LinalgError("inverse of non-square matrix")
    n = m.nrows
    a = [row[:] for row in m.rows]
    inv = DenseMatrix.identity(n, m.mode).rows
    scale = max((abs(v) for r in a for v in r), default=0.0)
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        bad = (a[p][k] == 0) if m.mode == EXACT else (scale == 0.0 or abs(a[p][k]) <= rtol * scale)
        if bad:
            raise SingularMatrixError(f"singular matrix (pivot column {k})")
        if p != k:
            a[k], a[p] = a[p], a[k]
            inv[k], inv[p] = inv[p], inv[k]
        piv = a[k][k]
        a[k] = [v / piv for v in a[k]]
        inv[k] = [v / piv for v in inv[k]]
        for i in range(n):
            if i == k:
                continue
            f = a[i][k]
            if f == 0:
                continue
            a[i] = [x - f * y for x, y in zip(a[i], a[k])]
            inv[i] = [x - f * y for x, y in zip(inv[i], inv[k])]
    return DenseMatrix(inv, m.mode)


# ---------------------------------------------------------------------------
# block factorization and expansion identities
# ---------------------------------------------------------------------------

@dataclass
class PfBlockFactorization:
    """Three routes to the Pfaffian of [[a, b], [-b^T, a2]].

    `via_first` uses a^{-1}, `via_second` uses a2^{-1}; either is None when
    the corresponding block is singular (`notes` says which).
    """

    direct: Scalar
    via_first: Optional[Scalar]
    via_second: Optional[Scalar]
    notes: tuple[str, ...] = ()


def _congruence_schur(inner: SkewMatrix, b: DenseMatrix) -> SkewMatrix:
    """b_or_bT @ inner @ (b_or_bT)^T as a SkewMatrix."""
    prod = b.matmul(inner.to_dense()).matmul(b.transpose())
    return SkewMatrix.from_dense(prod, check=False)


def pf_block_factor(a: SkewMatrix, b: DenseMatrix, a2: SkewMatrix) -> PfBlockFactorization:
    """Pfaffian block factorization of [[a, b], [-b^T, a2]].

    Returns the directly computed Pfaffian together with
    Pf(a) * Pf(a2 + b^T a^{-1} b) and Pf(a2) * Pf(a + b a2^{-1} b^T);
    the three agree whenever the needed inverses exist.
    """
    if a.dim % 2 or a2.dim % 2:
        raise LinalgError("block dimensions must be even")
    if b.nrows != a.dim or b.ncols != a2.dim:
        raise LinalgError("middle block has incompatible shape")
    direct = pf(skew_from_blocks(a, b, a2))
    notes: list[str] = []
    via_first = via_second = None
    try:
        ainv = SkewMatrix.from_dense(inverse(a.to_dense()), check=False)
        via_first = pf(a) * pf(_add_skew(a2, _congruence_schur(ainv, b.transpose())))
    except SingularMatrixError:
        notes.append("first block singular: Pf(a) * Pf(a2 + b^T a^-1 b) unavailable")
    try:
        a2inv = SkewMatrix.from_dense(inverse(a2.to_dense()), check=False)
        via_second = pf(a2) * pf(_add_skew(a, _congruence_schur(a2inv, b)))
    except SingularMatrixError:
        notes.append("second block singular: Pf(a2) * Pf(a + b a2^-1 b^T) unavailable")
    return PfBlockFactorization(direct, via_first, via_second, tuple(notes))


def congruence(b: DenseMatrix, m: SkewMatrix) -> SkewMatrix:
    """b @ m @ b^T (b need not be square; result is skew)."""
    if b.ncols != m.dim:
        raise LinalgError("shape mismatch in congruence")
    return _congruence_schur(m, b)


def _add_skew(x: SkewMatrix, y: SkewMatrix) -> SkewMatrix:
    if x.dim != y.dim:
        raise LinalgError("dimension mismatch")
    return SkewMatrix(x.dim, [u + v for u, v in zip(x.upper, y.upper)])


def laplace_block(z: SkewMatrix, w: DenseMatrix) -> SkewMatrix:
    """The block matrix [[z, w], [-w^T, 0]] the Laplace-type expansion equals."""
    return skew_from_blocks(z, w, SkewMatrix.zeros(w.ncols, w.mode))


def pf_laplace_expansion(z: SkewMatrix, w: DenseMatrix) -> Scalar:
    """Subset expansion of Pf [[z, w], [-w^T, 0]].

    Sums (-1)^(Sigma(I) + m(m-1)/2) Pf z(I) det w([m]\\I; [n]) over the
    (m-n)-subsets I of the row set, with 1-based positions in Sigma(I).
    """
    m, n = z.dim, w.ncols
    if w.nrows != m:
        raise LinalgError("w must have as many rows as z")
    if m <= n:
        raise LinalgError("need m > n")
    if (m - n) % 2:
        raise LinalgError("m - n must be even")
    base = m * (m - 1) // 2
    acc = zero(z.mode)
    all_rows = range(m)
    for subset in combinations(all_rows, m - n):
        sigma = sum(subset) + len(subset)  # 1-based positions
        rest = [i for i in all_rows if i not in subset]
        term = pf(z.principal(subset)) * det(w.submatrix(rest, range(n)))
        acc = acc + term if (sigma + base) % 2 == 0 else acc - term
    return acc


def cauchy_binet_block(z: SkewMatrix, w: DenseMatrix, x: DenseMatrix) -> SkewMatrix:
    """The block matrix [[w z w^T, x], [-x^T, 0]] of the Cauchy-Binet form."""
    return skew_from_blocks(congruence(w, z), x, SkewMatrix.zeros(x.ncols, x.mode))


def pf_cauchy_binet(z: SkewMatrix, w: DenseMatrix, x: DenseMatrix) -> Scalar:
    """Subset expansion of Pf [[w z w^T, x], [-x^T, 0]].

    Sums Pf z(I) det [w(:, I) | x] over the (m-l)-subsets I of the columns
    of w; requires m - l even and m - l <= dim z.  The block ordering used
    here makes the sum carry a global factor (-1)^(l(l-1)/2) relative to the
    block Pfaffian (checked empirically over all parities of l); the value
    returned is the block Pfaffian itself.
    """
    n, m, l = z.dim, w.nrows, x.ncols
    if w.ncols != n:
        raise LinalgError("w must have as many columns as z")
    if x.nrows != m:
        raise LinalgError("x must have as many rows as w")
    if (m - l) % 2:
        raise LinalgError("m - l must be even")
    if m - l > n:
        raise LinalgError("need m - l <= dim z")
    acc = zero(z.mode)
    for subset in combinations(range(n), m - l):
        wp = w.submatrix(range(m), subset)
        block = wp.hstack(x) if l else wp
        acc += pf(z.principal(subset)) * det(block)
    return acc if (l * (l - 1) // 2) % 2 == 0 else -acc
