"""Independent brute-force evaluators backing every closed-form result.

Three routes: exact sector integration (sgn-weighted polynomial integrands
over a shared interval, split into ordered simplices where every sgn factor
is constant), exact moment-by-moment polynomial integration over product
measures, and seeded Monte Carlo with a counter-based generator so that
estimates are bit-reproducible and thread-count independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Optional, Sequence

import numpy as np

from .measures import Measure
from .scalars import Scalar

DEGREE_CAP = 24
MC_CHUNK = 1 << 15


class OracleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# multivariate polynomials over Fraction
# ---------------------------------------------------------------------------

class MPoly:
    """Sparse multivariate polynomial: {exponent tuple: Fraction}."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[dict] = None):
        self.nvars = nvars
        self.terms = {}
        for exps, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                self.terms[tuple(exps)] = self.terms.get(tuple(exps), Fraction(0)) + c
        self.terms = {e: c for e, c in self.terms.items() if c != 0}

    @classmethod
    def constant(cls, nvars: int, c) -> "MPoly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "MPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def univariate_in(cls, nvars: int, i: int, coeffs: Sequence) -> "MPoly":
        """Embed a 1-D polynomial (ascending coefficients) in variable i."""
        terms = {}
        for k, c in enumerate(coeffs):
            if c:
                e = [0] * nvars
                e[i] = k
                terms[tuple(e)] = Fraction(c)
        return cls(nvars, terms)

    def __add__(self, other: "MPoly") -> "MPoly":
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return MPoly(self.nvars, terms)

    def __neg__(self) -> "MPoly":
        return MPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MPoly):
            terms: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    terms[e] = terms.get(e, Fraction(0)) + c1 * c2
            return MPoly(self.nvars, terms)
        return MPoly(self.nvars, {e: c * Fraction(other) for e, c in self.terms.items()})

    __rmul__ = __mul__

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def eval_floats(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on rows of xs (shape (n, nvars))."""
        out = np.zeros(xs.shape[0])
        for e, c in self.terms.items():
            term = np.full(xs.shape[0], float(c))
            for i, k in enumerate(e):
                if k:
                    term *= xs[:, i] ** k
            out += term
        return out

    def substitute_value(self, i: int, value: Fraction) -> "MPoly":
        """Fix variable i to a rational value (variable count unchanged)."""
        terms: dict = {}
        for e, c in self.terms.items():
            e2 = list(e)
            k = e2[i]
            e2[i] = 0
            c2 = c * value ** k
            key = tuple(e2)
            terms[key] = terms.get(key, Fraction(0)) + c2
        return MPoly(self.nvars, terms)


def det_mpoly(entries: Sequence[Sequence[MPoly]]) -> MPoly:
    """Determinant of a matrix of MPoly entries by permutation expansion."""
    n = len(entries)
    nv = entries[0][0].nvars if n else 0
    acc = MPoly(nv if n else 0, {})
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        term = MPoly.constant(nv, 1)
        for i in range(n):
            term = term * entries[i][perm[i]]
        acc = acc + (term if sign > 0 else -term)
    return acc


def pf_mpoly(entries: Sequence[Sequence[MPoly]]) -> MPoly:
    """Pfaffian of a skew matrix of MPoly entries by first-row expansion."""
    n = len(entries)
    nv = entries[0][0].nvars if n else 0
    if n % 2 == 1:
        return MPoly(nv, {})
    if n == 0:
        raise OracleError("empty symbolic Pfaffian has no variable count")

    def rec(idx: list[int]) -> MPoly:
        if not idx:
            return MPoly.constant(nv, 1)
        acc = MPoly(nv, {})
        first = idx[0]
        rest = idx[1:]
        for t, j in enumerate(rest):
            sub = [k for k in rest if k != j]
            term = entries[first][j] * rec(sub)
            acc = acc + (term if t % 2 == 0 else -term)
        return acc

    return rec(list(range(n)))


def _perm_sign(perm) -> int:
    seen = [False] * len(perm)
    sign = 1
    for s in range(len(perm)):
        if seen[s]:
            continue
        j, length = s, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# exact sector integration
# ---------------------------------------------------------------------------

@dataclass
class SectorIntegrand:
    """Polynomial times sgn factors, all variables uniform on one interval.

    `sgn_pairs` lists (i, j) contributing sgn(x_i - x_j).  `sector_sign`
    can replace the pair product by any per-ordering sign (used to route
    the sign through an explicit Pfaffian instead of the product formula).
    """

    poly: MPoly
    sgn_pairs: Sequence[tuple[int, int]] = ()
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)
    sector_sign: Optional[Callable[[Sequence[int]], Fraction]] = None
    degree_cap: int = DEGREE_CAP


def _integrate_ordered_simplex(poly: MPoly, order: Sequence[int], a: Fraction, b: Fraction) -> Fraction:
    """Integral over a <= x_order[0] <= x_order[1] <= ... <= x_order[-1] <= b."""
    current = poly
    for step, var in enumerate(order):
        nxt = order[step + 1] if step + 1 < len(order) else None
        # antiderivative in `var`
        anti_terms: dict = {}
        for e, c in current.terms.items():
            e2 = list(e)
            e2[var] += 1
            anti_terms[tuple(e2)] = c / (e[var] + 1)
        anti = MPoly(current.nvars, anti_terms)
        if nxt is None:
            upper = anti.substitute_value(var, b)
        else:
            # substitute var -> x_nxt
            terms: dict = {}
            for e, c in anti.terms.items():
                e2 = list(e)
                k = e2[var]
                e2[var] = 0
                e2[nxt] += k
                terms[tuple(e2)] = terms.get(tuple(e2), Fraction(0)) + c
            upper = MPoly(current.nvars, terms)
        lower = anti.substitute_value(var, a)
        current = upper - lower
    # all variables integrated out
    return current.terms.get((0,) * poly.nvars, Fraction(0))


def exact_sector_integral(s: SectorIntegrand) -> Fraction:
    """Exact integral of poly * prod sgn(x_i - x_j) over [a, b]^N.

    Splits the cube into the N! ordered sectors, where every sgn factor is
    a constant, and integrates the polynomial exactly on each.
    """
    n = s.poly.nvars
    if n > 6:
        raise OracleError("sector integration capped at 6 variables")
    if any(s.poly.degree_in(i) > s.degree_cap for i in range(n)):
        raise OracleError("per-variable degree cap exceeded")
    total = Fraction(0)
    for order in permutations(range(n)):
        # position of each variable in the ordering
        pos = [0] * n
        for p, v in enumerate(order):
            pos[v] = p
        if s.sector_sign is not None:
            sign = Fraction(s.sector_sign(order))
        else:
            sign = Fraction(1)
            for i, j in s.sgn_pairs:
                sign *= 1 if pos[i] > pos[j] else -1
        if sign == 0:
            continue
        total += sign * _integrate_ordered_simplex(s.poly, order, s.a, s.b)
    return total


def exact_poly_integral(poly: MPoly, measures: Sequence[Measure]) -> Fraction:
    """Exact integral of a polynomial over a product of exact measures."""
    if len(measures) != poly.nvars:
        raise OracleError("need one measure per variable")
    if any(poly.degree_in(i) > DEGREE_CAP for i in range(poly.nvars)):
        raise OracleError("per-variable degree cap exceeded")
    total = Fraction(0)
    for e, c in poly.terms.items():
        term = c
        for i, k in enumerate(e):
            term *= measures[i].moment(k)
        total += term
    return total


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass
class MCTask:
    """Seeded Monte Carlo task over a product of interval measures.

    `integrand` maps a sample block of shape (n, nvars) to n values.
    Identical (seed, samples) always produce bit-identical results: the
    stream is chunked, each chunk keyed by (seed, chunk index) through a
    counter-based Philox generator, and chunks are reduced in order.
    """

    integrand: Callable[[np.ndarray], np.ndarray]
    measures: Sequence[Measure]
    samples: int
    seed: int = 0
    chunk: int = MC_CHUNK


@dataclass
class MCResult:
    estimate: float
    stderr: float
    samples: int
    seed: int

    def within_sigma(self, value: float, k: float = 3.0) -> bool:
        band = max(self.stderr * k, 1e-15)
        return abs(self.estimate - float(value)) <= band


def _chunk_samples(task: MCTask, index: int, count: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=(task.seed, index)))
    cols = []
    for mu in task.measures:
        if mu.variant == "discrete":
            pts = np.array([float(p) for p in mu.points])
            wts = np.array([float(w) for w in mu.weights], dtype=float)
            cols.append(gen.choice(pts, size=count, p=wts / wts.sum()))
        else:
            lo, hi = float(mu.a), float(mu.b)
            cols.append(gen.uniform(lo, hi, size=count))
    return np.stack(cols, axis=1)


def mc_integral(task: MCTask, threads: int = 1) -> MCResult:
    """Sample mean and standard error of the integral of the integrand.

    The estimate is mass-weighted (uniform [a, b] counts with weight b - a
    per variable, discrete with its total mass); non-finite integrand
    values abort with the offending sample index.
    """
    mass = 1.0
    for mu in task.measures:
        mass *= float(mu.mass())
    nchunks = (task.samples + task.chunk - 1) // task.chunk

    def eval_chunk(i: int):
        count = min(task.chunk, task.samples - i * task.chunk)
        xs = _chunk_samples(task, i, count)
        vals = task.integrand(xs)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmin(np.isfinite(vals)))
            raise OracleError(f"non-finite sample at index {i * task.chunk + bad}")
        return float(np.sum(vals)), float(np.sum(vals * vals)), count

    results = []
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(eval_chunk, range(nchunks)))
    else:
        results = [eval_chunk(i) for i in range(nchunks)]

    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    n = sum(r[2] for r in results)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return MCResult(estimate=mass * mean, stderr=mass * math.sqrt(var / n),
                    samples=n, seed=task.seed)
