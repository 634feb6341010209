"""Exact values of the candidate solution at λ-adic points n/λ^j.

Level 0 holds integer points, f(n) = f(0) + Σ_{k<n} m^(0)_{u_k}.  Level ℓ+1 is
accumulated from the increments

    f((n+1)/λ^(ℓ+1)) - f(n/λ^(ℓ+1))
        = Σ_{k=0}^{ℓ} V_k f(n/λ^(ℓ-k)) + λ^(-ℓ(ℓ+1)/2) m̃^(ℓ+1)_{u_n}

with V_k = λ^((k+1)(k/2-ℓ)) / (k+1)!.  Every level stores the same index range
0..X·λ^L, so level j covers the real interval [0, X·λ^(L-j)].
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from math import factorial
from typing import NamedTuple

from .moments import BoundaryData, MomentTable, compute_moments
from .words import Substitution, fixed_point_prefix

DEFAULT_MAX_VALUES = 10**7


class ResourceLimitError(RuntimeError):
    pass


class GridRangeError(IndexError):
    pass


class GridPoint(NamedTuple):
    level: int
    index: int

    def value(self, lam: int) -> Fraction:
        return Fraction(self.index, lam**self.level)


def _exponent(numerator2: int) -> int:
    if numerator2 % 2:
        raise ArithmeticError(f"non-integral λ exponent {numerator2}/2")
    return numerator2 // 2


def vk_coefficient(ell: int, k: int, lam: int) -> Fraction:
    """V_k = λ^((k+1)(k/2-ℓ)) / (k+1)!  for 0 <= k <= ℓ."""
    if not 0 <= k <= ell:
        raise ValueError(f"need 0 <= k <= ell, got k={k}, ell={ell}")
    e = _exponent((k + 1) * (k - 2 * ell))
    power = Fraction(lam**e) if e >= 0 else Fraction(1, lam**-e)
    return power / factorial(k + 1)


def remainder_weight(ell: int, lam: int) -> Fraction:
    return Fraction(1, lam ** _exponent(ell * (ell + 1)))


@dataclass(frozen=True)
class StepCoefficients:
    ell: int
    vk: tuple[Fraction, ...]
    remainder: Fraction


def step_coefficients(ell: int, lam: int) -> StepCoefficients:
    return StepCoefficients(ell, tuple(vk_coefficient(ell, k, lam) for k in range(ell + 1)), remainder_weight(ell, lam))


@dataclass(frozen=True)
class GridTable:
    sub: Substitution
    boundary: BoundaryData
    depth: int
    extent: int
    word: str
    moments: MomentTable
    levels: tuple[tuple[Fraction, ...], ...]

    @property
    def lam(self) -> int:
        return self.sub.lam

    @property
    def size(self) -> int:
        """Largest stored index on every level."""
        return self.extent * self.lam**self.depth

    def finest(self) -> tuple[Fraction, ...]:
        return self.levels[self.depth]

    def locate(self, x) -> GridPoint:
        """Coarsest grid point representing the non-negative rational ``x``."""
        x = Fraction(x)
        if x < 0:
            raise GridRangeError(f"negative point {x}")
        for j in range(self.depth + 1):
            scaled = x * self.lam**j
            if scaled.denominator == 1:
                return GridPoint(j, scaled.numerator)
        raise GridRangeError(f"{x} is not a λ-adic point of level <= {self.depth}")


def _check_covered(grid: GridTable, p: GridPoint) -> None:
    if not 0 <= p.level <= grid.depth:
        raise GridRangeError(f"level {p.level} outside 0..{grid.depth}")
    if not 0 <= p.index <= grid.size:
        raise GridRangeError(f"index {p.index} outside 0..{grid.size} at level {p.level}")


def value_at(grid: GridTable, p: GridPoint) -> Fraction:
    p = GridPoint(*p)
    _check_covered(grid, p)
    return grid.levels[p.level][p.index]


def step_increment(ell: int, n: int, grid: GridTable, coefficients: StepCoefficients | None = None) -> Fraction:
    """f((n+1)/λ^(ℓ+1)) - f(n/λ^(ℓ+1)) from levels 0..ℓ and the moments at level ℓ+1."""
    if len(grid.levels) <= ell:
        raise GridRangeError(f"levels 0..{ell} required, grid has {len(grid.levels)}")
    if grid.moments.depth < ell + 1:
        raise GridRangeError(f"moments to level {ell + 1} required")
    if not 0 <= n < min(len(grid.word), grid.size + 1):
        raise GridRangeError(f"index {n} not covered by the word prefix or grid")
    return _increment(ell, n, grid.levels, grid.word, grid.moments, coefficients or step_coefficients(ell, grid.lam))


def _increment(ell, n, levels, word, moments, coeffs):
    total = sum((v * levels[ell - k][n] for k, v in enumerate(coeffs.vk)), Fraction(0))
    return total + coeffs.remainder * moments.mt(word[n], ell + 1)


def _chunks(count: int, parts: int) -> list[range]:
    parts = max(1, min(parts, count))
    step = -(-count // parts)
    return [range(i, min(i + step, count)) for i in range(0, count, step)]


def default_threads() -> int:
    return int(os.environ.get("PANTO_THREADS", "1"))


def tabulate(
    sub: Substitution,
    boundary: BoundaryData,
    depth: int,
    extent: int,
    *,
    form: str = "derived",
    threads: int | None = None,
    max_values: int = DEFAULT_MAX_VALUES,
) -> GridTable:
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if extent < 1:
        raise ValueError(f"extent must be >= 1, got {extent}")
    lam = sub.lam
    size = extent * lam**depth
    total = (depth + 1) * (size + 1)
    if total > max_values:
        raise ResourceLimitError(f"grid needs {total} stored values, cap is {max_values}")
    threads = threads or default_threads()

    moments = compute_moments(sub, boundary, depth, form)
    word = fixed_point_prefix(sub, size)
    f0 = boundary.f0

    base = [moments.mt(c, 0) for c in word]
    levels: list[tuple[Fraction, ...]] = [tuple(accumulate(base, initial=f0))]

    for ell in range(depth):
        coeffs = step_coefficients(ell, lam)

        def work(span: range, ell=ell, coeffs=coeffs) -> list[Fraction]:
            return [_increment(ell, n, levels, word, moments, coeffs) for n in span]

        spans = _chunks(size, threads)
        if threads > 1 and len(spans) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                pieces = list(pool.map(work, spans))
        else:
            pieces = [work(s) for s in spans]
        increments = [x for piece in pieces for x in piece]
        levels.append(tuple(accumulate(increments, initial=f0)))

    return GridTable(sub, boundary, depth, extent, word, moments, tuple(levels))
