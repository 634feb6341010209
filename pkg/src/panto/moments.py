"""Normalized moments of a candidate solution, level by level.

The moments m̃_α^(ℓ) = (1/(ℓ! λ^ℓ)) ∫_0^λ (λ-x)^ℓ f_α(x) dx are pinned down by
the boundary pair (f(0), f(1)) through the relation R(ℓ, α):

    Σ_{q=0}^{ℓ+1} [δ^(ℓ+1-q)_{a∈σ(α)} m̃_a^(q) + δ^(ℓ+1-q)_{b∈σ(α)} m̃_b^(q)]
        = -(λ^(ℓ+1)/(ℓ+1)!) f(0) + λ^ℓ m̃_α^(ℓ)

Each new level j is solved through the weighted sum S = λ_a m̃_a + λ_b m̃_b,
read off R(j-1, a), and the difference D = m̃_a - m̃_b, read off
R(j, a) - R(j, b) where the level-(j+1) terms cancel.

``form="printed"`` swaps in the alternating-sign variant with right-hand side
-(λ^(ℓ+2)/ℓ!) f(0) + λ^(ℓ+1) m̃_α^(ℓ).  It is kept only as a diagnostic: the
tables it produces disagree with direct quadrature of the resulting grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .numerics import exact
from .words import Letter, LETTERS, Substitution, delta_difference, delta_level

FORMS = ("derived", "printed")


@dataclass(frozen=True)
class BoundaryData:
    f0: Fraction
    f1: Fraction

    def __post_init__(self):
        object.__setattr__(self, "f0", exact(self.f0))
        object.__setattr__(self, "f1", exact(self.f1))

    def combine(self, c1, other: "BoundaryData", c2) -> "BoundaryData":
        c1, c2 = exact(c1), exact(c2)
        return BoundaryData(c1 * self.f0 + c2 * other.f0, c1 * self.f1 + c2 * other.f1)


def _sign(form: str, q: int) -> int:
    return -1 if form == "printed" and q % 2 else 1


def _rhs_f0_coef(form: str, lam: int, ell: int) -> Fraction:
    if form == "printed":
        return -Fraction(lam ** (ell + 2), factorial(ell))
    return -Fraction(lam ** (ell + 1), factorial(ell + 1))


def _rhs_moment_coef(form: str, lam: int, ell: int) -> int:
    return lam ** (ell + 1) if form == "printed" else lam**ell


@dataclass(frozen=True)
class MomentTable:
    sub: Substitution
    boundary: BoundaryData
    levels: tuple[tuple[Fraction, Fraction], ...]
    form: str = "derived"

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def mt(self, alpha: Letter, level: int) -> Fraction:
        return self.levels[level][0 if alpha == "a" else 1]

    def column(self, alpha: Letter) -> list[Fraction]:
        i = 0 if alpha == "a" else 1
        return [row[i] for row in self.levels]


def init_moments(boundary: BoundaryData, sub: Substitution, form: str = "derived") -> MomentTable:
    """Level 0: m̃_{u_0} = f(1) - f(0), and λ_a m̃_a + λ_b m̃_b = 0."""
    if form not in FORMS:
        raise ValueError(f"unknown relation form {form!r}")
    start = sub.start_letter
    first = boundary.f1 - boundary.f0
    second = -Fraction(sub.count(start), sub.count("b" if start == "a" else "a")) * first
    row = (first, second) if start == "a" else (second, first)
    return MomentTable(sub, boundary, (row,), form)


def relation_residual(table: MomentTable, ell: int, alpha: Letter, form: str | None = None) -> Fraction:
    """LHS - RHS of R(ℓ, α) evaluated on ``table`` (in the table's own form by default)."""
    if ell < 0:
        raise ValueError("ell must be non-negative")
    if table.depth < ell + 1:
        raise ValueError(f"relation at ell={ell} needs levels 0..{ell + 1}, table has 0..{table.depth}")
    form = form or table.form
    sub, lam = table.sub, table.sub.lam
    lhs = Fraction(0)
    for q in range(ell + 2):
        mt_a, mt_b = table.levels[q]
        lhs += _sign(form, q) * (
            delta_level(sub, "a", alpha, ell + 1 - q) * mt_a + delta_level(sub, "b", alpha, ell + 1 - q) * mt_b
        )
    rhs = _rhs_f0_coef(form, lam, ell) * table.boundary.f0 + _rhs_moment_coef(form, lam, ell) * table.mt(alpha, ell)
    return lhs - rhs


class RelationViolation(AssertionError):
    pass


def extend_moments(table: MomentTable, levels: int) -> MomentTable:
    """Return a table populated through ``levels``; the input is not modified."""
    if levels <= table.depth:
        return MomentTable(table.sub, table.boundary, table.levels[: levels + 1], table.form)
    sub, form = table.sub, table.form
    lam, lam_a, lam_b = sub.lam, sub.lam_a, sub.lam_b
    f0 = table.boundary.f0
    rows = list(table.levels)
    diffs = [a - b for a, b in rows]

    for j in range(len(rows), levels + 1):
        # difference from R(j, a) - R(j, b); the q = j term carries ΔA(1) = 1
        acc = sum(
            (_sign(form, q) * delta_difference(sub, j + 1 - q) * diffs[q] for q in range(j)),
            Fraction(0),
        )
        d = acc / (_rhs_moment_coef(form, lam, j) - _sign(form, j))
        # weighted sum from R(j-1, a)
        acc = sum(
            (
                _sign(form, q) * (delta_level(sub, "a", "a", j - q) * rows[q][0] + delta_level(sub, "b", "a", j - q) * rows[q][1])
                for q in range(j)
            ),
            Fraction(0),
        )
        s = _rhs_f0_coef(form, lam, j - 1) * f0 + _rhs_moment_coef(form, lam, j - 1) * rows[j - 1][0] - acc
        s /= _sign(form, j)
        rows.append(((s + lam_b * d) / lam, (s - lam_a * d) / lam))
        diffs.append(d)

    out = MomentTable(sub, table.boundary, tuple(rows), form)
    if form == "printed":
        # the printed relations are not jointly satisfiable; see form_discrepancy
        return out
    for j in range(table.depth + 1, levels + 1):
        for alpha in LETTERS:
            r = relation_residual(out, j - 1, alpha)
            if r != 0:
                raise RelationViolation(f"R({j - 1}, {alpha}) residual {r} after solving level {j}")
    return out


def compute_moments(sub: Substitution, boundary: BoundaryData, levels: int, form: str = "derived") -> MomentTable:
    return extend_moments(init_moments(boundary, sub, form), levels)


def unnormalize(ell: int, mt: Fraction, lam: int) -> Fraction:
    """m^(ℓ) = ℓ! λ^ℓ m̃^(ℓ)."""
    return factorial(ell) * lam**ell * Fraction(mt)


def first_violation(table: MomentTable, form: str | None = None) -> tuple[int, Letter, Fraction] | None:
    """First (ℓ, α, residual) with a nonzero R(ℓ, α) residual, in (ℓ, a-then-b) order."""
    for ell in range(table.depth):
        for alpha in LETTERS:
            r = relation_residual(table, ell, alpha, form)
            if r != 0:
                return ell, alpha, r
    return None


@dataclass(frozen=True)
class FormDiscrepancy:
    first_differing_level: int | None
    self_violation: tuple[int, Letter, Fraction] | None
    derived_violation: tuple[int, Letter, Fraction] | None

    def describe(self) -> str:
        parts = []
        if self.self_violation is not None:
            ell, alpha, r = self.self_violation
            parts.append(f"printed relation R({ell}, {alpha}) fails on its own table (residual {r})")
        if self.first_differing_level is not None:
            parts.append(f"printed moments differ from derived ones from level {self.first_differing_level}")
        if self.derived_violation is not None:
            ell, alpha, r = self.derived_violation
            parts.append(f"printed table violates derived R({ell}, {alpha}) (residual {r})")
        return "; ".join(parts) or "printed and derived forms agree on all computed levels"


def form_discrepancy(sub: Substitution, boundary: BoundaryData, levels: int) -> FormDiscrepancy:
    """Locate where the printed relation first breaks down for this input."""
    levels = max(levels, 1)
    derived = compute_moments(sub, boundary, levels)
    printed = compute_moments(sub, boundary, levels, form="printed")
    level = next((j for j in range(levels + 1) if derived.levels[j] != printed.levels[j]), None)
    return FormDiscrepancy(level, first_violation(printed), first_violation(printed, "derived"))
