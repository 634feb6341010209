"""Independent checks of the exact pipeline.

Quadrature oracles integrate the tabulated grid (or plain polynomials) and
compare against the exact values; the remaining checks are exact identities.
Each suite returns :class:`CaseResult` rows that are merged, in a fixed case
order, into a :class:`ResidualReport`.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb, factorial
from typing import Callable, Iterable

import numpy as np

from .evaluator import (
    DEFAULT_MAX_VALUES,
    GridPoint,
    GridRangeError,
    GridTable,
    remainder_weight,
    tabulate,
    vk_coefficient,
)
from .moments import BoundaryData, MomentTable, compute_moments, first_violation
from .numerics import Decimal, cumulative_quadrature, definite_quadrature, format_rational, to_decimal, trapezoid
from .words import (
    LETTERS,
    Letter,
    Substitution,
    delta1_via_prefixes,
    delta_level,
    delta_sum,
    first_occurrence,
    validate,
)

SUITES = ("identities", "expansion", "zero", "linearity", "moments", "equation", "vk")


class CostLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class CaseResult:
    case: str
    depth: int | None
    residual: Decimal
    tolerance: float | None
    passed: bool
    wall_time: float = 0.0
    detail: str | None = None

    def as_dict(self) -> dict:
        out = {
            "case": self.case,
            "depth": self.depth,
            "residual": float(self.residual),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class ResidualReport:
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def first_failure(self) -> CaseResult | None:
        return next((c for c in self.cases if not c.passed), None)

    def to_json(self) -> str:
        # wall times stay out of the JSON so repeated runs are byte-identical
        return json.dumps([c.as_dict() for c in self.cases], indent=2)


@dataclass(frozen=True)
class SuiteConfig:
    depths: tuple[int, ...] = (6, 8, 10)
    equation_tolerance: float = 1e-3
    moment_tolerance: float = 1e-4
    vk_tolerance: float = 1e-9
    vk_mesh: int = 512
    vk_max_level: int = 3
    moment_max_level: int = 3
    points: tuple[tuple[Fraction, Fraction], ...] | None = None
    seed: int = 0
    draws: int = 5
    linearity_depth: int = 5
    zero_levels: int = 10
    identity_max_level: int = 12
    expansion_max_level: int = 6
    form: str = "derived"
    threads: int = 1
    max_values: int = DEFAULT_MAX_VALUES

    def __post_init__(self):
        if not self.depths or any(b <= a for a, b in zip(self.depths, self.depths[1:])):
            raise ValueError(f"depths must be non-empty and strictly increasing: {self.depths}")
        if min(self.equation_tolerance, self.moment_tolerance, self.vk_tolerance) <= 0:
            raise ValueError("tolerances must be positive")


def default_points(lam: int) -> tuple[tuple[Fraction, Fraction], ...]:
    """(1, 0), (1 - 1/λ², 1/λ²), (1/λ, 0); for λ = 2 these are (1,0), (3/4,1/4), (1/2,0)."""
    inv2 = Fraction(1, lam * lam)
    return ((Fraction(1), Fraction(0)), (1 - inv2, inv2), (Fraction(1, lam), Fraction(0)))


def depth_sweep(top: int) -> tuple[int, ...]:
    return tuple(sorted({d for d in (top - 4, top - 2, top) if d >= 2} or {max(top, 1)}))


# -- quadrature oracles on the grid -------------------------------------------


def _finest_index(grid: GridTable, x: Fraction) -> int:
    scaled = x * grid.lam**grid.depth
    if scaled.denominator != 1 or not 0 <= scaled <= grid.size:
        raise GridRangeError(f"point {x} not on the finest level of the grid")
    return scaled.numerator


def equation_residual(grid: GridTable, x: GridPoint, y: GridPoint) -> Decimal:
    """|trapezoid ∫_{λy}^{λx} f - (f(x) - f(y))| on the finest-level samples."""
    lam = grid.lam
    xr, yr = GridPoint(*x).value(lam), GridPoint(*y).value(lam)
    i, j = _finest_index(grid, lam * yr), _finest_index(grid, lam * xr)
    fx, fy = grid.finest()[_finest_index(grid, xr)], grid.finest()[_finest_index(grid, yr)]
    samples = grid.finest()
    h = Fraction(1, lam**grid.depth)
    lo, hi = min(i, j), max(i, j)
    integral = trapezoid(samples[lo : hi + 1], h) if hi > lo else Fraction(0)
    if j < i:
        integral = -integral
    return to_decimal(abs(integral - (fx - fy)))


def moment_quadrature(grid: GridTable, ell: int, alpha: Letter) -> Fraction:
    """Trapezoid estimate of m̃_α^(ℓ) over the first block carrying letter α."""
    lam = grid.lam
    n0 = first_occurrence(grid.sub, alpha, max(len(grid.word), 1))
    per_unit = lam**grid.depth
    start, stop = lam * n0 * per_unit, lam * (n0 + 1) * per_unit
    if stop > grid.size:
        raise GridRangeError(f"block [{lam * n0}, {lam * (n0 + 1)}] exceeds grid extent {grid.extent}")
    h = Fraction(1, per_unit)
    samples = [(lam - i * h) ** ell * grid.finest()[start + i] for i in range(stop - start + 1)]
    return trapezoid(samples, h) / (factorial(ell) * lam**ell)


def moment_quadrature_check(grid: GridTable, moments: MomentTable, ell: int, alpha: Letter) -> Decimal:
    return to_decimal(abs(moment_quadrature(grid, ell, alpha) - moments.mt(alpha, ell)))


def required_extent(sub: Substitution) -> int:
    """Smallest extent whose finest level covers the first block of each letter."""
    bound = 2 * sub.lam
    return sub.lam * (max(first_occurrence(sub, a, bound) for a in LETTERS) + 1)


# -- nested-integral oracle for the step coefficients -------------------------


def _nested(inner: np.ndarray, folds: int, top: float, lam: int, mesh: int, rule: str) -> float:
    """∫_0^top ∫_0^{λt} ... g  with ``folds`` inner integrations.

    ``inner`` samples the innermost integrand on [0, λ^folds·top] at mesh+1
    nodes; each cumulative pass maps a variable's grid onto the next outer one
    exactly, because the upper limit λs lands on a node of the inner grid.
    """
    h = lam**folds * top / mesh
    values = inner
    for _ in range(folds):
        values = cumulative_quadrature(values, h, rule)
        h /= lam
    return definite_quadrature(values, h, rule)


def vk_numeric(ell: int, k: int, lam: int, mesh: int, rule: str = "simpson", max_cost: int = 10**8) -> float:
    if not 0 <= k <= ell:
        raise ValueError(f"need 0 <= k <= ell, got k={k}, ell={ell}")
    if mesh < 2:
        raise ValueError("mesh must be >= 2")
    if mesh * (k + 1) > max_cost:
        raise CostLimitError(f"mesh {mesh} with {k + 1} folds exceeds cost cap {max_cost}")
    return _nested(np.ones(mesh + 1), k, float(lam) ** -ell, lam, mesh, rule)


def vk_oracle(ell: int, k: int, lam: int, mesh: int, rule: str = "simpson") -> Decimal:
    """|nested quadrature of V_k (n = 0) - closed form|."""
    numeric = vk_numeric(ell, k, lam, mesh, rule)
    return abs(to_decimal(numeric) - to_decimal(vk_coefficient(ell, k, lam)))


def remainder_oracle(ell: int, lam: int, mesh: int, power: int = 1, rule: str = "simpson") -> tuple[float, Fraction]:
    """Nested quadrature of the remainder term for f(u) = u^power on block 0,
    against λ^(-ℓ(ℓ+1)/2) m̃^(ℓ+1) computed exactly for that f."""
    nodes = np.linspace(0.0, float(lam), mesh + 1)
    numeric = _nested(nodes**power, ell + 1, float(lam) ** -ell, lam, mesh, rule)
    mt = Fraction(lam ** (power + 1) * factorial(power), factorial(ell + power + 2))
    return numeric, remainder_weight(ell, lam) * mt


# -- exact identity checks ----------------------------------------------------


def expansion_coefficients(ell: int, k: int, lam: int, printed: bool = False) -> list[int]:
    """a_{q,k} with (λ² - x - kλ)^(ℓ+1) = Σ_q a_{q,k} (λ - x)^q."""
    n = ell + 1
    c = lam * (lam - k - 1)
    if printed:
        return [comb(n, q) * (-1) ** q * (lam * lam - lam * (k + 1)) ** (n - q) for q in range(n + 1)]
    return [comb(n, q) * c ** (n - q) for q in range(n + 1)]


def expansion_check(ell: int, k: int, lam: int, printed: bool = False) -> bool:
    coeffs = expansion_coefficients(ell, k, lam, printed)
    points = [Fraction(i, 3) for i in range(ell + 2)]
    return all(
        (lam * lam - x - k * lam) ** (ell + 1) == sum(a * (lam - x) ** q for q, a in enumerate(coeffs))
        for x in points
    )


def _tables_equal(left: Iterable, right: Iterable) -> bool:
    return all(a == b for a, b in zip(left, right, strict=True))


def linearity_check(
    sub: Substitution,
    p: BoundaryData,
    q: BoundaryData,
    c1,
    c2,
    depth: int,
    *,
    form: str = "derived",
    threads: int = 1,
) -> bool:
    c1, c2 = Fraction(c1), Fraction(c2)
    combo = p.combine(c1, q, c2)
    gp, gq, gc = (tabulate(sub, b, depth, 1, form=form, threads=threads) for b in (p, q, combo))
    for lp, lq, lc in zip(gp.levels, gq.levels, gc.levels, strict=True):
        if not _tables_equal(lc, (c1 * a + c2 * b for a, b in zip(lp, lq))):
            return False
    for rp, rq, rc in zip(gp.moments.levels, gq.moments.levels, gc.moments.levels, strict=True):
        if not _tables_equal(rc, (c1 * a + c2 * b for a, b in zip(rp, rq))):
            return False
    return True


def zero_solution_check(sub: Substitution, depth: int, levels: int, *, form: str = "derived", threads: int = 1) -> bool:
    zero = BoundaryData(0, 0)
    table = compute_moments(sub, zero, levels, form)
    if any(x != 0 for row in table.levels for x in row):
        return False
    grid = tabulate(sub, zero, depth, 1, form=form, threads=threads)
    return all(v == 0 for level in grid.levels for v in level)


def identity_suite(sub: Substitution, max_level: int) -> bool:
    return not identity_failures(sub, max_level)


def identity_failures(sub: Substitution, max_level: int) -> list[str]:
    failures = []
    for beta in LETTERS:
        if delta1_via_prefixes(sub, beta) != delta_level(sub, "a", beta, 1):
            failures.append(f"prefix form != Birkhoff form for beta={beta}")
    for ell in range(max_level + 1):
        expected = delta_sum(sub.lam, ell)
        for beta in LETTERS:
            if delta_level(sub, "a", beta, ell) + delta_level(sub, "b", beta, ell) != expected:
                failures.append(f"delta sum identity fails at level {ell}, beta={beta}")
    if (delta_level(sub, "a", "a", 0), delta_level(sub, "b", "a", 0)) != (sub.lam_a, sub.lam_b):
        failures.append("level-0 convention")
    return failures


# -- dense-solve oracle for the moment engine ---------------------------------


def dense_moment_oracle(sub: Substitution, boundary: BoundaryData, levels: int) -> list[tuple[Fraction, Fraction]]:
    """Solve the relation instances R(0..levels, a/b) plus the two level-0
    constraints by generic exact elimination; return levels 0..levels.

    The system also involves level ``levels + 1``, whose difference stays free;
    every returned value is checked to be uniquely determined.
    """
    import sympy

    lam = sub.lam
    unknowns = 2 * (levels + 2)

    def col(alpha: Letter, q: int) -> int:
        return 2 * q + (0 if alpha == "a" else 1)

    rows, rhs = [], []
    row = [0] * unknowns
    row[col(sub.start_letter, 0)] = 1
    rows.append(row)
    rhs.append(boundary.f1 - boundary.f0)
    row = [0] * unknowns
    row[col("a", 0)], row[col("b", 0)] = sub.lam_a, sub.lam_b
    rows.append(row)
    rhs.append(Fraction(0))
    for ell in range(levels + 1):
        for alpha in LETTERS:
            row = [Fraction(0)] * unknowns
            for q in range(ell + 2):
                for beta in LETTERS:
                    row[col(beta, q)] += delta_level(sub, beta, alpha, ell + 1 - q)
            row[col(alpha, ell)] -= lam**ell
            rows.append(row)
            rhs.append(-Fraction(lam ** (ell + 1), factorial(ell + 1)) * boundary.f0)

    aug = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x for x in r] + [sympy.Rational(b.numerator, b.denominator)] for r, b in zip(rows, rhs)])
    reduced, pivots = aug.rref()
    if unknowns in pivots:
        raise ArithmeticError("relation system is inconsistent")
    free = [c for c in range(unknowns) if c not in pivots]
    solution: dict[int, Fraction] = {}
    for r, c in enumerate(pivots):
        if all(reduced[r, f] == 0 for f in free):
            v = reduced[r, unknowns]
            solution[c] = Fraction(int(v.p), int(v.q))
    out = []
    for q in range(levels + 1):
        try:
            out.append((solution[col("a", q)], solution[col("b", q)]))
        except KeyError:
            raise ArithmeticError(f"level {q} is not determined by the system") from None
    return out


# -- enumeration harness ------------------------------------------------------


def enumerate_image_pairs(lam: int):
    words = ["".join(p) for p in product("ab", repeat=lam)]
    for a in words:
        for b in words:
            yield a, b


def valid_substitutions(max_lam: int, min_lam: int = 1) -> list[Substitution]:
    return [
        Substitution(a, b)
        for lam in range(min_lam, max_lam + 1)
        for a, b in enumerate_image_pairs(lam)
        if validate(a, b).accepted
    ]


# -- suites -------------------------------------------------------------------


def _timed(fn: Callable[[], CaseResult]) -> CaseResult:
    start = time.perf_counter()
    result = fn()
    return CaseResult(**{**result.__dict__, "wall_time": time.perf_counter() - start})


def _exact_case(case: str, ok: bool, depth: int | None = None, detail: str | None = None) -> CaseResult:
    return CaseResult(case, depth, Decimal(0 if ok else 1), 0.0, ok, detail=detail)


def _non_increasing(values: list[Decimal]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def _converging(values: list[Decimal]) -> bool:
    """Strict decrease at every step, except a residual that is already exactly zero may stay there."""
    return all(b < a or a == b == 0 for a, b in zip(values, values[1:]))


def _fmt_point(x: Fraction) -> str:
    return format_rational(x)


def suite_identities(sub: Substitution, cfg: SuiteConfig) -> list[CaseResult]:
    failures = identity_failures(sub, cfg.identity_max_level)
    return [_exact_case(f"identities[lmax={cfg.identity_max_level}]", not failures, detail="; ".join(failures) or None)]


def suite_expansion(sub: Substitution, cfg: SuiteConfig) -> list[CaseResult]:
    printed = cfg.form == "printed"
    out = []
    for ell in range(cfg.expansion_max_level + 1):
        for k in range(sub.lam):
            ok = expansion_check(ell, k, sub.lam, printed=printed)
            tag = ",printed-signs" if printed else ""
            out.append(_exact_case(f"expansion[l={ell},k={k},lam={sub.lam}{tag}]", ok))
    return out


def suite_zero(sub: Substitution, cfg: SuiteConfig) -> list[CaseResult]:
    depth = cfg.depths[-1]
    ok = zero_solution_check(sub, depth, max(cfg.zero_levels, depth), form=cfg.form, threads=cfg.threads)
    return [_exact_case(f"zero[levels={max(cfg.zero_levels, depth)}]", ok, depth)]


def random_rational(rng: random.Random, span: int = 9) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, span))


def suite_linearity(sub: Substitution, cfg: SuiteConfig) -> list[CaseResult]:
    rng = random.Random(cfg.seed)
    out = []
    for i in range(cfg.draws):
        p = BoundaryData(random_rational(rng), random_rational(rng))
        q = BoundaryData(random_rational(rng), random_rational(rng))
        c1, c2 = random_rational(rng), random_rational(rng)
        ok = linearity_check(sub, p, q, c1, c2, cfg.linearity_depth, form=cfg.form, threads=cfg.threads)
        out.append(_exact_case(f"linearity[draw={i}]", ok, cfg.linearity_depth))
    return out


def suite_moments(sub: Substitution, cfg: SuiteConfig, boundary: BoundaryData) -> list[CaseResult]:
    out = []
    top = cfg.depths[-1]
    table = compute_moments(sub, boundary, max(top, cfg.moment_max_level + 1), cfg.form)
    bad = first_violation(table)
    detail = None if bad is None else f"R({bad[0]}, {bad[1]}) residual {format_rational(bad[2])}"
    out.append(
        CaseResult(
            f"relations[form={cfg.form}]",
            table.depth,
            to_decimal(abs(bad[2])) if bad else Decimal(0),
            0.0,
            bad is None,
            detail=detail,
        )
    )
    extent = required_extent(sub)
    grids = [tabulate(sub, boundary, d, extent, form=cfg.form, threads=cfg.threads, max_values=cfg.max_values) for d in cfg.depths]
    for ell in range(cfg.moment_max_level + 1):
        for alpha in LETTERS:
            residuals = [moment_quadrature_check(g, g.moments, ell, alpha) for g in grids]
            trend = ", ".join(f"{d}:{float(r):.3e}" for d, r in zip(cfg.depths, residuals))
            ok = residuals[-1] < Decimal(repr(cfg.moment_tolerance)) and _non_increasing(residuals)
            out.append(CaseResult(f"moment-quadrature[l={ell},alpha={alpha}]", top, residuals[-1], cfg.moment_tolerance, ok, detail=trend))
    return out


def suite_equation(sub: Substitution, cfg: SuiteConfig, boundary: BoundaryData) -> list[CaseResult]:
    points = cfg.points or default_points(sub.lam)
    lam = sub.lam
    extent = max(1, -(-max(lam * max(x, y) for x, y in points) // 1))
    extent = int(extent)
    grids = [tabulate(sub, boundary, d, extent, form=cfg.form, threads=cfg.threads, max_values=cfg.max_values) for d in cfg.depths]
    out = []
    for x, y in points:
        residuals = [equation_residual(g, g.locate(x), g.locate(y)) for g in grids]
        trend = ", ".join(f"{d}:{float(r):.3e}" for d, r in zip(cfg.depths, residuals))
        ok = residuals[-1] < Decimal(repr(cfg.equation_tolerance)) and _converging(residuals)
        out.append(
            CaseResult(
                f"equation[x={_fmt_point(x)},y={_fmt_point(y)}]",
                cfg.depths[-1],
                residuals[-1],
                cfg.equation_tolerance,
                ok,
                detail=trend,
            )
        )
    return out


def suite_vk(sub: Substitution, cfg: SuiteConfig) -> list[CaseResult]:
    lam = sub.lam
    out = []
    for ell in range(cfg.vk_max_level + 1):
        for k in range(ell + 1):
            exact = vk_coefficient(ell, k, lam)
            rel = vk_oracle(ell, k, lam, cfg.vk_mesh) / to_decimal(exact)
            out.append(CaseResult(f"vk[l={ell},k={k},lam={lam}]", None, rel, cfg.vk_tolerance, rel < Decimal(repr(cfg.vk_tolerance))))
    for ell in range(2):
        numeric, exact = remainder_oracle(ell, lam, cfg.vk_mesh)
        rel = abs(to_decimal(numeric) - to_decimal(exact)) / to_decimal(exact)
        out.append(CaseResult(f"remainder-weight[l={ell},lam={lam}]", None, rel, cfg.vk_tolerance, rel < Decimal(repr(cfg.vk_tolerance))))
    return out


def run_suites(
    sub: Substitution,
    names: Iterable[str],
    cfg: SuiteConfig,
    boundary: BoundaryData | None = None,
) -> ResidualReport:
    """Run the selected suites in canonical order; ``"all"`` selects every suite."""
    names = set(names)
    if "all" in names:
        names = set(SUITES)
    unknown = names - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(sorted(unknown))}")
    boundary = boundary or BoundaryData(0, 1)
    runners = {
        "identities": lambda: suite_identities(sub, cfg),
        "expansion": lambda: suite_expansion(sub, cfg),
        "zero": lambda: suite_zero(sub, cfg),
        "linearity": lambda: suite_linearity(sub, cfg),
        "moments": lambda: suite_moments(sub, cfg, boundary),
        "equation": lambda: suite_equation(sub, cfg, boundary),
        "vk": lambda: suite_vk(sub, cfg),
    }
    report = ResidualReport()
    for name in SUITES:
        if name in names:
            start = time.perf_counter()
            cases = runners[name]()
            elapsed = (time.perf_counter() - start) / max(len(cases), 1)
            report.cases.extend(CaseResult(**{**c.__dict__, "wall_time": elapsed}) for c in cases)
    return report
