import json
import random
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from panto.evaluator import GridPoint, tabulate
from panto.moments import BoundaryData, compute_moments
from panto.verifier import (
    CaseResult,
    ResidualReport,
    SuiteConfig,
    depth_sweep,
    equation_residual,
    expansion_check,
    expansion_coefficients,
    identity_failures,
    identity_suite,
    linearity_check,
    moment_quadrature_check,
    random_rational,
    remainder_oracle,
    required_extent,
    run_suites,
    vk_numeric,
    vk_oracle,
    zero_solution_check,
)
from panto.evaluator import vk_coefficient
from panto.words import SubstitutionRejected, parse_substitution

from .conftest import enumerated


@pytest.fixture(scope="module")
def tm10():
    return tabulate(parse_substitution("a:ab,b:ba"), BoundaryData(0, 1), 10, 2)


def test_equation_residual_zero_boundary():
    g = tabulate(parse_substitution("a:ab,b:ba"), BoundaryData(0, 0), 4, 2)
    assert equation_residual(g, GridPoint(0, 1), GridPoint(0, 0)) == 0


def test_equation_residual_tm(tm10):
    assert equation_residual(tm10, tm10.locate(1), tm10.locate(0)) < Decimal("1e-3")


def test_equation_residual_trend():
    sub = parse_substitution("a:ab,b:ba")
    x, y = Fraction(3, 4), Fraction(1, 4)
    res = []
    for d in (6, 8, 10):
        g = tabulate(sub, BoundaryData(0, 1), d, 2)
        res.append(equation_residual(g, g.locate(x), g.locate(y)))
    assert res[0] > res[1] > res[2] > 0


def test_equation_residual_range(tm10):
    with pytest.raises(IndexError):
        equation_residual(tm10, tm10.locate(2), tm10.locate(0))


def test_lam4_candidate_is_not_a_solution():
    # Residuals settle on nonzero limits instead of vanishing: the (0,1)
    # boundary data do not lie on the solution line for this substitution.
    sub = parse_substitution("a:abab,b:abba")
    res = []
    for d in (3, 4, 5):
        g = tabulate(sub, BoundaryData(0, 1), d, 4)
        res.append(float(equation_residual(g, g.locate(1), g.locate(0))))
    assert min(res) > 1.5
    assert abs(res[2] - res[1]) < abs(res[1] - res[0]) < 1e-3


@pytest.mark.parametrize("ell,mt", [(0, 1), (1, Fraction(1, 2))])
def test_moment_quadrature_examples(tm10, ell, mt):
    table = compute_moments(tm10.sub, tm10.boundary, 3)
    assert table.mt("a", ell) == mt
    assert moment_quadrature_check(tm10, table, ell, "a") < Decimal("1e-4")


def test_moment_quadrature_zero():
    sub = parse_substitution("a:abab,b:abba")
    g = tabulate(sub, BoundaryData(0, 0), 3, required_extent(sub))
    table = compute_moments(sub, BoundaryData(0, 0), 3)
    assert all(moment_quadrature_check(g, table, ell, a) == 0 for ell in range(4) for a in "ab")


def test_moment_quadrature_insufficient_extent():
    sub = parse_substitution("a:ab,b:ba")
    g = tabulate(sub, BoundaryData(0, 1), 3, 1)
    with pytest.raises(IndexError):
        moment_quadrature_check(g, compute_moments(sub, g.boundary, 1), 0, "b")


@pytest.mark.parametrize("ell,k,lam,tol", [(0, 0, 2, 1e-12), (1, 1, 2, 1e-9), (3, 2, 3, 1e-9)])
def test_vk_oracle_examples(ell, k, lam, tol):
    assert vk_oracle(ell, k, lam, 512) < Decimal(repr(tol))


def test_vk_trapezoid_refinement():
    # k <= 1 integrands are affine, so trapezoid is exact up to roundoff;
    # from k = 2 on the error is O(h²) and must shrink at least twofold.
    for lam in (2, 3):
        for ell in range(4):
            for k in range(ell + 1):
                exact = float(vk_coefficient(ell, k, lam))
                errs = [abs(vk_numeric(ell, k, lam, m, rule="trapezoid") - exact) / exact for m in (64, 128, 256)]
                if k <= 1:
                    assert max(errs) < 1e-12
                else:
                    assert errs[0] >= 2 * errs[1] >= 4 * errs[2] > 0


def test_remainder_oracle():
    for lam in (2, 3):
        for ell in range(3):
            numeric, exact = remainder_oracle(ell, lam, 512)
            assert abs(numeric - float(exact)) / float(exact) < 1e-9


def test_expansion_examples():
    assert expansion_coefficients(1, 0, 2) == [4, 4, 1]
    assert expansion_check(1, 0, 2)
    assert expansion_coefficients(0, 4, 5) == [0, 1]
    assert not expansion_check(1, 0, 2, printed=True)


def test_expansion_sweep():
    for lam in range(2, 7):
        for ell in range(7):
            for k in range(lam):
                assert expansion_check(ell, k, lam)


def test_linearity_examples(thue_morse, lam4):
    assert linearity_check(thue_morse, BoundaryData(0, 1), BoundaryData(1, 0), 1, 1, 5)
    p = BoundaryData(Fraction(2, 7), -3)
    assert linearity_check(lam4, p, p, 1, -1, 4)
    rng = random.Random(7)
    for _ in range(3):
        bd = [BoundaryData(random_rational(rng), random_rational(rng)) for _ in range(2)]
        assert linearity_check(lam4, *bd, random_rational(rng), random_rational(rng), 4)


def test_zero_solution_examples(thue_morse, lam4):
    assert zero_solution_check(thue_morse, 8, 10)
    assert zero_solution_check(lam4, 6, 10)


@pytest.mark.slow
def test_zero_solution_enumeration():
    for sub in enumerated(6):
        assert zero_solution_check(sub, 4, 6), str(sub)


def test_identity_suite(thue_morse, lam4):
    assert identity_suite(thue_morse, 12)
    assert identity_suite(lam4, 12)
    assert identity_failures(thue_morse, 12) == []
    with pytest.raises(SubstitutionRejected):
        parse_substitution("a:ab,b:ab")


def test_suite_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(depths=(6, 6))
    with pytest.raises(ValueError):
        SuiteConfig(equation_tolerance=0)


def test_depth_sweep():
    assert depth_sweep(10) == (6, 8, 10)
    assert depth_sweep(4) == (2, 4)


@given(st.lists(st.tuples(st.text(min_size=1, max_size=8), st.floats(0, 10), st.booleans()), max_size=6))
def test_report_json_schema(rows):
    report = ResidualReport([CaseResult(c, 3, Decimal(repr(r)), 1.0, ok, wall_time=0.5) for c, r, ok in rows])
    data = json.loads(report.to_json())
    assert [d["case"] for d in data] == [r[0] for r in rows]
    for d in data:
        assert set(d) == {"case", "depth", "residual", "tolerance", "pass"}
        assert d["residual"] >= 0
    assert report.passed == all(r[2] for r in rows)


def test_run_suites_tm_quick(thue_morse):
    cfg = SuiteConfig(depths=(4, 6, 8), vk_mesh=128, identity_max_level=6, zero_levels=4, linearity_depth=3)
    report = run_suites(thue_morse, ["all"], cfg)
    assert report.passed, report.first_failure()
    assert run_suites(thue_morse, ["all"], cfg).to_json() == report.to_json()


def test_run_suites_printed_fails(thue_morse):
    cfg = SuiteConfig(depths=(4, 6, 8), form="printed")
    assert not run_suites(thue_morse, ["moments"], cfg).passed
    with pytest.raises(ValueError):
        run_suites(thue_morse, ["nope"], cfg)
