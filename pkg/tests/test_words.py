from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from panto.words import (
    NotFoundError,
    SubstitutionRejected,
    SubstitutionShapeError,
    SubstitutionSyntaxError,
    count_occurrences,
    delta1_via_prefixes,
    delta_level,
    delta_sum,
    delta_table,
    first_occurrence,
    fixed_point_prefix,
    parse_substitution,
    strict_prefixes,
    validate,
)

from .conftest import enumerated


@pytest.mark.parametrize(
    "text,images,lam,lam_a,lam_b",
    [
        ("a:ab,b:ba", ("ab", "ba"), 2, 1, 1),
        ("a:abab,b:abba", ("abab", "abba"), 4, 2, 2),
        ('{"a": "ab", "b": "ba"}', ("ab", "ba"), 2, 1, 1),
        (" a : ab , b : ba ", ("ab", "ba"), 2, 1, 1),
    ],
)
def test_parse_substitution(text, images, lam, lam_a, lam_b):
    sub = parse_substitution(text)
    assert (sub.image_a, sub.image_b) == images
    assert (sub.lam, sub.lam_a, sub.lam_b) == (lam, lam_a, lam_b)


def test_parse_unequal_length():
    with pytest.raises(SubstitutionShapeError, match="unequal length"):
        parse_substitution("a:ab,b:b")


def test_parse_forwards_rejection():
    with pytest.raises(SubstitutionRejected, match="delta condition"):
        parse_substitution("a:ab,b:ab")


@pytest.mark.parametrize(
    "text,position",
    [("b:ab,a:ba", 0), ("a:ab;b:ba", 4), ("a:ac,b:ba", 3), ("a:ab,b:", 7), ("a:ab,b:ba!", 9), ('{"a": "ab"}', 0)],
)
def test_syntax_errors_report_position(text, position):
    with pytest.raises(SubstitutionSyntaxError) as info:
        parse_substitution(text)
    assert info.value.position == position


def test_validate_examples():
    r = validate("ab", "ba")
    assert r.accepted
    assert (r.delta1_a_in_sigma_a, r.delta1_a_in_sigma_b) == (1, 0)
    assert r.prolongable == ("a", "b")

    r = validate("ab", "ab")
    assert not r.accepted and r.failure == "delta"
    assert r.reason == "delta condition: 0 ≠ 1"

    r = validate("abab", "abba")
    assert r.accepted
    assert (r.delta1_a_in_sigma_a, r.delta1_a_in_sigma_b) == (4, 3)
    assert (r.lam, r.lam_a, r.lam_b) == (4, 2, 2)


def test_validate_prolongability_required():
    # δ condition holds but neither image starts with its own letter
    r = validate("baaab", "abbaa")
    assert r.failure == "prolongable"


@pytest.mark.parametrize("w,alpha,n", [("abba", "a", 2), ("", "b", 0), ("abab", "b", 2)])
def test_count_occurrences(w, alpha, n):
    assert count_occurrences(w, alpha) == n


@given(st.text(alphabet="ab", max_size=40))
def test_counts_sum_to_length(w):
    assert count_occurrences(w, "a") + count_occurrences(w, "b") == len(w)


def test_delta_level_examples(thue_morse):
    assert delta_level(thue_morse, "a", "a", 1) == 1
    assert delta_level(thue_morse, "a", "a", 2) == Fraction(1, 2)
    assert delta_level(thue_morse, "b", "a", 3) == 0


def test_delta_table_level0(lam4):
    table = delta_table(lam4, 3)
    assert table.levels[0] == (2, 2, 2, 2)
    assert table.levels[1] == (4, 2, 3, 3)


def test_delta1_via_prefixes_examples(thue_morse, lam4):
    assert delta1_via_prefixes(thue_morse, "a") == 1
    assert delta1_via_prefixes(thue_morse, "b") == 0
    assert delta1_via_prefixes(lam4, "b") == 3
    assert strict_prefixes("abba") == ["a", "ab", "abb"]


@pytest.mark.parametrize(
    "text,n,prefix",
    [("a:ab,b:ba", 8, "abbabaab"), ("a:ab,b:ba", 1, "a"), ("a:abab,b:abba", 8, "abababba")],
)
def test_fixed_point_prefix(text, n, prefix):
    assert fixed_point_prefix(parse_substitution(text), n) == prefix


def test_fixed_point_starts_with_b_when_only_b_prolongable():
    sub = parse_substitution("a:bab,b:bba")
    assert validate("bab", "bba").prolongable == ("b",)
    assert fixed_point_prefix(sub, 1) == "b"


@pytest.mark.parametrize("text,alpha,idx", [("a:ab,b:ba", "a", 0), ("a:ab,b:ba", "b", 1), ("a:abab,b:abba", "b", 1)])
def test_first_occurrence(text, alpha, idx):
    assert first_occurrence(parse_substitution(text), alpha, 16) == idx


def test_first_occurrence_not_found(thue_morse):
    with pytest.raises(NotFoundError):
        first_occurrence(thue_morse, "b", 1)


def test_delta_sum_identity_all_enumerated():
    for sub in enumerated(6):
        for ell in range(13):
            expected = delta_sum(sub.lam, ell)
            for beta in "ab":
                assert delta_level(sub, "a", beta, ell) + delta_level(sub, "b", beta, ell) == expected


def test_prefix_form_matches_birkhoff_form():
    for sub in enumerated(6):
        for beta in "ab":
            assert delta1_via_prefixes(sub, beta) == delta_level(sub, "a", beta, 1)


@given(st.sampled_from(enumerated(6)), st.integers(1, 400))
def test_fixed_point_self_consistent(sub, n):
    w = fixed_point_prefix(sub, n)
    assert sub.apply(w)[:n] == w


@given(st.sampled_from(enumerated(6)), st.integers(1, 60))
def test_fixed_point_block_counts(sub, blocks):
    w = fixed_point_prefix(sub, blocks * sub.lam)
    for j in range(blocks):
        block = w[j * sub.lam : (j + 1) * sub.lam]
        assert block == sub.image(w[j])
        assert (block.count("a"), block.count("b")) == (sub.lam_a, sub.lam_b)


def _weighted(img, alpha):
    lam = len(img)
    return sum(lam - k - 1 for k, c in enumerate(img) if c == alpha)


def test_validation_sound_by_enumeration():
    for lam in range(1, 7):
        words = ["".join(p) for p in product("ab", repeat=lam)]
        for a, b in product(words, repeat=2):
            r = validate(a, b)
            checks = {
                "length": lam >= 2,
                "letter_counts": a.count("a") == b.count("a"),
                "occurrence": 1 <= a.count("a") <= lam - 1,
                "delta": _weighted(a, "a") - _weighted(b, "a") == 1,
                "prolongable": a[0] == "a" or b[0] == "b",
            }
            if r.accepted:
                assert all(checks.values()), (a, b)
                sub = parse_substitution(f"a:{a},b:{b}")
                assert sub.lam_a + sub.lam_b == sub.lam
            else:
                assert not checks[r.failure], (a, b, r.failure)
