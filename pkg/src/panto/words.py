"""Two-letter words and λ-uniform substitutions.

Letters are the one-character strings ``"a"`` and ``"b"``; words are plain
``str``.  A :class:`Substitution` can only be obtained through validation, so
every instance satisfies the standing hypotheses (equal letter counts in both
images, the δ = 1 condition, prolongability).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Literal

from .numerics import factorial

Letter = Literal["a", "b"]
LETTERS: tuple[Letter, Letter] = ("a", "b")

#: conditions whose failure means the input is not even a λ-uniform pair
SHAPE_CONDITIONS = frozenset({"nonempty", "alphabet", "uniform", "length"})


class SubstitutionError(ValueError):
    """Base class for bad substitution input."""


class SubstitutionSyntaxError(SubstitutionError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class SubstitutionShapeError(SubstitutionError):
    def __init__(self, report: "ValidationReport"):
        super().__init__(report.reason)
        self.report = report


class SubstitutionRejected(SubstitutionError):
    def __init__(self, report: "ValidationReport"):
        super().__init__(report.reason)
        self.report = report


def other(letter: Letter) -> Letter:
    return "b" if letter == "a" else "a"


def count_occurrences(w: str, alpha: Letter) -> int:
    return w.count(alpha)


def _weighted_count(image: str, alpha: Letter, level: int) -> Fraction:
    """(1/ℓ!) Σ_k (λ-k-1)^ℓ over positions k of ``alpha``; level 0 is the plain count."""
    lam = len(image)
    total = sum((lam - k - 1) ** level for k, c in enumerate(image) if c == alpha)
    return Fraction(total, factorial(level))


@dataclass(frozen=True)
class ValidationReport:
    image_a: str
    image_b: str
    accepted: bool
    failure: str | None = None
    reason: str = ""
    lam: int | None = None
    lam_a: int | None = None
    lam_b: int | None = None
    delta1_a_in_sigma_a: Fraction | None = None
    delta1_a_in_sigma_b: Fraction | None = None
    prolongable: tuple[Letter, ...] = ()

    def as_dict(self) -> dict:
        def fmt(x):
            return None if x is None else str(x)

        return {
            "image_a": self.image_a,
            "image_b": self.image_b,
            "accepted": self.accepted,
            "failure": self.failure,
            "reason": self.reason,
            "lambda": self.lam,
            "lambda_a": self.lam_a,
            "lambda_b": self.lam_b,
            "delta1_a_in_sigma_a": fmt(self.delta1_a_in_sigma_a),
            "delta1_a_in_sigma_b": fmt(self.delta1_a_in_sigma_b),
            "prolongable": list(self.prolongable),
        }


def validate(image_a: str, image_b: str) -> ValidationReport:
    """Check the standing hypotheses on a raw image pair.

    Conditions are tested in a fixed order and the first failure is named in
    the report.  Rejection is an outcome, never an exception.
    """
    info: dict = {"image_a": image_a, "image_b": image_b}

    def reject(failure: str, reason: str) -> ValidationReport:
        return ValidationReport(accepted=False, failure=failure, reason=reason, **info)

    if not image_a or not image_b:
        return reject("nonempty", "images must be nonempty")
    for name, img in (("a", image_a), ("b", image_b)):
        bad = next((i for i, c in enumerate(img) if c not in LETTERS), None)
        if bad is not None:
            return reject("alphabet", f"image of {name} has letter {img[bad]!r} outside {{a,b}}")
    if len(image_a) != len(image_b):
        return reject(
            "uniform",
            f"images have unequal length ({len(image_a)} != {len(image_b)})",
        )
    lam = len(image_a)
    info["lam"] = lam
    if lam < 2:
        return reject("length", f"uniform length must be >= 2, got {lam}")

    na, nb = image_a.count("a"), image_b.count("a")
    if na != nb:
        return reject("letter_counts", f"letter counts differ: |σ(a)|_a = {na} != |σ(b)|_a = {nb}")
    info["lam_a"], info["lam_b"] = na, lam - na
    if not 1 <= na <= lam - 1:
        return reject("occurrence", f"both letters must occur in each image (λ_a = {na}, λ = {lam})")

    d_aa = _weighted_count(image_a, "a", 1)
    d_ab = _weighted_count(image_b, "a", 1)
    info["delta1_a_in_sigma_a"], info["delta1_a_in_sigma_b"] = d_aa, d_ab
    prolongable = tuple(x for x, img in (("a", image_a), ("b", image_b)) if img[0] == x)
    info["prolongable"] = prolongable
    if d_aa - d_ab != 1:
        return reject("delta", f"delta condition: {d_aa - d_ab} ≠ 1")
    if not prolongable:
        return reject("prolongable", "no image begins with its own letter")
    return ValidationReport(accepted=True, **info)


@dataclass(frozen=True)
class Substitution:
    """A validated λ-uniform substitution on {a, b}; build with :meth:`from_images`."""

    image_a: str
    image_b: str
    lam: int = field(init=False)
    lam_a: int = field(init=False)
    lam_b: int = field(init=False)

    def __post_init__(self):
        report = validate(self.image_a, self.image_b)
        if not report.accepted:
            if report.failure in SHAPE_CONDITIONS:
                raise SubstitutionShapeError(report)
            raise SubstitutionRejected(report)
        object.__setattr__(self, "lam", report.lam)
        object.__setattr__(self, "lam_a", report.lam_a)
        object.__setattr__(self, "lam_b", report.lam_b)

    @classmethod
    def from_images(cls, image_a: str, image_b: str) -> "Substitution":
        return cls(image_a, image_b)

    def image(self, letter: Letter) -> str:
        return self.image_a if letter == "a" else self.image_b

    def count(self, letter: Letter) -> int:
        return self.lam_a if letter == "a" else self.lam_b

    @property
    def start_letter(self) -> Letter:
        """Letter the fixed point starts with (a when both are prolongable)."""
        return "a" if self.image_a[0] == "a" else "b"

    def apply(self, w: str) -> str:
        return "".join(self.image_a if c == "a" else self.image_b for c in w)

    def __str__(self) -> str:
        return f"a:{self.image_a},b:{self.image_b}"


def parse_images(text: str) -> tuple[str, str]:
    """Split ``a:<word>,b:<word>`` (or a JSON object) into the raw image pair."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise SubstitutionSyntaxError(f"invalid JSON: {exc.msg}", exc.pos) from None
        if not isinstance(obj, dict) or set(obj) != {"a", "b"}:
            raise SubstitutionSyntaxError("JSON object must have exactly the keys 'a' and 'b'", 0)
        if not all(isinstance(obj[k], str) for k in LETTERS):
            raise SubstitutionSyntaxError("JSON images must be strings", 0)
        return "".join(obj["a"].split()), "".join(obj["b"].split())

    # whitespace is insignificant; keep a map back to original offsets
    chars = [(i, c) for i, c in enumerate(text) if not c.isspace()]
    s = "".join(c for _, c in chars)

    def pos(k: int) -> int:
        return chars[k][0] if k < len(chars) else len(text)

    images: dict[str, str] = {}
    k = 0
    for expected, sep in (("a", ","), ("b", None)):
        if s[k : k + 2] != f"{expected}:":
            raise SubstitutionSyntaxError(f"expected '{expected}:'", pos(k))
        k += 2
        start = k
        while k < len(s) and s[k] in LETTERS:
            k += 1
        if k == start:
            raise SubstitutionSyntaxError(f"empty or invalid image for '{expected}'", pos(k))
        images[expected] = s[start:k]
        if sep is not None:
            if k >= len(s) or s[k] != sep:
                raise SubstitutionSyntaxError(f"expected '{sep}'", pos(k))
            k += 1
    if k != len(s):
        raise SubstitutionSyntaxError(f"unexpected character {s[k]!r}", pos(k))
    return images["a"], images["b"]


def parse_substitution(text: str) -> Substitution:
    return Substitution(*parse_images(text))


@lru_cache(maxsize=None)
def delta_level(sub: Substitution, alpha: Letter, beta: Letter, level: int) -> Fraction:
    """δ^(ℓ)_{α∈σ(β)}; at level 0 this is the letter count λ_α."""
    if level < 0:
        raise ValueError(f"level must be non-negative, got {level}")
    if level == 0:
        return Fraction(sub.count(alpha))
    return _weighted_count(sub.image(beta), alpha, level)


def delta_difference(sub: Substitution, level: int) -> Fraction:
    """δ^(ℓ)_{a∈σ(a)} - δ^(ℓ)_{a∈σ(b)}."""
    return delta_level(sub, "a", "a", level) - delta_level(sub, "a", "b", level)


@dataclass(frozen=True)
class DeltaTable:
    lam: int
    levels: dict[int, tuple[Fraction, Fraction, Fraction, Fraction]]

    @property
    def max_level(self) -> int:
        return max(self.levels)


def delta_table(sub: Substitution, max_level: int) -> DeltaTable:
    """Rows (δ_{a∈σ(a)}, δ_{b∈σ(a)}, δ_{a∈σ(b)}, δ_{b∈σ(b)}) for ℓ = 0..max_level."""
    levels = {
        lv: (
            delta_level(sub, "a", "a", lv),
            delta_level(sub, "b", "a", lv),
            delta_level(sub, "a", "b", lv),
            delta_level(sub, "b", "b", lv),
        )
        for lv in range(max_level + 1)
    }
    return DeltaTable(sub.lam, levels)


def delta_sum(lam: int, level: int) -> Fraction:
    """(1/ℓ!) Σ_{k<λ} (λ-k-1)^ℓ, shared by both images."""
    return Fraction(sum((lam - k - 1) ** level for k in range(lam)), factorial(level))


def strict_prefixes(w: str) -> list[str]:
    return [w[: k + 1] for k in range(len(w) - 1)]


def delta1_via_prefixes(sub: Substitution, beta: Letter) -> int:
    """Σ over strict prefixes v of σ(β) of |v|_a."""
    return sum(v.count("a") for v in strict_prefixes(sub.image(beta)))


def fixed_point_prefix(sub: Substitution, n: int) -> str:
    if n < 1:
        raise ValueError(f"prefix length must be positive, got {n}")
    w = sub.start_letter
    while len(w) < n:
        w = sub.apply(w)
    return w[:n]


class NotFoundError(LookupError):
    pass


def first_occurrence(sub: Substitution, alpha: Letter, search_bound: int) -> int:
    w = fixed_point_prefix(sub, search_bound)
    idx = w.find(alpha)
    if idx < 0:
        raise NotFoundError(f"letter {alpha!r} not found in the first {search_bound} letters")
    return idx
