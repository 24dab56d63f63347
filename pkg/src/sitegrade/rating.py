"""Scoring, grading, and ranking.

Scores are kept as exact fractions end to end: the satisfied weight sum
over the decided (satisfied or violated) weight sum. Facts a record
does not carry, or carries without a usable value, stay out of both
sums. A record where nothing was decidable has no score at all: it
grades as "–", ranks behind every scored site, and never dilutes an
average.

Thresholds written as decimals in scheme documents are compared as
decimals (Fraction of their string form), so a score of exactly 9/10
meets a 0.9 threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import (
    GRADE_UNDEFINED,
    STATUS_FAILURE,
    STATUS_NOT_APPLICABLE,
    STATUS_SUCCESS,
    CheckResult,
    RatingCriterion,
    RatingScheme,
    ScanRecord,
)

SATISFIED = "satisfied"
VIOLATED = "violated"
NOT_APPLICABLE = "not_applicable"

LIGHT_GREEN = "green"
LIGHT_YELLOW = "yellow"
LIGHT_RED = "red"

_USABLE = (STATUS_SUCCESS, STATUS_FAILURE)


def evaluate_criterion(criterion: RatingCriterion,
                       results: dict[str, CheckResult]) -> str:
    result = results.get(criterion.check_key)
    fact_missing = result is None or result.status == STATUS_NOT_APPLICABLE

    if criterion.predicate == "absent":
        if fact_missing:
            return SATISFIED
        if result.status in _USABLE:
            return VIOLATED
        return NOT_APPLICABLE  # errored: neither proven absent nor present

    if fact_missing or result.status not in _USABLE:
        return NOT_APPLICABLE
    value = result.value
    if criterion.predicate == "equals":
        return SATISFIED if value == criterion.value else VIOLATED
    if criterion.predicate == "at_least":
        if not isinstance(value, int) or isinstance(value, bool):
            return NOT_APPLICABLE
        return SATISFIED if value >= criterion.value else VIOLATED
    if criterion.predicate == "in_set":
        return SATISFIED if value in criterion.value else VIOLATED
    raise ValueError(f"unknown predicate {criterion.predicate!r}")


@dataclass(frozen=True)
class CriterionOutcome:
    check_key: str
    outcome: str
    weight: float
    critical: bool


@dataclass(frozen=True)
class SiteRating:
    score: Fraction | None
    grade: str
    light: str
    flagged_for_review: bool
    outcomes: tuple[CriterionOutcome, ...]

    @property
    def score_float(self) -> float | None:
        return None if self.score is None else float(self.score)


def _decimal(x: float) -> Fraction:
    return Fraction(str(x))


def score_outcomes(criteria: tuple[RatingCriterion, ...],
                   outcomes: tuple[str, ...]) -> Fraction | None:
    satisfied = Fraction(0)
    decided = Fraction(0)
    for criterion, outcome in zip(criteria, outcomes):
        if outcome == NOT_APPLICABLE:
            continue
        weight = Fraction(str(criterion.weight))
        decided += weight
        if outcome == SATISFIED:
            satisfied += weight
    if decided == 0:
        return None
    return satisfied / decided


def to_grade(score: Fraction | None, scheme: RatingScheme) -> str:
    if score is None:
        return GRADE_UNDEFINED
    for position, threshold in enumerate(scheme.grade_thresholds, start=1):
        if score >= _decimal(threshold):
            return str(position)
    return str(len(scheme.grade_thresholds) + 1)


def to_light(score: Fraction | None, scheme: RatingScheme) -> str:
    if score is None:
        return LIGHT_RED
    green, yellow = scheme.light_thresholds
    if score >= _decimal(green):
        return LIGHT_GREEN
    if score >= _decimal(yellow):
        return LIGHT_YELLOW
    return LIGHT_RED


def rate(scheme: RatingScheme, record: ScanRecord) -> SiteRating:
    outcome_names = tuple(evaluate_criterion(c, record.results)
                          for c in scheme.criteria)
    score = score_outcomes(scheme.criteria, outcome_names)
    grade = to_grade(score, scheme)
    light = to_light(score, scheme)
    critical_hit = any(c.critical and o == VIOLATED
                       for c, o in zip(scheme.criteria, outcome_names))
    if critical_hit:
        if grade in (GRADE_UNDEFINED,) or int(grade) < 5:
            grade = "5"
        light = LIGHT_RED
    outcomes = tuple(
        CriterionOutcome(check_key=c.check_key, outcome=o,
                         weight=c.weight, critical=c.critical)
        for c, o in zip(scheme.criteria, outcome_names))
    return SiteRating(score=score, grade=grade, light=light,
                      flagged_for_review=critical_hit, outcomes=outcomes)


@dataclass(frozen=True)
class RankEntry:
    rank: int
    url: str
    registrable_domain: str
    score: Fraction | None

    @property
    def score_float(self) -> float | None:
        return None if self.score is None else float(self.score)


def rank_sites(entries: list[tuple[str, str, Fraction | None]]) -> list[RankEntry]:
    """Competition ranking (1, 1, 3): equal scores share a rank, the next
    distinct score resumes at its list position. Unscored sites all rank
    after every scored one. Order inside a tie is by registrable domain,
    then URL."""
    def sort_key(entry):
        url, domain, score = entry
        return (score is None, -(score if score is not None else 0), domain, url)

    ordered = sorted(entries, key=sort_key)
    ranked: list[RankEntry] = []
    for position, (url, domain, score) in enumerate(ordered, start=1):
        if ranked and ranked[-1].score == score:
            rank = ranked[-1].rank
        else:
            rank = position
        ranked.append(RankEntry(rank=rank, url=url, registrable_domain=domain,
                                score=score))
    return ranked


def average_score(scores: list[Fraction | None]) -> Fraction | None:
    defined = [s for s in scores if s is not None]
    if not defined:
        return None
    return sum(defined, Fraction(0)) / len(defined)
