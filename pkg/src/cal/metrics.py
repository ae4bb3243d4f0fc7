"""Inter-rater agreement: Jaccard Index and Cohen's Kappa per category pair.

All arithmetic is exact (fractions.Fraction); rounding happens only in the
rendering helpers. Kappa can be genuinely undefined (no jointly labeled
examples, or degenerate marginals with expected agreement 1); that is
surfaced as the UNDEFINED sentinel, never coerced to a number.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from itertools import combinations

from .config import Category, ProjectConfig
from .errors import KindError, TooFewAnnotatorsError

# kappa value when the statistic does not exist; intentionally JSON null
UNDEFINED = None


def render_percent(fraction: Fraction) -> str:
    """Exact rational -> percentage, one decimal, half-up: 3/8 -> '37.5%'."""
    value = Decimal(fraction.numerator * 100) / Decimal(fraction.denominator)
    return f"{value.quantize(Decimal('0.1'), rounding=ROUND_HALF_UP)}%"


def render_kappa(kappa: Fraction | None) -> str:
    """Two decimals, half-up; the undefined sentinel renders as 'n/a'."""
    if kappa is UNDEFINED:
        return "n/a"
    value = Decimal(kappa.numerator) / Decimal(kappa.denominator)
    return str(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _pair_set(assignments, category_id: str) -> set:
    pairs = set()
    for a in assignments:
        if a.category_id != category_id:
            continue
        for option_id in a.entry.value.options:
            pairs.add((a.example_id, option_id))
    return pairs


def jaccard_agreement(assignments_a, assignments_b, category: Category) -> Fraction:
    """|A ∩ B| / |A ∪ B| over (example, option) pairs; 1 when both sets empty.

    Multi-kind categories contribute one pair per selected option, so partial
    overlap on one example is partial credit, not disagreement.
    """
    a = _pair_set(assignments_a, category.id)
    b = _pair_set(assignments_b, category.id)
    union = a | b
    if not union:
        return Fraction(1)
    return Fraction(len(a & b), len(union))


def _single_labels(assignments, category_id: str) -> dict:
    return {
        a.example_id: a.entry.value.option_id
        for a in assignments
        if a.category_id == category_id and a.entry.value.kind == "single"
    }


def cohens_kappa(assignments_a, assignments_b, category: Category):
    """(p_o - p_e) / (1 - p_e) over the examples labeled by both annotators.

    Returns UNDEFINED when no example is jointly labeled or when the expected
    agreement p_e is 1 (both marginals concentrated on one option). Raises
    KindError for multi and text categories.
    """
    if category.kind != "single":
        raise KindError(category.id, category.kind)
    labels_a = _single_labels(assignments_a, category.id)
    labels_b = _single_labels(assignments_b, category.id)
    common = sorted(labels_a.keys() & labels_b.keys())
    n = len(common)
    if n == 0:
        return UNDEFINED
    agreements = sum(1 for e in common if labels_a[e] == labels_b[e])
    p_o = Fraction(agreements, n)
    options = {labels_a[e] for e in common} | {labels_b[e] for e in common}
    p_e = Fraction(0)
    for option in options:
        marginal_a = Fraction(sum(1 for e in common if labels_a[e] == option), n)
        marginal_b = Fraction(sum(1 for e in common if labels_b[e] == option), n)
        p_e += marginal_a * marginal_b
    if p_e == 1:
        return UNDEFINED
    return (p_o - p_e) / (1 - p_e)


def n_common(assignments_a, assignments_b, category_id: str) -> int:
    examples_a = {a.example_id for a in assignments_a if a.category_id == category_id}
    examples_b = {a.example_id for a in assignments_b if a.category_id == category_id}
    return len(examples_a & examples_b)


@dataclass(frozen=True)
class CategoryAgreement:
    category_id: str
    jaccard: Fraction
    kappa: Fraction | None  # UNDEFINED for multi categories and degenerate data
    n_common: int

    def to_json(self) -> dict:
        return {
            "category_id": self.category_id,
            "jaccard": {
                "fraction": [self.jaccard.numerator, self.jaccard.denominator],
                "percent": render_percent(self.jaccard),
            },
            "kappa": (
                None
                if self.kappa is UNDEFINED
                else {
                    "fraction": [self.kappa.numerator, self.kappa.denominator],
                    "display": render_kappa(self.kappa),
                }
            ),
            "n_common": self.n_common,
        }


@dataclass(frozen=True)
class PairAgreement:
    annotator_a: str
    annotator_b: str
    per_category: tuple  # of CategoryAgreement

    def to_json(self) -> dict:
        return {
            "annotator_a": self.annotator_a,
            "annotator_b": self.annotator_b,
            "per_category": [c.to_json() for c in self.per_category],
        }


@dataclass(frozen=True)
class AgreementReport:
    project_id: str
    pairs: tuple  # of PairAgreement

    def to_json(self) -> dict:
        return {"project_id": self.project_id, "pairs": [p.to_json() for p in self.pairs]}

    def lines(self) -> list[str]:
        out = []
        for pair in self.pairs:
            for row in pair.per_category:
                out.append(
                    f"{pair.annotator_a} x {pair.annotator_b}  "
                    f"{row.category_id:<20} jaccard {render_percent(row.jaccard):>7}  "
                    f"kappa {render_kappa(row.kappa):>5}  n={row.n_common}"
                )
        return out


def agreement_report(project: ProjectConfig, assignments) -> AgreementReport:
    """All annotator pairs (a < b) x all single/multi categories, config order.

    assignments are the project's live label assignments across annotators;
    kappa is UNDEFINED wherever it is refused (multi kind) or degenerate.
    """
    annotators = sorted(project.annotators)
    if len(annotators) < 2:
        raise TooFewAnnotatorsError("agreement needs at least two annotators")
    by_annotator: dict[str, list] = {a: [] for a in annotators}
    for assignment in assignments:
        if assignment.annotator_id in by_annotator:
            by_annotator[assignment.annotator_id].append(assignment)
    categories = [
        cat
        for code_set in project.code_sets
        for cat in code_set.categories
        if cat.kind in ("single", "multi")
    ]
    pairs = []
    for a, b in combinations(annotators, 2):
        rows = []
        for cat in categories:
            kappa = UNDEFINED
            if cat.kind == "single":
                kappa = cohens_kappa(by_annotator[a], by_annotator[b], cat)
            rows.append(
                CategoryAgreement(
                    category_id=cat.id,
                    jaccard=jaccard_agreement(by_annotator[a], by_annotator[b], cat),
                    kappa=kappa,
                    n_common=n_common(by_annotator[a], by_annotator[b], cat.id),
                )
            )
        pairs.append(PairAgreement(annotator_a=a, annotator_b=b, per_category=tuple(rows)))
    return AgreementReport(project_id=project.id, pairs=tuple(pairs))
