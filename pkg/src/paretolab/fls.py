"""Fuzzy linguistic summaries of optimization state.

Statements follow the protoform "Of the Ys that are P, Q are R": a
summarizer P of attribute-term pairs (min t-norm), a quantifier Q
(few/some/many) over a membership-weighted proportion, and a qualifier R
(crisp classification category or fuzzy uncertainty predicate).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgument

DEFAULT_TERMS = ("very small", "small", "medium", "large", "very large")


@dataclass(frozen=True)
class LinguisticVariable:
    """A design attribute with a triangular Ruspini term partition."""

    attribute: str
    domain: tuple[float, float]
    terms: tuple[str, ...] = DEFAULT_TERMS
    label: str | None = None

    def display_name(self) -> str:
        return self.label or self.attribute

    def peaks(self) -> np.ndarray:
        lo, hi = self.domain
        return np.linspace(lo, hi, len(self.terms))

    def membership(self, term: str, x: float) -> float:
        return term_membership(self, term, x)

    def memberships(self, x: float) -> dict[str, float]:
        return {t: term_membership(self, t, x) for t in self.terms}


def term_membership(variable: LinguisticVariable, term: str, x: float) -> float:
    """Triangular membership of one term; x clamped to the domain."""
    if term not in variable.terms:
        raise InvalidArgument(
            f"unknown term {term!r} for attribute {variable.attribute!r}"
        )
    lo, hi = variable.domain
    x = min(max(float(x), lo), hi)
    peaks = variable.peaks()
    i = variable.terms.index(term)
    p = peaks[i]
    if x == p:
        return 1.0
    if x < p:
        if i == 0:
            return 1.0  # left shoulder: clamp already handled
        left = peaks[i - 1]
        return max((x - left) / (p - left), 0.0)
    if i == len(peaks) - 1:
        return 1.0
    right = peaks[i + 1]
    return max((right - x) / (right - p), 0.0)


@dataclass(frozen=True)
class Quantifier:
    """Trapezoidal quantifier over a proportion in [0, 1]."""

    name: str
    trapezoid: tuple[float, float, float, float]

    def membership(self, proportion: float) -> float:
        a, b, c, d = self.trapezoid
        x = float(proportion)
        if x < a or x > d:
            return 0.0
        if b <= x <= c:
            return 1.0
        if x < b:
            return (x - a) / (b - a) if b > a else 1.0
        return (d - x) / (d - c) if d > c else 1.0


FEW = Quantifier("few", (0.0, 0.05, 0.20, 0.35))
SOME = Quantifier("some", (0.20, 0.35, 0.50, 0.65))
MANY = Quantifier("many", (0.50, 0.65, 1.0, 1.0))
DEFAULT_QUANTIFIERS = (FEW, SOME, MANY)


@dataclass(frozen=True)
class Qualifier:
    """Crisp category predicate or fuzzy predicate over an attribute.

    Crisp: matches ``record[attribute] == category`` with membership 0/1.
    Fuzzy: trapezoidal membership over ``record[attribute]``.
    """

    name: str
    attribute: str
    category: object | None = None
    trapezoid: tuple[float, float, float, float] | None = None

    @property
    def crisp(self) -> bool:
        return self.category is not None

    def membership(self, record) -> float:
        if self.attribute not in record:
            raise InvalidArgument(f"record lacks qualifier attribute {self.attribute!r}")
        value = record[self.attribute]
        if self.crisp:
            return 1.0 if value == self.category else 0.0
        a, b, c, d = self.trapezoid
        x = float(value)
        if x < a or x > d:
            return 0.0
        if b <= x <= c:
            return 1.0
        if x < b:
            return (x - a) / (b - a) if b > a else 1.0
        return (d - x) / (d - c) if d > c else 1.0


@dataclass(frozen=True)
class LinguisticStatement:
    quantifier: Quantifier
    summarizer: tuple[tuple[str, str], ...]  # (attribute, term) pairs
    qualifier: Qualifier | None
    truth: float | None = None

    def __post_init__(self):
        attrs = [a for a, _ in self.summarizer]
        if len(attrs) != len(set(attrs)):
            raise InvalidArgument("summarizer repeats an attribute")

    def with_truth(self, value: float) -> "LinguisticStatement":
        return replace(self, truth=value)


def summarizer_membership(statement, variables, record) -> float:
    """Min t-norm over the summarizer's term memberships; empty -> 1."""
    degree = 1.0
    for attr, term in statement.summarizer:
        if attr not in record:
            raise InvalidArgument(f"record lacks summarizer attribute {attr!r}")
        degree = min(degree, term_membership(variables[attr], term, record[attr]))
    return degree


def truth(statement, variables, records, denominator="summarizer") -> float:
    """Truth value of one statement over a dataset.

    denominator="summarizer": proportion relative to summarizer support.
    denominator="qualifier": proportion relative to qualifier support
    (quantities relative to one category of samples).
    """
    if not records:
        raise InvalidArgument("dataset must be nonempty")
    n = len(records)
    has_p = len(statement.summarizer) > 0
    has_r = statement.qualifier is not None
    mu_p = np.array(
        [summarizer_membership(statement, variables, rec) for rec in records]
        if has_p
        else [1.0] * n
    )
    mu_r = np.array(
        [statement.qualifier.membership(rec) for rec in records]
        if has_r
        else [1.0] * n
    )
    numerator = float(np.sum(np.minimum(mu_p, mu_r)))
    if has_p and has_r and denominator == "summarizer":
        denom = float(np.sum(mu_p))
    elif has_r and denominator == "qualifier":
        denom = float(np.sum(mu_r))
    else:
        denom = float(n)
    if denom == 0.0:
        return 0.0
    return statement.quantifier.membership(numerator / denom)


def evaluate_statements(statements, variables, records, denominator="summarizer"):
    """Vectorized truth evaluation of many statements over one dataset."""
    n = len(records)
    term_cache = {}
    for var in variables.values():
        column = np.array([float(rec[var.attribute]) for rec in records])
        for t in var.terms:
            term_cache[(var.attribute, t)] = np.array(
                [term_membership(var, t, x) for x in column]
            )
    qual_cache = {}
    out = []
    for st in statements:
        if st.summarizer:
            mu_p = term_cache[st.summarizer[0]]
            for pair in st.summarizer[1:]:
                mu_p = np.minimum(mu_p, term_cache[pair])
        else:
            mu_p = np.ones(n)
        if st.qualifier is not None:
            key = st.qualifier.name
            if key not in qual_cache:
                qual_cache[key] = np.array(
                    [st.qualifier.membership(rec) for rec in records]
                )
            mu_r = qual_cache[key]
        else:
            mu_r = np.ones(n)
        numerator = float(np.sum(np.minimum(mu_p, mu_r)))
        if st.summarizer and st.qualifier is not None and denominator == "summarizer":
            denom = float(np.sum(mu_p))
        elif st.qualifier is not None and denominator == "qualifier":
            denom = float(np.sum(mu_r))
        else:
            denom = float(n)
        value = 0.0 if denom == 0.0 else st.quantifier.membership(numerator / denom)
        out.append(st.with_truth(value))
    return out


def enumerate_statements(
    variables, quantifiers, qualifiers, max_summarizer_size: int
):
    """All statements with summarizer size 0..max, deterministic order."""
    var_list = list(variables.values())
    if max_summarizer_size > len(var_list):
        raise InvalidArgument("max_summarizer_size exceeds the variable count")
    summarizers = []
    for size in range(max_summarizer_size + 1):
        for combo in itertools.combinations(var_list, size):
            for terms in itertools.product(*(v.terms for v in combo)):
                summarizers.append(
                    tuple((v.attribute, t) for v, t in zip(combo, terms))
                )
    statements = []
    for summarizer in summarizers:
        for q in quantifiers:
            for r in qualifiers:
                statements.append(
                    LinguisticStatement(
                        quantifier=q, summarizer=summarizer, qualifier=r
                    )
                )
    return statements


def simplify(statements, threshold: float):
    """Threshold, then prune redundant specializations.

    A surviving statement is removed when a surviving statement with the
    same quantifier and qualifier carries a summarizer that is a proper
    subset of its own (an ancestor in the one-pair-extension DAG).
    Output sorted by ascending summarizer size, then descending truth.
    """
    surviving = [s for s in statements if s.truth is not None and s.truth >= threshold]
    by_group = {}
    for s in surviving:
        key = (s.quantifier.name, s.qualifier.name if s.qualifier else None)
        by_group.setdefault(key, []).append(s)
    kept = []
    for group in by_group.values():
        sets = [frozenset(s.summarizer) for s in group]
        for s, fs in zip(group, sets):
            if any(other < fs for other in sets):
                continue
            kept.append(s)
    kept.sort(key=lambda s: (len(s.summarizer), -s.truth))
    return kept


# --- rendering -------------------------------------------------------------

QUALIFIER_PHRASES = {
    "pareto_optimal": "pareto optimal",
    "discarded": "discarded",
    "undecided": "undecided",
    "high_uncertainty": "high uncertainty",
    "low_uncertainty": "low uncertainty",
}


def statement_sentence(statement, variables) -> str:
    """Render one statement as a report sentence."""
    if statement.summarizer:
        parts = ", ".join(
            f"{term} {variables[attr].display_name()}"
            for attr, term in statement.summarizer
        )
        prefix = f"Of the design points from {parts}"
    else:
        prefix = "Of all design points"
    qual = (
        QUALIFIER_PHRASES.get(statement.qualifier.name, statement.qualifier.name)
        if statement.qualifier
        else "design"
    )
    return f"{prefix}, {statement.quantifier.name} are {qual} points."


def _heading(quantifier_name, qualifier_name) -> str:
    qual = QUALIFIER_PHRASES.get(qualifier_name, qualifier_name or "design")
    words = f"{quantifier_name} {qual} points".split()
    return " ".join(w.capitalize() for w in words)


@dataclass
class Report:
    markdown: str
    records: list[dict]
    prompt: str


def render_report(statements, variables, campaign_label: str = "campaign") -> Report:
    """Markdown report, machine records, and the LLM prompt file body."""
    records = [
        {
            "quantifier": s.quantifier.name,
            "qualifier": s.qualifier.name if s.qualifier else None,
            "summarizer": [list(pair) for pair in s.summarizer],
            "truth": s.truth,
        }
        for s in statements
    ]
    lines = [f"# Linguistic summary: {campaign_label}", ""]
    if not statements:
        lines.append("no statements exceeded the threshold")
    else:
        groups = {}
        for s in statements:
            key = (s.quantifier.name, s.qualifier.name if s.qualifier else None)
            groups.setdefault(key, []).append(s)
        for key in sorted(groups, key=lambda k: (k[1] or "", k[0])):
            lines.append(f"## {_heading(*key)}")
            lines.append("")
            for s in groups[key]:
                lines.append(
                    f"- {statement_sentence(s, variables)} (truth {s.truth:.3f})"
                )
            lines.append("")
    markdown = "\n".join(lines).rstrip() + "\n"

    prompt_lines = [
        "Rewrite the following linguistic statements about an optimization",
        "campaign as a concise, well-organized summary for a materials",
        "scientist. Keep every quantitative qualifier intact.",
        "",
    ]
    if statements:
        prompt_lines += [
            f"- {statement_sentence(s, variables)} (truth {s.truth:.3f})"
            for s in statements
        ]
    else:
        prompt_lines.append("(no statements exceeded the threshold)")
    prompt = "\n".join(prompt_lines) + "\n"
    return Report(markdown=markdown, records=records, prompt=prompt)


def statement_records_lines(statements) -> str:
    """Line-delimited export: quantifier, qualifier, pairs, truth."""
    import json

    lines = []
    for s in statements:
        lines.append(
            json.dumps(
                {
                    "quantifier": s.quantifier.name,
                    "qualifier": s.qualifier.name if s.qualifier else None,
                    "summarizer": [list(p) for p in s.summarizer],
                    "truth": s.truth,
                }
            )
        )
    return "\n".join(lines)
