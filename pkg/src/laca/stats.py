"""Agreement metrics, randomness tests, and interval estimates.

The chance-corrected agreement coefficient implemented here (AC1) uses the
general multi-rater form. With documents i = 1..n, raters r, categories
q = 1..Q, and r_iq raters placing document i in category q:

    p_a   = (1/n) * sum_i sum_q r_iq * (r_iq - 1) / (r * (r - 1))
    pi_q  = (1/n) * sum_i r_iq / r
    p_ec  = (1/(Q-1)) * sum_q pi_q * (1 - pi_q)
    ac1   = (p_a - p_ec) / (1 - p_ec)

Unlike Cohen's kappa (chance = product of rater marginals), AC1's chance
term is bounded by 1/Q, which keeps the coefficient stable for rare codes
where kappa collapses even at high raw agreement.

Randomness tests ask whether observed label frequencies are consistent
with uniform guessing: an exact two-sided binomial test for binary codes
(minimum-likelihood two-sided p-value: the total probability of all
outcomes no more likely than the observed one, with 1e-7 relative slack
against floating-point ties) and a chi-squared goodness-of-fit test
against equal probabilities for categorical codes. The chi-squared tail
probability is computed from the regularized upper incomplete gamma
function Q(df/2, x/2), by series for x < df + 1 and by continued fraction
otherwise, to within 1e-10 absolute error.

Proportion confidence intervals are Wilson score intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Mapping, Sequence

from .codebook import BINARY_LABELS, INDEPENDENT_BINARY, Codebook
from .decode import LABEL, CodingDecision
from .errors import DegenerateTable, InvalidInput, NoDecisions, UndefinedKappa

BINOMIAL_TWO_SIDED = "binomial_two_sided"
CHI_SQUARED_UNIFORM = "chi_squared_uniform"

_TIE_SLACK = 1e-7


@dataclass(frozen=True)
class RatingsTable:
    """Complete n-documents x r-raters assignment over Q categories."""

    documents: tuple[str, ...]
    raters: tuple[str, ...]
    categories: tuple[str, ...]
    cells: Mapping[tuple[str, str], str]
    n_dropped: int = 0

    @property
    def n(self) -> int:
        return len(self.documents)

    @property
    def r(self) -> int:
        return len(self.raters)

    @property
    def q(self) -> int:
        return len(self.categories)

    def counts(self, document: str) -> list[int]:
        """r_iq for one document, in category order."""
        row = [0] * self.q
        index = {c: i for i, c in enumerate(self.categories)}
        for rater in self.raters:
            row[index[self.cells[(document, rater)]]] += 1
        return row

    @classmethod
    def from_columns(
        cls,
        columns: Mapping[str, Mapping[str, str]],
        categories: Sequence[str],
        document_order: Sequence[str] | None = None,
    ) -> "RatingsTable":
        """Assemble a table from per-rater {document: label} columns.

        Documents missing from any rater are dropped (listwise deletion)
        and counted in ``n_dropped``.
        """
        raters = tuple(columns.keys())
        if len(raters) < 2:
            raise DegenerateTable(f"need at least 2 raters, got {len(raters)}")
        if len(categories) < 2:
            raise DegenerateTable(f"need at least 2 categories, got {len(categories)}")

        if document_order is None:
            seen: dict[str, None] = {}
            for column in columns.values():
                for doc in column:
                    seen.setdefault(doc, None)
            document_order = list(seen)

        kept: list[str] = []
        dropped = 0
        for doc in document_order:
            if all(doc in columns[r] for r in raters):
                kept.append(doc)
            elif any(doc in columns[r] for r in raters):
                dropped += 1
        if not kept:
            raise DegenerateTable("no document is rated by every rater")

        legal = set(categories)
        cells: dict[tuple[str, str], str] = {}
        for doc in kept:
            for rater in raters:
                label = columns[rater][doc]
                if label not in legal:
                    raise InvalidInput(f"label {label!r} is outside categories {sorted(legal)}")
                cells[(doc, rater)] = label
        return cls(
            documents=tuple(kept),
            raters=raters,
            categories=tuple(categories),
            cells=cells,
            n_dropped=dropped,
        )


@dataclass(frozen=True)
class AgreementResult:
    p_a: float
    p_e_gamma: float
    ac1: float
    kappa: float | None
    n_used: int


@dataclass(frozen=True)
class TestResult:
    test: str
    statistic: float
    df: int | None
    p_value: float
    alpha: float
    reject: bool


def percent_agreement(table: RatingsTable) -> float:
    """Observed pairwise agreement averaged over documents."""
    r = table.r
    if r < 2:
        raise DegenerateTable("percent agreement needs at least 2 raters")
    total = 0.0
    for doc in table.documents:
        total += sum(c * (c - 1) for c in table.counts(doc)) / (r * (r - 1))
    return total / table.n


def _category_shares(table: RatingsTable) -> list[float]:
    """pi_q: mean share of raters choosing each category."""
    shares = [0.0] * table.q
    for doc in table.documents:
        for idx, count in enumerate(table.counts(doc)):
            shares[idx] += count / table.r
    return [s / table.n for s in shares]


def gwet_ac1(table: RatingsTable) -> AgreementResult:
    """Chance-corrected agreement with the uniform-bounded chance term."""
    p_a = percent_agreement(table)
    shares = _category_shares(table)
    p_e = sum(pi * (1.0 - pi) for pi in shares) / (table.q - 1)
    ac1 = (p_a - p_e) / (1.0 - p_e)
    kappa: float | None = None
    if table.r == 2:
        try:
            kappa = cohens_kappa(table)
        except UndefinedKappa:
            kappa = None
    return AgreementResult(p_a=p_a, p_e_gamma=p_e, ac1=ac1, kappa=kappa, n_used=table.n)


def cohens_kappa(table: RatingsTable) -> float:
    """Two-rater kappa with product-of-marginals chance correction."""
    if table.r != 2:
        raise DegenerateTable(f"kappa is defined for exactly 2 raters, got {table.r}")
    first, second = table.raters
    n = table.n
    agree = sum(
        1 for doc in table.documents if table.cells[(doc, first)] == table.cells[(doc, second)]
    )
    p_a = agree / n
    p_e = 0.0
    for category in table.categories:
        m1 = sum(1 for doc in table.documents if table.cells[(doc, first)] == category)
        m2 = sum(1 for doc in table.documents if table.cells[(doc, second)] == category)
        p_e += (m1 / n) * (m2 / n)
    if p_e >= 1.0:
        raise UndefinedKappa("chance agreement is 1 (constant raters)")
    return (p_a - p_e) / (1.0 - p_e)


def _binom_pmf(j: int, n: int, p0: float) -> float:
    if n <= 1000:
        return math.comb(n, j) * p0**j * (1.0 - p0) ** (n - j)
    log_pmf = (
        math.lgamma(n + 1)
        - math.lgamma(j + 1)
        - math.lgamma(n - j + 1)
        + j * math.log(p0)
        + (n - j) * math.log1p(-p0)
    )
    return math.exp(log_pmf)


def binomial_test_two_sided(k: int, n: int, p0: float = 0.5, alpha: float = 0.05) -> TestResult:
    """Exact two-sided binomial test (minimum-likelihood method)."""
    if n < 1 or not 0 <= k <= n:
        raise InvalidInput(f"need 0 <= k <= n with n >= 1, got k={k}, n={n}")
    if not 0.0 < p0 < 1.0:
        raise InvalidInput(f"p0 must be strictly between 0 and 1, got {p0}")
    if not 0.0 < alpha < 1.0:
        raise InvalidInput(f"alpha must be strictly between 0 and 1, got {alpha}")
    threshold = _binom_pmf(k, n, p0) * (1.0 + _TIE_SLACK)
    p_value = 0.0
    for j in range(n + 1):
        pj = _binom_pmf(j, n, p0)
        if pj <= threshold:
            p_value += pj
    p_value = min(1.0, p_value)
    return TestResult(
        test=BINOMIAL_TWO_SIDED,
        statistic=k / n,
        df=None,
        p_value=p_value,
        alpha=alpha,
        reject=p_value < alpha,
    )


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x), absolute error <= 1e-10."""
    if a <= 0.0 or x < 0.0:
        raise InvalidInput(f"need a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return 1.0
    log_scale = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # lower series: P(a,x) = e^-x x^a / Gamma(a) * sum x^k / (a)_{k+1}
        term = 1.0 / a
        total = term
        denom = a
        while True:
            denom += 1.0
            term *= x / denom
            total += term
            if term < total * 1e-17:
                break
        return 1.0 - total * math.exp(log_scale)
    # Lentz continued fraction for Q(a,x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(log_scale) * h


def chi_squared_uniform(counts: Sequence[int], alpha: float = 0.05) -> TestResult:
    """Goodness-of-fit against equal category probabilities."""
    q = len(counts)
    if q < 2:
        raise InvalidInput(f"need at least 2 categories, got {q}")
    if any(c < 0 for c in counts):
        raise InvalidInput("counts must be non-negative")
    total = sum(counts)
    if total < 1:
        raise InvalidInput("need at least one observation")
    if not 0.0 < alpha < 1.0:
        raise InvalidInput(f"alpha must be strictly between 0 and 1, got {alpha}")
    expected = total / q
    statistic = sum((c - expected) ** 2 / expected for c in counts)
    df = q - 1
    p_value = regularized_gamma_q(df / 2.0, statistic / 2.0)
    return TestResult(
        test=CHI_SQUARED_UNIFORM,
        statistic=statistic,
        df=df,
        p_value=p_value,
        alpha=alpha,
        reject=p_value < alpha,
    )


def randomness_test(
    decisions: Iterable[CodingDecision], codebook: Codebook, alpha: float = 0.05
) -> TestResult:
    """Test one code's (or one categorical codebook's) labels against guessing."""
    labeled = [d for d in decisions if d.outcome == LABEL]
    if not labeled:
        raise NoDecisions("no parsed label decisions to test")
    if codebook.exclusivity == INDEPENDENT_BINARY:
        codes = {d.code_id for d in labeled}
        if len(codes) != 1:
            raise InvalidInput(f"binary randomness test needs a single code, got {sorted(codes)}")
        k = sum(1 for d in labeled if d.label == BINARY_LABELS[0])
        return binomial_test_two_sided(k, len(labeled), 0.5, alpha)
    index = {label: i for i, label in enumerate(codebook.label_set)}
    counts = [0] * len(index)
    for decision in labeled:
        if decision.label not in index:
            raise InvalidInput(f"label {decision.label!r} is not in the codebook's label set")
        counts[index[decision.label]] += 1
    return chi_squared_uniform(counts, alpha)


def proportion_ci(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1 or not 0 <= k <= n:
        raise InvalidInput(f"need 0 <= k <= n with n >= 1, got k={k}, n={n}")
    if not 0.0 < level < 1.0:
        raise InvalidInput(f"level must be strictly between 0 and 1, got {level}")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    p_hat = k / n
    denom = 1.0 + z * z / n
    center = (p_hat + z * z / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n))
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


def coding_time_summary(decisions: Iterable[CodingDecision]) -> dict[str, float]:
    """Mean seconds per document for each rater.

    A document's coding time is the sum of latencies over all of that
    document's requests, matching serial measurement.
    """
    per_rater: dict[str, dict[str, float]] = {}
    for decision in decisions:
        per_doc = per_rater.setdefault(decision.rater_id, {})
        per_doc[decision.document_id] = per_doc.get(decision.document_id, 0.0) + decision.latency_seconds
    if not per_rater:
        raise NoDecisions("no decisions carry latencies")
    return {
        rater: sum(per_doc.values()) / len(per_doc)
        for rater, per_doc in per_rater.items()
    }
