"""Deductive coding with chat-completion models.

The package turns a codebook into prompts, collects code+reason decisions
from an OpenAI-compatible endpoint (live, recorded, replayed, or
scripted), and computes the validity and reliability statistics a content
analysis needs: randomness tests, chance-corrected agreement, and
prevalence estimates with confidence intervals.
"""

from .codebook import Codebook, CodeDefinition, load_codebook, save_codebook, validate
from .corpus import (
    Corpus,
    Document,
    HumanRatings,
    Sample,
    draw_sample,
    load_corpus,
    load_human_ratings,
)
from .decode import CodingDecision, decisions_to_ratings, parse_decision
from .errors import LacaError
from .pipeline import RunConfig, run_calibration, run_development, run_final, write_report
from .provider import (
    Cassette,
    CompletionRequest,
    CompletionResponse,
    HttpProvider,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
    request_hash,
)
from .prompt import PromptText, build_prompts, render_golden
from .stats import (
    AgreementResult,
    RatingsTable,
    TestResult,
    binomial_test_two_sided,
    chi_squared_uniform,
    cohens_kappa,
    coding_time_summary,
    gwet_ac1,
    percent_agreement,
    proportion_ci,
    randomness_test,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementResult",
    "Cassette",
    "Codebook",
    "CodeDefinition",
    "CodingDecision",
    "CompletionRequest",
    "CompletionResponse",
    "Corpus",
    "Document",
    "HttpProvider",
    "HumanRatings",
    "LacaError",
    "PromptText",
    "RatingsTable",
    "RecordingProvider",
    "ReplayProvider",
    "RunConfig",
    "Sample",
    "ScriptedProvider",
    "TestResult",
    "binomial_test_two_sided",
    "build_prompts",
    "chi_squared_uniform",
    "coding_time_summary",
    "cohens_kappa",
    "decisions_to_ratings",
    "draw_sample",
    "gwet_ac1",
    "load_codebook",
    "load_corpus",
    "load_human_ratings",
    "parse_decision",
    "percent_agreement",
    "proportion_ci",
    "randomness_test",
    "render_golden",
    "request_hash",
    "run_calibration",
    "run_development",
    "run_final",
    "save_codebook",
    "validate",
    "write_report",
]
