"""Coined quantum walk search on Apollonian networks."""

from ._core import (
    ArcSpace,
    Channel,
    ComplexityFit,
    ContractViolation,
    FormatError,
    Graph,
    GroupTrace,
    InitSet,
    ParameterError,
    CapacityError,
    PeakReport,
    SpectralSummary,
    SweepResult,
    Trace,
    TrialStatistics,
    __version__,
    build_apollonian,
    build_random_apollonian,
    closed_form_counts,
    deserialize,
    evolve,
    evolve_and_trace,
    expected_cost,
    find_peak,
    fit_alpha,
    format_trace,
    nodes_of_generation,
    project_last_generation,
    restricted_search_trials,
    serialize,
    sweep,
    verify_fact1,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
