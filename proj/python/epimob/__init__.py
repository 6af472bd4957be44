"""CDR-driven meta-population epidemic simulation toolkit."""

from ._core import (
    Dataset,
    EpidemicParams,
    __version__,
    eigenvector_centrality,
    generate_synthetic,
    place_rank,
    quarantine,
    run_scenario,
    select_top_areas,
    step_deterministic,
    step_stochastic,
)

__all__ = [
    "Dataset",
    "EpidemicParams",
    "__version__",
    "eigenvector_centrality",
    "generate_synthetic",
    "place_rank",
    "quarantine",
    "run_scenario",
    "select_top_areas",
    "step_deterministic",
    "step_stochastic",
]
