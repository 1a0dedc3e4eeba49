"""ADM and Brown-York mass pipelines for explicit 3-metrics."""

from ._qlmass import (
    adm_mass,
    brown_york,
    compact_bound,
    excision_remainder,
    flat_sobolev_constant,
    moser_sup_bound,
    pointwise_penalty_min,
    report,
    run,
    scenario_names,
    scenario_oracles,
)

__all__ = [
    "adm_mass",
    "brown_york",
    "compact_bound",
    "excision_remainder",
    "flat_sobolev_constant",
    "moser_sup_bound",
    "pointwise_penalty_min",
    "report",
    "run",
    "scenario_names",
    "scenario_oracles",
]
