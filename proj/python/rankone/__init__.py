"""Exact rank-one cutting-and-stacking engine."""

from ._rankone import (
    BudgetError,
    ConfigError,
    ConstructionError,
    DomainError,
    Error,
    LevelSet,
    Tower,
    partial_sum_polynomial,
    run,
)

__all__ = [
    "BudgetError",
    "ConfigError",
    "ConstructionError",
    "DomainError",
    "Error",
    "LevelSet",
    "Tower",
    "partial_sum_polynomial",
    "run",
]
