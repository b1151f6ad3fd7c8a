"""Grid-based spreadsheet layout generation and evaluation."""

from __future__ import annotations

from .grid import CellRect, GridConfig, parse_cell, parse_range
from .metrics import MetricConstants, ScoreReport, evaluate
from .model import ComponentType, Layout, ProcessedSheet, RawComponent, Topic, dumps, load_layout, load_sheet
from .placer import PlacementConfig, heuristic_place
from .populator import autofit_baseline, fit_dimensions, populate
from .ranker import DEFAULT_WEIGHTS, WeightProfile, rank
from .reflection import ThresholdProfile, reflect_loop, triggers

__version__ = "0.1.0"

__all__ = [
    "CellRect",
    "ComponentType",
    "DEFAULT_WEIGHTS",
    "GridConfig",
    "Layout",
    "MetricConstants",
    "PlacementConfig",
    "ProcessedSheet",
    "RawComponent",
    "ScoreReport",
    "ThresholdProfile",
    "Topic",
    "WeightProfile",
    "autofit_baseline",
    "dumps",
    "evaluate",
    "fit_dimensions",
    "heuristic_place",
    "load_layout",
    "load_sheet",
    "parse_cell",
    "parse_range",
    "populate",
    "rank",
    "reflect_loop",
    "triggers",
]
