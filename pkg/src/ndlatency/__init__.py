"""Exact neighbor-discovery latency for periodic-interval protocols."""

from .analysis import (EnergyParams, ErrorMetrics, SweepRow, TickRange, energy_metrics,
                       error_metrics, explore_grid, sweep_ta)
from .buffer import ProbabilityBuffer, Segment
from .engine import LatencyResult, compute_latency
from .gamma import GammaSchedule, GammaStage, Mode, build_schedule, max_order
from .params import InvalidParameters, ProtocolParams, TickAlignmentError
from .simulator import SimSummary, exhaustive_grid, monte_carlo

__all__ = [
    "EnergyParams", "ErrorMetrics", "SweepRow", "TickRange", "energy_metrics", "error_metrics",
    "explore_grid", "sweep_ta", "ProbabilityBuffer", "Segment", "LatencyResult",
    "compute_latency", "GammaSchedule", "GammaStage", "Mode", "build_schedule", "max_order",
    "InvalidParameters", "ProtocolParams", "TickAlignmentError", "SimSummary",
    "exhaustive_grid", "monte_carlo",
]
