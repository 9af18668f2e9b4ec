"""Temporal ordering of nodes in duplication-divergence graph snapshots."""

from .dd_model import DDParams, generate
from .estimators import EstimatorConfig, run_estimator
from .exact import enumerate_orders, exact_puv
from .graph_core import Graph
from .partial_order import PartialOrder, density, precision
from .puv import PuvMatrix
from .sampler import Scheme, TrainingPairs, estimate_puv

__version__ = "0.1.0"

__all__ = [
    "DDParams", "EstimatorConfig", "Graph", "PartialOrder", "PuvMatrix", "Scheme",
    "TrainingPairs", "density", "enumerate_orders", "estimate_puv", "exact_puv",
    "generate", "precision", "run_estimator",
]
