from .config import ConfigError, ExperimentSpec, load_spec, parse_override
from .data import (EmptyTestSetError, evaluate_run, held_out_order, ingest_real, score_counts,
                   split_size, split_training)
from .runner import (MetricRow, aggregate, real_instance, run_experiment, run_real,
                     run_synthetic, synthetic_instance)
from .seeding import derive_seed, rng_for

__all__ = [
    "ConfigError", "EmptyTestSetError", "ExperimentSpec", "MetricRow", "aggregate",
    "derive_seed", "evaluate_run", "ingest_real", "load_spec", "parse_override",
    "real_instance", "rng_for", "run_experiment", "run_real", "run_synthetic",
    "score_counts", "split_size", "split_training", "synthetic_instance", "held_out_order",
]
