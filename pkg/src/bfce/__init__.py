"""In-stream cardinality estimation with a counting Bloom filter.

A Bloom filter whose counter ``s`` is incremented on every negative
membership check undercounts the distinct elements of a stream, because
false positives are never counted.  This package tracks the expected size
of that undercount and its variance while the stream is processed, and
ships the fill-ratio estimators, sizing rules and a Monte-Carlo harness to
compare them.
"""
from .estimator import (CardinalityEstimate, CorrectionAccumulator, corrected_estimate,
                        error_distribution_pmf, estimate_papapetrou, estimate_swamidass,
                        on_counter_increment)
from .exceptions import (BfceError, DegenerateFpp, FilterNotEmpty, InvalidParameters,
                         MalformedInput, OutOfRange, SaturatedFilter, StreamExhausted)
from .filter import BloomFilter, deserialize, new_filter, serialize
from .fpp import FppModel, approx_fpp, exact_fpp, fpp_at_state, stirling2
from .hashing import HashFamily, encode_id, indices
from .simulation import (TrialMetrics, UniverseSpec, generate_stream, overload_sweep,
                         run_batch_experiment, run_experiment, run_trial)
from .sizing import (SizingRequest, classical_size, k_opt_cumulative, mean_error_upper_bound,
                     size_for_error_budget)

__version__ = "0.1.0"

__all__ = [
    "BfceError", "BloomFilter", "CardinalityEstimate", "CorrectionAccumulator",
    "DegenerateFpp", "FilterNotEmpty", "FppModel", "HashFamily", "InvalidParameters",
    "MalformedInput", "OutOfRange", "SaturatedFilter", "SizingRequest", "StreamExhausted",
    "TrialMetrics", "UniverseSpec", "approx_fpp", "classical_size", "corrected_estimate",
    "deserialize", "encode_id", "error_distribution_pmf", "estimate_papapetrou",
    "estimate_swamidass", "exact_fpp", "fpp_at_state", "generate_stream", "indices",
    "k_opt_cumulative", "mean_error_upper_bound", "new_filter", "on_counter_increment",
    "overload_sweep", "run_batch_experiment", "run_experiment", "run_trial", "serialize",
    "size_for_error_budget", "stirling2",
]
