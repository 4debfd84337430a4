"""Parity-oblivious d-level random access codes: bounds, protocols, search."""

__version__ = "0.1.0"

from .game import (
    ClassicalStrategy,
    PartitionTable,
    brute_force_classical_bound,
    classical_optimum,
    leaks_parity,
    noncontextual_bound,
    optimal_decoding_for,
    parity_partitions,
    strategy_success,
)
from .optimizer import OptConfig, OptResult, SearchPoint, ascend, objective_and_gradient, protocol_from_point, seesaw_optimize
from .protocols import builtin_protocol
from .quantum import (
    InvalidProtocol,
    Measurement,
    QuantumProtocol,
    born_probabilities,
    check_parity_oblivious,
    mabb_overlap_table,
    success_probability,
    violation_ratio,
)
