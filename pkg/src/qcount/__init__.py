"""Approximate counting workbench for verifier acceptance operators.

Small dense simulations of {H, S, Toffoli} verifier circuits feed an
exact spectral oracle, and every approximate route in the package --
Monte Carlo trace estimation, sign-path enumeration, singular value
transformation, and the two counting reductions -- is cross-validated
against it.
"""

from .circuit import (
    Gate,
    VerifierCircuit,
    apply_gate,
    circuit_hash,
    circuit_unitary,
    load_circuit,
    pad_witness,
    parse_circuit,
    simulate,
)
from .errors import CapExceeded, CircuitFormatError, InvariantViolation, PreconditionError
from .estimators import (
    AdditiveEstimate,
    DeciderResult,
    avg_accept_decider,
    median_amplify,
    median_repetitions,
    quantum_trace_estimator,
)
from .pathsum import (
    PathSumResult,
    free_path_bits,
    path_sum_estimator,
    path_sum_exact,
)
from .reductions import (
    IntervalPartition,
    IntervalTraceResult,
    MiscountingOracle,
    PaddingResult,
    decide_by_interval_recovery,
    interval_partition_trace,
    padding_reduction,
)
from .spectral import (
    AcceptanceOperator,
    SpectralCount,
    accept_probability,
    build_acceptance_operator,
    count_eigs_geq,
    count_eigs_interval,
    dqc1_ancilla_bound,
    exact_count_interval,
    trace_in_interval,
    trace_normalized,
    validate_dqc1,
)
from .svt import (
    BlockEncoding,
    RectanglePolynomial,
    SandwichBounds,
    amplified_acceptance,
    apply_svt,
    build_block_encoding,
    degree_budget,
    eig_to_sv_threshold,
    rect_poly,
    sandwich_bounds,
)

__version__ = "0.1.0"
