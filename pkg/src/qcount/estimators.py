"""Monte Carlo additive trace estimation from single-shot acceptance draws.

One sample of the basic estimator is: pick a uniform witness y, run the
verifier once, record whether the output qubit read 1.  Averaging M such
Bernoulli outcomes and scaling by 2**w gives

    X = (2**w / M) * sum(X_i),

which is unbiased for the acceptance-operator trace and has variance
exactly (1/M) * Tr * (2**w - Tr), so Chebyshev gives
Pr(|X - Tr| >= eps * 2**w) <= 1 / (M * eps**2).  Taking the median of k
independent runs sharpens the 1/4-failure setting to exp(-k/8), hence
k = ceil(8 * ln(1/delta)) repetitions suffice for confidence delta.

Sampling is simulated classically but never peeks beyond what one run
of the verifier would reveal: a witness index and one biased coin flip
per sample, drawn from counter-based streams (see rngstreams).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import VerifierCircuit, _parse_bits
from .errors import PreconditionError
from .limits import dense_qubit_cap
from .rngstreams import stream
from .spectral import (
    AcceptanceOperator,
    accept_probability,
    build_acceptance_operator,
    trace_normalized,
)


@dataclass(frozen=True)
class AdditiveEstimate:
    """A value promised within epsilon * normalization, except w.p. delta."""

    value: float
    normalization: float
    epsilon: float
    delta: float
    samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise PreconditionError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise PreconditionError(f"delta must lie in (0, 1), got {self.delta}")
        if self.samples < 1:
            raise PreconditionError(f"need at least one sample, got {self.samples}")


def _resolve_operator(
    circuit: VerifierCircuit, x: str, operator: AcceptanceOperator | None
) -> AcceptanceOperator | None:
    """The dense operator when affordable, else None (stay single-shot)."""
    if operator is not None:
        return operator
    if circuit.num_qubits <= dense_qubit_cap():
        return build_acceptance_operator(circuit, x)
    return None


def _witness_probabilities(
    circuit: VerifierCircuit,
    x: str,
    operator: AcceptanceOperator | None,
    witnesses: np.ndarray,
    cache: dict[int, float],
) -> np.ndarray:
    if operator is not None:
        diag = np.clip(np.real(np.diagonal(operator.matrix)), 0.0, 1.0)
        return diag[witnesses]
    w = circuit.num_witness
    out = np.empty(witnesses.shape[0])
    for i, y_val in enumerate(witnesses):
        y_int = int(y_val)
        if y_int not in cache:
            cache[y_int] = accept_probability(circuit, x, format(y_int, f"0{w}b"))
        out[i] = cache[y_int]
    return out


def make_trace_estimator(
    circuit: VerifierCircuit,
    x: str = "",
    M: int = 64,
    *,
    operator: AcceptanceOperator | None = None,
    epsilon: float | None = None,
) -> Callable[[np.random.Generator], AdditiveEstimate]:
    """Closure running one M-sample estimate per generator handed in.

    The per-witness acceptance probabilities are resolved once up front
    (from `operator` if given, else a dense build, else lazily per
    sampled witness beyond the dense cap), so repeated runs pay only for
    their own draws.  Sample i consumes the generator's uniforms at
    positions i (witness pick) and M + i (acceptance coin).
    """
    if M < 1:
        raise PreconditionError(f"sample count must be >= 1, got {M}")
    _parse_bits(x, circuit.num_input, "input bits")
    dim_w = 1 << circuit.num_witness
    if epsilon is None:
        epsilon = 2.0 / math.sqrt(M)  # puts the Chebyshev failure bound at 1/4
    elif epsilon * epsilon * M <= 1.0:
        raise PreconditionError(
            f"epsilon={epsilon} is unattainable at M={M}: the failure "
            f"bound 1/(M eps^2) would reach 1"
        )
    delta = 1.0 / (M * epsilon * epsilon)
    op = _resolve_operator(circuit, x, operator)
    diag = None
    if op is not None:
        diag = np.clip(np.real(np.diagonal(op.matrix)), 0.0, 1.0)
    prob_cache: dict[int, float] = {}

    def run(rng: np.random.Generator, seed_record: int = 0) -> AdditiveEstimate:
        draws = rng.random((2, M))
        witnesses = np.floor(draws[0] * dim_w).astype(np.int64)
        if diag is not None:
            probs = diag[witnesses]
        else:
            probs = _witness_probabilities(circuit, x, None, witnesses, prob_cache)
        hits = draws[1] < probs
        value = dim_w * (int(hits.sum()) / M)
        return AdditiveEstimate(
            value=value,
            normalization=float(dim_w),
            epsilon=epsilon,
            delta=delta,
            samples=M,
            seed=seed_record,
        )

    return run


def quantum_trace_estimator(
    circuit: VerifierCircuit,
    x: str = "",
    M: int = 64,
    seed: int = 0,
    *,
    operator: AcceptanceOperator | None = None,
    epsilon: float | None = None,
) -> AdditiveEstimate:
    """One M-sample additive estimate of the acceptance-operator trace."""
    run = make_trace_estimator(circuit, x, M, operator=operator, epsilon=epsilon)
    return run(stream(seed), seed_record=seed)


def median_repetitions(delta: float) -> int:
    """Runs needed so the median fails with probability at most delta."""
    if not 0.0 < delta < 1.0:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    return max(1, math.ceil(8.0 * math.log(1.0 / delta)))


def median_amplify(
    base: Callable[[np.random.Generator], AdditiveEstimate],
    k: int,
    seed: int,
) -> AdditiveEstimate:
    """Median of k independent runs of a 1/4-failure additive estimator.

    Run j draws from substream j of the seed, so k=1 reproduces the
    plain estimator bit for bit and the runs parallelize freely.  The
    returned failure probability is the Hoeffding envelope exp(-k/8).
    """
    if k < 1:
        raise PreconditionError(f"need at least one run, got {k}")
    runs = [base(stream(seed, jump=j)) for j in range(k)]
    values = np.array([r.value for r in runs])
    delta = min(math.exp(-k / 8.0), 0.25)
    return AdditiveEstimate(
        value=float(np.median(values)),
        normalization=runs[0].normalization,
        epsilon=runs[0].epsilon,
        delta=delta,
        samples=sum(r.samples for r in runs),
        seed=seed,
    )


@dataclass(frozen=True)
class DeciderResult:
    """Outcome of the average-acceptance decision procedure."""

    answer: str  # "YES" or "NO"
    mean: float
    samples: int
    epsilon: float
    promise_violated: bool | None  # None when the exact check was unaffordable
    exact_normalized_trace: float | None


def avg_accept_decider(
    circuit: VerifierCircuit,
    x: str = "",
    c: float = 2.0 / 3.0,
    s: float = 1.0 / 3.0,
    seed: int = 0,
    *,
    epsilon: float | None = None,
    operator: AcceptanceOperator | None = None,
) -> DeciderResult:
    """Decide whether the normalized trace is >= c or <= s by plain averaging.

    Uses eps = min(1/6, (c-s)/3) unless overridden and M = ceil(3/eps^2)+1
    single-shot samples, which by Chebyshev decides correctly with
    probability at least 2/3 whenever the promise holds.  The promise is
    not checkable from samples; when the dense oracle is affordable the
    result carries a flag saying whether this input actually violated it.
    """
    if not 0.0 <= s < c <= 1.0:
        raise PreconditionError(f"need 0 <= s < c <= 1, got c={c}, s={s}")
    gap = c - s
    if epsilon is None:
        epsilon = min(1.0 / 6.0, gap / 3.0)
    if not 0.0 < epsilon < gap / 2.0:
        raise PreconditionError(f"epsilon={epsilon} cannot separate the promise gap {gap}")
    M = math.ceil(3.0 / (epsilon * epsilon)) + 1
    _parse_bits(x, circuit.num_input, "input bits")
    dim_w = 1 << circuit.num_witness
    op = _resolve_operator(circuit, x, operator)
    rng = stream(seed)
    draws = rng.random((2, M))
    witnesses = np.floor(draws[0] * dim_w).astype(np.int64)
    probs = _witness_probabilities(circuit, x, op, witnesses, {})
    mean = float(np.count_nonzero(draws[1] < probs)) / M
    answer = "YES" if mean >= (c + s) / 2.0 else "NO"
    promise_violated: bool | None = None
    exact: float | None = None
    if op is not None:
        exact = trace_normalized(op)
        promise_violated = bool(s + 1e-12 < exact < c - 1e-12)
    return DeciderResult(
        answer=answer,
        mean=mean,
        samples=M,
        epsilon=epsilon,
        promise_violated=promise_violated,
        exact_normalized_trace=exact,
    )
