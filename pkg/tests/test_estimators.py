"""Monte Carlo trace estimator: law, amplification, and the decider."""

import math

import numpy as np
import pytest

from circgen import ensemble, random_circuit
from qcount import (
    PreconditionError,
    avg_accept_decider,
    build_acceptance_operator,
    median_amplify,
    median_repetitions,
    quantum_trace_estimator,
    trace_normalized,
)
from qcount.circuit import parse_circuit
from qcount.estimators import make_trace_estimator
from qcount.rngstreams import stream

X_CIRC = parse_circuit("registers: ancilla=1 input=0 witness=1\nX 0\n")
H_CIRC = parse_circuit("registers: ancilla=1 input=0 witness=1\nH 0\n")
ID_CIRC = parse_circuit("registers: ancilla=1 input=0 witness=1\n")


def test_sure_acceptor_estimates_exactly():
    # every witness accepts with probability 1, so every run returns 2^w
    for seed in range(5):
        est = quantum_trace_estimator(X_CIRC, M=32, seed=seed)
        assert est.value == 2.0


def test_never_acceptor_estimates_exactly():
    for seed in range(5):
        assert quantum_trace_estimator(ID_CIRC, M=32, seed=seed).value == 0.0


def test_estimate_metadata():
    est = quantum_trace_estimator(H_CIRC, M=64, seed=9)
    assert est.samples == 64
    assert est.normalization == 2.0
    assert est.epsilon == pytest.approx(2.0 / math.sqrt(64))
    assert est.delta == pytest.approx(0.25)
    assert est.seed == 9


def test_explicit_epsilon_tightens_delta():
    est = quantum_trace_estimator(H_CIRC, M=64, seed=9, epsilon=0.5)
    assert est.delta == pytest.approx(1.0 / (64 * 0.25))
    with pytest.raises(PreconditionError):
        quantum_trace_estimator(H_CIRC, M=9, seed=0, epsilon=1.0 / 3.0)


def test_unbiased_within_standard_error():
    rng = np.random.default_rng(301)
    circ = random_circuit(rng, num_witness=3, gate_count=15)
    op = build_acceptance_operator(circ)
    exact = float(np.real(np.trace(op.matrix)))
    base = make_trace_estimator(circ, M=8, operator=op)
    runs = 4000
    gen = stream(302)
    values = np.array([base(gen).value for _ in range(runs)])
    var_theory = exact * (8.0 - exact) / 8.0  # (1/M) Tr (2^w - Tr)
    se = math.sqrt(var_theory / runs)
    assert abs(values.mean() - exact) <= 5.0 * se


def test_median_of_one_is_the_plain_estimator():
    base = make_trace_estimator(H_CIRC, M=16)
    for seed in (0, 7, 123):
        amplified = median_amplify(base, 1, seed)
        plain = quantum_trace_estimator(H_CIRC, M=16, seed=seed)
        assert amplified.value == plain.value


def test_median_amplification_metadata():
    base = make_trace_estimator(H_CIRC, M=16)
    est = median_amplify(base, 33, seed=4)
    assert est.samples == 33 * 16
    assert est.delta == pytest.approx(math.exp(-33 / 8.0))
    assert median_repetitions(0.25) == math.ceil(8.0 * math.log(4.0))
    assert median_repetitions(1e-3) == math.ceil(8.0 * math.log(1e3))
    with pytest.raises(PreconditionError):
        median_repetitions(0.0)
    with pytest.raises(PreconditionError):
        median_amplify(base, 0, seed=1)


def test_same_seed_same_value():
    a = quantum_trace_estimator(H_CIRC, M=256, seed=11)
    b = quantum_trace_estimator(H_CIRC, M=256, seed=11)
    assert a.value == b.value
    c = quantum_trace_estimator(H_CIRC, M=256, seed=12)
    assert c.value != a.value or c.seed != a.seed


def test_decider_trivial_instances():
    yes = avg_accept_decider(X_CIRC, seed=3)
    assert yes.answer == "YES" and not yes.promise_violated
    no = avg_accept_decider(ID_CIRC, seed=3)
    assert no.answer == "NO" and not no.promise_violated
    assert yes.samples == math.ceil(3.0 / (1.0 / 9.0) ** 2) + 1  # eps = gap/3


def test_decider_flags_promise_violation():
    # normalized trace exactly 1/2 sits inside the (1/3, 2/3) gap
    r = avg_accept_decider(H_CIRC, seed=5)
    assert r.promise_violated
    assert r.exact_normalized_trace == pytest.approx(0.5, abs=1e-12)


def test_decider_epsilon_override():
    eps = 1.0 / 6.0 - 0.01
    r = avg_accept_decider(X_CIRC, seed=2, epsilon=eps)
    assert r.samples == math.ceil(3.0 / (eps * eps)) + 1
    assert r.epsilon == pytest.approx(eps)


def test_decider_rejects_unusable_epsilon():
    with pytest.raises(PreconditionError):
        avg_accept_decider(X_CIRC, seed=0, epsilon=1.0 / 6.0)  # not < gap/2
    with pytest.raises(PreconditionError):
        avg_accept_decider(X_CIRC, c=0.9, s=0.95, seed=0)


def test_estimator_handles_input_register():
    for circ, x in ensemble(303, 5, max_input=2, max_witness=2):
        est = quantum_trace_estimator(circ, x, M=16, seed=1)
        assert 0.0 <= est.value <= est.normalization
