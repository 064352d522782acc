"""Block encodings, rectangle polynomials, and the trace sandwich."""

import numpy as np
import pytest

from circgen import ensemble, thresholds_from_sigma_gap
from qcount import (
    PreconditionError,
    amplified_acceptance,
    apply_svt,
    build_acceptance_operator,
    build_block_encoding,
    degree_budget,
    eig_to_sv_threshold,
    rect_poly,
    sandwich_bounds,
)
from qcount.circuit import parse_circuit
from qcount.svt import RectanglePolynomial, grid_report

X_CIRC = parse_circuit("registers: ancilla=1 input=0 witness=1\nX 0\n")


def test_block_encoding_of_sure_acceptor():
    enc = build_block_encoding(X_CIRC)
    assert enc.matrix.shape == (2, 2)
    assert np.allclose(enc.singular_values, [1.0, 1.0], atol=1e-12)


def test_gram_matrix_is_acceptance_operator():
    for circ, x in ensemble(501, 30, max_ancilla=2, max_input=1, max_witness=3):
        enc = build_block_encoding(circ, x)
        gram = enc.matrix.conj().T @ enc.matrix
        op = build_acceptance_operator(circ, x)
        assert np.max(np.abs(gram - op.matrix)) <= 1e-9


def test_singular_values_square_to_eigenvalues():
    for circ, x in ensemble(502, 15, max_witness=3):
        enc = build_block_encoding(circ, x)
        eigs = build_acceptance_operator(circ, x).eigenvalues
        assert np.allclose(np.sort(enc.singular_values**2), np.sort(eigs), atol=1e-9)


def test_eig_to_sv_threshold():
    assert eig_to_sv_threshold(0.25) == pytest.approx(0.5)
    assert eig_to_sv_threshold(1.0) == 1.0


@pytest.mark.parametrize("delta,eps", [(0.2, 0.1), (0.1, 0.01)])
def test_rect_poly_properties(delta, eps):
    poly = rect_poly(0.5, delta, eps)
    report = grid_report(poly)
    assert report["violations"] == 0
    assert report["max_abs"] <= 1.0
    assert report["outer_min"] >= 1.0 - eps
    assert 0.0 <= report["inner_min"] and report["inner_max"] <= eps
    assert report["grid_points"] >= 10_000


def test_rect_poly_is_exactly_even():
    poly = rect_poly(0.5, 0.1, 0.1)
    assert np.all(poly.coefficients[1::2] == 0.0)
    xs = np.linspace(0.0, 1.0, 257)
    assert np.array_equal(poly(xs), poly(-xs))


def test_rect_poly_respects_degree_budget():
    for delta, eps in [(0.2, 0.1), (0.1, 0.1), (0.05, 0.01)]:
        poly = rect_poly(0.5, delta, eps)
        assert poly.degree % 2 == 0
        assert poly.degree <= degree_budget(delta, eps)


def test_rect_poly_degree_scaling():
    # squaring the error cost at most doubles the degree plus a constant
    for delta in (0.2, 0.1, 0.05):
        p1 = rect_poly(0.5, delta, 0.1).degree
        p2 = rect_poly(0.5, delta, 0.01).degree
        assert p2 <= 2 * p1 + 16


def test_rect_poly_parameter_validation():
    with pytest.raises(PreconditionError):
        rect_poly(0.0, 0.1, 0.1)
    with pytest.raises(PreconditionError):
        rect_poly(0.5, 0.6, 0.1)  # delta >= min(t, 1-t)
    with pytest.raises(PreconditionError):
        rect_poly(0.5, 0.1, 0.5)
    with pytest.raises(PreconditionError):
        rect_poly(0.5, 0.1, 0.1, grid_size=100)


def test_apply_svt_threshold_separation():
    eps = 0.05
    for circ, x in ensemble(503, 20, max_ancilla=2, max_witness=2):
        enc = build_block_encoding(circ, x)
        picked = thresholds_from_sigma_gap(enc.singular_values)
        if picked is None:
            continue
        c, s = picked
        t, delta = (c + s) / 2.0, (c - s) / 2.0
        amplified = apply_svt(enc, rect_poly(t, delta, eps))
        for sigma, lam in zip(
            np.sort(enc.singular_values), np.sort(amplified.eigenvalues)
        ):
            # P is monotone-matched per singular value by sorting both sides
            if sigma >= c:
                assert lam >= (1.0 - eps) ** 2 - 1e-9
            elif sigma <= s:
                assert lam <= eps * eps + 1e-9


def test_apply_svt_rejects_odd_polynomial():
    odd = RectanglePolynomial(
        coefficients=np.array([0.5, 0.25]), degree=1, t=0.5, delta=0.1, eps=0.1
    )
    enc = build_block_encoding(X_CIRC)
    with pytest.raises(PreconditionError):
        apply_svt(enc, odd)


def test_worked_sandwich_on_sure_acceptor():
    eps = 0.05
    enc = build_block_encoding(X_CIRC)
    poly = rect_poly(0.4995, 0.1665, eps)
    amplified = apply_svt(enc, poly)
    bounds = sandwich_bounds(enc, 0.666, 0.333, eps, amplified)
    assert (bounds.n_geq_c, bounds.n_geq_s) == (2, 2)
    assert bounds.lower == pytest.approx(2.0 - (2 * eps - eps * eps) * 2.0)
    assert bounds.upper == pytest.approx(2.0 + eps * eps * 2.0)
    assert bounds.satisfied
    assert bounds.sigma_in_gap == 0


def test_amplified_acceptance_end_to_end():
    op = amplified_acceptance(X_CIRC, "", 0.666, 0.333, 0.05)
    assert np.all(op.eigenvalues >= (1.0 - 0.05) ** 2 - 1e-9)


def test_amplified_acceptance_validates_thresholds():
    with pytest.raises(PreconditionError):
        amplified_acceptance(X_CIRC, "", 1.0, 0.5, 0.05)
    with pytest.raises(PreconditionError):
        amplified_acceptance(X_CIRC, "", 0.5, 0.0, 0.05)
