"""Singular value transformation route to eigenvalue counting.

The bottom half-block U of the embedded circuit matrix (output qubit
fixed at |1>, ancillas and input fixed on the column side) satisfies
U'U = A, the acceptance operator, so the singular values of U are the
square roots of A's eigenvalues.  Pushing the singular values through
an even rectangle-shaped polynomial P and squaring yields the amplified
operator  D = V P(Sigma)^2 V',  whose trace is sandwiched between the
exact counts:

    N_geq_c - (2 eps - eps^2) 2**w  <=  Tr D  <=  N_geq_s + eps^2 2**w

with thresholds read on singular values, t = (c+s)/2, half-width
Delta = (c-s)/2.  Callers holding eigenvalue-space thresholds convert
them with eig_to_sv_threshold (a square root; every use is logged).

P is built from a difference of scaled error functions, interpolated in
the Chebyshev basis at Chebyshev nodes, odd coefficients forced to zero
(evenness is exact), then renormalized affinely into [0, 1].  The
degree comes from a doubling-then-bisection search over even degrees,
verified on a dense grid, and must stay within the declared budget
p <= 40 ln(1/eps) / Delta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.special import erf, erfcinv

from .circuit import VerifierCircuit, embedded_witness_matrix
from .errors import PreconditionError
from .spectral import TIE_TOL, AcceptanceOperator

log = logging.getLogger(__name__)

DEGREE_BUDGET_FACTOR = 40.0
DEFAULT_GRID_SIZE = 10001
_SAFETY = 1e-9


@dataclass(frozen=True)
class RectanglePolynomial:
    """Even Chebyshev-basis polynomial, ~1 outside the band, ~0 inside.

    Guarantees (verified on the construction grid): |P| <= 1 on [-1, 1],
    P in [1-eps, 1] for |x| >= t + delta, and P in [0, eps] for
    |x| <= t - delta.
    """

    coefficients: np.ndarray
    degree: int
    t: float
    delta: float
    eps: float

    def __call__(self, x) -> np.ndarray:
        return cheb.chebval(x, self.coefficients)


def degree_budget(delta: float, eps: float) -> int:
    """Largest degree the construction may use for these parameters."""
    return int(math.ceil(DEGREE_BUDGET_FACTOR * math.log(1.0 / eps) / delta))


def _verification_grid(t: float, delta: float, grid_size: int) -> np.ndarray:
    pts = np.linspace(-1.0, 1.0, grid_size)
    edges = np.array([t - delta, t + delta, t, 0.0])
    pts = np.concatenate([pts, edges, -edges])
    return np.unique(np.clip(pts, -1.0, 1.0))


def _target(t: float, k: float, x: np.ndarray) -> np.ndarray:
    # 1 outside [-t, t], 0 inside, transitions of width ~1/k; even in x
    return 1.0 + 0.5 * (erf(k * (x - t)) - erf(k * (x + t)))


def _candidate(target, degree: int) -> np.ndarray:
    coeffs = cheb.chebinterpolate(target, degree)
    coeffs[1::2] = 0.0  # evenness is exact by construction
    # affine renormalization into [0, 1]: P = (Q + d) / (1 + 2d)
    probe = cheb.chebval(np.linspace(-1.0, 1.0, 2048), coeffs)
    d = max(0.0, -float(probe.min()), float(probe.max()) - 1.0) + _SAFETY
    coeffs = coeffs / (1.0 + 2.0 * d)
    coeffs[0] += d / (1.0 + 2.0 * d)
    return coeffs


def _passes(
    coeffs: np.ndarray, grid: np.ndarray, t: float, delta: float, eps: float
) -> bool:
    vals = cheb.chebval(grid, coeffs)
    if np.any(np.abs(vals) > 1.0):
        return False
    outer = np.abs(grid) >= t + delta
    inner = np.abs(grid) <= t - delta
    if np.any(vals[outer] < 1.0 - eps):
        return False
    if np.any(vals[inner] < 0.0) or np.any(vals[inner] > eps):
        return False
    return True


def rect_poly(
    t: float, delta: float, eps: float, *, grid_size: int = DEFAULT_GRID_SIZE
) -> RectanglePolynomial:
    """Construct the rectangle polynomial for band center t, half-width delta.

    Fails with PreconditionError when the parameters are infeasible
    (delta must leave room on both sides of t) or when no degree within
    the budget passes the grid verification.
    """
    if not 0.0 < t < 1.0:
        raise PreconditionError(f"band center t must lie in (0, 1), got {t}")
    if not 0.0 < delta < min(t, 1.0 - t):
        raise PreconditionError(
            f"half-width delta must lie in (0, min(t, 1-t)) = "
            f"(0, {min(t, 1.0 - t)}), got {delta}"
        )
    if not 0.0 < eps < 0.5:
        raise PreconditionError(f"eps must lie in (0, 0.5), got {eps}")
    if grid_size < 10**4:
        raise PreconditionError(f"verification grid needs >= 10^4 points, got {grid_size}")
    budget = degree_budget(delta, eps)
    budget_even = budget if budget % 2 == 0 else budget - 1
    k = float(erfcinv(eps / 2.0)) / delta
    grid = _verification_grid(t, delta, grid_size)

    def build(degree: int) -> np.ndarray:
        return _candidate(lambda x: _target(t, k, x), degree)

    # doubling phase: find some even degree that passes
    degree = 4
    passing: int | None = None
    last_failing = 0
    while True:
        coeffs = build(degree)
        if _passes(coeffs, grid, t, delta, eps):
            passing = degree
            break
        last_failing = degree
        if degree >= budget_even:
            raise PreconditionError(
                f"no rectangle polynomial up to the degree budget {budget} "
                f"meets (t={t}, delta={delta}, eps={eps})"
            )
        degree = min(2 * degree, budget_even)
    # bisection phase: minimal passing even degree in (last_failing, passing]
    lo, hi = last_failing, passing
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid -= mid % 2
        if mid <= lo:
            break
        if _passes(build(mid), grid, t, delta, eps):
            hi = mid
        else:
            lo = mid
    coeffs = build(hi)
    return RectanglePolynomial(coefficients=coeffs, degree=hi, t=t, delta=delta, eps=eps)


def grid_report(poly: RectanglePolynomial, grid_size: int = DEFAULT_GRID_SIZE) -> dict:
    """Measured property margins on a fresh verification grid."""
    grid = _verification_grid(poly.t, poly.delta, grid_size)
    vals = poly(grid)
    outer = np.abs(grid) >= poly.t + poly.delta
    inner = np.abs(grid) <= poly.t - poly.delta
    violations = int(
        np.count_nonzero(np.abs(vals) > 1.0)
        + np.count_nonzero(vals[outer] < 1.0 - poly.eps)
        + np.count_nonzero(vals[inner] < 0.0)
        + np.count_nonzero(vals[inner] > poly.eps)
    )
    return {
        "grid_points": int(grid.size),
        "max_abs": float(np.abs(vals).max()),
        "outer_min": float(vals[outer].min()),
        "inner_max": float(vals[inner].max()),
        "inner_min": float(vals[inner].min()),
        "violations": violations,
    }


class BlockEncoding:
    """The half-block U with U'U equal to the acceptance operator."""

    def __init__(self, matrix: np.ndarray, num_witness: int):
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.shape[1] != 1 << num_witness:
            raise PreconditionError(
                f"block encoding for {num_witness} witness qubits needs "
                f"{1 << num_witness} columns, got {matrix.shape[1]}"
            )
        if matrix.shape[0] < matrix.shape[1]:
            raise PreconditionError("block encoding cannot be wider than tall")
        self.matrix = matrix
        self.num_witness = num_witness
        self._svd: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @property
    def svd(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._svd is None:
            self._svd = np.linalg.svd(self.matrix, full_matrices=False)
        return self._svd

    @property
    def singular_values(self) -> np.ndarray:
        """All 2**w singular values, descending, in [0, 1] up to rounding."""
        return self.svd[1]


def build_block_encoding(circuit: VerifierCircuit, x: str = "") -> BlockEncoding:
    """Output-block of the circuit on the embedded witness register."""
    ve = embedded_witness_matrix(circuit, x)
    half = ve.shape[0] // 2
    return BlockEncoding(ve[half:], circuit.num_witness)


def eig_to_sv_threshold(value: float) -> float:
    """Convert an eigenvalue-space threshold to singular-value space."""
    if not 0.0 <= value <= 1.0:
        raise PreconditionError(f"threshold must lie in [0, 1], got {value}")
    converted = math.sqrt(value)
    log.info("eigenvalue threshold %.12g converted to singular-value %.12g", value, converted)
    return converted


def apply_svt(encoding: BlockEncoding, poly: RectanglePolynomial) -> AcceptanceOperator:
    """Amplified acceptance operator V P(Sigma)^2 V' from the SVD of U."""
    if np.any(poly.coefficients[1::2] != 0.0):
        raise PreconditionError("singular value transformation needs an even polynomial")
    _, sigma, vh = encoding.svd
    amplified_eigs = poly(np.clip(sigma, 0.0, 1.0)) ** 2
    mat = (vh.conj().T * amplified_eigs) @ vh
    return AcceptanceOperator(mat, encoding.num_witness)


@dataclass(frozen=True)
class SandwichBounds:
    """Exact-count bracket around the amplified trace."""

    n_geq_c: int
    n_geq_s: int
    lower: float
    upper: float
    trace_amplified: float
    sigma_in_gap: int
    satisfied: bool


def sandwich_bounds(
    encoding: BlockEncoding,
    c: float,
    s: float,
    eps: float,
    amplified: AcceptanceOperator,
) -> SandwichBounds:
    """Check Tr D against the counting sandwich at thresholds (c, s)."""
    sigma = encoding.singular_values
    dim = float(1 << encoding.num_witness)
    n_c = int(np.count_nonzero(sigma >= c - TIE_TOL))
    n_s = int(np.count_nonzero(sigma >= s - TIE_TOL))
    in_gap = int(np.count_nonzero((sigma > s + TIE_TOL) & (sigma < c - TIE_TOL)))
    trace = float(np.real(np.trace(amplified.matrix)))
    lower = n_c - (2.0 * eps - eps * eps) * dim
    upper = n_s + eps * eps * dim
    satisfied = bool(lower - 1e-9 <= trace <= upper + 1e-9)
    return SandwichBounds(
        n_geq_c=n_c,
        n_geq_s=n_s,
        lower=lower,
        upper=upper,
        trace_amplified=trace,
        sigma_in_gap=in_gap,
        satisfied=satisfied,
    )


def amplified_acceptance(
    circuit: VerifierCircuit, x: str, c: float, s: float, eps: float
) -> AcceptanceOperator:
    """Amplify the circuit's acceptance operator at singular-value thresholds.

    Thresholds are read in singular-value space; convert eigenvalue-space
    thresholds with eig_to_sv_threshold first.
    """
    if not 0.0 < s < c < 1.0:
        raise PreconditionError(
            f"need 0 < s < c < 1 for a realizable rectangle, got c={c}, s={s}"
        )
    poly = rect_poly((c + s) / 2.0, (c - s) / 2.0, eps)
    return apply_svt(build_block_encoding(circuit, x), poly)
