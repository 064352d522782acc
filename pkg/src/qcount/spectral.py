"""Exact spectral oracle for verifier acceptance operators.

The acceptance operator of a verifier V on input x is the 2**w x 2**w
matrix  A = E' V' P V E,  where E embeds the witness register alongside
ancillas at |0> and input at |x>, P projects the output qubit onto |1>,
and primes denote conjugate transpose.  A is Hermitian and positive
semidefinite with spectrum in [0, 1]; its eigenvalue <y|A|y> diagonal
entries are the acceptance probabilities of individual witnesses, and
its trace equals the total acceptance weight that every estimator in
this package tries to approximate.

Everything here is dense and exact (up to machine precision): operators
are built column-by-column from the statevector simulator, then
eigendecomposed once and cached.  Eigenvalue counts use closed
thresholds with a 1e-12 tie tolerance, so an eigenvalue numerically at
a threshold counts as above it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import VerifierCircuit, basis_string, embedded_witness_matrix, simulate
from .errors import InvariantViolation, PreconditionError

HERM_TOL = 1e-9
EIG_CLAMP_TOL = 1e-9
TIE_TOL = 1e-12


class AcceptanceOperator:
    """Hermitian PSD matrix on the witness register with spectrum in [0, 1].

    Eigenvalues are computed lazily, once, and stored sorted descending.
    Values inside [-1e-9, 0) and (1, 1+1e-9] are clamped to the boundary;
    anything further out fails loudly, because no rounding story explains
    it.  Instances are treated as immutable after construction.
    """

    def __init__(self, matrix: np.ndarray, num_witness: int):
        matrix = np.asarray(matrix, dtype=np.complex128)
        dim = 1 << num_witness
        if matrix.shape != (dim, dim):
            raise PreconditionError(
                f"operator for {num_witness} witness qubits must be "
                f"{dim}x{dim}, got {matrix.shape}"
            )
        herm_gap = float(np.max(np.abs(matrix - matrix.conj().T))) if dim else 0.0
        if herm_gap > HERM_TOL:
            raise PreconditionError(
                f"matrix is not Hermitian within {HERM_TOL} (gap {herm_gap:.3e})"
            )
        self.matrix = matrix
        self.num_witness = num_witness
        self._eigenvalues: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return 1 << self.num_witness

    @property
    def eigenvalues(self) -> np.ndarray:
        """All 2**w eigenvalues, clamped into [0, 1], sorted descending."""
        if self._eigenvalues is None:
            vals = np.linalg.eigvalsh(self.matrix)  # ascending
            low, high = float(vals[0]), float(vals[-1])
            if low < -EIG_CLAMP_TOL or high > 1.0 + EIG_CLAMP_TOL:
                raise InvariantViolation(
                    f"eigenvalues escape [0,1] beyond tolerance: "
                    f"min {low:.3e}, max {high:.6e}"
                )
            self._eigenvalues = np.clip(vals, 0.0, 1.0)[::-1].copy()
        return self._eigenvalues

    def to_json_obj(self) -> dict:
        """Row-major dump with (real, imag) pairs per entry."""
        flat = self.matrix.reshape(-1)
        return {
            "witness_qubits": self.num_witness,
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AcceptanceOperator":
        w = int(obj["witness_qubits"])
        dim = 1 << w
        entries = obj["entries"]
        if len(entries) != dim * dim:
            raise PreconditionError(
                f"expected {dim * dim} entries for {w} witness qubits, got {len(entries)}"
            )
        mat = np.array([complex(re, im) for re, im in entries]).reshape(dim, dim)
        return cls(mat, w)


def build_acceptance_operator(circuit: VerifierCircuit, x: str = "") -> AcceptanceOperator:
    """Dense acceptance operator of the circuit on input x."""
    ve = embedded_witness_matrix(circuit, x)
    half = ve.shape[0] // 2
    block = ve[half:]  # rows with the output qubit at |1>
    mat = block.conj().T @ block
    return AcceptanceOperator(mat, circuit.num_witness)


def count_eigs_geq(op: AcceptanceOperator, a: float) -> int:
    """Number of eigenvalues >= a, ties resolved upward within 1e-12."""
    if not 0.0 <= a <= 1.0:
        raise PreconditionError(f"threshold must lie in [0, 1], got {a}")
    return int(np.count_nonzero(op.eigenvalues >= a - TIE_TOL))


def count_eigs_interval(op: AcceptanceOperator, lo: float, hi: float) -> int:
    """Number of eigenvalues in the closed interval [lo, hi]."""
    if lo > hi:
        raise PreconditionError(f"empty interval [{lo}, {hi}]")
    vals = op.eigenvalues
    return int(np.count_nonzero((vals >= lo - TIE_TOL) & (vals <= hi + TIE_TOL)))


def trace_in_interval(op: AcceptanceOperator, lo: float, hi: float) -> float:
    """Sum of eigenvalues inside the closed interval [lo, hi]."""
    if lo > hi:
        raise PreconditionError(f"empty interval [{lo}, {hi}]")
    vals = op.eigenvalues
    sel = (vals >= lo - TIE_TOL) & (vals <= hi + TIE_TOL)
    return float(vals[sel].sum())


def exact_count_interval(op: AcceptanceOperator, c: float, s: float) -> tuple[int, int]:
    """Both endpoints (N_geq_c, N_geq_s) of the exact counting interval."""
    if not 0.0 <= s < c <= 1.0:
        raise PreconditionError(f"need 0 <= s < c <= 1, got c={c}, s={s}")
    return count_eigs_geq(op, c), count_eigs_geq(op, s)


def trace_normalized(op: AcceptanceOperator) -> float:
    """Trace divided by 2**w; always in [0, 1]."""
    raw = float(np.real(np.trace(op.matrix))) / op.dim
    return min(1.0, max(0.0, raw))


def accept_probability(circuit: VerifierCircuit, x: str, y: str) -> float:
    """Probability the output qubit reads 1 on witness y (a diagonal entry).

    Runs a single statevector simulation, so it stays available for
    circuits too wide for the dense operator build.
    """
    state = simulate(circuit, basis_string(circuit, x, y))
    half = state.shape[0] // 2
    p = float(np.real(np.vdot(state[half:], state[half:])))
    return min(1.0, max(0.0, p))


def dqc1_ancilla_bound(num_witness: int) -> int:
    """Largest ancilla count the one-clean-qubit regime tolerates."""
    m = max(num_witness, 2)
    return (m - 1).bit_length() + 2


def validate_dqc1(circuit: VerifierCircuit) -> bool:
    """Whether the circuit qualifies for the no-input, few-ancilla regime."""
    if circuit.num_input != 0:
        return False
    return circuit.num_ancilla <= dqc1_ancilla_bound(circuit.num_witness)


@dataclass(frozen=True)
class SpectralCount:
    """Exact per-threshold record used when auditing noisy count oracles."""

    c: float
    s: float
    n_geq_c: int
    n_geq_s: int
    n_interval: int
    trace_interval: float

    @classmethod
    def from_operator(cls, op: AcceptanceOperator, c: float, s: float) -> "SpectralCount":
        n_c, n_s = exact_count_interval(op, c, s)
        return cls(
            c=c,
            s=s,
            n_geq_c=n_c,
            n_geq_s=n_s,
            n_interval=count_eigs_interval(op, s, c),
            trace_interval=trace_in_interval(op, s, c),
        )
