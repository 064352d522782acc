"""Verifier circuits over the {H, S, Toffoli} gate set.

A verifier acts on three registers laid out ancilla-first: qubits
[0, a) are ancillas with qubit 0 the designated output, qubits
[a, a+n) hold the classical input, and qubits [a+n, a+n+w) hold the
witness.  Basis states are indexed big-endian, so qubit 0 is the most
significant bit and the index of |b0 b1 ... b_{Q-1}> is the integer
with binary digits b0 b1 ... b_{Q-1}.  That choice makes the
output-qubit projector the bottom half of the index range, which the
spectral and block-encoding code exploits.

Circuits are loaded from the qcv v1 text format:

    # optional comments and blank lines
    registers: ancilla=1 input=0 witness=2
    H 0
    TOF 1 2 0

Gate lines are `H q`, `S q`, `SDG q`, `Z q`, `X q`, `TOF c1 c2 t`;
`#` starts a comment anywhere.  SDG, Z and X are sugar, expanded at
parse time into the core set (S**3, S**2, and H S S H respectively),
so derived gate counts always refer to the expanded circuit.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, CircuitFormatError, InvariantViolation, PreconditionError
from .limits import SIM_QUBIT_CAP, dense_qubit_cap

CORE_KINDS = ("H", "S", "TOF")

_SUGAR = {
    "X": ("H", "S", "S", "H"),
    "Z": ("S", "S"),
    "SDG": ("S", "S", "S"),
}

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

NORM_TOL = 1e-9


@dataclass(frozen=True)
class Gate:
    """One core gate: kind in {H, S, TOF} acting on `qubits`."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in CORE_KINDS:
            raise PreconditionError(f"unknown core gate kind {self.kind!r}")
        arity = 3 if self.kind == "TOF" else 1
        if len(self.qubits) != arity:
            raise PreconditionError(
                f"{self.kind} takes {arity} qubit(s), got {self.qubits}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise PreconditionError(f"gate qubits must be distinct, got {self.qubits}")


@dataclass(frozen=True)
class VerifierCircuit:
    """Gate list plus register sizes; gates are already core-set only."""

    num_ancilla: int
    num_input: int
    num_witness: int
    gates: tuple[Gate, ...]

    def __post_init__(self) -> None:
        if self.num_ancilla < 1:
            raise PreconditionError("at least one ancilla (the output qubit) is required")
        if self.num_input < 0 or self.num_witness < 0:
            raise PreconditionError("register sizes must be nonnegative")
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise PreconditionError(
                        f"gate {g.kind} {g.qubits} references qubit {q}, "
                        f"but the circuit has {self.num_qubits} qubits"
                    )

    @property
    def num_qubits(self) -> int:
        return self.num_ancilla + self.num_input + self.num_witness

    @property
    def gate_count(self) -> int:
        """Total gates after sugar expansion (the parameter t)."""
        return len(self.gates)

    @property
    def h_count(self) -> int:
        """Hadamard count after sugar expansion (the parameter h)."""
        return sum(1 for g in self.gates if g.kind == "H")

    def to_qcv(self) -> str:
        """Canonical qcv text: header plus one core gate per line."""
        lines = [
            f"registers: ancilla={self.num_ancilla} "
            f"input={self.num_input} witness={self.num_witness}"
        ]
        lines.extend(f"{g.kind} {' '.join(str(q) for q in g.qubits)}" for g in self.gates)
        return "\n".join(lines) + "\n"


def circuit_hash(circuit: VerifierCircuit) -> str:
    """sha256 of the canonical qcv text; stable across processes."""
    return hashlib.sha256(circuit.to_qcv().encode("utf-8")).hexdigest()


def pad_witness(circuit: VerifierCircuit, extra: int) -> VerifierCircuit:
    """Append `extra` untouched witness qubits (tensoring with identity)."""
    if extra < 0:
        raise PreconditionError(f"cannot pad by {extra} qubits")
    return VerifierCircuit(
        circuit.num_ancilla,
        circuit.num_input,
        circuit.num_witness + extra,
        circuit.gates,
    )


_HEADER_RE = re.compile(r"^registers:\s*ancilla=(\d+)\s+input=(\d+)\s+witness=(\d+)$")


def parse_circuit(text: str) -> VerifierCircuit:
    """Parse qcv v1 text, expanding sugar gates into the core set."""
    header: tuple[int, int, int] | None = None
    gates: list[Gate] = []
    num_qubits = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            m = _HEADER_RE.match(line)
            if m is None:
                raise CircuitFormatError(
                    f"line {lineno}: expected 'registers: ancilla=<a> input=<n> "
                    f"witness=<w>' header, got {line!r}"
                )
            header = (int(m.group(1)), int(m.group(2)), int(m.group(3)))
            if header[0] < 1:
                raise CircuitFormatError(f"line {lineno}: ancilla=0 is not allowed")
            num_qubits = sum(header)
            continue
        tokens = line.split()
        kind = tokens[0].upper()
        args = tokens[1:]
        try:
            qubits = tuple(int(tok) for tok in args)
        except ValueError:
            raise CircuitFormatError(
                f"line {lineno}: qubit indices must be integers, got {line!r}"
            ) from None
        for q in qubits:
            if not 0 <= q < num_qubits:
                raise CircuitFormatError(
                    f"line {lineno}: qubit {q} out of range for {num_qubits} qubits"
                )
        if kind == "TOF":
            if len(qubits) != 3:
                raise CircuitFormatError(f"line {lineno}: TOF takes c1 c2 t, got {line!r}")
            if len(set(qubits)) != 3:
                raise CircuitFormatError(f"line {lineno}: TOF qubits must be distinct")
            gates.append(Gate("TOF", qubits))
        elif kind in ("H", "S"):
            if len(qubits) != 1:
                raise CircuitFormatError(f"line {lineno}: {kind} takes one qubit")
            gates.append(Gate(kind, qubits))
        elif kind in _SUGAR:
            if len(qubits) != 1:
                raise CircuitFormatError(f"line {lineno}: {kind} takes one qubit")
            gates.extend(Gate(k, qubits) for k in _SUGAR[kind])
        else:
            raise CircuitFormatError(f"line {lineno}: unknown gate mnemonic {tokens[0]!r}")
    if header is None:
        raise CircuitFormatError("no registers header found")
    return VerifierCircuit(header[0], header[1], header[2], tuple(gates))


def load_circuit(path: str) -> VerifierCircuit:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise PreconditionError(f"cannot read circuit file {path}: {exc}") from exc
    return parse_circuit(text)


def _bitpos(num_qubits: int, qubit: int) -> int:
    # qubit 0 is the most significant bit of the basis index
    return num_qubits - 1 - qubit


def _apply_gate_rows(mat: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    """Multiply the gate unitary into the row index of a (2**Q, m) array.

    Also accepts a bare statevector of shape (2**Q,).  Always returns a
    fresh array; the input is never mutated.
    """
    dim = 1 << num_qubits
    if gate.kind == "H":
        q = gate.qubits[0]
        view = np.ascontiguousarray(mat).reshape(1 << q, 2, -1)
        out = np.empty_like(view)
        np.add(view[:, 0], view[:, 1], out=out[:, 0])
        np.subtract(view[:, 0], view[:, 1], out=out[:, 1])
        out *= _INV_SQRT2
        return out.reshape(mat.shape)
    if gate.kind == "S":
        q = gate.qubits[0]
        out = mat.astype(np.complex128, copy=True)
        view = out.reshape(1 << q, 2, -1)
        view[:, 1] *= 1j
        return out.reshape(mat.shape)
    # Toffoli: permutation of rows where both control bits are set
    c1, c2, t = gate.qubits
    b1, b2, bt = (_bitpos(num_qubits, q) for q in (c1, c2, t))
    idx = np.arange(dim)
    lower = ((idx >> b1) & 1).astype(bool) & ((idx >> b2) & 1).astype(bool) & (
        ((idx >> bt) & 1) == 0
    )
    src0 = idx[lower]
    src1 = src0 | (1 << bt)
    out = mat.astype(np.complex128, copy=True)
    out[src0] = mat[src1]
    out[src1] = mat[src0]
    return out


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply one gate to a statevector, returning a new statevector."""
    dim = state.shape[0]
    num_qubits = dim.bit_length() - 1
    if 1 << num_qubits != dim:
        raise PreconditionError(f"state length {dim} is not a power of two")
    for q in gate.qubits:
        if not 0 <= q < num_qubits:
            raise PreconditionError(f"gate qubit {q} out of range for {num_qubits} qubits")
    return _apply_gate_rows(state, gate, num_qubits)


def _parse_bits(bits: str, length: int, what: str) -> int:
    if len(bits) != length:
        raise PreconditionError(
            f"{what} must be {length} bit(s), got {len(bits)} ({bits!r})"
        )
    if bits and set(bits) - {"0", "1"}:
        raise PreconditionError(f"{what} must be a 0/1 string, got {bits!r}")
    return int(bits, 2) if bits else 0


def basis_string(circuit: VerifierCircuit, x: str, y: str) -> str:
    """Full-register basis label: ancillas at 0, input x, witness y."""
    _parse_bits(x, circuit.num_input, "input bits")
    _parse_bits(y, circuit.num_witness, "witness bits")
    return "0" * circuit.num_ancilla + x + y


def simulate(circuit: VerifierCircuit, basis: str) -> np.ndarray:
    """Run the circuit on a computational basis state, returning the state.

    `basis` assigns one bit per qubit in qubit order (qubit 0 first).
    """
    q = circuit.num_qubits
    if q > SIM_QUBIT_CAP:
        raise CapExceeded(f"{q} qubits exceeds the {SIM_QUBIT_CAP}-qubit simulation cap")
    index = _parse_bits(basis, q, "basis assignment")
    state = np.zeros(1 << q, dtype=np.complex128)
    state[index] = 1.0
    for gate in circuit.gates:
        state = _apply_gate_rows(state, gate, q)
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > NORM_TOL:
        raise InvariantViolation(f"statevector norm drifted to {norm}")
    return state


def circuit_unitary(circuit: VerifierCircuit) -> np.ndarray:
    """Dense unitary of the whole circuit (gate order: first gate rightmost)."""
    q = circuit.num_qubits
    cap = dense_qubit_cap()
    if q > cap:
        raise CapExceeded(f"{q} qubits exceeds the {cap}-qubit dense cap")
    mat = np.eye(1 << q, dtype=np.complex128)
    for gate in circuit.gates:
        mat = _apply_gate_rows(mat, gate, q)
    return mat


def embedded_witness_matrix(circuit: VerifierCircuit, x: str) -> np.ndarray:
    """Circuit output on every embedded witness state, as a (2**Q, 2**w) array.

    Column y is the statevector the circuit produces from ancillas at
    |0...0>, input register at |x>, witness register at basis state |y>.
    """
    q = circuit.num_qubits
    cap = dense_qubit_cap()
    if q > cap:
        raise CapExceeded(f"{q} qubits exceeds the {cap}-qubit dense cap")
    x_val = _parse_bits(x, circuit.num_input, "input bits")
    w = circuit.num_witness
    dim_w = 1 << w
    mat = np.zeros((1 << q, dim_w), dtype=np.complex128)
    base = x_val << w
    mat[base : base + dim_w, :] = np.eye(dim_w)
    for gate in circuit.gates:
        mat = _apply_gate_rows(mat, gate, q)
    return mat
