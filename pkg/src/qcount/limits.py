"""Size caps for dense linear algebra and path enumeration.

The caps keep every operation desk-scale: statevector simulation stays
under SIM_QUBIT_CAP total qubits, anything that materializes a full
unitary or eigendecomposition stays under the dense cap, and exact path
enumeration stays under PATH_BIT_CAP free bits.  The dense cap can be
raised or lowered through the QCOUNT_DENSE_CAP environment variable.
"""

import os

SIM_QUBIT_CAP = 20
DENSE_QUBIT_CAP_DEFAULT = 14
PATH_BIT_CAP = 24

_ENV_DENSE_CAP = "QCOUNT_DENSE_CAP"


def dense_qubit_cap() -> int:
    """Current dense-operation cap, honoring the environment override."""
    raw = os.environ.get(_ENV_DENSE_CAP)
    if raw is None:
        return DENSE_QUBIT_CAP_DEFAULT
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_ENV_DENSE_CAP} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{_ENV_DENSE_CAP} must be positive, got {cap}")
    return cap
