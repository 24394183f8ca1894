"""Gate descriptions, their matrices, and the weak-coupling gate.

A :class:`GateOp` is a single-qubit operation (named gate, rotation, or an
arbitrary 2x2 unitary) dressed with any number of controls.  Each control is
a ``(qubit, value)`` pair: the gate fires only on basis states where every
control qubit holds its required value, so ``(q, 0)`` is a control-on-zero
and ``(q, 1)`` the usual control-on-one.  Multi-controlled NOTs are plain
``x`` gates with several controls.

Rotation conventions (angle ``a``):

    Rx(a) = cos(a/2) I  - i sin(a/2) X
    Ry(a) = cos(a/2) I  - i sin(a/2) Y
    Rz(a) = diag(exp(-i a/2), exp(+i a/2))

Matrix-equivalence helpers compare modulo global phase, since several
constructions here (notably the weak-coupling gate) are only defined up to
one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ROTATION_KINDS = ("rx", "ry", "rz")
FIXED_KINDS = ("x", "h", "s", "sdg")
GATE_KINDS = FIXED_KINDS + ROTATION_KINDS + ("unitary",)

UNITARY_TOL = 1e-10


def _const(rows) -> np.ndarray:
    m = np.array(rows, dtype=complex)
    m.flags.writeable = False
    return m


PAULI_X = _const([[0, 1], [1, 0]])
PAULI_Y = _const([[0, -1j], [1j, 0]])
PAULI_Z = _const([[1, 0], [0, -1]])
HADAMARD = _const(np.array([[1, 1], [1, -1]]) / math.sqrt(2))
S_MATRIX = _const([[1, 0], [0, 1j]])
S_DAGGER_MATRIX = _const([[1, 0], [0, -1j]])


def rx_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(angle: float) -> np.ndarray:
    return np.array([[np.exp(-1j * angle / 2), 0], [0, np.exp(1j * angle / 2)]])


_FIXED_MATRICES = {
    "x": PAULI_X,
    "h": HADAMARD,
    "s": S_MATRIX,
    "sdg": S_DAGGER_MATRIX,
}
_ROTATION_MATRICES = {"rx": rx_matrix, "ry": ry_matrix, "rz": rz_matrix}


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.shape != (m.shape[0], m.shape[0]):
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < tol)


@dataclass(frozen=True, eq=False)
class GateOp:
    """One gate application: a 2x2 base operation plus optional controls."""

    kind: str
    target: int
    angle: float | None = None
    matrix: np.ndarray | None = None
    controls: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.target < 0:
            raise IndexError(f"negative target index {self.target}")
        if self.kind in ROTATION_KINDS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} requires a finite angle")
        if self.kind == "unitary":
            if self.matrix is None:
                raise ValueError("unitary gate requires a matrix")
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (2, 2):
                raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
            if not is_unitary(m):
                raise ValueError("matrix is not unitary within tolerance")
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)
        controls = tuple((int(q), int(v)) for q, v in self.controls)
        object.__setattr__(self, "controls", controls)
        seen = {self.target}
        for q, v in controls:
            if q < 0:
                raise IndexError(f"negative control index {q}")
            if q in seen:
                raise IndexError(f"overlapping target/control index {q}")
            seen.add(q)
            if v not in (0, 1):
                raise ValueError(f"control value must be 0 or 1, got {v}")

    def base_matrix(self) -> np.ndarray:
        """The uncontrolled 2x2 matrix this gate applies to its target."""
        if self.kind in _FIXED_MATRICES:
            return _FIXED_MATRICES[self.kind]
        if self.kind in ROTATION_KINDS:
            return _ROTATION_MATRICES[self.kind](self.angle)
        return self.matrix

    def qubits(self) -> tuple[int, ...]:
        return (self.target, *(q for q, _ in self.controls))


# -- constructors -------------------------------------------------------------

def x(target: int, controls=()) -> GateOp:
    return GateOp("x", target, controls=tuple(controls))


def h(target: int, controls=()) -> GateOp:
    return GateOp("h", target, controls=tuple(controls))


def s(target: int, controls=()) -> GateOp:
    return GateOp("s", target, controls=tuple(controls))


def sdg(target: int, controls=()) -> GateOp:
    return GateOp("sdg", target, controls=tuple(controls))


def rx(angle: float, target: int, controls=()) -> GateOp:
    return GateOp("rx", target, angle=float(angle), controls=tuple(controls))


def ry(angle: float, target: int, controls=()) -> GateOp:
    return GateOp("ry", target, angle=float(angle), controls=tuple(controls))


def rz(angle: float, target: int, controls=()) -> GateOp:
    return GateOp("rz", target, angle=float(angle), controls=tuple(controls))


def unitary(matrix, target: int, controls=()) -> GateOp:
    return GateOp("unitary", target, matrix=matrix, controls=tuple(controls))


def z(target: int, controls=()) -> GateOp:
    return unitary(PAULI_Z, target, controls)


def cnot(control: int, target: int) -> GateOp:
    return x(target, controls=((control, 1),))


# -- the weak-coupling gate ----------------------------------------------------

def build_controlled0_rx(theta: float, control: int = 0, target: int = 1) -> GateOp:
    """Rx(2*theta) on ``target``, fired when ``control`` is in state 0.

    This is the coupling step of the verification box: the system qubit
    controls (on zero) a rotation of the fresh ancilla.  It matches the
    two-qubit operator ``[Rz(theta) (x) I][cos(theta) I - i sin(theta) C0NOT]``
    up to the global phase exp(-i theta / 2).
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    return rx(2.0 * theta, target, controls=((control, 0),))


def decompose_controlled0_rx(theta: float, control: int = 0,
                             target: int = 1) -> list[GateOp]:
    """Same gate as :func:`build_controlled0_rx`, as single-qubit gates + CNOT.

    Uses the A/CNOT/B/CNOT/C controlled-rotation construction with
    ``A = Rz(-pi/2) Ry(theta)``, ``B = Ry(-theta)``, ``C = Rz(pi/2)``, and the
    control conjugated by X to flip its polarity.  The composed matrix equals
    the direct gate exactly (both live in SU(2), so no residual phase).
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    half_pi = math.pi / 2
    return [
        x(control),
        rz(half_pi, target),
        cnot(control, target),
        ry(-theta, target),
        cnot(control, target),
        ry(theta, target),
        rz(-half_pi, target),
        x(control),
    ]


# -- full matrices and phase-aware comparison ----------------------------------

def gate_matrix(gate: GateOp, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of ``gate`` acting on an n-qubit register.

    Built column by column from the gate's action on basis states; intended
    for verification and debugging at small n.
    """
    from .statevector import StateVector, apply_gate

    dim = 1 << n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[col] = 1.0
        out[:, col] = apply_gate(StateVector(n_qubits, amps), gate).amplitudes
    return out


def sequence_matrix(gates: list[GateOp], n_qubits: int) -> np.ndarray:
    """Matrix of a gate list applied in order (first gate acts first)."""
    dim = 1 << n_qubits
    out = np.eye(dim, dtype=complex)
    for g in gates:
        out = gate_matrix(g, n_qubits) @ out
    return out


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max entrywise |a - e^{i phi} b| with phi chosen to maximize overlap."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    overlap = np.vdot(b, a)
    if abs(overlap) > 1e-300:
        b = b * (overlap / abs(overlap))
    return float(np.max(np.abs(a - b)))


def format_matrix_dump(m: np.ndarray) -> str:
    """Row-major text dump: one row per line, 're im' pairs per entry."""
    m = np.asarray(m, dtype=complex)
    lines = []
    for row in m:
        lines.append(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
    return "\n".join(lines)
