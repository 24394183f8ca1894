"""The quantum locker protocol.

A locker stores an m-bit message in message qubits and holds the secret
rotation angles (theta1, theta2, theta3) per password qubit.  The one-time
password is the n-qubit product state R|0...0> with R = Rz(theta3) Ry(theta2)
Rx(theta1) per qubit.  An unlock attempt undoes the rotation, runs one
verification box per password qubit, measures them, and transfers the message
to blank qubits through multi-controlled NOTs that fire only when every
measured password qubit reads 0.  The verification measurement collapses the
password register, so a password cannot be replayed.

Angle secrets live only in :class:`OtpParams`; logs carry a digest of the
angles, never their values.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .gates import build_controlled0_rx, rx, ry, rz, x
from .rng import RandomStream
from .statevector import (
    StateVector,
    apply_gate,
    basis_state,
    combine,
    measure_qubit,
    new_state,
    qubit_probabilities,
)
from .verification import (
    STRICT_ABORT,
    Trajectory,
    VerificationParams,
)


class InvalidMessageError(ValueError):
    """The message bit string is empty, non-binary, or all zeros."""


class PasswordConsumedError(RuntimeError):
    """A password register was presented to the same locker twice."""


_EIGENSTATE_TOL = 1e-12


@dataclass(frozen=True)
class OtpParams:
    """Secret rotation angles, one (theta1, theta2, theta3) triple per qubit."""

    triples: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        triples = tuple(
            (float(a), float(b), float(c)) for a, b, c in self.triples
        )
        if not triples:
            raise ValueError("need at least one angle triple")
        for triple in triples:
            for angle in triple:
                if not -math.pi <= angle <= math.pi:
                    raise ValueError(
                        f"angle {angle} outside [-pi, pi]"
                    )
        object.__setattr__(self, "triples", triples)

    @property
    def n_qubits(self) -> int:
        return len(self.triples)

    @classmethod
    def random(cls, n_qubits: int, rng: RandomStream) -> OtpParams:
        """Fresh secret: every angle uniform over [-pi, pi]."""
        triples = tuple(
            tuple(float(rng.uniform(-math.pi, math.pi)) for _ in range(3))
            for _ in range(n_qubits)
        )
        return cls(triples)

    def digest(self) -> str:
        """Short stable hash of the angles, safe to log."""
        payload = ";".join(
            f"{a!r},{b!r},{c!r}" for a, b, c in self.triples
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class LockerState:
    """Message qubits plus the registered verification secrets."""

    message_bits: str
    params: OtpParams
    verification: VerificationParams
    message_state: StateVector
    consumed_passwords: list[StateVector] = field(default_factory=list)

    @property
    def m_bits(self) -> int:
        return len(self.message_bits)

    @property
    def n_password_qubits(self) -> int:
        return self.params.n_qubits


@dataclass
class UnlockResult:
    accepted: bool
    retrieved_bits: str
    trajectories: tuple[Trajectory, ...]


def store_message(bits: str, params: OtpParams,
                  verification: VerificationParams | None = None) -> LockerState:
    """Arm a locker: encode the message qubits and register the secrets.

    Message qubits start in |0> and are flipped with X gates where the bit
    string says 1.  An all-zero message is rejected as carrying no
    information (a failed unlock also leaves all-zero blanks).
    """
    if not bits or any(c not in "01" for c in bits):
        raise InvalidMessageError(f"message must be a nonempty 0/1 string, got {bits!r}")
    if set(bits) == {"0"}:
        raise InvalidMessageError("all-zero message is not valid")
    state = new_state(len(bits))
    for k, c in enumerate(bits):
        if c == "1":
            state = apply_gate(state, x(k))
    if verification is None:
        verification = VerificationParams()
    return LockerState(bits, params, verification, state)


def apply_rotation(state: StateVector, params: OtpParams) -> StateVector:
    """Per-qubit R = Rz(theta3) Ry(theta2) Rx(theta1)."""
    if state.n_qubits != params.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, params cover {params.n_qubits}"
        )
    for k, (t1, t2, t3) in enumerate(params.triples):
        state = apply_gate(state, rx(t1, k))
        state = apply_gate(state, ry(t2, k))
        state = apply_gate(state, rz(t3, k))
    return state


def apply_inverse_rotation(state: StateVector, params: OtpParams) -> StateVector:
    """Per-qubit R^-1 = Rx(-theta1) Ry(-theta2) Rz(-theta3)."""
    if state.n_qubits != params.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, params cover {params.n_qubits}"
        )
    for k, (t1, t2, t3) in enumerate(params.triples):
        state = apply_gate(state, rz(-t3, k))
        state = apply_gate(state, ry(-t2, k))
        state = apply_gate(state, rx(-t1, k))
    return state


def generate_otp(params: OtpParams) -> StateVector:
    """The one-time password state: R applied qubit-wise to |0...0>."""
    return apply_rotation(new_state(params.n_qubits), params)


def _run_boxes(reg: StateVector, n: int, verification: VerificationParams,
               rng: RandomStream) -> tuple[list[Trajectory], list[int]]:
    """Run one verification box per password qubit on the joint register.

    ``reg`` holds the n password qubits plus one shared ancilla at index n,
    reset to |0> (conditional flip) after every readout.  Returns the
    per-qubit trajectories and final measurement outcomes.
    """
    theta = verification.theta
    strict = verification.click_policy == STRICT_ABORT
    trajectories: list[Trajectory] = []
    finals: list[int] = []
    for k in range(n):
        gate = build_controlled0_rx(theta, control=k, target=n)
        outcomes: list[int] = []
        p1s: list[float] = []
        for _ in range(verification.iterations):
            reg = apply_gate(reg, gate)
            p1s.append(qubit_probabilities(reg, n)[1])
            outcome, _, reg = measure_qubit(reg, n, "z", rng)
            outcomes.append(outcome)
            if outcome == 1:
                reg = apply_gate(reg, x(n))  # ancilla reset for reuse
                if strict:
                    break
        final, _, reg = measure_qubit(reg, k, "z", rng)
        clicked = any(outcomes)
        accepted = final == 0 and not (strict and clicked)
        trajectories.append(Trajectory(outcomes, p1s, final, accepted))
        finals.append(final)
    return trajectories, finals


def attempt_unlock(locker: LockerState, password: StateVector,
                   rng: RandomStream,
                   blanks: StateVector | None = None) -> UnlockResult:
    """Present a password register to the locker.

    The register is collapsed in place by the verification measurements (the
    one-time property) and may not be presented to this locker again.  Blank
    qubits default to |0...0> and must be supplied that way.  Message
    transfer happens through m multi-controlled NOTs, each controlled on
    every measured password qubit being 0 plus the matching message qubit;
    with the strict click policy, any click aborts before the transfer.
    """
    n = locker.n_password_qubits
    m = locker.m_bits
    if password.n_qubits != n:
        raise ValueError(
            f"password has {password.n_qubits} qubits, locker expects {n}"
        )
    if any(prev is password for prev in locker.consumed_passwords):
        raise PasswordConsumedError("password register already consumed")
    if blanks is None:
        blanks = new_state(m)
    if blanks.n_qubits != m:
        raise ValueError(f"blank register must have {m} qubits")
    if abs(blanks.amplitudes[0] - 1.0) > 1e-12:
        raise ValueError("blank qubits must be supplied in the |0...0> state")

    locker.consumed_passwords.append(password)
    phi = apply_inverse_rotation(password, locker.params)
    reg = combine(phi, new_state(1))
    trajectories, finals = _run_boxes(reg, n, locker.verification, rng)

    # the presented register is now the measured eigenstate
    password.amplitudes[:] = basis_state(finals).amplitudes

    accepted = all(t.accepted for t in trajectories)
    strict = locker.verification.click_policy == STRICT_ABORT
    aborted = strict and any(t.clicked() for t in trajectories)

    if aborted:
        retrieved = "0" * m
    else:
        # transfer register: password outcomes | message qubits | blanks
        transfer = combine(basis_state(finals),
                           combine(locker.message_state.copy(), blanks))
        zero_controls = tuple((k, 0) for k in range(n))
        for i in range(m):
            controls = zero_controls + ((n + i, 1),)
            transfer = apply_gate(transfer, x(n + m + i, controls=controls))
        bits = []
        for i in range(m):
            outcome, _, transfer = measure_qubit(transfer, n + m + i, "z", rng)
            bits.append("1" if outcome else "0")
        retrieved = "".join(bits)
    blanks.amplitudes[:] = basis_state(retrieved).amplitudes
    return UnlockResult(accepted, retrieved, tuple(trajectories))


def otp_consumed_check(result: UnlockResult | None,
                       password: StateVector) -> bool:
    """True iff every qubit of the register sits in a z eigenstate.

    A consumed one-time password has been fully measured, so replaying it
    can only present |0> or |1> per qubit.  ``result`` is cross-checked for
    width when given.
    """
    if result is not None and len(result.trajectories) != password.n_qubits:
        raise ValueError("result does not match the password register width")
    for k in range(password.n_qubits):
        p0, p1 = qubit_probabilities(password, k)
        if min(p0, p1) > _EIGENSTATE_TOL:
            return False
    return True


def session_log(locker: LockerState, result: UnlockResult) -> list[str]:
    """Line-oriented unlock log; carries an angle digest, never the angles."""
    lines = [
        f"locker,m={locker.m_bits},n={locker.n_password_qubits},"
        f"theta_hash={locker.params.digest()},"
        f"policy={locker.verification.click_policy}"
    ]
    for k, traj in enumerate(result.trajectories):
        lines.append(
            f"qubit={k},outcomes={traj.outcomes_bitstring()},"
            f"final={traj.final_system_outcome},accepted={int(traj.accepted)}"
        )
    lines.append(
        f"result,accepted={int(result.accepted)},retrieved={result.retrieved_bits}"
    )
    return lines
