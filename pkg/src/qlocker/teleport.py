"""Single-qubit teleportation over a simulated entangled pair.

The sender holds the payload qubit and one half of a shared Bell pair; a
joint measurement yields two classical bits, and the receiver recovers the
payload exactly by applying X (keyed by ``m2``, the parity-side bit) and
then Z (keyed by ``m1``, the sign-side bit).  Channels are strictly
single-use: teleporting measures the source qubit, destroying its state.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

import numpy as np

from .gates import cnot, h, x, z
from .rng import RandomStream
from .statevector import StateVector, apply_gate, combine, measure_qubit, new_state


class ChannelConsumedError(RuntimeError):
    """A teleportation channel was used a second time."""


def make_bell_pair() -> StateVector:
    """The shared pair (|00> + |11>)/sqrt(2)."""
    state = new_state(2)
    state = apply_gate(state, h(0))
    return apply_gate(state, cnot(0, 1))


@dataclass(frozen=True)
class TeleportRecord:
    """Classical residue of one teleportation."""

    channel_id: str
    classical_bits: tuple[int, int]
    consumed: bool = True

    def record_line(self) -> str:
        m1, m2 = self.classical_bits
        return f"{self.channel_id},{m1},{m2}"


_channel_counter = itertools.count()
_channel_lock = threading.Lock()


class TeleportChannel:
    """One pre-shared Bell pair plus its single-use bookkeeping."""

    def __init__(self, channel_id: str | None = None):
        if channel_id is None:
            with _channel_lock:
                channel_id = f"ch{next(_channel_counter):06d}"
        self.channel_id = channel_id
        self.pair = make_bell_pair()
        self.consumed = False


def open_channel(channel_id: str | None = None) -> TeleportChannel:
    return TeleportChannel(channel_id)


def teleport(psi: StateVector, channel: TeleportChannel,
             rng: RandomStream) -> tuple[TeleportRecord, StateVector]:
    """Teleport a one-qubit state through ``channel``.

    Returns the classical record and the corrected received state, which
    equals ``psi`` up to global phase.  The source register is overwritten
    with its measured eigenstate (its information is destroyed), and the
    channel is marked consumed; a second use raises.
    """
    if psi.n_qubits != 1:
        raise ValueError("teleport carries exactly one qubit")
    if channel.consumed:
        raise ChannelConsumedError(
            f"channel {channel.channel_id} already consumed"
        )
    channel.consumed = True
    # qubit 0: payload; qubit 1: sender half; qubit 2: receiver half
    joint = combine(psi, channel.pair)
    joint = apply_gate(joint, cnot(0, 1))
    joint = apply_gate(joint, h(0))
    m1, _, joint = measure_qubit(joint, 0, "z", rng)
    m2, _, joint = measure_qubit(joint, 1, "z", rng)
    if m2:
        joint = apply_gate(joint, x(2))
    if m1:
        joint = apply_gate(joint, z(2))
    base = m1 + (m2 << 1)
    received = StateVector(
        1, np.array([joint.amplitudes[base], joint.amplitudes[base + 4]])
    )
    # the measured source is left as a z eigenstate
    psi.amplitudes[:] = 0.0
    psi.amplitudes[m1] = 1.0
    record = TeleportRecord(channel.channel_id, (m1, m2))
    return record, received


def enumerate_teleport_branches(
        psi: StateVector) -> dict[tuple[int, int], tuple[float, StateVector]]:
    """All four (m1, m2) branches with their probabilities and corrected states.

    Pure analysis helper: forces each measurement pair by projection instead
    of sampling, and consumes no channel.
    """
    if psi.n_qubits != 1:
        raise ValueError("teleport carries exactly one qubit")
    joint = combine(psi, make_bell_pair())
    joint = apply_gate(joint, cnot(0, 1))
    joint = apply_gate(joint, h(0))
    branches = {}
    for m1 in (0, 1):
        for m2 in (0, 1):
            base = m1 + (m2 << 1)
            block = joint.amplitudes[[base, base + 4]].copy()
            prob = float(np.vdot(block, block).real)
            block /= np.sqrt(prob)
            received = StateVector(1, block)
            if m2:
                received = apply_gate(received, x(0))
            if m1:
                received = apply_gate(received, z(0))
            branches[(m1, m2)] = (prob, received)
    return branches
