"""The verification box: iterated weak coupling with ancilla readout.

Each iteration couples the one-qubit system ``alpha|0> + beta|1>`` to a fresh
ancilla in |0> through a control-on-zero Rx(2 theta), then z-measures the
ancilla.  Outcome probabilities per iteration:

    p0 = |alpha|^2 cos^2(theta) + |beta|^2
    p1 = |alpha|^2 sin^2(theta)

Outcome 0 renormalizes the system to (alpha cos(theta)|0> + beta|1>)/sqrt(p0),
nudging it toward |1>; outcome 1 (a "click") projects it onto |0> exactly.
|0> and |1> are fixed points of the whole loop, which is what lets the box
discriminate the zero state from superpositions over many iterations.

Two click policies are supported.  The default keeps iterating after a click
(the run then accepts, since the system sits in |0>); the strict variant
aborts the run on any click.  Under the default policy the overall acceptance
probability telescopes to exactly |alpha|^2, independent of theta and of the
iteration count; under strict-abort it is |alpha|^2 cos(theta)^(2N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gates import build_controlled0_rx
from .rng import RandomStream
from .statevector import (
    CapacityError,
    StateVector,
    apply_gate,
    combine,
    measure_qubit,
    new_state,
)

PAPER_DEFAULT = "paper"
STRICT_ABORT = "strict"
CLICK_POLICIES = (PAPER_DEFAULT, STRICT_ABORT)

DEFAULT_THETA = 0.1
DEFAULT_ITERATIONS = 38

_ENUM_MAX_ITERATIONS = 16


@dataclass(frozen=True)
class VerificationParams:
    """Coupling strength, iteration count, and click policy of one box.

    ``iterations`` may be 0, in which case a run degenerates to the closing
    z-measurement alone (used for edge-case reporting).
    """

    theta: float = DEFAULT_THETA
    iterations: int = DEFAULT_ITERATIONS
    click_policy: str = PAPER_DEFAULT

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi / 2):
            raise ValueError(f"theta must be in (0, pi/2), got {self.theta}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.click_policy not in CLICK_POLICIES:
            raise ValueError(f"unknown click policy {self.click_policy!r}")


@dataclass
class Trajectory:
    """Record of one verification run."""

    ancilla_outcomes: list[int]
    step_p1: list[float]
    final_system_outcome: int
    accepted: bool

    def outcomes_bitstring(self) -> str:
        return "".join("1" if o else "0" for o in self.ancilla_outcomes)

    def clicked(self) -> bool:
        return any(self.ancilla_outcomes)


def trajectory_record(traj: Trajectory, seed: int,
                      params: VerificationParams) -> str:
    """Line export: ``seed,N,theta,outcomes_bitstring,final_bit,accepted``."""
    return (
        f"{seed},{params.iterations},{params.theta:g},"
        f"{traj.outcomes_bitstring()},{traj.final_system_outcome},"
        f"{int(traj.accepted)}"
    )


def _require_single_qubit(system: StateVector):
    if system.n_qubits != 1:
        raise ValueError("the verification box acts on a single-qubit system")


def _iterate(system: StateVector, gate, rng: RandomStream):
    joint = combine(system, new_state(1))  # system = qubit 0, ancilla = qubit 1
    joint = apply_gate(joint, gate)
    outcome, prob, joint = measure_qubit(joint, 1, "z", rng)
    p1 = prob if outcome == 1 else 1.0 - prob
    if outcome == 1:
        new_system = StateVector(1, np.array([1.0, 0.0], dtype=complex))
    else:
        new_system = StateVector(1, joint.amplitudes[:2].copy())
    return outcome, new_system, p1


def iterate_once(system: StateVector, params: VerificationParams,
                 rng: RandomStream) -> tuple[int, StateVector, float]:
    """One coupling + ancilla measurement step.

    Returns ``(outcome, new_system, p1)`` where ``p1`` is the pre-measurement
    click probability of this step.  On a click the system is set to |0>
    exactly (the surviving branch, with its global phase dropped).
    """
    _require_single_qubit(system)
    return _iterate(system, build_controlled0_rx(params.theta, 0, 1), rng)


def run_verification(system: StateVector, params: VerificationParams,
                     rng: RandomStream) -> Trajectory:
    """Full run: N iterations, then a closing z-measurement of the system.

    Under the strict policy a click stops the iteration loop; the closing
    measurement still executes (the post-click system is the |0> eigenstate,
    so it is deterministic) but the run is marked rejected.
    """
    _require_single_qubit(system)
    gate = build_controlled0_rx(params.theta, 0, 1)
    outcomes: list[int] = []
    p1s: list[float] = []
    state = system
    for _ in range(params.iterations):
        outcome, state, p1 = _iterate(state, gate, rng)
        outcomes.append(outcome)
        p1s.append(p1)
        if outcome == 1 and params.click_policy == STRICT_ABORT:
            break
    final, _, _ = measure_qubit(state, 0, "z", rng)
    clicked = any(outcomes)
    if params.click_policy == STRICT_ABORT:
        accepted = final == 0 and not clicked
    else:
        accepted = final == 0
    return Trajectory(outcomes, p1s, final, accepted)


def acceptance_probability(alpha_sq: float,
                           params: VerificationParams) -> float:
    """Exact probability that a run accepts, given P(|0>) of the input.

    Default policy: exactly ``alpha_sq``.  Every clicking path ends in |0>
    and accepts, and the click mass plus the surviving |0> mass telescopes
    back to |alpha|^2.  Strict policy: ``alpha_sq * cos(theta)^(2N)``, the
    probability of surviving all N couplings in the |0> branch.
    """
    if not 0.0 <= alpha_sq <= 1.0:
        raise ValueError(f"alpha_sq must be in [0, 1], got {alpha_sq}")
    if params.click_policy == STRICT_ABORT:
        return alpha_sq * math.cos(params.theta) ** (2 * params.iterations)
    return alpha_sq


def enumerate_trajectories(
        system: StateVector,
        params: VerificationParams) -> list[tuple[Trajectory, float]]:
    """Exact probability of every outcome path and closing measurement.

    Walks the binary tree of ancilla outcomes with unnormalized branch
    amplitudes, so returned probabilities sum to 1 within 1e-12.  Branches of
    exactly zero probability are omitted.  Under the strict policy, paths are
    truncated at their first click, mirroring :func:`run_verification`.
    """
    _require_single_qubit(system)
    if params.iterations > _ENUM_MAX_ITERATIONS:
        raise CapacityError(
            f"enumeration supports at most {_ENUM_MAX_ITERATIONS} iterations"
        )
    cos_t = math.cos(params.theta)
    sin_t = math.sin(params.theta)
    sin_sq = sin_t * sin_t
    strict = params.click_policy == STRICT_ABORT
    results: list[tuple[Trajectory, float]] = []

    def emit(outcomes, p1s, final, weight, clicked):
        if weight <= 0.0:
            return
        accepted = final == 0 and not (strict and clicked)
        results.append(
            (Trajectory(list(outcomes), list(p1s), final, accepted), weight)
        )

    def walk(a: complex, b: complex, step: int, outcomes, p1s, clicked):
        if step == params.iterations:
            emit(outcomes, p1s, 0, abs(a) ** 2, clicked)
            emit(outcomes, p1s, 1, abs(b) ** 2, clicked)
            return
        weight = abs(a) ** 2 + abs(b) ** 2
        p1 = sin_sq * abs(a) ** 2 / weight
        outcomes.append(0)
        p1s.append(p1)
        walk(a * cos_t, b, step + 1, outcomes, p1s, clicked)
        outcomes[-1] = 1
        click_amp = -1j * a * sin_t
        if abs(click_amp) > 0.0:
            if strict:
                # aborted run: closing measurement of the collapsed |0>
                emit(outcomes, p1s, 0, abs(click_amp) ** 2, True)
            else:
                walk(click_amp, 0.0, step + 1, outcomes, p1s, True)
        outcomes.pop()
        p1s.pop()

    alpha, beta = system.amplitudes
    walk(complex(alpha), complex(beta), 0, [], [], False)
    return results


def perturbation_step(alpha: complex, beta: complex,
                      theta: float) -> tuple[complex, complex]:
    """Exact renormalized collapse after a no-click iteration.

    ``alpha' = alpha cos(theta)/sqrt(p0)``, ``beta' = beta/sqrt(p0)`` with
    ``p0 = |alpha cos(theta)|^2 + |beta|^2``.  |alpha'| <= |alpha| and
    |beta'| >= |beta|, strictly when both amplitudes are nonzero.
    """
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"input state not normalized (norm^2 = {norm})")
    a = alpha * math.cos(theta)
    p0 = abs(a) ** 2 + abs(beta) ** 2
    root = math.sqrt(p0)
    return a / root, beta / root


def sample_acceptance_runs(alpha_sq: float, params: VerificationParams,
                           runs: int, rng: RandomStream) -> np.ndarray:
    """Boolean accept/reject outcome of ``runs`` independent verification runs.

    Vectorized over runs: each run tracks its current P(|0>), draws per-step
    click outcomes with the exact per-iteration probabilities, and finishes
    with the closing z-measurement.  Statistically identical to repeated
    :func:`run_verification`, at array speed.
    """
    if not 0.0 <= alpha_sq <= 1.0:
        raise ValueError(f"alpha_sq must be in [0, 1], got {alpha_sq}")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    sin_sq = math.sin(params.theta) ** 2
    cos_sq = math.cos(params.theta) ** 2
    a2 = np.full(runs, float(alpha_sq))
    clicked = np.zeros(runs, dtype=bool)
    for _ in range(params.iterations):
        p1 = a2 * sin_sq
        click = rng.randoms(runs) < p1
        clicked |= click
        survive_a2 = a2 * cos_sq / (1.0 - p1)
        a2 = np.where(click, 1.0, survive_a2)
    final_zero = rng.randoms(runs) < a2
    if params.click_policy == STRICT_ABORT:
        return final_zero & ~clicked
    return final_zero


def sample_acceptance(alpha_sq: float, params: VerificationParams, runs: int,
                      rng: RandomStream) -> float:
    """Monte-Carlo acceptance rate; see :func:`sample_acceptance_runs`."""
    return float(sample_acceptance_runs(alpha_sq, params, runs, rng).mean())
