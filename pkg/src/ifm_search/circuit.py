"""Brute-force conditional-state simulation of the N-box IFM search circuit.

Every box carries an H and a V amplitude. A small cycle rotates each
polarization by ``theta`` and lets the bomb absorb whatever V amplitude sits
in the target mode. A large cycle is M small cycles, a repolarization by
``-M*theta`` with projection onto H, then inversion about the average.

The simulation is exact (no sampling) and real-valued. It conditions on
survival, carrying the no-explosion probability alongside the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "ThetaMode",
    "SearchParams",
    "PolarizedState",
    "LargeCycleRecord",
    "OutcomeDistribution",
    "initial_state",
    "initial_record",
    "small_cycle",
    "leaky_oracle",
    "inversion_about_average",
    "run_search",
    "final_success",
    "monte_carlo",
]


class ThetaMode(str, Enum):
    PI_OVER_M = "pi-over-m"
    PI_OVER_2M = "pi-over-2m"

    def angle(self, small_cycles: int) -> float:
        if self is ThetaMode.PI_OVER_M:
            return math.pi / small_cycles
        return math.pi / (2 * small_cycles)


@dataclass(frozen=True)
class SearchParams:
    """One problem instance: N boxes, M small cycles of angle theta, k large cycles."""

    n_boxes: int
    small_cycles: int
    theta: float
    large_cycles: int = 1
    target: int = 0

    def __post_init__(self):
        if self.n_boxes < 2:
            raise ValueError(f"n_boxes must be >= 2, got {self.n_boxes}")
        if self.small_cycles < 1:
            raise ValueError(f"small_cycles must be >= 1, got {self.small_cycles}")
        if not 0.0 < self.theta <= math.pi:
            raise ValueError(f"theta must lie in (0, pi], got {self.theta!r}")
        if self.large_cycles < 0:
            raise ValueError(f"large_cycles must be >= 0, got {self.large_cycles}")
        if not 0 <= self.target < self.n_boxes:
            raise ValueError(f"target must lie in [0, {self.n_boxes}), got {self.target}")

    @classmethod
    def preset(
        cls,
        n_boxes: int,
        small_cycles: int,
        large_cycles: int = 1,
        mode: ThetaMode | str = ThetaMode.PI_OVER_M,
        target: int = 0,
    ) -> "SearchParams":
        mode = ThetaMode(mode)
        if small_cycles < 1:
            raise ValueError(f"small_cycles must be >= 1, got {small_cycles}")
        return cls(n_boxes, small_cycles, mode.angle(small_cycles), large_cycles, target)

    @property
    def is_pi_over_m(self) -> bool:
        return math.isclose(self.theta * self.small_cycles, math.pi, rel_tol=1e-12)

    @property
    def queries(self) -> int:
        return self.large_cycles * self.small_cycles


@dataclass(frozen=True)
class PolarizedState:
    """Normalized photon state plus the probability of having survived so far.

    A state whose survival has dropped to exactly zero carries zero
    amplitudes; there is nothing left to normalize.
    """

    h_amp: np.ndarray
    v_amp: np.ndarray
    survival: float = 1.0

    @property
    def n_boxes(self) -> int:
        return len(self.h_amp)

    def norm_squared(self) -> float:
        return float(self.h_amp @ self.h_amp + self.v_amp @ self.v_amp)

    def mode_probabilities(self) -> np.ndarray:
        return self.h_amp**2 + self.v_amp**2


@dataclass(frozen=True)
class LargeCycleRecord:
    cycle_index: int
    tau: float
    alpha: float
    cycle_survival: float
    cumulative_survival: float
    success_probability: float
    # conditional on entering the cycle; explosion + loss + cycle_survival = 1
    cycle_explosion: float = 0.0
    cycle_loss: float = 0.0


@dataclass
class OutcomeDistribution:
    """Monte Carlo tallies.

    ``explosions`` is keyed by (large_cycle, small_cycle), both 1-based.
    ``losses`` counts photons discarded by the end-of-cycle projection onto H,
    keyed by large cycle; it stays empty whenever theta = pi/M.
    """

    trials: int
    explosions: dict[tuple[int, int], int] = field(default_factory=dict)
    detections: dict[int, int] = field(default_factory=dict)
    losses: dict[int, int] = field(default_factory=dict)

    @property
    def total_explosions(self) -> int:
        return sum(self.explosions.values())

    @property
    def total_losses(self) -> int:
        return sum(self.losses.values())

    def detection_fraction(self, mode: int) -> float:
        return self.detections.get(mode, 0) / self.trials

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "explosions": {f"{j},{s}": n for (j, s), n in sorted(self.explosions.items())},
            "losses": {str(j): n for j, n in sorted(self.losses.items())},
            "detections": {str(i): n for i, n in sorted(self.detections.items())},
        }


def initial_state(n_boxes: int) -> PolarizedState:
    if n_boxes < 2:
        raise ValueError(f"n_boxes must be >= 2, got {n_boxes}")
    h = np.full(n_boxes, 1.0 / math.sqrt(n_boxes))
    return PolarizedState(h, np.zeros(n_boxes), 1.0)


def initial_record(n_boxes: int) -> LargeCycleRecord:
    """The k = 0 boundary: uniform superposition, nothing queried yet."""
    amp = 1.0 / math.sqrt(n_boxes)
    return LargeCycleRecord(0, amp, amp, 1.0, 1.0, 1.0 / n_boxes)


# -- unnormalized kernels; each mutates h, v in place ------------------------


def _rotate(h: np.ndarray, v: np.ndarray, angle: float) -> None:
    c, s = math.cos(angle), math.sin(angle)
    h_new = c * h - s * v
    v[:] = s * h + c * v
    h[:] = h_new


def _absorb(v: np.ndarray, target: int) -> float:
    absorbed = v[target] * v[target]
    v[target] = 0.0
    return float(absorbed)


def _oracle_block(h, v, small_cycles, theta, target):
    """M small cycles, repolarize, project. Returns (exploded, lost) weight."""
    exploded = 0.0
    for _ in range(small_cycles):
        _rotate(h, v, theta)
        exploded += _absorb(v, target)
    _rotate(h, v, -small_cycles * theta)
    lost = float(v @ v)
    v[:] = 0.0
    return exploded, lost


def _diffuse(h: np.ndarray) -> np.ndarray:
    """Inversion about the average, 2*mean(h) - h, with a compensated mean.

    The rounding residual of the sum is added back after the subtraction,
    so an amplitude far below the others is not wiped out when the sum
    absorbs it (N = 2 with a near-total absorber is the extreme case).
    """
    n = len(h)
    total = math.fsum(h)
    residual = math.fsum(np.append(h, -total))
    return (2.0 * (total / n) - h) + 2.0 * (residual / n)


def _normalized(h, v, survival):
    norm2 = float(h @ h + v @ v)
    if norm2 == 0.0:
        return PolarizedState(np.zeros_like(h), np.zeros_like(v), 0.0)
    scale = 1.0 / math.sqrt(norm2)
    return PolarizedState(h * scale, v * scale, survival)


def _working_copy(state: PolarizedState):
    return state.h_amp.astype(float, copy=True), state.v_amp.astype(float, copy=True)


# -- public operations -------------------------------------------------------


def small_cycle(state: PolarizedState, theta: float, target: int):
    """Rotate every mode by ``theta`` and let the bomb absorb the target's V part.

    Returns ``(new_state, explosion_probability)`` where the probability is
    conditional on the (normalized) input state.
    """
    h, v = _working_copy(state)
    _rotate(h, v, theta)
    p_explode = _absorb(v, target)
    return _normalized(h, v, state.survival * (1.0 - p_explode)), p_explode


def leaky_oracle(state: PolarizedState, small_cycles: int, theta: float, target: int):
    """Apply one IFM oracle block and return ``(new_state, cycle_survival)``.

    For theta = pi/M the non-target modes come back untouched and the target
    amplitude is multiplied by ``-cos(theta)**M``.
    """
    if np.any(state.v_amp != 0.0):
        raise ValueError("leaky_oracle expects an H-polarized input (v_amp == 0)")
    h, v = _working_copy(state)
    _oracle_block(h, v, small_cycles, theta, target)
    cycle_survival = float(h @ h)
    return _normalized(h, v, state.survival * cycle_survival), cycle_survival


def inversion_about_average(state: PolarizedState) -> PolarizedState:
    if np.any(state.v_amp != 0.0):
        raise ValueError("inversion_about_average expects v_amp == 0")
    h = _diffuse(state.h_amp)
    return PolarizedState(h, state.v_amp.copy(), state.survival)


def _trace(params: SearchParams):
    """Yield ``(record, normalized_h)`` for every large cycle 1..k."""
    n, t = params.n_boxes, params.target
    state = initial_state(n)
    h, v = _working_copy(state)
    cumulative = 1.0
    others = np.arange(n) != t
    for j in range(1, params.large_cycles + 1):
        exploded, lost = _oracle_block(h, v, params.small_cycles, params.theta, t)
        norm2 = float(h @ h)
        cumulative *= norm2
        if norm2 == 0.0:
            nan = float("nan")
            yield LargeCycleRecord(j, nan, nan, 0.0, 0.0, 0.0, exploded, lost), h
            continue
        h /= math.sqrt(norm2)
        h[:] = _diffuse(h)
        tau = float(h[t])
        alpha = float(h[others].mean())
        record = LargeCycleRecord(
            cycle_index=j,
            tau=tau,
            alpha=alpha,
            cycle_survival=norm2,
            cumulative_survival=cumulative,
            success_probability=cumulative * tau * tau,
            cycle_explosion=exploded,
            cycle_loss=lost,
        )
        yield record, h


def run_search(params: SearchParams) -> list[LargeCycleRecord]:
    """Simulate k large cycles; the result holds one record per cycle (1..k).

    The global phase is fixed once per oracle block by the repolarization
    step, which is the overall phase of pi dropped for theta = pi/M.
    No further data-dependent sign flips are applied, so (alpha, tau) follow
    the same linear recurrence as the closed form, sign included.
    """
    return [record for record, _ in _trace(params)]


def final_success(params: SearchParams) -> float:
    """Probability of surviving all k large cycles and detecting the target."""
    if params.large_cycles == 0:
        return 1.0 / params.n_boxes
    return run_search(params)[-1].success_probability


def _trajectory_profile(params: SearchParams):
    """Per-step conditional hazards plus the final mode distribution.

    Because the state conditioned on survival is deterministic, a trajectory
    is fully described by the hazard at each step: ``("explode", j, s, p)``
    for small cycle s of large cycle j, and ``("loss", j, 0, p)`` for the
    projection at the end of large cycle j.
    """
    n, t = params.n_boxes, params.target
    h = np.full(n, 1.0 / math.sqrt(n))
    v = np.zeros(n)
    hazards = []
    for j in range(1, params.large_cycles + 1):
        for s in range(1, params.small_cycles + 1):
            weight = float(h @ h + v @ v)
            _rotate(h, v, params.theta)
            absorbed = _absorb(v, t)
            hazards.append(("explode", j, s, absorbed / weight if weight > 0 else 1.0))
        weight = float(h @ h + v @ v)
        _rotate(h, v, -params.small_cycles * params.theta)
        lost = float(v @ v)
        v[:] = 0.0
        hazards.append(("loss", j, 0, lost / weight if weight > 0 else 1.0))
        norm2 = float(h @ h)
        if norm2 > 0.0:
            h /= math.sqrt(norm2)
        h[:] = _diffuse(h)
    probs = h * h
    total = probs.sum()
    probs = probs / total if total > 0 else np.full(n, 1.0 / n)
    return hazards, probs


_BLOCK_DRAWS = 1 << 22


def _trial_uniforms(seed: int, first: int, count: int, n_draws: int) -> np.ndarray:
    """Uniforms for trials ``first .. first+count-1``, shape (count, n_draws).

    Trial i owns draws [i*n_draws, (i+1)*n_draws) of the Philox stream keyed
    by ``seed``; any block of trials can be produced independently by
    advancing the counter. ``first * n_draws`` must be a multiple of 4 since
    one counter step yields four 64-bit words.
    """
    offset = first * n_draws
    if offset % 4:
        raise ValueError("block start must align with a Philox counter step")
    bit_gen = np.random.Philox(key=seed)
    bit_gen.advance(offset // 4)
    return np.random.Generator(bit_gen).random((count, n_draws))


def monte_carlo(params: SearchParams, trials: int, seed: int) -> OutcomeDistribution:
    """Sample single-photon trajectories through the circuit.

    At every step a trajectory explodes (or is lost at the projection) with
    the conditional probability of that step; survivors are measured in the
    mode basis after the last large cycle. Trial i reads its own slice of a
    counter-based stream derived from ``(seed, i)``, so the tallies do not
    depend on how trials are batched or ordered.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    hazards, probs = _trajectory_profile(params)
    hazard_p = np.array([h[3] for h in hazards])
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    n_draws = len(hazards) + 1
    block = max(4, (_BLOCK_DRAWS // n_draws) // 4 * 4)

    fired_counts = np.zeros(len(hazards), dtype=np.int64)
    mode_counts = np.zeros(params.n_boxes, dtype=np.int64)
    for first in range(0, trials, block):
        count = min(block, trials - first)
        u = _trial_uniforms(seed, first, count, n_draws)
        fired = u[:, :-1] < hazard_p
        any_fired = fired.any(axis=1)
        step = np.argmax(fired[any_fired], axis=1)
        fired_counts += np.bincount(step, minlength=len(hazards))
        modes = np.searchsorted(cdf, u[~any_fired, -1], side="right")
        mode_counts += np.bincount(modes, minlength=params.n_boxes)

    out = OutcomeDistribution(trials)
    for (kind, j, s, _), n in zip(hazards, fired_counts):
        if n == 0:
            continue
        if kind == "explode":
            out.explosions[(j, s)] = int(n)
        else:
            out.losses[j] = int(n)
    out.detections = {i: int(n) for i, n in enumerate(mode_counts) if n}
    return out
