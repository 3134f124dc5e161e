"""Closed-form amplitudes and survival for the IFM search with theta = pi/M.

After k large cycles the (unnormalized) amplitudes are

    alpha_raw(k) = -c sin(k phi) + sqrt(c) sin((k+1) phi)
    tau_raw(k)   =    sin(k phi) + sqrt(c) sin((k+1) phi)

with leak factor c = cos(theta)**M and

    cos(phi) = (1 - 2/N) (1 + c) / (2 sqrt(c)).

When cos(phi) > 1 the angle phi is imaginary (saturation). Both raw
amplitudes then share a common imaginary factor which cancels on
normalization; the cancellation is checked, not assumed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Regime",
    "PhaseParameter",
    "AmplitudePair",
    "DegenerateLeak",
    "NormalizationUnderflow",
    "BranchResidue",
    "leak_factor",
    "phase_parameter",
    "amplitudes",
    "survival",
    "success_probability",
]

REGIME_TOL = 1e-12
RESIDUE_TOL = 1e-12
UNDERFLOW = 1e-300


class DegenerateLeak(ValueError):
    """cos(theta)**M <= 0: the closed form does not apply."""


class NormalizationUnderflow(ArithmeticError):
    pass


class BranchResidue(ArithmeticError):
    """Normalized amplitudes came out with a non-negligible imaginary part."""


class Regime(str, Enum):
    OSCILLATION = "oscillation"
    SATURATION = "saturation"
    CRITICAL = "critical"


@dataclass(frozen=True)
class PhaseParameter:
    cos_phi: float
    phi: complex
    regime: Regime


@dataclass(frozen=True)
class AmplitudePair:
    """Raw and normalized amplitudes at one large-cycle boundary.

    ``alpha_raw`` and ``tau_raw`` are scaled by ``exp(-log_scale)`` so they
    stay finite deep in the saturation regime; log_scale is 0 whenever phi
    is real.
    """

    alpha_raw: complex
    tau_raw: complex
    alpha: float
    tau: float
    leak_factor: float
    log_scale: float = 0.0
    imag_residue: float = 0.0


def leak_factor(small_cycles: int, theta: float) -> float:
    """cos(theta)**M, via exp/log when cos(theta) > 0."""
    cos_t = math.cos(theta)
    if cos_t > 0.0:
        return math.exp(small_cycles * math.log(cos_t))
    return cos_t**small_cycles


def _checked_leak(small_cycles, theta):
    c = leak_factor(small_cycles, theta)
    if not c > 0.0:
        raise DegenerateLeak(
            f"cos(theta)**M = {c!r} <= 0 for M={small_cycles}, theta={theta!r}; "
            "use the circuit simulation instead"
        )
    return c


def phase_parameter(n_boxes: int, small_cycles: int, theta: float) -> PhaseParameter:
    c = _checked_leak(small_cycles, theta)
    cos_phi = (1.0 - 2.0 / n_boxes) * (1.0 + c) / (2.0 * math.sqrt(c))
    phi = cmath.acos(cos_phi)
    gap = abs(cos_phi) - 1.0
    if abs(gap) <= REGIME_TOL:
        regime = Regime.CRITICAL
    elif gap > 0.0:
        regime = Regime.SATURATION
    else:
        regime = Regime.OSCILLATION
    return PhaseParameter(cos_phi, phi, regime)


def _sin_pair(cos_phi, phi, k):
    """sin(k phi) and sin((k+1) phi), both scaled by exp(-|Im (k+1) phi|).

    Uses powers of u = exp(i phi) = cos(phi) + i sin(phi) built from the exact
    cos(phi) input. Calling cmath.sin(k * phi) instead reintroduces the
    rounding of phi itself; at phi = pi/2, sin(2 phi) would come out as
    1.2e-16 rather than 0, which matters when sqrt(c) is just as small.
    """
    u = complex(cos_phi, 0.0) + 1j * cmath.sin(phi)
    r = abs(u)
    sign = 1.0
    if r < 1.0:
        # work with -phi so that |u| >= 1; sin is odd
        u, r, sign = 1.0 / u, 1.0 / r, -1.0
    rotor = u / r
    inv = 1.0 / (u * r)

    def scaled(n):
        # sin(n phi) / r**(k+1)
        return sign * (rotor**n - inv**n) * r ** (n - k - 1) / 2j

    shift = (k + 1) * math.log(r)
    return scaled(k), scaled(k + 1), shift


def _amplitudes(n_boxes, c, cos_phi, phi, k):
    sin_k, sin_k1, shift = _sin_pair(cos_phi, phi, k)
    root_c = math.sqrt(c)
    alpha_raw = -c * sin_k + root_c * sin_k1
    tau_raw = sin_k + root_c * sin_k1

    # strip the common unit phase (i or -i when phi is imaginary)
    sin_phi = cmath.sin(phi)
    if sin_phi == 0:
        raise NormalizationUnderflow(f"sin(phi) vanishes at phi={phi!r}")
    unit = abs(sin_phi) / sin_phi
    a, t = alpha_raw * unit, tau_raw * unit
    norm = cmath.sqrt((n_boxes - 1) * a * a + t * t)
    if abs(norm) < UNDERFLOW:
        raise NormalizationUnderflow(f"normalizer {abs(norm)!r} below {UNDERFLOW}")
    alpha, tau = a / norm, t / norm
    residue = max(abs(alpha.imag), abs(tau.imag))
    if residue >= RESIDUE_TOL:
        raise BranchResidue(f"imaginary residue {residue!r} at k={k}, phi={phi!r}")
    return AmplitudePair(alpha_raw, tau_raw, alpha.real, tau.real, c, shift, residue)


def amplitudes(n_boxes: int, small_cycles: int, theta: float, cycle_index: int) -> AmplitudePair:
    if cycle_index < 0:
        raise ValueError(f"cycle_index must be >= 0, got {cycle_index}")
    phase = phase_parameter(n_boxes, small_cycles, theta)
    c = leak_factor(small_cycles, theta)
    return _amplitudes(n_boxes, c, phase.cos_phi, phase.phi, cycle_index)


def survival(n_boxes: int, small_cycles: int, theta: float, cycle_index: int) -> tuple[float, float]:
    """Cumulative no-explosion probability after k large cycles and its lower bound.

    The bound is cos(theta)**(2kM): every cycle survives at least as well as
    a photon sitting entirely in the target mode.
    """
    if cycle_index < 0:
        raise ValueError(f"cycle_index must be >= 0, got {cycle_index}")
    phase = phase_parameter(n_boxes, small_cycles, theta)
    c = leak_factor(small_cycles, theta)
    absorbed = 1.0 - c * c
    cumulative = 1.0
    for i in range(cycle_index):
        tau = _amplitudes(n_boxes, c, phase.cos_phi, phase.phi, i).tau
        cumulative *= 1.0 - tau * tau * absorbed
    return cumulative, c ** (2 * cycle_index)


def success_probability(n_boxes: int, small_cycles: int, theta: float, cycle_index: int) -> float:
    cumulative, _ = survival(n_boxes, small_cycles, theta, cycle_index)
    tau = amplitudes(n_boxes, small_cycles, theta, cycle_index).tau
    return cumulative * tau * tau


def trajectory(n_boxes: int, small_cycles: int, theta: float, k_max: int):
    """(tau, cumulative survival, success) for k = 0..k_max in one pass."""
    phase = phase_parameter(n_boxes, small_cycles, theta)
    c = leak_factor(small_cycles, theta)
    absorbed = 1.0 - c * c
    rows = []
    cumulative = 1.0
    for k in range(k_max + 1):
        tau = _amplitudes(n_boxes, c, phase.cos_phi, phase.phi, k).tau
        rows.append((tau, cumulative, cumulative * tau * tau))
        cumulative *= 1.0 - tau * tau * absorbed
    return rows
