"""Integrate-and-fire and group-neuron dynamics with soft reset.

A group neuron bundles ``tau`` fire units sharing one membrane potential;
unit i fires when the charged potential reaches i*theta/tau, and every spike
subtracts theta/tau from the shared potential (lateral inhibition). The
group's output per step is the aggregate spike count, worth theta/tau of
postsynaptic potential per spike. With tau=1 the group neuron degenerates to
a plain IF neuron of threshold theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class IFConfig:
    """Firing threshold of a single integrate-and-fire neuron."""

    theta: float

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")


@dataclass(frozen=True)
class GNConfig:
    """Thresholds of a group neuron with ``tau`` member fire units.

    ``member_thresholds[i]`` is the firing threshold of member i+1, computed
    as (i+1)*theta/tau rather than by repeated addition to avoid drift.
    ``theta_gn`` is both the per-spike reset amount and the postsynaptic
    weight of one emitted spike.
    """

    tau: int
    theta_gn: float
    member_thresholds: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if not self.theta_gn > 0:
            raise ValueError(f"theta_gn must be positive, got {self.theta_gn}")
        if len(self.member_thresholds) != self.tau:
            raise ValueError("need exactly one threshold per member")
        if any(b <= a for a, b in zip(self.member_thresholds, self.member_thresholds[1:])):
            raise ValueError("member thresholds must be strictly increasing")
        if self.member_thresholds[0] != self.theta_gn:
            raise ValueError("lowest member threshold must equal theta_gn")

    @classmethod
    def from_threshold(cls, theta: float, tau: int) -> "GNConfig":
        """Build the group that replaces one IF neuron of threshold ``theta``."""
        if not theta > 0:
            raise ValueError(f"theta must be positive, got {theta}")
        if tau < 1:
            raise ValueError(f"tau must be >= 1, got {tau}")
        thresholds = tuple(i * theta / tau for i in range(1, tau + 1))
        return cls(tau=tau, theta_gn=theta / tau, member_thresholds=thresholds)


@dataclass(frozen=True)
class IFState:
    """Membrane potential of an IF neuron. Plain value; never clamped."""

    v: float = 0.0


@dataclass(frozen=True)
class GNState:
    """Shared membrane potential of all members of a group neuron.

    One scalar suffices: members receive identical charge and identical
    lateral-inhibition resets, so their potentials never diverge.
    """

    v: float = 0.0


@dataclass(frozen=True)
class SpikeOut:
    """Spikes emitted in one step and their postsynaptic contribution."""

    count: int
    psp: float


def if_step(state: IFState, cfg: IFConfig, input_current: float) -> tuple[SpikeOut, IFState]:
    """Advance an IF neuron by one time-step: charge, fire, soft-reset.

    Firing happens at exact threshold equality (Heaviside(0) = 1). The reset
    subtracts theta instead of zeroing, and the potential is never clamped,
    so negative charge persists.
    """
    p = state.v + input_current
    spike = 1 if p >= cfg.theta else 0
    return SpikeOut(count=spike, psp=spike * cfg.theta), IFState(v=p - spike * cfg.theta)


def gn_step(state: GNState, cfg: GNConfig, input_current: float) -> tuple[SpikeOut, GNState]:
    """Advance a group neuron by one time-step (closed-form member count).

    Equivalent to :func:`gn_step_memberloop` but counts members in O(1)
    instead of scanning all ``tau`` thresholds.
    """
    p = state.v + input_current
    count = _member_count(p, cfg)
    psp = count * cfg.theta_gn
    return SpikeOut(count=count, psp=psp), GNState(v=p - psp)


def gn_step_memberloop(
    state: GNState, cfg: GNConfig, input_current: float
) -> tuple[SpikeOut, GNState]:
    """Literal per-member evaluation of one group-neuron step.

    Reference oracle for :func:`gn_step`: every member compares the shared
    charged potential against its own threshold, the spikes are summed, and
    each spike inhibits the shared potential by theta_gn.
    """
    p = state.v + input_current
    count = 0
    for threshold in cfg.member_thresholds:
        if p >= threshold:
            count += 1
    psp = count * cfg.theta_gn
    return SpikeOut(count=count, psp=psp), GNState(v=p - psp)


def _member_count(p: float, cfg: GNConfig) -> int:
    """Number of member thresholds at or below ``p``.

    Starts from floor(p / theta_gn) and nudges against the stored thresholds:
    the rounding of p / theta_gn can land on the wrong side of an exact
    member threshold, and the per-member predicate ``p >= theta_i`` is the
    contract.
    """
    thresholds = cfg.member_thresholds
    if p >= thresholds[-1]:
        return cfg.tau
    if p < thresholds[0]:
        return 0
    k = min(max(int(p / cfg.theta_gn), 1), cfg.tau - 1)
    while k < cfg.tau and p >= thresholds[k]:
        k += 1
    while k > 0 and p < thresholds[k - 1]:
        k -= 1
    return k


def closed_form_if_rate(x: float, theta: float, T: int, v0: float) -> float:
    """Average postsynaptic potential of an IF neuron fed constant input.

    Evaluated from the cumulative-drive counting recurrence in exact rational
    arithmetic, independent of the floating-point stepper, then converted to
    the same ``count * theta / T`` expression a step-by-step run reports.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    total = _constant_drive_spike_total(x, theta, 1, T, v0)
    return total * theta / T


def closed_form_gn_rate(x: float, theta: float, tau: int, T: int, v0: float) -> float:
    """Average postsynaptic potential of a group neuron fed constant input.

    On x in [0, theta] the result is a staircase of step width
    theta / (tau * T); with tau=1 it coincides with
    :func:`closed_form_if_rate`.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    total = _constant_drive_spike_total(x, theta, tau, T, v0)
    return total * (theta / tau) / T


def _constant_drive_spike_total(x: float, theta: float, tau: int, T: int, v0: float) -> int:
    """Exact total spike count over T steps of constant drive ``x``.

    Soft reset makes the cumulative count C(t) satisfy

        C(t) = min(C(t-1) + tau, max(C(t-1), floor((v0 + t*x) * tau / theta)))

    which is evaluated here with ``Fraction`` so no rounding can move a
    comparison across a threshold.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    unit = Fraction(theta) / tau
    step = Fraction(x)
    drive = Fraction(v0)
    total = 0
    for _ in range(T):
        drive += step
        fired = math.floor(drive / unit) - total
        if fired > tau:
            fired = tau
        elif fired < 0:
            fired = 0
        total += fired
    return total
