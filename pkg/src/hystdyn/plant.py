"""Synthetic antagonistic-limb plant for generating training data.

Two resistively heated SMA wires pull a limb against an elastic return. Wire
temperature follows a lumped Joule-heating balance, the martensite fraction
follows cosine transformation kinetics with minor-loop memory, and the limb
angle follows a first-order lag on the net torque. A small PI babbler chases
random step targets so the recorded series sweeps the hysteresis loops.

All integration is explicit Euler on the plant's own fixed step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .timeseries import TimeSeries


@dataclass(frozen=True)
class PlantParams:
    supply_voltage: float = 7.0
    resistance_ohm: float = 8.0
    thermal_capacitance: float = 0.3
    convection_coeff: float = 0.08
    ambient_c: float = 25.0
    austenite_start_c: float = 68.0
    austenite_finish_c: float = 78.0
    martensite_start_c: float = 52.0
    martensite_finish_c: float = 42.0
    torque_gain: float = 60.0
    elastic_coeff: float = 1.0
    limb_tau_s: float = 1.5
    dt: float = 0.1

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if not self.austenite_finish_c > self.austenite_start_c:
            raise ValueError("austenite finish must exceed austenite start")
        if not self.martensite_start_c > self.martensite_finish_c:
            raise ValueError("martensite start must exceed martensite finish")
        if not self.austenite_start_c > self.martensite_start_c:
            raise ValueError("transformation bands must not overlap backwards")
        for name in ("resistance_ohm", "thermal_capacitance", "convection_coeff", "limb_tau_s"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


def _heating_fraction(temp_c: float, xi_rev: float, temp_rev: float, p: PlantParams) -> float:
    """Martensite fraction along the (possibly minor) heating branch."""
    if temp_c >= p.austenite_finish_c:
        return 0.0
    start = max(p.austenite_start_c, temp_rev)
    if temp_c <= start or start >= p.austenite_finish_c:
        return xi_rev
    phase = math.pi * (temp_c - start) / (p.austenite_finish_c - start)
    return xi_rev / 2.0 * (math.cos(phase) + 1.0)


def _cooling_fraction(temp_c: float, xi_rev: float, temp_rev: float, p: PlantParams) -> float:
    """Martensite fraction along the (possibly minor) cooling branch."""
    if temp_c <= p.martensite_finish_c:
        return 1.0
    start = min(p.martensite_start_c, temp_rev)
    if temp_c >= start or start <= p.martensite_finish_c:
        return xi_rev
    phase = math.pi * (temp_c - p.martensite_finish_c) / (start - p.martensite_finish_c)
    return (1.0 - xi_rev) / 2.0 * math.cos(phase) + (1.0 + xi_rev) / 2.0


@dataclass
class SmaWire:
    """One wire's thermal and phase state.

    ``xi`` is the martensite fraction (1 cold, 0 fully transformed). The
    reversal anchor pins the minor loop the wire is currently traversing;
    reversing the temperature trend re-anchors at the turning point, which is
    what gives the plant its return-point memory.
    """

    temp_c: float
    xi: float
    xi_rev: float
    temp_rev: float
    direction: int = 0

    @classmethod
    def at_rest(cls, p: PlantParams) -> "SmaWire":
        return cls(temp_c=p.ambient_c, xi=1.0, xi_rev=1.0, temp_rev=p.ambient_c)

    def step(self, duty: float, p: PlantParams) -> None:
        power = duty * p.supply_voltage**2 / p.resistance_ohm
        loss = p.convection_coeff * (self.temp_c - p.ambient_c)
        temp_new = self.temp_c + p.dt * (power - loss) / p.thermal_capacitance
        delta = temp_new - self.temp_c
        if delta != 0.0:
            direction = 1 if delta > 0.0 else -1
            if direction != self.direction:
                self.xi_rev, self.temp_rev = self.xi, self.temp_c
                self.direction = direction
            branch = _heating_fraction if direction > 0 else _cooling_fraction
            self.xi = branch(temp_new, self.xi_rev, self.temp_rev, p)
        self.temp_c = temp_new


@dataclass
class Limb:
    """First-order angle response to the differential wire torque."""

    theta_deg: float = 0.0

    def step(self, xi_a: float, xi_b: float, p: PlantParams) -> None:
        torque = p.torque_gain * ((1.0 - xi_a) - (1.0 - xi_b))
        self.theta_deg += p.dt * (torque - p.elastic_coeff * self.theta_deg) / p.limb_tau_s


@dataclass
class PiController:
    """PI with conditional integration: the integral only accumulates while
    the output is inside its limits, so it cannot wind up against
    saturation."""

    kp: float = 0.06
    ki: float = 1e-5
    dt: float = 0.1
    u_limit: float = 1.0
    integral: float = field(default=0.0, init=False)

    def reset(self) -> None:
        self.integral = 0.0

    def update(self, error: float) -> float:
        tentative = self.integral + error * self.dt
        u = self.kp * error + self.ki * tentative
        if abs(u) <= self.u_limit:
            self.integral = tentative
            return u
        return math.copysign(self.u_limit, u)


TEMP_NOISE_STD_C = 0.5
ANGLE_NOISE_STD_DEG = 0.25


def babble(
    duration_s: float,
    seed: int,
    params: PlantParams = PlantParams(),
    noise: bool = False,
    single_sided: bool = False,
    target_range_deg: float = 40.0,
    hold_range_s: tuple[float, float] = (4.0, 12.0),
    kp: float = 0.06,
    ki: float = 1e-5,
    return_targets: bool = False,
):
    """Simulate the plant under random step targets and record a series.

    The target schedule and the optional sensor noise draw from separate
    counter-based streams, so toggling ``noise`` never changes the targets or
    the underlying trajectory. Noise touches the recorded temperatures and
    angle only; the dynamics and the controller run on clean values.

    ``single_sided`` restricts targets to one side and leaves wire B cold,
    producing the two-column recordings of a one-wire rig.
    """
    if duration_s <= 0.0:
        raise ValueError("duration must be positive")
    if hold_range_s[0] <= 0.0 or hold_range_s[1] < hold_range_s[0]:
        raise ValueError("hold_range_s must be a positive, ordered interval")
    root = np.random.Philox(seed)
    schedule_rng = np.random.Generator(root)
    noise_rng = np.random.Generator(root.jumped(1))

    n = int(round(duration_s / params.dt)) + 1
    wire_a = SmaWire.at_rest(params)
    wire_b = SmaWire.at_rest(params)
    limb = Limb()
    pi = PiController(kp=kp, ki=ki, dt=params.dt)

    u_a = np.zeros(n)
    u_b = np.zeros(n)
    temp_a = np.zeros(n)
    temp_b = np.zeros(n)
    theta = np.zeros(n)
    targets = np.zeros(n)

    target = 0.0
    next_switch = 0
    for k in range(n):
        if k >= next_switch:
            lo = 0.0 if single_sided else -target_range_deg
            target = float(schedule_rng.uniform(lo, target_range_deg))
            hold = float(schedule_rng.uniform(*hold_range_s))
            next_switch = k + max(1, int(round(hold / params.dt)))
        targets[k] = target

        u = pi.update(target - limb.theta_deg)
        duty_a = min(max(u, 0.0), 1.0)
        duty_b = 0.0 if single_sided else min(max(-u, 0.0), 1.0)

        u_a[k] = duty_a
        u_b[k] = duty_b
        temp_a[k] = wire_a.temp_c
        temp_b[k] = wire_b.temp_c
        theta[k] = limb.theta_deg

        wire_a.step(duty_a, params)
        wire_b.step(duty_b, params)
        limb.step(wire_a.xi, wire_b.xi, params)

    if noise:
        temp_a = temp_a + noise_rng.normal(0.0, TEMP_NOISE_STD_C, n)
        temp_b = temp_b + noise_rng.normal(0.0, TEMP_NOISE_STD_C, n)
        theta = theta + noise_rng.normal(0.0, ANGLE_NOISE_STD_DEG, n)

    series = TimeSeries(
        dt=params.dt,
        u_a=u_a,
        u_b=u_b,
        temp_a=temp_a,
        temp_b=temp_b,
        theta=theta,
        unidirectional=single_sided,
    )
    if return_targets:
        return series, targets
    return series
