"""Rotary spring-tail mechanics.

A thin rectangular spring-steel blade is swept by a gearmotor inside a
curved housing. Each revolution it contacts the wall, bends progressively
until it conforms to the housing arc, then snaps free at the arc exit and
strikes the ground. The blade segment still engaged at release acts as a
short cantilever, which gives the closed-form strike force used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .stats import ForceTrace

TWO_PI = 2.0 * math.pi


class TailPhase(Enum):
    FREE_ROTATION = "free_rotation"
    LOAD = "load"
    LATCH = "latch"
    UNLATCH = "unlatch"


class LengthRegime(Enum):
    JAM = "jam"
    NOMINAL = "nominal"
    ROLL = "roll"


@dataclass(frozen=True)
class TailConfig:
    """Blade material/geometry and housing geometry.

    Defaults describe a 25 mm x 10 mm x 0.10 mm 1095 spring-steel blade in
    an 11 mm radius housing with a 270 degree arc, driven at 60 rpm.
    """

    youngs_modulus: float = 200e9  # Pa
    width: float = 10e-3  # m
    thickness: float = 0.10e-3  # m
    free_length: float = 25e-3  # m
    housing_radius: float = 11e-3  # m
    housing_arc: float = 1.5 * math.pi  # rad
    motor_speed: float = 1.0  # rev/s
    pulse_width: float = 0.010  # s, half-sine strike duration (fitted)

    def __post_init__(self):
        for name in ("youngs_modulus", "width", "thickness", "free_length",
                     "housing_radius", "motor_speed", "pulse_width"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.thickness >= self.housing_radius:
            raise ValueError("thickness must be smaller than housing_radius")
        if not 0.0 < self.housing_arc < TWO_PI:
            raise ValueError("housing_arc must lie in (0, 2*pi)")
        if self.free_length > self.housing_radius * self.housing_arc:
            raise ValueError("blade longer than the housing arc it must conform to")

    @property
    def second_moment(self) -> float:
        return area_moment(self.width, self.thickness)


@dataclass(frozen=True)
class EngagedAngleModel:
    """Distribution of the housing arc still engaged at the instant of
    release. The engagement varies strike to strike; the default uniform
    [20 deg, 45 deg] spread reproduces the observed 2-6 N force band."""

    kind: str = "uniform"  # "uniform" | "truncated_normal"
    lower: float = math.radians(20.0)
    upper: float = math.radians(45.0)
    mean: float | None = None
    spread: float | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "truncated_normal"):
            raise ValueError(f"unknown engaged-angle model kind: {self.kind!r}")
        if not 0.0 < self.lower <= self.upper:
            raise ValueError("need 0 < lower <= upper")
        if self.kind == "truncated_normal":
            if self.spread is not None and self.spread < 0:
                raise ValueError("spread must be >= 0")

    def sample(self, rng: np.random.Generator) -> float:
        if self.lower == self.upper:
            return self.lower
        if self.kind == "uniform":
            return float(rng.uniform(self.lower, self.upper))
        mean = self.mean if self.mean is not None else 0.5 * (self.lower + self.upper)
        spread = self.spread if self.spread is not None else 0.25 * (self.upper - self.lower)
        if spread == 0.0:
            return float(min(max(mean, self.lower), self.upper))
        for _ in range(1000):
            draw = rng.normal(mean, spread)
            if self.lower <= draw <= self.upper:
                return float(draw)
        return float(min(max(mean, self.lower), self.upper))


@dataclass(frozen=True)
class StrikeEvent:
    time: float  # s
    peak_force: float  # N
    impulse: float  # N*s
    engaged_angle: float  # rad


@dataclass(frozen=True)
class RegimeThresholds:
    """Blade-length regime boundaries and regime behavior (fitted, not
    measured; boundary lengths classify as nominal)."""

    jam_below: float = 20e-3  # m
    roll_above: float = 30e-3  # m
    jam_strike_prob: float = 0.3  # per-revolution strike probability when jammed
    roll_attenuation: float = 0.5  # force multiplier when the blade rolls

    def __post_init__(self):
        if not 0.0 < self.jam_below < self.roll_above:
            raise ValueError("need 0 < jam_below < roll_above")
        if not 0.0 <= self.jam_strike_prob <= 1.0:
            raise ValueError("jam_strike_prob must be in [0, 1]")
        if not 0.0 < self.roll_attenuation <= 1.0:
            raise ValueError("roll_attenuation must be in (0, 1]")


def area_moment(width: float, thickness: float) -> float:
    """Second moment of area of the blade cross-section, b*t^3/12 (m^4)."""
    if width <= 0 or thickness <= 0:
        raise ValueError("width and thickness must be positive")
    return width * thickness ** 3 / 12.0


def tip_stiffness(youngs_modulus: float, second_moment: float,
                  length: float) -> float:
    """Cantilever tip stiffness 3*E*I/L^3 (N/m)."""
    if youngs_modulus <= 0 or second_moment <= 0 or length <= 0:
        raise ValueError("all stiffness inputs must be positive")
    return 3.0 * youngs_modulus * second_moment / length ** 3


def latch_deflection(length: float, housing_radius: float) -> float:
    """Tip deflection of a blade segment conformed against the housing,
    L^2/(2R) (m)."""
    if length <= 0 or housing_radius <= 0:
        raise ValueError("length and housing_radius must be positive")
    return length ** 2 / (2.0 * housing_radius)


def effective_length(housing_radius: float, engaged_angle: float) -> float:
    """Engaged cantilever length R*theta (m)."""
    if housing_radius <= 0 or engaged_angle <= 0:
        raise ValueError("housing_radius and engaged_angle must be positive")
    return housing_radius * engaged_angle


def unlatch_force(config: TailConfig, engaged_angle: float) -> float:
    """Peak elastic force at release, 3*E*I/(2*R*L_eff) with L_eff = R*theta (N)."""
    if engaged_angle <= 0:
        raise ValueError("engaged_angle must be positive")
    if engaged_angle >= config.housing_arc:
        raise ValueError("engaged_angle must be smaller than the housing arc")
    length = effective_length(config.housing_radius, engaged_angle)
    return (3.0 * config.youngs_modulus * config.second_moment
            / (2.0 * config.housing_radius * length))


def stored_energy(config: TailConfig, engaged_angle: float) -> float:
    """Elastic energy held by the engaged segment at release, equal to
    0.5*k*delta^2 = 3*E*I*L_eff/(8*R^2) (J)."""
    if engaged_angle <= 0:
        raise ValueError("engaged_angle must be positive")
    if engaged_angle >= config.housing_arc:
        raise ValueError("engaged_angle must be smaller than the housing arc")
    length = effective_length(config.housing_radius, engaged_angle)
    return (3.0 * config.youngs_modulus * config.second_moment * length
            / (8.0 * config.housing_radius ** 2))


def latch_energy(config: TailConfig) -> float:
    """Bending energy of the whole blade fully conformed to the housing arc,
    E*I*L/(2*R^2) (J). Upper bound on the energy a strike can deliver."""
    return (config.youngs_modulus * config.second_moment * config.free_length
            / (2.0 * config.housing_radius ** 2))


def half_sine_impulse(peak_force: float, pulse_width: float) -> float:
    """Analytic impulse of a half-sine pulse, 2*F*tau/pi (N*s)."""
    if peak_force <= 0 or pulse_width <= 0:
        raise ValueError("peak_force and pulse_width must be positive")
    return 2.0 * peak_force * pulse_width / math.pi


DEFAULT_UNLATCH_SPAN = 0.05  # rad, release sub-interval at the arc exit


def phase_at(rotor_angle: float, config: TailConfig,
             unlatch_span: float = DEFAULT_UNLATCH_SPAN) -> TailPhase:
    """Phase of the blade at a rotor angle.

    One revolution partitions into free rotation (outside the housing),
    load (blade conforming progressively over an arc equal to its own
    length), latch (fully conformed), and the release sub-interval ending
    at the arc exit (rotor angle 2*pi).
    """
    if unlatch_span <= 0:
        raise ValueError("unlatch_span must be positive")
    angle = rotor_angle % TWO_PI
    free_span = TWO_PI - config.housing_arc
    load_span = config.free_length / config.housing_radius
    if load_span >= config.housing_arc - unlatch_span:
        raise ValueError("housing arc too short for load and unlatch spans")
    if angle < free_span:
        return TailPhase.FREE_ROTATION
    if angle < free_span + load_span:
        return TailPhase.LOAD
    if angle < TWO_PI - unlatch_span:
        return TailPhase.LATCH
    return TailPhase.UNLATCH


def length_regime(free_length: float,
                  thresholds: RegimeThresholds | None = None) -> LengthRegime:
    """Classify a blade length; boundary lengths are nominal."""
    thresholds = thresholds or RegimeThresholds()
    if free_length <= 0:
        raise ValueError("free_length must be positive")
    if free_length < thresholds.jam_below:
        return LengthRegime.JAM
    if free_length > thresholds.roll_above:
        return LengthRegime.ROLL
    return LengthRegime.NOMINAL


def strike_sequence(config: TailConfig,
                    angle_model: EngagedAngleModel | None = None,
                    regime: LengthRegime = LengthRegime.NOMINAL,
                    duration: float = 10.0, seed: int = 0,
                    thresholds: RegimeThresholds | None = None) -> list:
    """Generate the strikes of a recording window.

    Nominal blades strike once per revolution; jammed blades strike with
    probability jam_strike_prob per revolution; rolling blades strike every
    revolution at attenuated force. Deterministic given the seed.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    angle_model = angle_model or EngagedAngleModel()
    thresholds = thresholds or RegimeThresholds()
    if angle_model.upper >= config.housing_arc:
        raise ValueError("engaged-angle upper bound must stay below the housing arc")
    rng = np.random.default_rng(seed)
    revolutions = int(math.floor(config.motor_speed * duration))
    events = []
    for k in range(revolutions):
        if regime is LengthRegime.JAM and rng.random() >= thresholds.jam_strike_prob:
            continue
        theta = angle_model.sample(rng)
        force = unlatch_force(config, theta)
        if regime is LengthRegime.ROLL:
            force *= thresholds.roll_attenuation
        events.append(StrikeEvent(
            time=(k + 1) / config.motor_speed,
            peak_force=force,
            impulse=half_sine_impulse(force, config.pulse_width),
            engaged_angle=theta,
        ))
    return events


def strike_trace(events, sample_rate: float, pulse_width: float = 0.010,
                 duration: float | None = None) -> ForceTrace:
    """Synthesize the force-sensor signal for a strike sequence: one
    half-sine pulse of width pulse_width per strike, starting at the strike
    time. Pulses must be resolved by at least two samples."""
    if pulse_width <= 0:
        raise ValueError("pulse_width must be positive")
    if sample_rate < 2.0 / pulse_width:
        raise ValueError("sample_rate must be at least 2/pulse_width")
    if duration is None:
        duration = max((e.time for e in events), default=0.0) + pulse_width
        duration = max(duration, pulse_width)
    n = int(round(duration * sample_rate)) + 1
    t = np.arange(n) / sample_rate
    samples = np.zeros(n)
    for e in events:
        mask = (t >= e.time) & (t <= e.time + pulse_width)
        samples[mask] += e.peak_force * np.sin(math.pi * (t[mask] - e.time) / pulse_width)
    return ForceTrace(sample_rate=sample_rate, samples=samples)
