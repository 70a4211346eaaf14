"""Experiment configuration: a single versioned JSON document holding every
tunable of the toolkit. Files may override any subset of the defaults;
unknown keys are always rejected so typos cannot silently fall back."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .gait import AsymmetryNoise, EncoderModel, GaitConfig
from .locomotion import RobotParams
from .springtail import EngagedAngleModel, RegimeThresholds, TailConfig
from .terrain import CrawlCurve, Material, MoistureResponse, SkipCurve, default_curves

SCHEMA_VERSION = 1
DEFAULT_SEED = 0


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


def _substrate_dict(r: MoistureResponse) -> dict:
    return {
        "skip": {"floor": r.skip.floor, "peak": r.skip.peak,
                 "center": r.skip.center, "width": r.skip.width},
        "crawl": {"cap": r.crawl.cap, "rise_mid": r.crawl.rise_mid,
                  "rise_width": r.crawl.rise_width, "decay": r.crawl.decay},
        "slip_moisture": r.slip_moisture,
        "excavation_traction": r.excavation_traction,
        "entanglement": r.entanglement,
        "moisture_sensitive": r.moisture_sensitive,
    }


def default_dict() -> dict:
    """The complete default configuration as a plain JSON-ready dict."""
    tail = TailConfig()
    angle = EngagedAngleModel()
    thresholds = RegimeThresholds()
    gait = GaitConfig()
    noise = gait.noise
    robot = RobotParams()
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": DEFAULT_SEED,
        "tail": {
            "youngs_modulus_pa": tail.youngs_modulus,
            "width_m": tail.width,
            "thickness_m": tail.thickness,
            "free_length_m": tail.free_length,
            "housing_radius_m": tail.housing_radius,
            "housing_arc_rad": tail.housing_arc,
            "motor_rev_per_s": tail.motor_speed,
            "pulse_width_s": tail.pulse_width,
        },
        "engaged_angle": {
            "kind": angle.kind,
            "lower_rad": angle.lower,
            "upper_rad": angle.upper,
            "mean_rad": angle.mean,
            "spread_rad": angle.spread,
        },
        "regimes": {
            "jam_below_m": thresholds.jam_below,
            "roll_above_m": thresholds.roll_above,
            "jam_strike_prob": thresholds.jam_strike_prob,
            "roll_attenuation": thresholds.roll_attenuation,
        },
        "gait": {
            "fin_speed_rad_s": gait.fin_speed,
            "stride_m": gait.stride,
            "dt_s": gait.dt,
            "magnet_angles_rad": list(gait.encoder.magnet_angles),
            "detection_window_rad": gait.encoder.detection_window,
        },
        "noise": {
            "gain_split_lo": noise.gain_split[0],
            "gain_split_hi": noise.gain_split[1],
            "stride_jitter_std": noise.stride_jitter_std,
            "heading_jitter_std": noise.heading_jitter_std,
            "track_width_m": noise.track_width,
        },
        "robot": {
            "mass_kg": robot.mass,
            "body_length_m": robot.body_length,
            "launch_angle_rad": robot.launch_angle,
            "gravity_m_s2": robot.gravity,
            "pitch_speed_limit_m_s": robot.pitch_speed_limit,
        },
        "substrates": {
            m.value: _substrate_dict(default_curves(m)) for m in Material
        },
        "analysis": {
            "peak_threshold_n": 1.0,
            "min_separation_s": 0.3,
            "bootstrap_resamples": 10000,
            "ci_level": 0.95,
            "trace_sample_rate_hz": 2000.0,
        },
        "experiments": {
            "tail_characterize": {
                "lengths_mm": [15.0, 20.0, 25.0, 30.0, 35.0],
                "record_s": 10.0,
            },
            "gait_drift": {
                "distance_m": 1.0,
                "trials": 3,
            },
            "moisture_sweep": {
                "materials": ["uniform_sand", "bentonite_clay"],
                "uniform_sand_grid": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
                "bentonite_clay_grid": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
                "duration_s": 30.0,
                "trials": 3,
            },
            "substrate_bench": {
                "conditions": [
                    ["uniform_sand", 0.0],
                    ["nonuniform_sand", 0.0],
                    ["bentonite_clay", 0.3333],
                    ["grass", 0.0],
                ],
                "duration_s": 30.0,
                "trials": 3,
            },
            "scenario": {
                "segments": [
                    ["grass", "skip", 12.0, 0.0],
                    ["rigid", "sync_crawl", 6.0, 0.0],
                ],
            },
            "calibrate": {
                "budget": 400,
                "n_trials": 3,
                "duration_s": 30.0,
                "restarts": 3,
            },
        },
    }


def _merge(base, override, path=""):
    """Recursive dict merge; override keys must already exist in base."""
    for key, value in override.items():
        dotted = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {dotted}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {dotted} must be an object")
            _merge(base[key], value, dotted)
        else:
            base[key] = value
    return base


def _number(section, key, path, allow_none=False):
    value = section[key]
    if value is None:
        if allow_none:
            return None
        raise ConfigError(f"config key {path}.{key} must be a number")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {path}.{key} must be a number")
    return float(value)


@dataclass
class ExperimentConfig:
    """Typed view of the configuration document."""

    tail: TailConfig
    angle_model: EngagedAngleModel
    thresholds: RegimeThresholds
    gait: GaitConfig
    robot: RobotParams
    responses: dict  # Material -> MoistureResponse
    analysis: dict
    experiments: dict
    seed: int
    raw: dict = field(repr=False, default_factory=dict)

    def trial_kwargs(self) -> dict:
        """Keyword arguments shared by locomotion trial runners."""
        return {
            "tail": self.tail,
            "gait": self.gait,
            "robot": self.robot,
            "angle_model": self.angle_model,
            "thresholds": self.thresholds,
            "responses": self.responses,
        }


def _build(doc: dict) -> ExperimentConfig:
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version: {doc['schema_version']}")
    try:
        t = doc["tail"]
        tail = TailConfig(
            youngs_modulus=_number(t, "youngs_modulus_pa", "tail"),
            width=_number(t, "width_m", "tail"),
            thickness=_number(t, "thickness_m", "tail"),
            free_length=_number(t, "free_length_m", "tail"),
            housing_radius=_number(t, "housing_radius_m", "tail"),
            housing_arc=_number(t, "housing_arc_rad", "tail"),
            motor_speed=_number(t, "motor_rev_per_s", "tail"),
            pulse_width=_number(t, "pulse_width_s", "tail"),
        )
        a = doc["engaged_angle"]
        angle_model = EngagedAngleModel(
            kind=a["kind"],
            lower=_number(a, "lower_rad", "engaged_angle"),
            upper=_number(a, "upper_rad", "engaged_angle"),
            mean=_number(a, "mean_rad", "engaged_angle", allow_none=True),
            spread=_number(a, "spread_rad", "engaged_angle", allow_none=True),
        )
        r = doc["regimes"]
        thresholds = RegimeThresholds(
            jam_below=_number(r, "jam_below_m", "regimes"),
            roll_above=_number(r, "roll_above_m", "regimes"),
            jam_strike_prob=_number(r, "jam_strike_prob", "regimes"),
            roll_attenuation=_number(r, "roll_attenuation", "regimes"),
        )
        g = doc["gait"]
        n = doc["noise"]
        noise = AsymmetryNoise(
            gain_split=(_number(n, "gain_split_lo", "noise"),
                        _number(n, "gain_split_hi", "noise")),
            stride_jitter_std=_number(n, "stride_jitter_std", "noise"),
            heading_jitter_std=_number(n, "heading_jitter_std", "noise"),
            track_width=_number(n, "track_width_m", "noise"),
        )
        encoder = EncoderModel(
            magnet_angles=tuple(g["magnet_angles_rad"]),
            detection_window=_number(g, "detection_window_rad", "gait"),
        )
        gait = GaitConfig(
            fin_speed=_number(g, "fin_speed_rad_s", "gait"),
            encoder=encoder,
            noise=noise,
            stride=_number(g, "stride_m", "gait"),
            dt=_number(g, "dt_s", "gait"),
        )
        rb = doc["robot"]
        robot = RobotParams(
            mass=_number(rb, "mass_kg", "robot"),
            body_length=_number(rb, "body_length_m", "robot"),
            launch_angle=_number(rb, "launch_angle_rad", "robot"),
            gravity=_number(rb, "gravity_m_s2", "robot"),
            pitch_speed_limit=_number(rb, "pitch_speed_limit_m_s", "robot"),
        )
        responses = {}
        for key, sub in doc["substrates"].items():
            material = Material(key)
            path = f"substrates.{key}"
            skip = SkipCurve(
                floor=_number(sub["skip"], "floor", path),
                peak=_number(sub["skip"], "peak", path),
                center=_number(sub["skip"], "center", path),
                width=_number(sub["skip"], "width", path),
            )
            crawl = CrawlCurve(
                cap=_number(sub["crawl"], "cap", path),
                rise_mid=_number(sub["crawl"], "rise_mid", path),
                rise_width=_number(sub["crawl"], "rise_width", path),
                decay=_number(sub["crawl"], "decay", path),
            )
            responses[material] = MoistureResponse(
                skip=skip, crawl=crawl,
                slip_moisture=_number(sub, "slip_moisture", path,
                                      allow_none=True),
                excavation_traction=_number(sub, "excavation_traction", path),
                entanglement=_number(sub, "entanglement", path),
                moisture_sensitive=bool(sub["moisture_sensitive"]),
            )
        seed = doc["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("config key seed must be an integer")
    except (ValueError, TypeError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(
        tail=tail, angle_model=angle_model, thresholds=thresholds,
        gait=gait, robot=robot, responses=responses,
        analysis=dict(doc["analysis"]), experiments=doc["experiments"],
        seed=seed, raw=doc,
    )


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a configuration from defaults, an optional JSON file, and
    optional in-process overrides (applied in that order)."""
    doc = default_dict()
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must contain a JSON object")
        _merge(doc, user)
    if overrides:
        _merge(doc, overrides)
    return _build(doc)


def config_with_responses(config: ExperimentConfig, responses: dict) -> dict:
    """Serializable copy of a config document with new substrate curves."""
    doc = json.loads(json.dumps(config.raw))
    for material, response in responses.items():
        doc["substrates"][material.value] = _substrate_dict(response)
    return doc


def write_config(doc: dict, path):
    with open(path, "w", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
