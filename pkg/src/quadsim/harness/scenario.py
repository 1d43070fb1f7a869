"""Scenario definition, JSON (de)serialization, and the shipped default
hover flight.

The harness flies the craft in a pilot-aligned world frame: +x is the
direction a forward pitch command moves the craft, +y is to its left, +z is
up.  Telemetry attitude follows the matching aviation signs (forward flight
shows negative pitch, a right bank shows positive roll, heading grows
turning clockwise).  The rigid-body model underneath keeps its own printed
axis conventions; the wiring between the two lives entirely in this
package.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..controller import ControllerConfig, config_set_key, config_get_key
from ..dynamics import AirframeParams, ModelVariant
from ..propulsion import BatteryState, MotorSpec, open_circuit_voltage
from ..radio import ChannelSet, save_channel_trace

TRACE_HEADER = "t_s,throttle,roll,pitch,yaw,aux1"


@dataclass(frozen=True)
class SensorNoise:
    """RMS sensor noise and the frame-vibration amplitude felt by the IMU."""

    gyro_rads: float = 0.005
    accel_ms2: float = 0.1
    vibration_ms2: float = 0.5

    def validate(self) -> None:
        if min(self.gyro_rads, self.accel_ms2, self.vibration_ms2) < 0:
            raise ValueError("noise levels must be >= 0")


NOISE_FREE = SensorNoise(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class InputSource:
    """Where stick inputs come from: a scripted trace file, trace rows given
    directly, or the live command link."""

    kind: str = "trace"
    path: str | None = None
    rows: tuple[tuple[float, ChannelSet], ...] | None = None

    def validate(self) -> None:
        if self.kind not in ("trace", "live"):
            raise ValueError(f"input kind must be 'trace' or 'live', got {self.kind!r}")
        if self.kind == "trace" and self.path is None and self.rows is None:
            raise ValueError("trace input needs a path or inline rows")


@dataclass(frozen=True)
class Scenario:
    airframe: AirframeParams = AirframeParams()
    motor: MotorSpec = MotorSpec()
    battery: BatteryState = BatteryState()
    controller: ControllerConfig = ControllerConfig()
    variant: ModelVariant = ModelVariant.CORRECTED
    dt_s: float = 0.002
    duration_s: float = 10.0
    seed: int = 0
    sensors: SensorNoise = SensorNoise()
    input: InputSource = InputSource()
    decimation: int = 10
    hover_current_a: float = 22.2

    def validate(self) -> None:
        self.airframe.validate()
        self.motor.validate()
        self.battery.validate()
        self.controller.validate()
        self.sensors.validate()
        self.input.validate()
        if not 0 < self.dt_s <= 0.05:
            raise ValueError("dt_s must be in (0, 0.05]")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if self.decimation < 1:
            raise ValueError("decimation must be >= 1")
        if self.hover_current_a <= 0:
            raise ValueError("hover_current_a must be positive")


def _battery_to_dict(b: BatteryState) -> dict:
    return {
        "cells": b.cells,
        "capacity_ah": b.capacity,
        "remaining_ah": b.remaining,
        "peukert_k": b.peukert_k,
        "internal_resistance_ohm": b.internal_resistance,
    }


def _battery_from_dict(d: dict) -> BatteryState:
    capacity = float(d.get("capacity_ah", 3.7))
    remaining = float(d.get("remaining_ah", capacity))
    cells = int(d.get("cells", 3))
    b = BatteryState(
        cells=cells,
        capacity=capacity,
        remaining=remaining,
        peukert_k=float(d.get("peukert_k", 1.0)),
        voltage=open_circuit_voltage(remaining / capacity if capacity else 0.0, cells),
        internal_resistance=float(d.get("internal_resistance_ohm", 0.02)),
    )
    b.validate()
    return b


_CONTROLLER_KEYS = (
    "roll_p",
    "roll_i",
    "roll_integral_limit",
    "pitch_p",
    "pitch_i",
    "pitch_integral_limit",
    "yaw_p",
    "yaw_i",
    "yaw_integral_limit",
    "self_level_p",
    "self_level_i",
    "self_level_integral_limit",
    "self_level_source",
    "auto_disarm",
    "cppm_enabled",
    "stick_scaling_roll",
    "stick_scaling_pitch",
    "stick_scaling_yaw",
    "stick_scaling_throttle",
    "min_throttle",
    "height_damp",
    "height_damp_limit",
    "alarm_tenths",
    "servo_filter_ms",
)


def controller_to_dict(cfg: ControllerConfig) -> dict:
    return {key: config_get_key(cfg, key) for key in _CONTROLLER_KEYS}


def controller_from_dict(d: dict) -> ControllerConfig:
    cfg = ControllerConfig()
    for key, value in d.items():
        cfg = config_set_key(cfg, key, value)
    return cfg


def scenario_to_dict(s: Scenario) -> dict:
    doc = {
        "airframe": asdict(s.airframe),
        "motor": {
            "kv": s.motor.kv,
            "max_thrust_n": s.motor.max_thrust,
            "nominal_voltage_v": s.motor.nominal_voltage,
        },
        "battery": _battery_to_dict(s.battery),
        "controller": controller_to_dict(s.controller),
        "variant": s.variant.value,
        "dt_s": s.dt_s,
        "duration_s": s.duration_s,
        "seed": s.seed,
        "sensors": {
            "gyro_noise_rads": s.sensors.gyro_rads,
            "accel_noise_ms2": s.sensors.accel_ms2,
            "vibration_ms2": s.sensors.vibration_ms2,
        },
        "input": {"type": s.input.kind},
        "decimation": s.decimation,
        "hover_current_a": s.hover_current_a,
    }
    if s.input.kind == "trace" and s.input.path is not None:
        doc["input"]["path"] = s.input.path
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    airframe = AirframeParams(**{k: float(v) for k, v in doc.get("airframe", {}).items()})
    motor_doc = doc.get("motor", {})
    motor = MotorSpec(
        kv=float(motor_doc.get("kv", 1000.0)),
        max_thrust=float(motor_doc.get("max_thrust_n", 8.0)),
        nominal_voltage=float(motor_doc.get("nominal_voltage_v", 11.1)),
    )
    sensors_doc = doc.get("sensors", {})
    sensors = SensorNoise(
        gyro_rads=float(sensors_doc.get("gyro_noise_rads", 0.005)),
        accel_ms2=float(sensors_doc.get("accel_noise_ms2", 0.1)),
        vibration_ms2=float(sensors_doc.get("vibration_ms2", 0.5)),
    )
    input_doc = doc.get("input", {"type": "trace"})
    source = InputSource(kind=input_doc.get("type", "trace"), path=input_doc.get("path"))
    scenario = Scenario(
        airframe=airframe,
        motor=motor,
        battery=_battery_from_dict(doc.get("battery", {})),
        controller=controller_from_dict(doc.get("controller", {})),
        variant=ModelVariant(doc.get("variant", "corrected")),
        dt_s=float(doc.get("dt_s", 0.002)),
        duration_s=float(doc.get("duration_s", 10.0)),
        seed=int(doc.get("seed", 0)),
        sensors=sensors,
        input=source,
        decimation=int(doc.get("decimation", 10)),
        hover_current_a=float(doc.get("hover_current_a", 22.2)),
    )
    scenario.validate()
    return scenario


def save_scenario(s: Scenario, path) -> None:
    with open(str(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    path = Path(str(path))
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    scenario = scenario_from_dict(doc)
    if scenario.input.kind == "trace" and scenario.input.path is not None:
        trace_path = Path(scenario.input.path)
        if not trace_path.is_absolute():
            trace_path = path.parent / trace_path
        scenario = replace(scenario, input=replace(scenario.input, path=str(trace_path)))
    return scenario


def scenario_digest(s: Scenario, trace_rows=None) -> str:
    """Stable hash over the scenario inputs, trace rows included."""
    doc = scenario_to_dict(s)
    if trace_rows is not None:
        doc["trace_rows"] = [
            [t, ch.throttle, ch.roll, ch.pitch, ch.yaw, 1 if ch.aux1 else 0]
            for t, ch in trace_rows
        ]
    payload = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# --- default hover flight ----------------------------------------------------

def hover_throttle_fraction(
    airframe: AirframeParams, motor: MotorSpec, voltage: float, extra_accel: float = 0.0
) -> float:
    """Throttle fraction that balances weight (plus extra_accel) at the given
    pack voltage."""
    thrust_per_motor = airframe.m * (airframe.g + extra_accel) / 4.0
    frac = math.sqrt(thrust_per_motor / motor.max_thrust) * motor.nominal_voltage / voltage
    return min(1.0, max(0.0, frac))


def reference_hover_fraction(airframe: AirframeParams, motor: MotorSpec) -> float:
    """Hover throttle fraction at nominal voltage; anchors the current-draw
    power law."""
    return math.sqrt(airframe.m * airframe.g / (4.0 * motor.max_thrust))


def current_draw(mean_throttle: float, scenario: Scenario) -> float:
    """Pack current for a mean motor throttle fraction: the hover-referenced
    draw scaled by throttle^1.5."""
    ref = reference_hover_fraction(scenario.airframe, scenario.motor)
    if ref <= 0:
        return 0.0
    return scenario.hover_current_a * (max(0.0, mean_throttle) / ref) ** 1.5


def build_hover_trace(scenario: Scenario) -> list[tuple[float, ChannelSet]]:
    """Scripted pilot for the default hover flight: arm with self-leveling,
    climb to 2 m, hold 30 s, descend, land and disarm.

    Throttle is trimmed against a battery pre-simulation so the hold phase
    tracks the sagging pack voltage, the way a pilot would feed in throttle.
    The height-dampening feedback is compensated analytically.
    """
    from ..controller import HEIGHT_DAMP_UNIT

    af, motor = scenario.airframe, scenario.motor
    k_h = scenario.controller.height_damp / 100.0 * HEIGHT_DAMP_UNIT
    ref = reference_hover_fraction(af, motor)

    climb_a = 1.0
    climb_t = math.sqrt(2.0 / climb_a)  # half-distance of the 2 m climb
    t_climb0 = 2.0
    t_hold0 = t_climb0 + 2.0 * climb_t
    t_desc0 = t_hold0 + 30.0
    # descent: -0.2 m/s^2 for 2 s, then settle at -0.4 m/s until touchdown
    t_sink0 = t_desc0 + 2.0
    sink_z = 2.0 - 0.4  # altitude when the sink rate is established
    t_touch = t_sink0 + sink_z / 0.4
    t_cut = t_touch + 1.0
    t_disarm0 = t_cut + 0.5
    t_end = t_disarm0 + 2.5

    def accel_at(t: float) -> float | None:
        """Commanded vertical acceleration; None while motors are cut."""
        if t < t_climb0:
            return None
        if t < t_climb0 + climb_t:
            return climb_a
        if t < t_hold0:
            return -climb_a
        if t < t_desc0:
            return 0.0
        if t < t_sink0:
            return -0.2
        if t < t_cut:
            return 0.0
        return None

    battery = scenario.battery
    rows: list[tuple[float, ChannelSet]] = []
    step = 0.1
    n = int(round(t_end / step)) + 1
    from ..propulsion import battery_step

    for i in range(n):
        t = round(i * step, 3)
        accel = accel_at(t)
        if accel is None:
            throttle = 0.0
            frac = 0.0
        else:
            gain = 2.0 * af.g / max(1e-6, hover_throttle_fraction(af, motor, battery.voltage))
            frac = hover_throttle_fraction(af, motor, battery.voltage) + accel * (
                1.0 / gain + k_h
            )
            frac = min(1.0, max(0.0, frac))
            throttle = 100.0 * frac
        if t < 0.2:
            ch = ChannelSet()
        elif t < 1.7:
            ch = ChannelSet(throttle=0.0, yaw=100.0, roll=100.0)  # arm, level on
        elif t >= t_disarm0 and t < t_disarm0 + 1.5:
            ch = ChannelSet(throttle=0.0, yaw=-100.0)  # disarm
        else:
            ch = ChannelSet(throttle=throttle)
        rows.append((t, ch))
        draw = current_draw(frac, scenario)
        if draw > 0:
            battery = battery_step(battery, draw, step)
    return rows


def build_default_hover_scenario(
    noise: SensorNoise | None = None, seed: int = 7
) -> tuple[Scenario, list[tuple[float, ChannelSet]]]:
    """The shipped hover scenario plus its channel trace."""
    base = Scenario(duration_s=45.0, seed=seed)
    if noise is not None:
        base = replace(base, sensors=noise)
    rows = build_hover_trace(base)
    scenario = replace(
        base, input=InputSource(kind="trace", rows=tuple(rows)), duration_s=45.0
    )
    return scenario, rows


def write_default_scenario_files(directory) -> tuple[Path, Path]:
    """Write the shipped hover scenario JSON and its trace CSV."""
    directory = Path(str(directory))
    directory.mkdir(parents=True, exist_ok=True)
    scenario, rows = build_default_hover_scenario()
    trace_path = directory / "hover_trace.csv"
    save_channel_trace(rows, trace_path)
    file_scenario = replace(
        scenario, input=InputSource(kind="trace", path="hover_trace.csv")
    )
    scenario_path = directory / "hover.json"
    save_scenario(file_scenario, scenario_path)
    return scenario_path, trace_path
