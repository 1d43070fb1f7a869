"""Closed-loop scenario runner, motion-primitive checks and the battery
endurance simulation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .. import dynamics, propulsion
from ..controller import (
    ArmMode,
    ControllerState,
    MotorOutputs,
    controller_update,
)
from ..propulsion import BROWNOUT_V, battery_step, low_voltage_alarm, pwm_to_throttle, throttle_to_thrust
from ..radio import ChannelSet, load_channel_trace, sample_channel_trace
from .scenario import Scenario, current_draw, scenario_digest
from .sensors import SensorModel


class SimulationError(RuntimeError):
    """Raised when the state stops being finite; carries the index of the
    last good telemetry record."""

    def __init__(self, message: str, record_index: int):
        super().__init__(message)
        self.record_index = record_index


@dataclass(frozen=True)
class TelemetryRecord:
    t_s: float
    x_m: float
    y_m: float
    z_m: float
    roll_rad: float
    pitch_rad: float
    yaw_rad: float
    p_rads: float
    q_rads: float
    r_rads: float
    thr1_n: float
    thr2_n: float
    thr3_n: float
    thr4_n: float
    vbatt_v: float
    ibatt_a: float
    remaining_ah: float
    armed: bool
    mode: str


@dataclass(frozen=True)
class FlightLog:
    records: tuple[TelemetryRecord, ...]
    digest: str


# Pilot-frame wiring of the rigid-body state: the model's printed channel
# algebra pairs the mixer's pitch slot with its first Euler angle and the
# roll slot with its second, each with inverted sign.  These two helpers are
# the single place that mapping lives.

def _telemetry_position(s: dynamics.RigidBodyState) -> tuple[float, float, float]:
    return (-s.y, s.x, s.z)


def _telemetry_attitude(s: dynamics.RigidBodyState) -> tuple[float, float, float]:
    return (-s.att.pitch, -s.att.roll, -s.att.yaw)


def _telemetry_rates(s: dynamics.RigidBodyState) -> tuple[float, float, float]:
    return (-s.pitch_rate, -s.roll_rate, -s.yaw_rate)


def _telemetry_accel(accel: tuple[float, float, float]) -> tuple[float, float, float]:
    return (-accel[1], accel[0], accel[2])


def _mode_label(ctrl: ControllerState) -> str:
    if ctrl.arm.mode is ArmMode.SAFE:
        return "safe"
    return "selflevel" if ctrl.arm.self_level_on else "rate"


def _apply_ground(s: dynamics.RigidBodyState) -> dynamics.RigidBodyState:
    """Sticky ground plane at z = 0: no penetration, no sliding."""
    if s.z > 0.0:
        return s
    if s.vz > 0.0:
        return replace(s, z=0.0)
    return replace(
        s,
        z=0.0,
        vx=0.0,
        vy=0.0,
        vz=0.0,
        roll_rate=0.0,
        pitch_rate=0.0,
        yaw_rate=0.0,
    )


class SimCore:
    """Single-step simulation engine: one controller pass, one rigid-body
    step, one battery update, one IMU sample.  Shared by the scripted
    runner and the live service; commands/config changes may only be applied
    between calls to step()."""

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        self.config = scenario.controller
        self.state = dynamics.RigidBodyState()
        self.ctrl = ControllerState()
        self.battery = scenario.battery
        self.sensor_model = SensorModel(scenario.sensors, scenario.seed, gravity=scenario.airframe.g)
        self.reading = self.sensor_model.sample(
            (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), 0.0, scenario.dt_s
        )
        self.t = 0.0
        self.steps = 0
        self.current = 0.0
        self.crashed = False
        self.thrusts = dynamics.MotorThrusts(0.0, 0.0, 0.0, 0.0)
        self.records_emitted = 0

    @property
    def armed(self) -> bool:
        return self.ctrl.arm.mode is ArmMode.ARMED

    @property
    def alarm_active(self) -> bool:
        return low_voltage_alarm(self.battery.voltage, self.config.alarm_tenths)

    def record(self) -> TelemetryRecord:
        pos = _telemetry_position(self.state)
        att = _telemetry_attitude(self.state)
        rates = _telemetry_rates(self.state)
        return TelemetryRecord(
            t_s=self.t,
            x_m=pos[0],
            y_m=pos[1],
            z_m=pos[2],
            roll_rad=att[0],
            pitch_rad=att[1],
            yaw_rad=att[2],
            p_rads=rates[0],
            q_rads=rates[1],
            r_rads=rates[2],
            thr1_n=self.thrusts.th1,
            thr2_n=self.thrusts.th2,
            thr3_n=self.thrusts.th3,
            thr4_n=self.thrusts.th4,
            vbatt_v=self.battery.voltage,
            ibatt_a=self.current,
            remaining_ah=self.battery.remaining,
            armed=self.armed,
            mode=_mode_label(self.ctrl),
        )

    def step(self, ch: ChannelSet) -> TelemetryRecord:
        """Advance one dt; returns the telemetry record for the step start
        (pre-step state with the thrusts applied over this step)."""
        scenario = self.scenario
        af = scenario.airframe
        dt = scenario.dt_s

        self.ctrl, outputs = controller_update(self.ctrl, self.config, ch, self.reading, dt)
        throttles = [pwm_to_throttle(p) for p in outputs.as_tuple()]
        if self.crashed or self.battery.voltage <= BROWNOUT_V:
            self.crashed = True
            self.thrusts = dynamics.MotorThrusts(0.0, 0.0, 0.0, 0.0)
        else:
            values = [
                min(
                    scenario.motor.max_thrust,
                    throttle_to_thrust(f, self.battery.voltage, scenario.motor),
                )
                for f in throttles
            ]
            self.thrusts = dynamics.MotorThrusts(*values)
        rec = self.record()

        u = dynamics.control_inputs(self.thrusts, af, scenario.variant)
        world_accel = dynamics.translational_accel(self.state, u.u1, af, scenario.variant)
        try:
            self.state = dynamics.step(self.state, self.thrusts, af, scenario.variant, dt)
            blown = not self.state.is_finite()
        except (ValueError, OverflowError):
            # math domain errors inside the integrator mean the state blew
            # up mid-step (inputs were validated before the loop started)
            blown = True
        if blown:
            raise SimulationError(
                f"state became non-finite at t={self.t + dt:.4f}s "
                f"(record index {self.records_emitted - 1})",
                self.records_emitted - 1,
            )
        self.state = _apply_ground(self.state)
        if self.state.z == 0.0 and self.state.vz == 0.0:
            world_accel = (0.0, 0.0, 0.0)  # held by the ground, not falling

        mean_throttle = sum(throttles) / 4.0
        self.current = current_draw(mean_throttle, scenario)
        if self.current > 0.0:
            self.battery = battery_step(self.battery, self.current, dt)

        rpm_proxy = scenario.motor.kv * self.battery.voltage * mean_throttle
        self.reading = self.sensor_model.sample(
            _telemetry_rates(self.state),
            _telemetry_attitude(self.state),
            _telemetry_accel(world_accel),
            rpm_proxy,
            dt,
        )
        self.steps += 1
        self.t = self.steps * dt
        return rec


def run_scenario(scenario: Scenario) -> FlightLog:
    """Fly one scripted scenario and return its decimated telemetry log.

    Each step samples the stick trace, runs the controller, turns ESC
    pulses into thrusts at the present pack voltage, advances the rigid
    body, discharges the battery, and synthesizes the next IMU reading.  A
    pack collapse below the brownout threshold zeroes thrust for good.
    Identical scenarios and seeds give bit-identical logs.
    """
    scenario.validate()
    if scenario.input.kind != "trace":
        raise ValueError("run_scenario needs a trace input; use SimSession for live flight")
    rows = scenario.input.rows
    if rows is None:
        rows = tuple(load_channel_trace(scenario.input.path))
    rows = list(rows)

    core = SimCore(scenario)
    records: list[TelemetryRecord] = []
    digest = scenario_digest(scenario, rows)
    n_steps = int(round(scenario.duration_s / scenario.dt_s))
    for i in range(n_steps):
        ch = sample_channel_trace(rows, core.t)
        rec = core.step(ch)
        if i % scenario.decimation == 0:
            records.append(rec)
            core.records_emitted = len(records)
    return FlightLog(records=tuple(records), digest=digest)


class Primitive(enum.Enum):
    TAKEOFF = "takeoff"
    LAND = "land"
    FORWARD = "forward"
    BACKWARD = "backward"
    LEFT = "left"
    RIGHT = "right"
    YAW_CW = "yaw_cw"
    YAW_CCW = "yaw_ccw"
    HOVER = "hover"


@dataclass(frozen=True)
class PrimitiveResult:
    primitive: Primitive
    passed: bool
    metrics: dict
    failures: tuple[str, ...]


def motion_primitive_check(
    log: FlightLog,
    primitive: Primitive,
    window: tuple[float, float] | None = None,
    min_displacement: float = 0.3,
    min_rise: float = 0.5,
    hover_drift_m: float = 0.5,
    hover_attitude_deg: float = 5.0,
    min_heading_rad: float = 0.3,
) -> PrimitiveResult:
    """Judge whether a telemetry window exhibits a motion primitive.

    Signs follow the pilot frame: forward flight means +x displacement with
    nose-down (negative) pitch, right translation means -y with positive
    roll, clockwise yaw grows the heading.
    """
    if window is None:
        rows = list(log.records)
    else:
        rows = [r for r in log.records if window[0] <= r.t_s <= window[1]]
    if not rows:
        raise ValueError("empty telemetry window")

    failures: list[str] = []
    metrics: dict = {}
    dx = rows[-1].x_m - rows[0].x_m
    dy = rows[-1].y_m - rows[0].y_m
    dz = rows[-1].z_m - rows[0].z_m
    dyaw = rows[-1].yaw_rad - rows[0].yaw_rad
    mean_pitch = sum(r.pitch_rad for r in rows) / len(rows)
    mean_roll = sum(r.roll_rad for r in rows) / len(rows)
    metrics.update(
        dx_m=dx, dy_m=dy, dz_m=dz, dyaw_rad=dyaw, mean_pitch_rad=mean_pitch, mean_roll_rad=mean_roll
    )

    jitter = 0.02
    if primitive is Primitive.TAKEOFF:
        if dz < min_rise:
            failures.append(f"altitude gain {dz:.3f} m below {min_rise} m")
        if any(b.z_m < a.z_m - jitter for a, b in zip(rows, rows[1:])):
            failures.append("altitude not strictly increasing")
    elif primitive is Primitive.LAND:
        if -dz < min_rise:
            failures.append(f"altitude loss {-dz:.3f} m below {min_rise} m")
        if rows[-1].z_m > 0.15:
            failures.append(f"final altitude {rows[-1].z_m:.3f} m above ground band")
        if any(b.z_m > a.z_m + jitter for a, b in zip(rows, rows[1:])):
            failures.append("altitude not strictly decreasing")
    elif primitive in (Primitive.FORWARD, Primitive.BACKWARD):
        sign = 1.0 if primitive is Primitive.FORWARD else -1.0
        if sign * dx < min_displacement:
            failures.append(f"x displacement {dx:.3f} m lacks {min_displacement} m travel")
        if sign * mean_pitch > -1e-3:
            failures.append(f"mean pitch {mean_pitch:.4f} rad has the wrong sign")
    elif primitive in (Primitive.LEFT, Primitive.RIGHT):
        sign = 1.0 if primitive is Primitive.LEFT else -1.0
        if sign * dy < min_displacement:
            failures.append(f"y displacement {dy:.3f} m lacks {min_displacement} m travel")
        if sign * mean_roll > -1e-3:
            failures.append(f"mean roll {mean_roll:.4f} rad has the wrong sign")
    elif primitive in (Primitive.YAW_CW, Primitive.YAW_CCW):
        sign = 1.0 if primitive is Primitive.YAW_CW else -1.0
        if sign * dyaw < min_heading_rad:
            failures.append(f"heading change {dyaw:.3f} rad lacks {min_heading_rad} rad")
    elif primitive is Primitive.HOVER:
        drift = max(
            math.hypot(r.x_m - rows[0].x_m, r.y_m - rows[0].y_m) for r in rows
        )
        tilt = max(max(abs(r.roll_rad), abs(r.pitch_rad)) for r in rows)
        metrics.update(drift_m=drift, max_tilt_rad=tilt)
        if drift >= hover_drift_m:
            failures.append(f"horizontal drift {drift:.3f} m exceeds {hover_drift_m} m")
        if math.degrees(tilt) >= hover_attitude_deg:
            failures.append(
                f"attitude {math.degrees(tilt):.2f} deg exceeds {hover_attitude_deg} deg"
            )
    else:  # pragma: no cover
        raise ValueError(f"unknown primitive {primitive}")

    return PrimitiveResult(primitive, not failures, metrics, tuple(failures))


@dataclass(frozen=True)
class EnduranceResult:
    alarm_min: float | None
    depletion_min: float


def endurance_sim(
    capacity_ah: float,
    draw_a: float,
    k: float = 1.0,
    alarm_tenths: int = 108,
    dt_s: float = 1.0,
) -> EnduranceResult:
    """Constant-current discharge to empty: minutes until the low-voltage
    alarm and until depletion (or brownout, whichever is first)."""
    if capacity_ah <= 0 or draw_a <= 0:
        raise ValueError("capacity and draw must be positive")
    battery = propulsion.BatteryState(
        capacity=capacity_ah, remaining=capacity_ah, peukert_k=k
    )
    t = 0.0
    alarm_at: float | None = None
    while battery.remaining > 0.0 and battery.voltage > BROWNOUT_V:
        battery = battery_step(battery, draw_a, dt_s)
        t += dt_s
        if alarm_at is None and low_voltage_alarm(battery.voltage, alarm_tenths):
            alarm_at = t / 60.0
        if t > 3600.0 * 1000.0:  # guard against a zero-draw stall
            break
    return EnduranceResult(alarm_min=alarm_at, depletion_min=t / 60.0)
