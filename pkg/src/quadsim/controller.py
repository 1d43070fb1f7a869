"""KK2-style flight controller emulation.

Covers the arming state machine with its stick gestures, the PI
stabilization loops (rate mode and the self-level cascade), the X-layout
motor mixer, stick scaling, minimum throttle, height dampening, the servo
low-pass filter and the auto-disarm timer.

Menu settings keep the board's 0..200 integer convention; the constants
below anchor those integers to physical gains.  A setting of 100 means one
unit gain.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .radio import ChannelSet, GESTURE_YAW, THROTTLE_IDLE

# Gain anchors: physical gain at a menu setting of 100.
RATE_P_UNIT_RP = 0.01  # mixer fraction per rad/s, roll and pitch rate loops
RATE_I_UNIT_RP = 0.02  # mixer fraction per rad of accumulated rate error
RATE_P_UNIT_YAW = 0.05
RATE_I_UNIT_YAW = 0.10
LEVEL_P_UNIT = 3.0  # rad/s of rate set-point per rad of attitude error
LEVEL_I_UNIT = 1.0
HEIGHT_DAMP_UNIT = 0.05  # throttle fraction per m/s^2 of vertical accel

# Full-stick set-points.
FULL_STICK_RATE = 3.0  # rad/s at 100 units in rate mode
FULL_STICK_ANGLE = 0.35  # rad at 100 units in self-level mode

GRAVITY_REF = 9.81
COMPLEMENTARY_ALPHA = 0.98  # per step at the reference period
ALPHA_REF_DT = 0.002

ARM_HOLD_S = 1.0
AUTO_DISARM_S = 600.0
NEUTRAL_BAND = 5.0

PWM_SAFE_US = 1000.0


class ArmMode(enum.Enum):
    SAFE = "safe"
    ARMED = "armed"


class SelfLevelSource(enum.Enum):
    STICK = "STICK"
    AUX = "AUX"


@dataclass(frozen=True)
class PiGains:
    """One PI loop's menu settings plus its anti-windup bound."""

    p: int
    i: int
    integral_limit: float = 20.0

    def validate(self, name: str) -> None:
        if not 0 <= self.p <= 200:
            raise ValueError(f"{name} P gain must be 0..200")
        if not 0 <= self.i <= 200:
            raise ValueError(f"{name} I gain must be 0..200")
        if self.integral_limit < 0:
            raise ValueError(f"{name} integral limit must be >= 0")


@dataclass(frozen=True)
class ControllerConfig:
    roll: PiGains = PiGains(50, 25)
    pitch: PiGains = PiGains(50, 25)
    yaw: PiGains = PiGains(50, 25)
    self_level: PiGains = PiGains(50, 0, 10.0)
    self_level_source: SelfLevelSource = SelfLevelSource.STICK
    auto_disarm: bool = True
    cppm_enabled: bool = False
    stick_scaling_roll: int = 100
    stick_scaling_pitch: int = 100
    stick_scaling_yaw: int = 100
    stick_scaling_throttle: int = 100
    min_throttle: int = 10
    height_damp: int = 30
    height_damp_limit: int = 10
    alarm_tenths: int = 108
    servo_filter_ms: float = 50.0

    def validate(self) -> None:
        self.roll.validate("roll")
        self.pitch.validate("pitch")
        self.yaw.validate("yaw")
        self.self_level.validate("self_level")
        for name in (
            "stick_scaling_roll",
            "stick_scaling_pitch",
            "stick_scaling_yaw",
            "stick_scaling_throttle",
        ):
            if not 0 <= getattr(self, name) <= 200:
                raise ValueError(f"{name} must be 0..200")
        if not 0 <= self.min_throttle <= 100:
            raise ValueError("min_throttle must be 0..100")
        if not 0 <= self.height_damp <= 100:
            raise ValueError("height_damp must be 0..100")
        if not 0 <= self.height_damp_limit <= 100:
            raise ValueError("height_damp_limit must be 0..100")
        if self.alarm_tenths < 0:
            raise ValueError("alarm_tenths must be >= 0")
        if self.servo_filter_ms < 0:
            raise ValueError("servo_filter_ms must be >= 0")


DEFAULT_CONFIG = ControllerConfig()


@dataclass(frozen=True)
class SensorReading:
    """Body-frame gyro rates (rad/s) and accelerometer specific force
    (m/s^2); a level, resting craft reads (0, 0, +g)."""

    gyro_roll: float
    gyro_pitch: float
    gyro_yaw: float
    accel_x: float
    accel_y: float
    accel_z: float

    def is_finite(self) -> bool:
        return all(
            map(
                math.isfinite,
                (
                    self.gyro_roll,
                    self.gyro_pitch,
                    self.gyro_yaw,
                    self.accel_x,
                    self.accel_y,
                    self.accel_z,
                ),
            )
        )


LEVEL_READING = SensorReading(0.0, 0.0, 0.0, 0.0, 0.0, GRAVITY_REF)


@dataclass(frozen=True)
class ArmState:
    mode: ArmMode = ArmMode.SAFE
    self_level_on: bool = False
    hold_timer: float = 0.0
    inactivity_timer: float = 0.0


@dataclass(frozen=True)
class MotorOutputs:
    """ESC command pulses, microseconds, clamped to [1000, 2000]."""

    m1: float
    m2: float
    m3: float
    m4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.m1, self.m2, self.m3, self.m4)


SAFE_OUTPUTS = MotorOutputs(PWM_SAFE_US, PWM_SAFE_US, PWM_SAFE_US, PWM_SAFE_US)


@dataclass(frozen=True)
class ControllerState:
    """Everything the loop carries between updates."""

    arm: ArmState = ArmState()
    est_roll: float = 0.0
    est_pitch: float = 0.0
    integ_roll: float = 0.0
    integ_pitch: float = 0.0
    integ_yaw: float = 0.0
    integ_level_roll: float = 0.0
    integ_level_pitch: float = 0.0
    servo: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)


def arm_step(state: ArmState, ch: ChannelSet, cfg: ControllerConfig, dt: float) -> ArmState:
    """Advance the arming state machine by dt.

    Arming (disarming) needs throttle at idle with full right (left) yaw
    held for the full gesture time.  Holding the aileron right/left during a
    completed gesture turns self-leveling on/off when it is stick-sourced.
    A config flag disarms automatically after ten minutes of neutral sticks.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")

    idle = ch.throttle <= THROTTLE_IDLE
    gesture = 0
    if idle and ch.yaw >= GESTURE_YAW:
        gesture = 1
    elif idle and ch.yaw <= -GESTURE_YAW:
        gesture = -1

    hold = state.hold_timer + dt if gesture != 0 else 0.0
    mode = state.mode
    self_level = state.self_level_on

    if gesture != 0 and hold >= ARM_HOLD_S:
        wanted = ArmMode.ARMED if gesture > 0 else ArmMode.SAFE
        if wanted is not mode:
            mode = wanted
            if cfg.self_level_source is SelfLevelSource.STICK:
                if ch.roll >= GESTURE_YAW:
                    self_level = True
                elif ch.roll <= -GESTURE_YAW:
                    self_level = False

    if cfg.self_level_source is SelfLevelSource.AUX:
        self_level = ch.aux1

    inactivity = state.inactivity_timer
    if mode is ArmMode.ARMED and idle and ch.neutral_axes(NEUTRAL_BAND):
        inactivity += dt
        if cfg.auto_disarm and inactivity >= AUTO_DISARM_S:
            mode = ArmMode.SAFE
            inactivity = 0.0
    else:
        inactivity = 0.0

    return ArmState(mode=mode, self_level_on=self_level, hold_timer=hold, inactivity_timer=inactivity)


def pi_step(
    setpoint: float,
    measured: float,
    p_setting: int,
    i_setting: int,
    integrator: float,
    dt: float,
    unit_p: float,
    unit_i: float,
    integral_limit: float,
) -> tuple[float, float]:
    """One PI update.  Gains are menu integers mapped through their unit
    anchors; the integrator is clamped to +/-integral_limit."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    error = setpoint - measured
    integ = integrator + error * dt
    integ = min(integral_limit, max(-integral_limit, integ))
    kp = p_setting / 100.0 * unit_p
    ki = i_setting / 100.0 * unit_i
    return kp * error + ki * integ, integ


def attitude_estimate(
    est_roll: float,
    est_pitch: float,
    sensors: SensorReading,
    dt: float,
    alpha: float | None = None,
) -> tuple[float, float]:
    """Complementary filter: gyro-integrated attitude pulled toward the
    accelerometer gravity direction.  alpha=1 degenerates to pure gyro
    integration."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if alpha is None:
        alpha = COMPLEMENTARY_ALPHA ** (dt / ALPHA_REF_DT)
    gyro_roll = est_roll + sensors.gyro_roll * dt
    gyro_pitch = est_pitch + sensors.gyro_pitch * dt
    acc_roll = math.atan2(sensors.accel_y, sensors.accel_z)
    acc_pitch = math.atan2(
        -sensors.accel_x, math.hypot(sensors.accel_y, sensors.accel_z)
    )
    return (
        alpha * gyro_roll + (1.0 - alpha) * acc_roll,
        alpha * gyro_pitch + (1.0 - alpha) * acc_pitch,
    )


def mixer(
    throttle_cmd: float, roll_cmd: float, pitch_cmd: float, yaw_cmd: float
) -> tuple[float, float, float, float]:
    """X-layout mix to motor command fractions, clamped to [0, 1].

    m1 front-left (CW), m2 front-right (CCW), m3 back-right (CW),
    m4 back-left (CCW).  A forward pitch command (negative) raises the rear
    pair; yaw works the CW pair {1,3} against the CCW pair {2,4}.
    """
    if not 0.0 <= throttle_cmd <= 1.0:
        raise ValueError("throttle command must be in [0, 1]")
    for name, value in (("roll", roll_cmd), ("pitch", pitch_cmd), ("yaw", yaw_cmd)):
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"{name} command must be in [-1, 1]")
    m1 = throttle_cmd + roll_cmd + pitch_cmd - yaw_cmd
    m2 = throttle_cmd - roll_cmd + pitch_cmd + yaw_cmd
    m3 = throttle_cmd - roll_cmd - pitch_cmd - yaw_cmd
    m4 = throttle_cmd + roll_cmd - pitch_cmd + yaw_cmd
    return tuple(min(1.0, max(0.0, m)) for m in (m1, m2, m3, m4))


def servo_filter(prev_out: float, value: float, dt: float, filter_ms: float) -> float:
    """First-order output low-pass; a 0 ms setting is an exact passthrough."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if filter_ms < 0:
        raise ValueError("filter_ms must be >= 0")
    if filter_ms == 0:
        return value
    tau = filter_ms / 1000.0
    return value + (prev_out - value) * math.exp(-dt / tau)


def height_dampening(accel_z: float, cfg: ControllerConfig) -> float:
    """Throttle adjustment opposing vertical acceleration, clamped to the
    configured share of full throttle."""
    adjustment = -(cfg.height_damp / 100.0) * HEIGHT_DAMP_UNIT * (accel_z - GRAVITY_REF)
    limit = cfg.height_damp_limit / 100.0
    return min(limit, max(-limit, adjustment))


def stick_scale(value: float, scaling: int) -> float:
    """Linear stick response scaling; 100 is identity."""
    return value * scaling / 100.0


def controller_update(
    state: ControllerState,
    cfg: ControllerConfig,
    ch: ChannelSet,
    sensors: SensorReading,
    dt: float,
) -> tuple[ControllerState, MotorOutputs]:
    """Run one full control-loop pass and return the next state plus the
    four ESC pulses.  Non-finite sensor data is treated as a sensor fault
    and forces SAFE.  While SAFE every output is exactly 1000 us.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")

    if not sensors.is_finite():
        arm = replace(state.arm, mode=ArmMode.SAFE, hold_timer=0.0, inactivity_timer=0.0)
        return ControllerState(arm=arm, est_roll=state.est_roll, est_pitch=state.est_pitch), SAFE_OUTPUTS

    arm = arm_step(state.arm, ch, cfg, dt)
    est_roll, est_pitch = attitude_estimate(state.est_roll, state.est_pitch, sensors, dt)

    if arm.mode is ArmMode.SAFE:
        return ControllerState(arm=arm, est_roll=est_roll, est_pitch=est_pitch), SAFE_OUTPUTS

    throttle = stick_scale(ch.throttle, cfg.stick_scaling_throttle)
    roll = stick_scale(ch.roll, cfg.stick_scaling_roll)
    pitch = stick_scale(ch.pitch, cfg.stick_scaling_pitch)
    yaw = stick_scale(ch.yaw, cfg.stick_scaling_yaw)
    throttle_frac = min(1.0, max(0.0, throttle / 100.0))
    at_idle = ch.throttle <= THROTTLE_IDLE

    integ_lr = state.integ_level_roll
    integ_lp = state.integ_level_pitch
    if arm.self_level_on:
        roll_rate_set, integ_lr = pi_step(
            roll / 100.0 * FULL_STICK_ANGLE,
            est_roll,
            cfg.self_level.p,
            cfg.self_level.i,
            integ_lr,
            dt,
            LEVEL_P_UNIT,
            LEVEL_I_UNIT,
            cfg.self_level.integral_limit,
        )
        pitch_rate_set, integ_lp = pi_step(
            pitch / 100.0 * FULL_STICK_ANGLE,
            est_pitch,
            cfg.self_level.p,
            cfg.self_level.i,
            integ_lp,
            dt,
            LEVEL_P_UNIT,
            LEVEL_I_UNIT,
            cfg.self_level.integral_limit,
        )
    else:
        roll_rate_set = roll / 100.0 * FULL_STICK_RATE
        pitch_rate_set = pitch / 100.0 * FULL_STICK_RATE
    yaw_rate_set = yaw / 100.0 * FULL_STICK_RATE

    roll_cmd, integ_roll = pi_step(
        roll_rate_set,
        sensors.gyro_roll,
        cfg.roll.p,
        cfg.roll.i,
        state.integ_roll,
        dt,
        RATE_P_UNIT_RP,
        RATE_I_UNIT_RP,
        cfg.roll.integral_limit,
    )
    pitch_cmd, integ_pitch = pi_step(
        pitch_rate_set,
        sensors.gyro_pitch,
        cfg.pitch.p,
        cfg.pitch.i,
        state.integ_pitch,
        dt,
        RATE_P_UNIT_RP,
        RATE_I_UNIT_RP,
        cfg.pitch.integral_limit,
    )
    yaw_cmd, integ_yaw = pi_step(
        yaw_rate_set,
        sensors.gyro_yaw,
        cfg.yaw.p,
        cfg.yaw.i,
        state.integ_yaw,
        dt,
        RATE_P_UNIT_YAW,
        RATE_I_UNIT_YAW,
        cfg.yaw.integral_limit,
    )

    if at_idle:
        # Integral terms are held at zero below the arm/idle throttle so
        # ground time and stick gestures cannot wind them up.
        integ_roll = integ_pitch = integ_yaw = 0.0
        integ_lr = integ_lp = 0.0

    clamp = lambda v: min(1.0, max(-1.0, v))
    throttle_cmd = min(1.0, max(0.0, throttle_frac + height_dampening(sensors.accel_z, cfg)))
    mix = mixer(throttle_cmd, clamp(roll_cmd), clamp(pitch_cmd), clamp(yaw_cmd))

    if ch.throttle > THROTTLE_IDLE:
        floor = cfg.min_throttle / 100.0
        mix = tuple(max(m, floor) for m in mix)

    filtered = tuple(
        servo_filter(prev, m, dt, cfg.servo_filter_ms)
        for prev, m in zip(state.servo, mix)
    )
    pulses = tuple(min(2000.0, max(1000.0, 1000.0 + 1000.0 * m)) for m in filtered)

    next_state = ControllerState(
        arm=arm,
        est_roll=est_roll,
        est_pitch=est_pitch,
        integ_roll=integ_roll,
        integ_pitch=integ_pitch,
        integ_yaw=integ_yaw,
        integ_level_roll=integ_lr,
        integ_level_pitch=integ_lp,
        servo=filtered,
    )
    return next_state, MotorOutputs(*pulses)


# --- configuration file -----------------------------------------------------

_BOOL_NAMES = {"auto_disarm", "cppm_enabled"}
_ENUM_NAMES = {"self_level_source"}
_GAIN_PREFIXES = ("roll", "pitch", "yaw", "self_level")


def config_to_text(cfg: ControllerConfig) -> str:
    """Serialize a config as flat key = value lines (snake_case keys)."""
    lines = []
    for prefix in _GAIN_PREFIXES:
        gains: PiGains = getattr(cfg, prefix)
        lines.append(f"{prefix}_p = {gains.p}")
        lines.append(f"{prefix}_i = {gains.i}")
        lines.append(f"{prefix}_integral_limit = {gains.integral_limit:g}")
    lines.append(f"self_level_source = {cfg.self_level_source.value}")
    lines.append(f"auto_disarm = {'yes' if cfg.auto_disarm else 'no'}")
    lines.append(f"cppm_enabled = {'yes' if cfg.cppm_enabled else 'no'}")
    for name in (
        "stick_scaling_roll",
        "stick_scaling_pitch",
        "stick_scaling_yaw",
        "stick_scaling_throttle",
        "min_throttle",
        "height_damp",
        "height_damp_limit",
        "alarm_tenths",
    ):
        lines.append(f"{name} = {getattr(cfg, name)}")
    lines.append(f"servo_filter_ms = {cfg.servo_filter_ms:g}")
    return "\n".join(lines) + "\n"


def config_set_key(cfg: ControllerConfig, key: str, raw) -> ControllerConfig:
    """Return a copy of cfg with one flat key changed; unknown keys and
    out-of-range values raise ValueError."""
    for prefix in _GAIN_PREFIXES:
        gains: PiGains = getattr(cfg, prefix)
        if key == f"{prefix}_p":
            new = replace(gains, p=int(raw))
        elif key == f"{prefix}_i":
            new = replace(gains, i=int(raw))
        elif key == f"{prefix}_integral_limit":
            new = replace(gains, integral_limit=float(raw))
        else:
            continue
        out = replace(cfg, **{prefix: new})
        out.validate()
        return out

    if key in _ENUM_NAMES:
        out = replace(cfg, self_level_source=SelfLevelSource(str(raw).upper()))
    elif key in _BOOL_NAMES:
        if isinstance(raw, bool):
            value = raw
        else:
            text = str(raw).strip().lower()
            if text in ("yes", "true", "1", "on"):
                value = True
            elif text in ("no", "false", "0", "off"):
                value = False
            else:
                raise ValueError(f"bad boolean for {key}: {raw!r}")
        out = replace(cfg, **{key: value})
    elif key == "servo_filter_ms":
        out = replace(cfg, servo_filter_ms=float(raw))
    elif key in (
        "stick_scaling_roll",
        "stick_scaling_pitch",
        "stick_scaling_yaw",
        "stick_scaling_throttle",
        "min_throttle",
        "height_damp",
        "height_damp_limit",
        "alarm_tenths",
    ):
        out = replace(cfg, **{key: int(raw)})
    else:
        raise ValueError(f"unknown config key: {key}")
    out.validate()
    return out


def config_get_key(cfg: ControllerConfig, key: str):
    """Read one flat config key; unknown keys raise ValueError."""
    for prefix in _GAIN_PREFIXES:
        gains: PiGains = getattr(cfg, prefix)
        if key == f"{prefix}_p":
            return gains.p
        if key == f"{prefix}_i":
            return gains.i
        if key == f"{prefix}_integral_limit":
            return gains.integral_limit
    if key == "self_level_source":
        return cfg.self_level_source.value
    if key in _BOOL_NAMES or key in (
        "stick_scaling_roll",
        "stick_scaling_pitch",
        "stick_scaling_yaw",
        "stick_scaling_throttle",
        "min_throttle",
        "height_damp",
        "height_damp_limit",
        "alarm_tenths",
        "servo_filter_ms",
    ):
        return getattr(cfg, key)
    raise ValueError(f"unknown config key: {key}")


def config_from_text(text: str, base: ControllerConfig | None = None) -> ControllerConfig:
    """Parse key = value lines ('#' starts a comment) on top of a base config."""
    cfg = base if base is not None else ControllerConfig()
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        cfg = config_set_key(cfg, key, raw)
    return cfg


def load_config(path, base: ControllerConfig | None = None) -> ControllerConfig:
    with open(str(path), "r", encoding="utf-8") as fh:
        return config_from_text(fh.read(), base)
