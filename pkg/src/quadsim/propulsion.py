"""Motor/ESC thrust model, LiPo discharge with Peukert endurance math,
the low-voltage alarm, and the rotor blade-velocity field."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

# ESC command pulse endpoints, microseconds.
PWM_MIN_US = 1000.0
PWM_MAX_US = 2000.0

# 3S pack open-circuit voltage anchors: full / 50% / empty.
OCV_FULL_V = 12.6
OCV_HALF_V = 11.1
OCV_EMPTY_V = 9.0

# Supply collapse below this cannot keep the craft in the air.
BROWNOUT_V = 7.5

# Low-voltage beeper: seconds between beeps one volt above the set-point
# versus right at it.
BEEP_SLOW_S = 2.0
BEEP_FAST_S = 0.2

# Unit chain of the rotor-field script: mph -> kt -> ft/s.
MPH_PER_KT = 1.15077
KT_PER_FTPS = 0.5925
APPENDIX_PI = 3.14


@dataclass(frozen=True)
class MotorSpec:
    """Brushless outrunner ratings (A2212/13T-class by default)."""

    kv: float = 1000.0
    max_thrust: float = 8.0
    nominal_voltage: float = 11.1

    def validate(self) -> None:
        if self.kv <= 0 or self.max_thrust <= 0 or self.nominal_voltage <= 0:
            raise ValueError("motor ratings must be positive")


@dataclass(frozen=True)
class BatteryState:
    """LiPo pack state.  remaining is in ampere-hours, voltage is the
    terminal voltage under the most recent load."""

    cells: int = 3
    capacity: float = 3.7
    remaining: float = 3.7
    peukert_k: float = 1.0
    voltage: float = OCV_FULL_V
    internal_resistance: float = 0.02

    def validate(self) -> None:
        if self.cells < 1:
            raise ValueError("cells must be >= 1")
        if not (0.0 <= self.remaining <= self.capacity):
            raise ValueError("remaining must lie in [0, capacity]")
        if self.peukert_k < 1.0:
            raise ValueError("peukert_k must be >= 1")
        if self.voltage < 0.0:
            raise ValueError("voltage must be >= 0")

    @property
    def soc(self) -> float:
        return self.remaining / self.capacity if self.capacity > 0 else 0.0


@dataclass(frozen=True)
class BladeFieldSpec:
    """Rotor-disk grid for the resultant blade velocity in forward flight."""

    rpm: float = 1000.0
    forward_mph: float = 28.0
    radius_ft: float = 4.0 / 12.0
    grid_n: int = 100

    def validate(self) -> None:
        if self.rpm < 0:
            raise ValueError("rpm must be >= 0")
        if self.radius_ft <= 0:
            raise ValueError("radius must be positive")
        if self.grid_n < 2:
            raise ValueError("grid_n must be >= 2")


def pwm_to_throttle(pulse_us: float) -> float:
    """ESC pulse width to throttle fraction; clamped to [0, 1]."""
    frac = (pulse_us - PWM_MIN_US) / (PWM_MAX_US - PWM_MIN_US)
    return min(1.0, max(0.0, frac))


def throttle_to_thrust(throttle: float, voltage: float, spec: MotorSpec) -> float:
    """Static thrust, N.  Quadratic in throttle (prop thrust ~ rpm^2) and in
    the supply voltage relative to nominal."""
    if not 0.0 <= throttle <= 1.0:
        raise ValueError("throttle must be in [0, 1]")
    if voltage < 0.0:
        raise ValueError("voltage must be >= 0")
    return spec.max_thrust * throttle * throttle * (voltage / spec.nominal_voltage) ** 2


def required_current(power_w: float, voltage_v: float) -> float:
    """Current draw for a given electrical power at a given pack voltage."""
    if voltage_v <= 0.0:
        raise ValueError("voltage must be positive")
    return power_w / voltage_v


def peukert_capacity(duration_min: float, current_a: float, k: float = 1.0) -> float:
    """Pack capacity (Ah) needed to hold current_a for duration_min minutes."""
    if duration_min < 0 or current_a < 0:
        raise ValueError("duration and current must be >= 0")
    if k < 1.0:
        raise ValueError("k must be >= 1")
    return duration_min * current_a**k / 60.0


def open_circuit_voltage(soc: float, cells: int = 3) -> float:
    """Piecewise-linear OCV model anchored at full/half/empty of a 3S pack.
    Other cell counts scale proportionally."""
    soc = min(1.0, max(0.0, soc))
    if soc >= 0.5:
        v3s = OCV_HALF_V + (soc - 0.5) * 2.0 * (OCV_FULL_V - OCV_HALF_V)
    else:
        v3s = OCV_EMPTY_V + soc * 2.0 * (OCV_HALF_V - OCV_EMPTY_V)
    return v3s * cells / 3.0


def battery_step(b: BatteryState, current_a: float, dt_s: float) -> BatteryState:
    """Discharge by current_a for dt_s seconds.

    Charge removal follows the Peukert-weighted current; the terminal
    voltage is the open-circuit value at the new state of charge minus the
    resistive drop under load.  remaining floors at zero.
    """
    if current_a < 0:
        raise ValueError("current must be >= 0")
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    drawn_ah = current_a**b.peukert_k * dt_s / 3600.0
    remaining = max(0.0, b.remaining - drawn_ah)
    soc = remaining / b.capacity if b.capacity > 0 else 0.0
    terminal = open_circuit_voltage(soc, b.cells) - current_a * b.internal_resistance
    return replace(b, remaining=remaining, voltage=max(0.0, terminal))


def low_voltage_alarm(voltage_v: float, setpoint_tenths: int) -> bool:
    """True when the pack voltage is at or below the alarm set-point.
    A set-point of 0 disables the alarm."""
    if setpoint_tenths < 0:
        raise ValueError("setpoint must be >= 0")
    return setpoint_tenths > 0 and voltage_v <= setpoint_tenths / 10.0


def alarm_beep_interval(voltage_v: float, setpoint_v: float, start_voltage_v: float) -> float:
    """Seconds between alarm beeps; shortens as the voltage nears the
    set-point (2.0 s one volt above it, 0.2 s at it, clamped)."""
    if start_voltage_v <= setpoint_v:
        raise ValueError("start voltage must exceed the set-point")
    margin = min(1.0, max(0.0, voltage_v - setpoint_v))
    return BEEP_FAST_S + (BEEP_SLOW_S - BEEP_FAST_S) * margin


def blade_velocity(
    y_ft: float,
    azimuth_rad: float,
    rpm: float,
    forward_mph: float,
    appendix_pi: bool = False,
) -> float:
    """Resultant blade-section velocity omega*y + V*sin(azimuth), ft/s.

    With appendix_pi=True the angular rate uses 3.14 for pi, reproducing the
    original script's constant.
    """
    if y_ft < 0:
        raise ValueError("blade station must be >= 0")
    pi_val = APPENDIX_PI if appendix_pi else math.pi
    omega = rpm * 2.0 * pi_val / 60.0
    v_ftps = (forward_mph / MPH_PER_KT) / KT_PER_FTPS
    return omega * y_ft + v_ftps * math.sin(azimuth_rad)


def blade_velocity_field(
    spec: BladeFieldSpec, appendix_pi: bool = False
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Velocity field over the rotor disk on a polar grid, as Cartesian
    (x_ft, y_ft, u_ftps) arrays of shape (grid_n, grid_n), row-major.

    Default mode evaluates a clean grid: span (0, R] by azimuth (0, 2*pi].
    appendix_pi mode replays the original script literally: 3.14 in omega,
    span and azimuth built by running accumulation, and the azimuth counter
    carried across rows instead of being reset.
    """
    spec.validate()
    n = spec.grid_n
    pi_val = APPENDIX_PI if appendix_pi else math.pi
    omega = spec.rpm * 2.0 * pi_val / 60.0
    v_ftps = (spec.forward_mph / MPH_PER_KT) / KT_PER_FTPS

    xs = np.empty((n, n))
    ys = np.empty((n, n))
    us = np.empty((n, n))
    if appendix_pi:
        y = 0.0
        psi = 0.0
        for i in range(n):
            y += spec.radius_ft / n
            for j in range(n):
                psi += 2.0 * math.pi / n
                us[i, j] = omega * y + v_ftps * math.sin(psi)
                xs[i, j] = y * math.cos(psi)
                ys[i, j] = y * math.sin(psi)
    else:
        spans = spec.radius_ft * (np.arange(1, n + 1) / n)
        azimuths = 2.0 * math.pi * (np.arange(1, n + 1) / n)
        yy, pp = np.meshgrid(spans, azimuths, indexing="ij")
        us[:] = omega * yy + v_ftps * np.sin(pp)
        xs[:] = yy * np.cos(pp)
        ys[:] = yy * np.sin(pp)
    return xs, ys, us


def export_blade_field_csv(
    xs: np.ndarray, ys: np.ndarray, us: np.ndarray, destination
) -> int:
    """Write the field as x_ft,y_ft,u_ftps rows in row-major grid order.
    Returns the byte count written."""
    lines = ["x_ft,y_ft,u_ftps"]
    for x, y, u in zip(xs.ravel(), ys.ravel(), us.ravel()):
        lines.append(f"{x:.12g},{y:.12g},{u:.12g}")
    data = "\n".join(lines) + "\n"
    path = str(destination)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(data)
    return len(data.encode("ascii"))


DEFAULT_MOTOR = MotorSpec()
DEFAULT_BATTERY = BatteryState()
