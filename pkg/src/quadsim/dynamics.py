"""Rigid-body quadrotor model and fixed-step integration.

Two model variants are provided.  AS_PRINTED keeps the original algebra of
the source flight-dynamics writeup verbatim, transcription quirks included,
so unit tests can pin it exactly.  CORRECTED is the standard small-quadrotor
form and is the default everywhere a closed loop is flown.

Conventions: z is up, angles are radians, thrusts are newtons.  States are
immutable; every function here is pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

MAX_STEP_S = 0.05


class ModelVariant(enum.Enum):
    AS_PRINTED = "as-printed"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class Attitude:
    """Euler angles, stored unwrapped (no modular reduction)."""

    roll: float
    pitch: float
    yaw: float

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (self.roll, self.pitch, self.yaw)))


@dataclass(frozen=True)
class RigidBodyState:
    """Position, velocity, attitude and body rates of the craft."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    att: Attitude = Attitude(0.0, 0.0, 0.0)
    roll_rate: float = 0.0
    pitch_rate: float = 0.0
    yaw_rate: float = 0.0

    def is_finite(self) -> bool:
        return (
            all(
                map(
                    math.isfinite,
                    (
                        self.x,
                        self.y,
                        self.z,
                        self.vx,
                        self.vy,
                        self.vz,
                        self.roll_rate,
                        self.pitch_rate,
                        self.yaw_rate,
                    ),
                )
            )
            and self.att.is_finite()
        )


@dataclass(frozen=True)
class AirframeParams:
    """Mass/geometry/inertia constants.

    m    mass, kg
    g    gravitational acceleration, m/s^2
    l    half arm length, m
    i1,i2,i3   roll/pitch/yaw moments of inertia, kg m^2
    c    force-to-moment scaling factor, m
    k1..k3     translational drag coefficients, kg/s
    k4..k6     rotational drag coefficients, kg m^2/s
    """

    m: float = 1.5
    g: float = 9.81
    l: float = 0.225
    i1: float = 0.01
    i2: float = 0.01
    i3: float = 0.02
    c: float = 0.05
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0
    k5: float = 0.0
    k6: float = 0.0

    def validate(self) -> None:
        if not (self.m > 0 and self.g > 0 and self.l > 0):
            raise ValueError("m, g and l must be positive")
        if not (self.i1 > 0 and self.i2 > 0 and self.i3 > 0):
            raise ValueError("inertias must be positive")
        if self.c < 0:
            raise ValueError("moment scaling factor must be >= 0")
        if any(k < 0 for k in (self.k1, self.k2, self.k3, self.k4, self.k5, self.k6)):
            raise ValueError("drag coefficients must be >= 0")


@dataclass(frozen=True)
class ControlInputs:
    """Mass-normalized collective thrust u1 plus the three channel inputs."""

    u1: float
    u2: float
    u3: float
    u4: float


@dataclass(frozen=True)
class MotorThrusts:
    """Per-motor thrust, N.  Numbering: 1 front-left, 2 front-right,
    3 back-right, 4 back-left (clockwise from the front-left arm)."""

    th1: float
    th2: float
    th3: float
    th4: float

    def total(self) -> float:
        return self.th1 + self.th2 + self.th3 + self.th4

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (self.th1, self.th2, self.th3, self.th4)))


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    z: float


def rotation_matrix(att: Attitude) -> np.ndarray:
    """Attitude to 3x3 rotation matrix (orthonormal, det +1)."""
    sr, cr = math.sin(att.roll), math.cos(att.roll)
    sp, cp = math.sin(att.pitch), math.cos(att.pitch)
    sy, cy = math.sin(att.yaw), math.cos(att.yaw)
    return np.array(
        [
            [cr * cp, cr * sp * sy - sr * cy, cr * sp * cy + sr * sy],
            [sr * cp, sr * sp * sy + cr * cy, sr * sp * cy - cr * sy],
            [-sp, cp * sy, cp * cy],
        ]
    )


def control_inputs(
    th: MotorThrusts, p: AirframeParams, v: ModelVariant = ModelVariant.CORRECTED
) -> ControlInputs:
    """Motor thrusts to the four channel inputs.

    u1 is collective thrust over mass; u2/u3 are the fixed differential
    combinations divided by the roll/pitch inertias.  The yaw row differs by
    variant: AS_PRINTED repeats the collective sum over i3, CORRECTED is the
    reaction-torque difference of the CW pair {1,3} and CCW pair {2,4}
    scaled by the force-to-moment factor.
    """
    u1 = (th.th1 + th.th2 + th.th3 + th.th4) / p.m
    u2 = p.l * (-th.th1 - th.th2 + th.th3 + th.th4) / p.i1
    u3 = p.l * (-th.th1 + th.th2 + th.th3 - th.th4) / p.i2
    if v is ModelVariant.AS_PRINTED:
        u4 = p.l * (th.th1 + th.th2 + th.th3 + th.th4) / p.i3
    else:
        u4 = p.c * (th.th1 - th.th2 + th.th3 - th.th4) / p.i3
    return ControlInputs(u1, u2, u3, u4)


def translational_accel(
    s: RigidBodyState,
    u1: float,
    p: AirframeParams,
    v: ModelVariant = ModelVariant.CORRECTED,
) -> tuple[float, float, float]:
    """World-frame acceleration (ax, ay, az) for collective input u1."""
    sr, cr = math.sin(s.att.roll), math.cos(s.att.roll)
    sp, cp = math.sin(s.att.pitch), math.cos(s.att.pitch)
    sy, cy = math.sin(s.att.yaw), math.cos(s.att.yaw)
    if v is ModelVariant.AS_PRINTED:
        ax = u1 * (cr * sp * cy + sr * sp) - p.k1 * s.vx / p.m
        ay = u1 * (sr * sp * cy + cr * sp) - p.k2 * s.vy / p.m
        az = u1 * (cr * cy) - p.g - p.k3 * s.vz / p.m
    else:
        ax = u1 * (cr * sp * cy + sr * sy) - p.k1 * s.vx / p.m
        ay = u1 * (cr * sp * sy - sr * cy) - p.k2 * s.vy / p.m
        az = u1 * cr * cp - p.g - p.k3 * s.vz / p.m
    return ax, ay, az


def angular_accel(
    s: RigidBodyState, u: ControlInputs, p: AirframeParams
) -> tuple[float, float, float]:
    """Angular accelerations (roll, pitch, yaw), channel inputs u2/u3/u4
    mapped to roll/pitch/yaw with per-axis rotational drag."""
    roll_acc = u.u2 - p.l * p.k4 * s.roll_rate / p.i1
    pitch_acc = u.u3 - p.l * p.k5 * s.pitch_rate / p.i2
    yaw_acc = u.u4 - p.l * p.k6 * s.yaw_rate / p.i3
    return roll_acc, pitch_acc, yaw_acc


def desired_angles(current: RigidBodyState, wp: Waypoint) -> tuple[float, float]:
    """Quadrant-correct heading and elevation toward a target point.

    Raises ValueError when the waypoint coincides with the current position
    (the bearing is undefined there).
    """
    dx = wp.x - current.x
    dy = wp.y - current.y
    dz = wp.z - current.z
    if dx == 0.0 and dy == 0.0 and dz == 0.0:
        raise ValueError("waypoint coincides with current position; bearing undefined")
    heading = math.atan2(dy, dx)
    elevation = math.atan2(dz, math.hypot(dx, dy))
    return heading, elevation


def _state_vector(s: RigidBodyState) -> list[float]:
    return [
        s.x,
        s.y,
        s.z,
        s.vx,
        s.vy,
        s.vz,
        s.att.roll,
        s.att.pitch,
        s.att.yaw,
        s.roll_rate,
        s.pitch_rate,
        s.yaw_rate,
    ]


def _state_from_vector(vec: list[float]) -> RigidBodyState:
    return RigidBodyState(
        x=vec[0],
        y=vec[1],
        z=vec[2],
        vx=vec[3],
        vy=vec[4],
        vz=vec[5],
        att=Attitude(vec[6], vec[7], vec[8]),
        roll_rate=vec[9],
        pitch_rate=vec[10],
        yaw_rate=vec[11],
    )


def state_derivative(
    s: RigidBodyState,
    th: MotorThrusts,
    p: AirframeParams,
    v: ModelVariant = ModelVariant.CORRECTED,
) -> list[float]:
    """Time derivative of the 12-component state vector."""
    u = control_inputs(th, p, v)
    ax, ay, az = translational_accel(s, u.u1, p, v)
    racc, pacc, yacc = angular_accel(s, u, p)
    return [
        s.vx,
        s.vy,
        s.vz,
        ax,
        ay,
        az,
        s.roll_rate,
        s.pitch_rate,
        s.yaw_rate,
        racc,
        pacc,
        yacc,
    ]


def step(
    s: RigidBodyState,
    th: MotorThrusts,
    p: AirframeParams,
    v: ModelVariant = ModelVariant.CORRECTED,
    dt: float = 0.002,
) -> RigidBodyState:
    """Advance the state by dt with classical RK4 (fixed step, deterministic)."""
    if not (0.0 < dt <= MAX_STEP_S):
        raise ValueError(f"dt must be in (0, {MAX_STEP_S}] s, got {dt}")
    if not s.is_finite():
        raise ValueError("non-finite state")
    if not th.is_finite():
        raise ValueError("non-finite thrusts")
    if min(th.th1, th.th2, th.th3, th.th4) < 0.0:
        raise ValueError("thrusts must be >= 0")

    y0 = _state_vector(s)

    def f(vec: list[float]) -> list[float]:
        return state_derivative(_state_from_vector(vec), th, p, v)

    k1 = f(y0)
    k2 = f([a + 0.5 * dt * b for a, b in zip(y0, k1)])
    k3 = f([a + 0.5 * dt * b for a, b in zip(y0, k2)])
    k4 = f([a + dt * b for a, b in zip(y0, k3)])
    out = [
        a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y0, k1, k2, k3, k4)
    ]
    return _state_from_vector(out)


DEFAULT_AIRFRAME = AirframeParams()

__all__ = [
    "Attitude",
    "RigidBodyState",
    "AirframeParams",
    "ControlInputs",
    "MotorThrusts",
    "ModelVariant",
    "Waypoint",
    "rotation_matrix",
    "control_inputs",
    "translational_accel",
    "angular_accel",
    "desired_angles",
    "state_derivative",
    "step",
    "DEFAULT_AIRFRAME",
    "MAX_STEP_S",
]
