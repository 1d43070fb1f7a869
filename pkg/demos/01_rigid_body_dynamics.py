"""
Rigid-body model basics
=======================

Attitude rotations, the hover fixed point, free fall, and a short tumble
integrated with the fixed-step RK4.
"""

import math

import numpy as np

from quadsim.dynamics import (
    AirframeParams,
    Attitude,
    ModelVariant,
    MotorThrusts,
    RigidBodyState,
    Waypoint,
    control_inputs,
    desired_angles,
    rotation_matrix,
    step,
    translational_accel,
)

params = AirframeParams()
print(f"airframe: m={params.m} kg, l={params.l} m, I=({params.i1}, {params.i2}, {params.i3})")

# A level craft has the identity rotation; any attitude gives a proper
# rotation matrix (orthonormal, det +1).
R = rotation_matrix(Attitude(0.3, -0.2, 1.1))
print("R @ R.T - I max:", np.max(np.abs(R @ R.T - np.eye(3))))
print("det R:", np.linalg.det(R))

# Hover: each motor carries a quarter of the weight and accelerations vanish.
per_motor = params.m * params.g / 4
hover = MotorThrusts(per_motor, per_motor, per_motor, per_motor)
u = control_inputs(hover, params)
print(f"\nhover thrust {per_motor:.3f} N/motor -> u1={u.u1:.3f} m/s^2 (= g), "
      f"u2={u.u2:.0e}, u3={u.u3:.0e}, u4={u.u4:.0e}")
print("accel at hover:", translational_accel(RigidBodyState(), u.u1, params))

# Free fall from rest: z = -g/2 after one second.
s = RigidBodyState()
for _ in range(500):
    s = step(s, MotorThrusts(0, 0, 0, 0), params, ModelVariant.CORRECTED, 0.002)
print(f"\nfree fall 1 s: z = {s.z:.6f} m (expected {-params.g / 2:.6f})")

# A lopsided thrust pattern tumbles the craft; integrate two seconds.
s = RigidBodyState(z=10.0)
lopsided = MotorThrusts(4.4, 3.0, 4.1, 3.2)
for _ in range(1000):
    s = step(s, lopsided, params, ModelVariant.CORRECTED, 0.002)
print(f"tumble 2 s: pos=({s.x:.2f}, {s.y:.2f}, {s.z:.2f}) m, "
      f"attitude=({s.att.roll:.2f}, {s.att.pitch:.2f}, {s.att.yaw:.2f}) rad")

# Bearing and elevation from the origin toward a target point.
heading, elevation = desired_angles(RigidBodyState(), Waypoint(3.0, 4.0, 5.0))
print(f"\nwaypoint (3, 4, 5): heading={math.degrees(heading):.2f} deg, "
      f"elevation={math.degrees(elevation):.2f} deg")
