"""
Closed-loop hover flight
========================

The shipped scenario end to end: arm with the stick gesture (self-leveling
on), climb to two meters, hold half a minute while the pack sags, descend,
land, disarm.  Telemetry goes to CSV and a flight profile plot.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from quadsim.harness.runner import Primitive, motion_primitive_check, run_scenario
from quadsim.harness.scenario import load_scenario
from quadsim.harness.telemetry import csv_export

scenario = load_scenario("scenarios/hover.json")
log = run_scenario(scenario)
print(f"{len(log.records)} telemetry records, digest {log.digest[:12]}")

# The checks below run on a noise-free copy: with the default IMU noise
# and zero airframe drag the craft wanders hands-off like it would in a
# breeze (tens of meters over the hold) even though attitude stays level.
from dataclasses import replace
from quadsim.harness.scenario import NOISE_FREE

quiet_log = run_scenario(replace(scenario, sensors=NOISE_FREE))

armed_span = [r.t_s for r in log.records if r.armed]
print(f"armed from t={armed_span[0]:.2f}s to t={armed_span[-1]:.2f}s")
peak = max(log.records, key=lambda r: r.z_m)
print(f"peak altitude {peak.z_m:.2f} m at t={peak.t_s:.1f}s")

for primitive, window in (
    (Primitive.TAKEOFF, (2.2, 4.6)),
    (Primitive.HOVER, (6.0, 34.0)),
    (Primitive.LAND, (36.2, 41.2)),
):
    result = motion_primitive_check(quiet_log, primitive, window)
    print(f"{primitive.value:8s} over {window}: {'pass' if result.passed else result.failures}")
noisy_hover = motion_primitive_check(log, Primitive.HOVER, (6.0, 34.0))
print(f"same hover check with default IMU noise: "
      f"{'pass' if noisy_hover.passed else noisy_hover.failures[0]}")

written = csv_export(log, "demos/hover_log.csv")
print(f"wrote demos/hover_log.csv ({written} bytes)")

t = [r.t_s for r in log.records]
fig, axes = plt.subplots(3, 1, figsize=(8, 7), sharex=True)
axes[0].plot(t, [r.z_m for r in log.records])
axes[0].set_ylabel("altitude (m)")
axes[1].plot(t, [math.degrees(r.roll_rad) for r in log.records], label="roll")
axes[1].plot(t, [math.degrees(r.pitch_rad) for r in log.records], label="pitch")
axes[1].set_ylabel("attitude (deg)")
axes[1].legend()
axes[2].plot(t, [r.vbatt_v for r in log.records])
axes[2].set_ylabel("pack volts")
axes[2].set_xlabel("time (s)")
fig.savefig("demos/hover_profile.png", dpi=130)
print("wrote demos/hover_profile.png")
