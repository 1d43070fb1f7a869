"""
Battery sizing and endurance
============================

The classic pack-sizing arithmetic (P/V current, Peukert capacity), then a
discharge simulation showing the low-voltage alarm leading the brownout.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from quadsim.harness.runner import endurance_sim
from quadsim.propulsion import (
    BatteryState,
    alarm_beep_interval,
    battery_step,
    low_voltage_alarm,
    peukert_capacity,
    required_current,
)

# 70 W of motor load on a 3S pack, times four motors.
per_motor = required_current(70, 11.1)
total = 4 * per_motor
print(f"per-motor current {per_motor:.2f} A, four motors {total:.2f} A")

# Ten minutes at the book's 22.2 A figure sizes the pack.
capacity = peukert_capacity(10, 22.2, k=1)
print(f"capacity for 10 min at 22.2 A: {capacity:.2f} Ah")

result = endurance_sim(capacity_ah=capacity, draw_a=22.2, k=1.0)
print(f"alarm (10.8 V) at {result.alarm_min:.2f} min, depleted at {result.depletion_min:.2f} min")

# Trace the terminal voltage over the discharge.  The beeper starts its
# slow cadence a volt above the set-point and tightens to 0.2 s as the
# voltage reaches it.
battery = BatteryState(capacity=capacity, remaining=capacity)
times, volts, beeps = [], [], []
alarm_at = None
t = 0.0
while battery.remaining > 0:
    battery = battery_step(battery, 22.2, 1.0)
    t += 1.0
    times.append(t / 60)
    volts.append(battery.voltage)
    if battery.voltage <= 10.8 + 1.0:
        beeps.append((t / 60, alarm_beep_interval(battery.voltage, 10.8, 12.6)))
    if alarm_at is None and low_voltage_alarm(battery.voltage, 108):
        alarm_at = t / 60

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
ax1.plot(times, volts)
ax1.axhline(10.8, color="orange", ls="--", label="alarm set-point")
ax1.axhline(7.5, color="red", ls="--", label="brownout")
ax1.set_ylabel("terminal volts")
ax1.legend()
if beeps:
    ax2.plot([b[0] for b in beeps], [b[1] for b in beeps])
ax2.set_xlabel("minutes")
ax2.set_ylabel("beep interval (s)")
fig.savefig("demos/endurance.png", dpi=130)
print("wrote demos/endurance.png")
print(f"beeper cadence starts at {beeps[0][0]:.2f} min with {beeps[0][1]:.2f} s spacing, "
      f"tightening to {beeps[-1][1]:.2f} s; alarm latches at {alarm_at:.2f} min")
