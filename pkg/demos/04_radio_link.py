"""
RC link: pulses, channels, frames
=================================

Receiver pulse normalization, the pre-flight receiver-test screen, and the
combined-PPM frame codec.
"""

from quadsim.radio import (
    ChannelSet,
    cppm_decode,
    cppm_encode,
    normalize,
    receiver_test,
)

# Receiver pulses arrive in wire order: aileron, elevator, throttle, rudder, AUX.
ch = normalize([1520, 1610, 1480, 1520, 2000])
print(f"pulses -> roll {ch.roll:.1f}, pitch {ch.pitch:.1f}, throttle {ch.throttle:.1f}, "
      f"yaw {ch.yaw:.1f}, aux {'ON' if ch.aux1 else 'OFF'}")

# The receiver-test screen labels stick positions and flags travel faults.
for sticks in (
    ChannelSet(),
    ChannelSet(throttle=0, yaw=95),
    ChannelSet(throttle=0, yaw=-95),
    ChannelSet(throttle=96),
    ChannelSet(roll=110),
):
    report = receiver_test(sticks)
    line = f"throttle={sticks.throttle:5.1f} yaw={sticks.yaw:6.1f} -> {report.zone:9s}"
    if report.range_violations:
        line += f"  range violation: {', '.join(report.range_violations)}"
    print(line)

# All channels ride one wire as sequential pulses inside a 20 ms frame.
frame = cppm_encode(ChannelSet(throttle=62, roll=15, pitch=-40, yaw=5, aux1=True))
print(f"\nCPPM pulses {frame.pulses_us} us, sync gap {frame.sync_us} us")
back = cppm_decode(frame)
print(f"decoded: throttle {back.throttle:.2f}, roll {back.roll:.2f}, "
      f"pitch {back.pitch:.2f}, yaw {back.yaw:.2f} (1 us quantization)")
