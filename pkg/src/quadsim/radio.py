"""RC link model: channel normalization, receiver test report, and the
combined-PPM frame codecs.

Pulse semantics follow the flight board's 1520 us center convention:
symmetric channels map 1000 us -> -100 units with zero at 1520 us, the
throttle channel maps 1000 us -> 0 and 2000 us -> 100.  Frame pulses are
quantized to whole microseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

CENTER_US = 1520.0
MIN_US = 1000.0
MAX_US = 2000.0
UNITS_PER_US_SYM = 100.0 / (CENTER_US - MIN_US)  # symmetric channels
UNITS_PER_US_THR = 100.0 / (MAX_US - MIN_US)

# Stick-position thresholds in channel units.
THROTTLE_IDLE = 5.0
THROTTLE_FULL = 90.0
GESTURE_YAW = 90.0
TRAVEL_LIMIT = 110.0

FRAME_PERIOD_US = 20000
MAX_CHANNELS = 8

# Wire order of the receiver outputs: aileron, elevator, throttle, rudder, AUX.
CHANNEL_ORDER = ("roll", "pitch", "throttle", "yaw", "aux1")


class CppmDecodeError(ValueError):
    """Raised for frames whose pulse count cannot be a valid channel set."""


@dataclass(frozen=True)
class ChannelSet:
    """Normalized stick channels.  throttle 0..100, axes -100..100 (transient
    excursions to +/-110 tolerated), aux1 on/off, channels 6-8 optional."""

    throttle: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    aux1: bool = False
    extra: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (self.throttle, self.roll, self.pitch, self.yaw))):
            raise ValueError("channel values must be finite")
        if not -0.0 <= self.throttle <= TRAVEL_LIMIT:
            raise ValueError(f"throttle out of range: {self.throttle}")
        for name in ("roll", "pitch", "yaw"):
            if abs(getattr(self, name)) > TRAVEL_LIMIT:
                raise ValueError(f"{name} out of range: {getattr(self, name)}")
        if len(self.extra) > MAX_CHANNELS - 5:
            raise ValueError("too many extra channels")

    def neutral_axes(self, tolerance: float = 5.0) -> bool:
        return (
            abs(self.roll) <= tolerance
            and abs(self.pitch) <= tolerance
            and abs(self.yaw) <= tolerance
        )


NEUTRAL = ChannelSet()


@dataclass(frozen=True)
class ChannelTrim:
    """Per-channel shaping applied after the pulse-to-units map."""

    reversed: bool = False
    trim: float = 0.0
    endpoint_scale: float = 1.0

    def validate(self) -> None:
        if self.endpoint_scale <= 0:
            raise ValueError("endpoint scale must be positive")


@dataclass(frozen=True)
class RadioConfig:
    channels: tuple[ChannelTrim, ...] = tuple(ChannelTrim() for _ in range(MAX_CHANNELS))

    def validate(self) -> None:
        for trim in self.channels:
            trim.validate()

    def channel(self, index: int) -> ChannelTrim:
        return self.channels[index] if index < len(self.channels) else ChannelTrim()


DEFAULT_RADIO = RadioConfig()


def _pulse_to_units(pulse_us: float, symmetric: bool) -> float:
    if symmetric:
        return (pulse_us - CENTER_US) * UNITS_PER_US_SYM
    return (pulse_us - MIN_US) * UNITS_PER_US_THR


def _units_to_pulse(value: float, symmetric: bool) -> float:
    if symmetric:
        return CENTER_US + value / UNITS_PER_US_SYM
    return MIN_US + value / UNITS_PER_US_THR


def _shape(value: float, trim: ChannelTrim) -> float:
    if trim.reversed:
        value = -value
    return (value + trim.trim) * trim.endpoint_scale

def _unshape(value: float, trim: ChannelTrim) -> float:
    value = value / trim.endpoint_scale - trim.trim
    return -value if trim.reversed else value


def normalize(pulses_us, cfg: RadioConfig = DEFAULT_RADIO) -> ChannelSet:
    """Receiver pulse widths (wire order) to a normalized ChannelSet."""
    if len(pulses_us) < 4:
        raise ValueError("need at least aileron, elevator, throttle, rudder")
    values = {}
    for idx, name in enumerate(CHANNEL_ORDER):
        if idx >= len(pulses_us):
            break
        pulse = float(pulses_us[idx])
        if not math.isfinite(pulse):
            raise ValueError("pulse widths must be finite")
        if name == "aux1":
            values[name] = pulse >= CENTER_US
            continue
        raw = _pulse_to_units(pulse, symmetric=name != "throttle")
        values[name] = _shape(raw, cfg.channel(idx))
    extra = tuple(
        _shape(_pulse_to_units(float(p), True), cfg.channel(5 + i))
        for i, p in enumerate(pulses_us[5:MAX_CHANNELS])
    )
    return ChannelSet(
        throttle=min(max(values.get("throttle", 0.0), 0.0), TRAVEL_LIMIT),
        roll=values.get("roll", 0.0),
        pitch=values.get("pitch", 0.0),
        yaw=values.get("yaw", 0.0),
        aux1=values.get("aux1", False),
        extra=extra,
    )


@dataclass(frozen=True)
class CppmFrame:
    """One combined-PPM frame: ordered pulse widths plus the sync gap that
    pads the fixed 20 ms period."""

    pulses_us: tuple[int, ...]
    period_us: int = FRAME_PERIOD_US

    def __post_init__(self) -> None:
        if not 1 <= len(self.pulses_us) <= MAX_CHANNELS:
            raise ValueError("frame must carry 1..8 pulses")

    @property
    def sync_us(self) -> int:
        return self.period_us - sum(self.pulses_us)


def cppm_encode(ch: ChannelSet, cfg: RadioConfig = DEFAULT_RADIO) -> CppmFrame:
    """ChannelSet to a CPPM frame: the inverse of normalize, packed in wire
    order and quantized to 1 us."""
    pulses = []
    for idx, name in enumerate(CHANNEL_ORDER):
        if name == "aux1":
            pulses.append(MAX_US if ch.aux1 else MIN_US)
            continue
        value = getattr(ch, name)
        raw = _unshape(value, cfg.channel(idx))
        pulses.append(_units_to_pulse(raw, symmetric=name != "throttle"))
    for i, value in enumerate(ch.extra):
        pulses.append(_units_to_pulse(_unshape(value, cfg.channel(5 + i)), True))
    quantized = tuple(
        int(min(MAX_US, max(MIN_US, round(p)))) for p in pulses
    )
    return CppmFrame(quantized)


def cppm_decode(frame: CppmFrame, cfg: RadioConfig = DEFAULT_RADIO) -> ChannelSet:
    """CPPM frame back to a ChannelSet.  Out-of-range pulses are clamped to
    the valid band before mapping; malformed arity raises CppmDecodeError."""
    if not 1 <= len(frame.pulses_us) <= MAX_CHANNELS:
        raise CppmDecodeError(f"frame carries {len(frame.pulses_us)} pulses")
    if len(frame.pulses_us) < 4:
        raise CppmDecodeError("frame is missing primary channels")
    clamped = [min(MAX_US, max(MIN_US, float(p))) for p in frame.pulses_us]
    return normalize(clamped, cfg)


@dataclass(frozen=True)
class ReceiverTestReport:
    """What the receiver-test screen shows for one channel sample."""

    no_signal: bool
    throttle_label: str
    zone: str
    range_violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.no_signal and not self.range_violations


def receiver_test(ch: ChannelSet | None) -> ReceiverTestReport:
    """Evaluate one receiver sample.  ch=None means no frame arrived within
    the signal timeout."""
    if ch is None:
        return ReceiverTestReport(True, "No signal", "No signal", ())

    if ch.throttle <= THROTTLE_IDLE:
        throttle_label = "Idle"
    elif ch.throttle > THROTTLE_FULL:
        throttle_label = "Full"
    else:
        throttle_label = f"{ch.throttle:.0f}"

    if ch.throttle <= THROTTLE_IDLE and ch.yaw >= GESTURE_YAW:
        zone = "Arm"
    elif ch.throttle <= THROTTLE_IDLE and ch.yaw <= -GESTURE_YAW:
        zone = "Disarm"
    else:
        zone = "Safe Zone"

    violations = tuple(
        name
        for name in ("roll", "pitch", "yaw")
        if abs(getattr(ch, name)) > TRAVEL_LIMIT - 1e-9
    )
    return ReceiverTestReport(False, throttle_label, zone, violations)


def load_channel_trace(path) -> list[tuple[float, ChannelSet]]:
    """Read a scripted flight trace: CSV with header
    t_s,throttle,roll,pitch,yaw,aux1 and non-decreasing timestamps."""
    rows: list[tuple[float, ChannelSet]] = []
    with open(str(path), "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "t_s,throttle,roll,pitch,yaw,aux1":
            raise ValueError(f"unexpected trace header: {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"line {line_no}: expected 6 columns")
            t = float(parts[0])
            if rows and t < rows[-1][0]:
                raise ValueError(f"line {line_no}: timestamps must not decrease")
            rows.append(
                (
                    t,
                    ChannelSet(
                        throttle=float(parts[1]),
                        roll=float(parts[2]),
                        pitch=float(parts[3]),
                        yaw=float(parts[4]),
                        aux1=float(parts[5]) >= 0.5,
                    ),
                )
            )
    if not rows:
        raise ValueError("trace has no rows")
    return rows


def sample_channel_trace(rows: list[tuple[float, ChannelSet]], t: float) -> ChannelSet:
    """Linear interpolation between trace rows; aux1 holds its last value."""
    if t <= rows[0][0]:
        return rows[0][1]
    if t >= rows[-1][0]:
        return rows[-1][1]
    lo, hi = 0, len(rows) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if rows[mid][0] <= t:
            lo = mid
        else:
            hi = mid
    t0, a = rows[lo]
    t1, b = rows[hi]
    if t1 == t0:
        return b
    w = (t - t0) / (t1 - t0)
    return ChannelSet(
        throttle=a.throttle + w * (b.throttle - a.throttle),
        roll=a.roll + w * (b.roll - a.roll),
        pitch=a.pitch + w * (b.pitch - a.pitch),
        yaw=a.yaw + w * (b.yaw - a.yaw),
        aux1=a.aux1,
    )


def save_channel_trace(rows: list[tuple[float, ChannelSet]], path) -> None:
    lines = ["t_s,throttle,roll,pitch,yaw,aux1"]
    for t, ch in rows:
        lines.append(
            f"{t:.6g},{ch.throttle:.6g},{ch.roll:.6g},{ch.pitch:.6g},"
            f"{ch.yaw:.6g},{1 if ch.aux1 else 0}"
        )
    with open(str(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
