"""Telemetry CSV export/import.  Floats are written with repr so a
round-trip reproduces the log bit for bit."""

from __future__ import annotations

from .runner import FlightLog, TelemetryRecord

CSV_HEADER = (
    "t_s,x_m,y_m,z_m,roll_rad,pitch_rad,yaw_rad,p_rads,q_rads,r_rads,"
    "thr1_n,thr2_n,thr3_n,thr4_n,vbatt_v,ibatt_a,remaining_ah,armed,mode"
)

_FLOAT_FIELDS = (
    "t_s",
    "x_m",
    "y_m",
    "z_m",
    "roll_rad",
    "pitch_rad",
    "yaw_rad",
    "p_rads",
    "q_rads",
    "r_rads",
    "thr1_n",
    "thr2_n",
    "thr3_n",
    "thr4_n",
    "vbatt_v",
    "ibatt_a",
    "remaining_ah",
)


def record_to_row(r: TelemetryRecord) -> str:
    values = [repr(getattr(r, name)) for name in _FLOAT_FIELDS]
    values.append("1" if r.armed else "0")
    values.append(r.mode)
    return ",".join(values)


def csv_export(log: FlightLog, destination) -> int:
    """Write the log; returns the byte count written."""
    lines = [CSV_HEADER]
    lines.extend(record_to_row(r) for r in log.records)
    data = "\n".join(lines) + "\n"
    with open(str(destination), "w", encoding="ascii", newline="\n") as fh:
        fh.write(data)
    return len(data.encode("ascii"))


def csv_import(path, digest: str = "") -> FlightLog:
    """Read a telemetry CSV back into a FlightLog (records only; the digest
    is not stored in the file)."""
    records = []
    with open(str(path), "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected telemetry header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(_FLOAT_FIELDS) + 2:
                raise ValueError("telemetry row has the wrong column count")
            floats = {name: float(v) for name, v in zip(_FLOAT_FIELDS, parts)}
            records.append(
                TelemetryRecord(
                    armed=parts[-2] == "1",
                    mode=parts[-1],
                    **floats,
                )
            )
    return FlightLog(records=tuple(records), digest=digest)
