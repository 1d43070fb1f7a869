"""Command-line front end.

Subcommands: run (scripted flight to CSV), serve (live WebSocket session),
bladefield (rotor velocity field CSV), receiver-test (trace report),
endurance (battery sizing).  Exit code 0 on success, 2 on validation
errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from ..dynamics import ModelVariant
from ..propulsion import BladeFieldSpec, blade_velocity_field, export_blade_field_csv
from ..radio import load_channel_trace, receiver_test
from .runner import endurance_sim, run_scenario
from .scenario import load_scenario
from .telemetry import csv_export


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadsim")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="fly a scripted scenario and write telemetry CSV")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--variant", choices=["corrected", "as-printed"], default=None)

    p_serve = sub.add_parser("serve", help="run a live piloted session")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--rate-hz", type=float, default=20.0)
    p_serve.add_argument("--host", default="127.0.0.1")

    p_field = sub.add_parser("bladefield", help="rotor blade velocity field CSV")
    p_field.add_argument("--rpm", type=float, required=True)
    p_field.add_argument("--vmph", type=float, required=True)
    p_field.add_argument("--radius-ft", type=float, required=True)
    p_field.add_argument("--n", type=int, default=100)
    p_field.add_argument("--out", required=True)
    p_field.add_argument("--appendix-pi", action="store_true",
                         help="replay the original script's constants and loop quirks")

    p_rx = sub.add_parser("receiver-test", help="receiver screen report for a channel trace")
    p_rx.add_argument("--trace", required=True)

    p_end = sub.add_parser("endurance", help="minutes to low-voltage alarm and depletion")
    p_end.add_argument("--capacity-ah", type=float, required=True)
    p_end.add_argument("--current-a", type=float, required=True)
    p_end.add_argument("--k", type=float, default=1.0)

    return parser


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.variant is not None:
        scenario = replace(scenario, variant=ModelVariant(args.variant))
    log = run_scenario(scenario)
    written = csv_export(log, args.out)
    print(f"{len(log.records)} records ({written} bytes) -> {args.out}")
    print(f"scenario digest {log.digest[:16]}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    scenario = load_scenario(args.scenario)
    serve(scenario, port=args.port, rate_hz=args.rate_hz, host=args.host)
    return 0


def _cmd_bladefield(args) -> int:
    spec = BladeFieldSpec(
        rpm=args.rpm,
        forward_mph=args.vmph,
        radius_ft=args.radius_ft,
        grid_n=args.n,
    )
    spec.validate()
    xs, ys, us = blade_velocity_field(spec, appendix_pi=args.appendix_pi)
    written = export_blade_field_csv(xs, ys, us, args.out)
    print(
        f"{spec.grid_n}x{spec.grid_n} field ({written} bytes) -> {args.out}; "
        f"u range [{us.min():.2f}, {us.max():.2f}] ft/s"
    )
    return 0


def _cmd_receiver_test(args) -> int:
    rows = load_channel_trace(args.trace)
    last_zone = None
    max_travel = {"roll": 0.0, "pitch": 0.0, "yaw": 0.0}
    violations = set()
    for t, ch in rows:
        report = receiver_test(ch)
        for name in max_travel:
            max_travel[name] = max(max_travel[name], abs(getattr(ch, name)))
        violations.update(report.range_violations)
        if report.zone != last_zone:
            print(f"t={t:7.2f}s  {report.zone}  (throttle {report.throttle_label})")
            last_zone = report.zone
    for name, travel in max_travel.items():
        band = "ok" if travel <= 110.0 else "EXCEEDS +/-110"
        note = "" if travel >= 90.0 else " (below the 90..100 full-travel band)"
        print(f"{name}: max travel {travel:.0f} {band}{note}")
    if violations:
        print(f"range violations on: {', '.join(sorted(violations))}")
    return 0


def _cmd_endurance(args) -> int:
    result = endurance_sim(args.capacity_ah, args.current_a, args.k)
    if result.alarm_min is None:
        print("alarm: never (disabled or never reached)")
    else:
        print(f"alarm at {result.alarm_min:.2f} min")
    print(f"depleted at {result.depletion_min:.2f} min")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "serve": _cmd_serve,
        "bladefield": _cmd_bladefield,
        "receiver-test": _cmd_receiver_test,
        "endurance": _cmd_endurance,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
