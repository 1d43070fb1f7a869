"""Scenario runner, sensor model, telemetry formats, live service and CLI."""

from .runner import (
    EnduranceResult,
    FlightLog,
    Primitive,
    PrimitiveResult,
    SimCore,
    SimulationError,
    TelemetryRecord,
    endurance_sim,
    motion_primitive_check,
    run_scenario,
)
from .scenario import (
    InputSource,
    Scenario,
    SensorNoise,
    NOISE_FREE,
    build_default_hover_scenario,
    build_hover_trace,
    load_scenario,
    save_scenario,
    scenario_digest,
    write_default_scenario_files,
)
from .sensors import SensorModel
from .telemetry import csv_export, csv_import
