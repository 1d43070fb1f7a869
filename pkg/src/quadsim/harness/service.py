"""Live flight service: a wall-clock-paced simulation loop plus a WebSocket
duplex link for the ground station.

Protocol (JSON messages, each with a "type" field):
  server -> client: hello {authority, rate_hz}, telemetry {record fields},
                    event {kind: armed|disarmed|alarm|brownout, t_s, ...},
                    error {message}, config_value {key, value}
  client -> server: sticks {throttle, roll, pitch, yaw, aux},
                    gesture {action: arm|disarm},
                    set_gains {axis, p, i},
                    config_set {key, value}, config_get {key}
Unknown types get an error reply.  The first connected client holds command
authority; later clients watch telemetry read-only.  If the authority
client goes silent for half a second the sticks fail safe to neutral with
idle throttle.
"""

from __future__ import annotations

import asyncio
import json
import math
import queue
import threading
import time
from dataclasses import asdict, replace

from fastapi import FastAPI
from starlette.websockets import WebSocket, WebSocketDisconnect

from ..controller import config_get_key, config_set_key
from ..propulsion import alarm_beep_interval
from ..radio import ChannelSet
from .runner import SimCore, TelemetryRecord
from .scenario import Scenario

FAILSAFE_S = 0.5
GESTURE_HOLD_S = 1.4
RATE_HZ_MIN = 1.0
RATE_HZ_MAX = 100.0


class SimSession:
    """Owns the simulation loop thread.  All mutation of loop state goes
    through the command queue and is applied between steps."""

    def __init__(self, scenario: Scenario, rate_hz: float, time_scale: float = 1.0):
        if not RATE_HZ_MIN <= rate_hz <= RATE_HZ_MAX:
            raise ValueError(f"rate_hz must be within [{RATE_HZ_MIN:g}, {RATE_HZ_MAX:g}]")
        scenario = replace(scenario, input=replace(scenario.input, kind="live", path=None, rows=None))
        self.scenario = scenario
        self.rate_hz = rate_hz
        self.time_scale = time_scale
        self._core = SimCore(scenario)
        self._commands: queue.Queue = queue.Queue()
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._sticks = ChannelSet()
        self._last_sticks_wall: float | None = None
        self._gesture_until = 0.0
        self._gesture_yaw = 0.0
        self._authority: int | None = None
        self._snapshot: tuple[int, TelemetryRecord] = (0, self._core.record())
        self._events: list[tuple[int, dict]] = []
        self._event_seq = 0
        self._was_armed = False
        self._alarm_was_active = False
        self._last_beep_s: float | None = None
        self._publish_every = max(1, round(1.0 / (rate_hz * scenario.dt_s)))
        self._thread = threading.Thread(target=self._run, name="quadsim-session", daemon=True)

    # -- lifecycle -------------------------------------------------------

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread.is_alive():
            self._thread.join(timeout=5.0)

    # -- client-facing API (thread-safe) ----------------------------------

    def claim_authority(self, client_id: int) -> bool:
        with self._lock:
            if self._authority is None:
                self._authority = client_id
                return True
            return self._authority == client_id

    def release_authority(self, client_id: int) -> None:
        with self._lock:
            if self._authority == client_id:
                self._authority = None
                self._last_sticks_wall = None

    def has_authority(self, client_id: int) -> bool:
        with self._lock:
            return self._authority == client_id

    def submit_sticks(self, ch: ChannelSet) -> None:
        self._commands.put(("sticks", ch))

    def submit_gesture(self, action: str) -> None:
        self._commands.put(("gesture", action))

    def submit_config_set(self, key: str, value) -> None:
        self._commands.put(("config_set", (key, value)))

    def config_value(self, key: str):
        with self._lock:
            return config_get_key(self._core.config, key)

    def validate_config(self, key: str, value) -> None:
        """Raises ValueError for unknown keys or out-of-range values."""
        with self._lock:
            config_set_key(self._core.config, key, value)

    def snapshot(self) -> tuple[int, TelemetryRecord]:
        with self._lock:
            return self._snapshot

    def events_since(self, seq: int) -> list[tuple[int, dict]]:
        with self._lock:
            return [(s, e) for s, e in self._events if s > seq]

    def active_sticks(self) -> ChannelSet:
        """The sticks the craft currently sees, failsafe applied."""
        return self._current_channels()

    # -- loop internals ----------------------------------------------------

    def _apply_commands(self) -> None:
        while True:
            try:
                kind, payload = self._commands.get_nowait()
            except queue.Empty:
                return
            if kind == "sticks":
                with self._lock:
                    self._sticks = payload
                    self._last_sticks_wall = time.monotonic()
            elif kind == "gesture":
                arm = payload == "arm"
                self._gesture_until = self._core.t + GESTURE_HOLD_S
                self._gesture_yaw = 100.0 if arm else -100.0
                with self._lock:
                    self._last_sticks_wall = time.monotonic()
            elif kind == "config_set":
                key, value = payload
                with self._lock:
                    self._core.config = config_set_key(self._core.config, key, value)

    def _current_channels(self) -> ChannelSet:
        now = time.monotonic()
        with self._lock:
            sticks = self._sticks
            last = self._last_sticks_wall
            stale = self._authority is None or last is None or (now - last) > FAILSAFE_S
        if self._core.t < self._gesture_until:
            return ChannelSet(throttle=0.0, yaw=self._gesture_yaw)
        if stale:
            return ChannelSet()
        return sticks

    def _emit_event(self, kind: str, extra: dict | None = None) -> None:
        payload = {"kind": kind, "t_s": self._core.t}
        if extra:
            payload.update(extra)
        self._event_seq += 1
        self._events.append((self._event_seq, payload))
        del self._events[:-256]

    def _after_step(self) -> None:
        armed = self._core.armed
        if armed != self._was_armed:
            self._emit_event("armed" if armed else "disarmed")
            self._was_armed = armed
        alarm = self._core.alarm_active
        if alarm:
            beep = alarm_beep_interval(
                self._core.battery.voltage,
                self._core.config.alarm_tenths / 10.0,
                self._core.scenario.battery.voltage,
            ) if self._core.config.alarm_tenths > 0 else None
            if not self._alarm_was_active or (
                beep is not None
                and self._last_beep_s is not None
                and abs(beep - self._last_beep_s) > 0.1 * self._last_beep_s
            ):
                self._emit_event("alarm", {"beep_s": beep})
                self._last_beep_s = beep
        self._alarm_was_active = alarm
        if self._core.crashed and not getattr(self, "_brownout_sent", False):
            self._emit_event("brownout")
            self._brownout_sent = True

    def _run(self) -> None:
        dt_wall = self.scenario.dt_s / self.time_scale
        next_wall = time.monotonic()
        seq = 0
        while not self._stop.is_set():
            self._apply_commands()
            ch = self._current_channels()
            rec = self._core.step(ch)
            with self._lock:
                self._after_step()
                if self._core.steps % self._publish_every == 0:
                    seq += 1
                    self._snapshot = (seq, rec)
            next_wall += dt_wall
            now = time.monotonic()
            if next_wall > now:
                time.sleep(next_wall - now)
            elif now - next_wall > 1.0:
                next_wall = now  # fell behind; resync rather than spiral


def _validate_sticks(msg: dict) -> ChannelSet:
    for name, lo, hi in (
        ("throttle", 0.0, 110.0),
        ("roll", -110.0, 110.0),
        ("pitch", -110.0, 110.0),
        ("yaw", -110.0, 110.0),
    ):
        if name not in msg:
            raise ValueError(f"sticks message is missing field '{name}'")
        value = msg[name]
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise ValueError(f"sticks field '{name}' must be a finite number")
        if not lo <= value <= hi:
            raise ValueError(f"sticks field '{name}' out of range [{lo:g}, {hi:g}]")
    aux = msg.get("aux", 0)
    return ChannelSet(
        throttle=float(msg["throttle"]),
        roll=float(msg["roll"]),
        pitch=float(msg["pitch"]),
        yaw=float(msg["yaw"]),
        aux1=bool(aux),
    )


_GAIN_AXES = ("roll", "pitch", "yaw", "self_level")


def create_app(session: SimSession) -> FastAPI:
    """WebSocket front door for one simulation session."""
    app = FastAPI(title="quadsim live link")
    next_id = {"value": 0}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        next_id["value"] += 1
        client_id = next_id["value"]
        authority = session.claim_authority(client_id)
        send_lock = asyncio.Lock()

        async def send(payload: dict) -> None:
            async with send_lock:
                await ws.send_text(json.dumps(payload))

        await send({"type": "hello", "authority": authority, "rate_hz": session.rate_hz})

        async def pump_telemetry() -> None:
            last_seq = 0
            last_event = 0
            interval = 1.0 / session.rate_hz
            while True:
                seq, rec = session.snapshot()
                if seq != last_seq:
                    last_seq = seq
                    await send({"type": "telemetry", **asdict(rec)})
                for eseq, payload in session.events_since(last_event):
                    last_event = eseq
                    await send({"type": "event", **payload})
                await asyncio.sleep(interval)

        async def handle(msg: dict) -> None:
            kind = msg.get("type")
            if kind == "sticks":
                if not session.has_authority(client_id):
                    await send({"type": "error", "message": "read-only client: another pilot holds command authority"})
                    return
                try:
                    session.submit_sticks(_validate_sticks(msg))
                except ValueError as err:
                    await send({"type": "error", "message": str(err)})
            elif kind == "gesture":
                if not session.has_authority(client_id):
                    await send({"type": "error", "message": "read-only client: another pilot holds command authority"})
                    return
                action = msg.get("action")
                if action not in ("arm", "disarm"):
                    await send({"type": "error", "message": "gesture field 'action' must be 'arm' or 'disarm'"})
                    return
                session.submit_gesture(action)
            elif kind == "set_gains":
                if not session.has_authority(client_id):
                    await send({"type": "error", "message": "read-only client: another pilot holds command authority"})
                    return
                axis = msg.get("axis")
                if axis not in _GAIN_AXES:
                    await send({"type": "error", "message": f"set_gains field 'axis' must be one of {_GAIN_AXES}"})
                    return
                try:
                    for field_name, key in (("p", f"{axis}_p"), ("i", f"{axis}_i")):
                        if field_name in msg and msg[field_name] is not None:
                            session.validate_config(key, msg[field_name])
                            session.submit_config_set(key, msg[field_name])
                except (ValueError, TypeError) as err:
                    await send({"type": "error", "message": f"set_gains field rejected: {err}"})
            elif kind == "config_set":
                if not session.has_authority(client_id):
                    await send({"type": "error", "message": "read-only client: another pilot holds command authority"})
                    return
                key = msg.get("key")
                if not isinstance(key, str):
                    await send({"type": "error", "message": "config_set field 'key' must be a string"})
                    return
                try:
                    session.validate_config(key, msg.get("value"))
                except (ValueError, TypeError) as err:
                    await send({"type": "error", "message": f"config_set rejected: {err}"})
                    return
                session.submit_config_set(key, msg.get("value"))
            elif kind == "config_get":
                key = msg.get("key")
                try:
                    value = session.config_value(str(key))
                except ValueError as err:
                    await send({"type": "error", "message": str(err)})
                    return
                await send({"type": "config_value", "key": key, "value": value})
            else:
                await send({"type": "error", "message": f"unknown message type: {kind!r}"})

        pump = asyncio.create_task(pump_telemetry())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await send({"type": "error", "message": "message is not valid JSON"})
                    continue
                if not isinstance(msg, dict):
                    await send({"type": "error", "message": "message must be a JSON object with a 'type' field"})
                    continue
                await handle(msg)
        except WebSocketDisconnect:
            pass
        finally:
            pump.cancel()
            session.release_authority(client_id)

    return app


def serve(scenario: Scenario, port: int, rate_hz: float, host: str = "127.0.0.1") -> None:
    """Run the live session server until interrupted."""
    import uvicorn

    session = SimSession(scenario, rate_hz)
    session.start()
    app = create_app(session)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        session.stop()
