"""
Live piloted session
====================

Starts the simulator with the live command link and flies a short scripted
sortie through the WebSocket protocol, exactly the way the browser ground
station does.  (For a human-piloted session run `quadsim serve` and open
the ground-station client instead.)
"""

import json
import threading
import time

from starlette.testclient import TestClient

from quadsim.harness.scenario import InputSource, Scenario
from quadsim.harness.service import SimSession, create_app

scenario = Scenario(input=InputSource(kind="live"), seed=1)
session = SimSession(scenario, rate_hz=20.0, time_scale=4.0)
session.start()
client = TestClient(create_app(session))

with client.websocket_connect("/ws") as ws:
    hello = json.loads(ws.receive_text())
    print(f"connected, command authority: {hello['authority']}")

    ws.send_text(json.dumps({"type": "gesture", "action": "arm"}))
    print("arm gesture sent; waiting for the armed event...")
    z = 0.0
    deadline = time.monotonic() + 20
    while time.monotonic() < deadline:
        msg = json.loads(ws.receive_text())
        if msg["type"] == "event":
            print(f"event: {msg['kind']} at t={msg['t_s']:.2f}s")
            if msg["kind"] == "armed":
                break

    print("throttle up...")
    while time.monotonic() < deadline:
        ws.send_text(json.dumps({"type": "sticks", "throttle": 72, "roll": 0, "pitch": 0, "yaw": 0}))
        msg = json.loads(ws.receive_text())
        if msg["type"] == "telemetry":
            z = msg["z_m"]
            if z > 2.0:
                print(f"climbed through {z:.2f} m at t={msg['t_s']:.2f}s "
                      f"(pack {msg['vbatt_v']:.2f} V)")
                break

    ws.send_text(json.dumps({"type": "set_gains", "axis": "roll", "p": 60, "i": 30}))
    ws.send_text(json.dumps({"type": "config_get", "key": "roll_p"}))
    while True:
        msg = json.loads(ws.receive_text())
        if msg["type"] == "config_value":
            print(f"live gain change confirmed: roll_p = {msg['value']}")
            break

session.stop()
print("session closed; sticks fail safe to neutral if the link drops.")
