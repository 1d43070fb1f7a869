import json
import time
from dataclasses import replace

import pytest
from starlette.testclient import TestClient

from quadsim.harness.scenario import InputSource, Scenario, SensorNoise
from quadsim.harness.service import FAILSAFE_S, SimSession, create_app
from quadsim.radio import ChannelSet

# Sim runs faster than the wall clock to keep these tests short; stick
# staleness is still judged in wall time.
TIME_SCALE = 5.0


def live_scenario() -> Scenario:
    return Scenario(
        sensors=SensorNoise(0.0, 0.0, 0.0),
        input=InputSource(kind="live"),
        seed=11,
    )


@pytest.fixture()
def session():
    s = SimSession(live_scenario(), rate_hz=50.0, time_scale=TIME_SCALE)
    s.start()
    yield s
    s.stop()


@pytest.fixture()
def client(session):
    app = create_app(session)
    with TestClient(app) as tc:
        yield tc


def recv_until(ws, predicate, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        msg = json.loads(ws.receive_text())
        if predicate(msg):
            return msg
    raise AssertionError("expected message did not arrive in time")


class TestSessionLoop:
    def test_idles_disarmed_without_clients(self, session):
        time.sleep(0.4)
        seq, rec = session.snapshot()
        assert seq > 0
        assert not rec.armed
        assert rec.mode == "safe"
        assert rec.z_m == 0.0

    def test_failsafe_reverts_sticks_to_neutral(self, session):
        session.claim_authority(1)
        session.submit_sticks(ChannelSet(throttle=70, roll=30))
        time.sleep(0.1)
        assert session.active_sticks().throttle == 70
        time.sleep(FAILSAFE_S + 0.2)
        # stale sticks no longer reach the craft: neutral, idle throttle
        effective = session.active_sticks()
        assert effective.throttle == 0.0
        assert effective.roll == 0.0

    def test_gesture_arms_then_times_out(self, session):
        session.claim_authority(1)
        session.submit_gesture("arm")
        deadline = time.monotonic() + 8.0
        armed = False
        while time.monotonic() < deadline:
            _, rec = session.snapshot()
            if rec.armed:
                armed = True
                break
            time.sleep(0.02)
        assert armed

    def test_rate_hz_validated(self):
        with pytest.raises(ValueError):
            SimSession(live_scenario(), rate_hz=0.5)
        with pytest.raises(ValueError):
            SimSession(live_scenario(), rate_hz=150.0)


class TestWebSocketLink:
    def test_hello_and_telemetry_flow(self, client):
        with client.websocket_connect("/ws") as ws:
            hello = json.loads(ws.receive_text())
            assert hello["type"] == "hello"
            assert hello["authority"] is True
            msg = recv_until(ws, lambda m: m["type"] == "telemetry")
            assert msg["mode"] == "safe"
            assert msg["armed"] is False

    def test_second_client_is_read_only(self, client):
        with client.websocket_connect("/ws") as first:
            assert json.loads(first.receive_text())["authority"] is True
            with client.websocket_connect("/ws") as second:
                hello = json.loads(second.receive_text())
                assert hello["authority"] is False
                second.send_text(json.dumps(
                    {"type": "sticks", "throttle": 50, "roll": 0, "pitch": 0, "yaw": 0}
                ))
                err = recv_until(second, lambda m: m["type"] == "error")
                assert "read-only" in err["message"]

    def test_pilot_session_arms_and_climbs(self, client, session):
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "gesture", "action": "arm"}))
            recv_until(ws, lambda m: m["type"] == "event" and m["kind"] == "armed", timeout=15.0)

            start = time.monotonic()
            climbed = None
            while time.monotonic() - start < 15.0:
                ws.send_text(json.dumps(
                    {"type": "sticks", "throttle": 75, "roll": 0, "pitch": 0, "yaw": 0}
                ))
                msg = json.loads(ws.receive_text())
                if msg.get("type") == "telemetry" and msg["z_m"] > 1.0:
                    climbed = msg
                    break
            assert climbed is not None
            assert climbed["armed"] is True

    def test_gain_change_roundtrip(self, client):
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "set_gains", "axis": "roll", "p": 77, "i": 31}))
            time.sleep(0.2)  # applied between sim steps
            ws.send_text(json.dumps({"type": "config_get", "key": "roll_p"}))
            reply = recv_until(ws, lambda m: m["type"] == "config_value" and m["key"] == "roll_p")
            assert reply["value"] == 77
            ws.send_text(json.dumps({"type": "config_get", "key": "roll_i"}))
            reply = recv_until(ws, lambda m: m["type"] == "config_value" and m["key"] == "roll_i")
            assert reply["value"] == 31

    def test_config_set_roundtrip(self, client):
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "config_set", "key": "height_damp", "value": 40}))
            time.sleep(0.2)
            ws.send_text(json.dumps({"type": "config_get", "key": "height_damp"}))
            reply = recv_until(ws, lambda m: m["type"] == "config_value")
            assert reply["value"] == 40

    def test_malformed_sticks_error_names_field(self, client):
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "sticks", "throttle": 50, "roll": 0, "pitch": 0}))
            err = recv_until(ws, lambda m: m["type"] == "error")
            assert "yaw" in err["message"]
            ws.send_text(json.dumps(
                {"type": "sticks", "throttle": 500, "roll": 0, "pitch": 0, "yaw": 0}
            ))
            err = recv_until(ws, lambda m: m["type"] == "error")
            assert "throttle" in err["message"]

    def test_unknown_type_gets_error(self, client):
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "teleport", "x": 0}))
            err = recv_until(ws, lambda m: m["type"] == "error")
            assert "teleport" in err["message"]

    def test_non_json_gets_error(self, client):
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text("not json at all")
            err = recv_until(ws, lambda m: m["type"] == "error")
            assert "JSON" in err["message"]

    def test_bad_config_key_rejected(self, client):
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "config_set", "key": "warp", "value": 1}))
            err = recv_until(ws, lambda m: m["type"] == "error")
            assert "warp" in err["message"]

    def test_authority_released_on_disconnect(self, client, session):
        with client.websocket_connect("/ws") as first:
            assert json.loads(first.receive_text())["authority"] is True
        time.sleep(0.1)
        with client.websocket_connect("/ws") as again:
            assert json.loads(again.receive_text())["authority"] is True
