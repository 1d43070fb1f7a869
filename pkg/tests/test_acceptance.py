"""Acceptance suite: every release gate in one module, each criterion a
single test at its stated tolerance.  The conftest summary hook prints one
verdict line per criterion at the end of the run.

Criterion 10's retreating-side level check is expected to fail: with the
fixed field constants (1000 rpm, 28 mph, 1/3 ft radius) the most negative
velocity the formula can produce is omega*R/100 - V = -40.72 ft/s, which
never reaches the -50 ft/s contour level the gate demands.  The assertion
is kept as stated rather than weakened.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from quadsim.controller import ArmMode, ArmState, ControllerConfig, arm_step
from quadsim.dynamics import (
    AirframeParams,
    Attitude,
    ModelVariant,
    MotorThrusts,
    RigidBodyState,
    control_inputs,
    rotation_matrix,
    step,
    translational_accel,
)
from quadsim.harness.runner import endurance_sim, run_scenario
from quadsim.harness.scenario import NOISE_FREE, build_default_hover_scenario, load_scenario
from quadsim.harness.telemetry import csv_export
from quadsim.propulsion import (
    BladeFieldSpec,
    blade_velocity_field,
    peukert_capacity,
    required_current,
)
from quadsim.controller import mixer
from quadsim.radio import ChannelSet, cppm_decode, cppm_encode, receiver_test

from test_dynamics import (
    GENTLE_PARAMS,
    GENTLE_STATE,
    GENTLE_THRUSTS,
    TUMBLE_PARAMS,
    TUMBLE_STATE,
    TUMBLE_THRUSTS,
    euler_oracle,
    printed_accel_oracle,
    rk4_run,
    state_vec,
)

PARAMS = AirframeParams()


def test_criterion_01_peukert_sizing():
    assert peukert_capacity(10, 22.2, 1) == pytest.approx(3.7, abs=1e-9)


def test_criterion_02_current_math():
    assert required_current(70, 11.1) == pytest.approx(6.3063, abs=1e-4)


def test_criterion_03_endurance():
    result = endurance_sim(3.7, 22.2, 1.0, alarm_tenths=108)
    assert result.depletion_min * 60 == pytest.approx(600.0, rel=0.05)
    assert result.alarm_min is not None
    assert result.alarm_min < result.depletion_min


def test_criterion_04_rotation_matrix():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        att = Attitude(*rng.uniform(-math.tau, math.tau, size=3))
        r = rotation_matrix(att)
        assert np.max(np.abs(r @ r.T - np.eye(3))) < 1e-12
        assert abs(np.linalg.det(r) - 1.0) < 1e-12


def test_criterion_05_dynamics_oracle():
    rng = np.random.default_rng(4321)
    p = AirframeParams(k1=0.2, k2=0.15, k3=0.1)
    for _ in range(100):
        roll, pitch, yaw = rng.uniform(-math.pi, math.pi, size=3)
        vx, vy, vz = rng.uniform(-8, 8, size=3)
        u1 = rng.uniform(0, 25)
        s = RigidBodyState(vx=vx, vy=vy, vz=vz, att=Attitude(roll, pitch, yaw))
        got = translational_accel(s, u1, p, ModelVariant.AS_PRINTED)
        want = printed_accel_oracle(roll, pitch, yaw, vx, vy, vz, u1, p)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, abs=1e-12)
    # corrected variant: exact hover fixed point
    level = RigidBodyState()
    assert translational_accel(level, PARAMS.g, PARAMS, ModelVariant.CORRECTED) == (0.0, 0.0, 0.0)


def test_criterion_06_integrator_order():
    ref = euler_oracle(TUMBLE_STATE, TUMBLE_THRUSTS, TUMBLE_PARAMS, ModelVariant.CORRECTED, 1e-6, 2000000)

    def err(dt, n):
        s = rk4_run(TUMBLE_STATE, TUMBLE_THRUSTS, TUMBLE_PARAMS, ModelVariant.CORRECTED, dt, n)
        return max(abs(g - w) for g, w in zip(state_vec(s), ref))

    order = math.log2(err(0.05, 40) / err(0.025, 80))
    assert order >= 3.5

    free = RigidBodyState()
    for _ in range(500):
        free = step(free, MotorThrusts(0, 0, 0, 0), PARAMS, ModelVariant.CORRECTED, 0.002)
    assert free.z == pytest.approx(-PARAMS.g / 2, abs=1e-6)


def test_criterion_07_mixer_semantics():
    rng = np.random.default_rng(77)
    for _ in range(500):
        t = float(rng.uniform(0.3, 0.7))
        r, p, y = (float(v) for v in rng.uniform(-0.07, 0.07, size=3))
        mix = mixer(t, r, p, y)
        assert sum(mix) == pytest.approx(4 * t, rel=1e-12)

    m1, m2, m3, m4 = mixer(0.5, 0.0, -0.2, 0.0)  # forward command
    assert m3 > m1 and m4 > m1 and m3 > m2 and m4 > m2

    base = mixer(0.5, 0, 0, 0)
    y1, y2, y3, y4 = mixer(0.5, 0.0, 0.0, 0.2)
    assert y1 < base[0] and y3 < base[2]
    assert y2 > base[1] and y4 > base[3]
    assert y1 + y2 + y3 + y4 == pytest.approx(sum(base), rel=1e-12)

    equal = MotorThrusts(3.3, 3.3, 3.3, 3.3)
    u = control_inputs(equal, PARAMS, ModelVariant.CORRECTED)
    assert u.u2 == 0.0 and u.u3 == 0.0 and u.u4 == 0.0


def test_criterion_08_arm_state_machine():
    # receiver-test zone labels for the scripted gesture sequence
    zones = [
        receiver_test(ChannelSet()).zone,
        receiver_test(ChannelSet(throttle=0, yaw=100)).zone,
        receiver_test(ChannelSet(throttle=0, yaw=-100)).zone,
    ]
    assert zones == ["Safe Zone", "Arm", "Disarm"]

    cfg = ControllerConfig()
    dt = 0.002
    state = ArmState()
    for _ in range(int(1.5 / dt)):
        state = arm_step(state, ChannelSet(throttle=0, yaw=100), cfg, dt)
    assert state.mode is ArmMode.ARMED

    steps = 0
    while state.mode is ArmMode.ARMED:
        state = arm_step(state, ChannelSet(), cfg, dt)
        steps += 1
        assert steps <= int(600.0 / dt) + 1
    assert steps * dt == pytest.approx(600.0, abs=dt + 1e-12)

    for _ in range(int(1.5 / dt)):
        state = arm_step(state, ChannelSet(throttle=0, yaw=-100), cfg, dt)
    assert state.mode is ArmMode.SAFE


def test_criterion_09_closed_loop_hover():
    shipped = load_scenario("scenarios/hover.json")

    start = time.monotonic()
    quiet = run_scenario(replace(shipped, sensors=NOISE_FREE))
    runtime = time.monotonic() - start
    assert runtime < 10.0

    armed = [r for r in quiet.records if r.armed]
    assert armed, "craft never armed"
    assert max(r.z_m for r in quiet.records) == pytest.approx(2.0, abs=0.4)

    hold = [r for r in quiet.records if 5.0 <= r.t_s <= 34.8]
    assert min(r.z_m for r in hold) > 1.0, "did not hold altitude for 30 s"
    x0, y0 = hold[0].x_m, hold[0].y_m
    drift = max(math.hypot(r.x_m - x0, r.y_m - y0) for r in hold)
    assert drift < 0.5
    tilt = max(max(abs(r.roll_rad), abs(r.pitch_rad)) for r in hold)
    assert math.degrees(tilt) < 2.0

    noisy = run_scenario(shipped)
    flight = [r for r in noisy.records if r.armed]
    worst = max(max(abs(r.roll_rad), abs(r.pitch_rad)) for r in flight)
    assert math.degrees(worst) < 15.0


def test_criterion_10_blade_field():
    spec = BladeFieldSpec(rpm=1000.0, forward_mph=28.0, radius_ft=1 / 3, grid_n=100)
    xs, ys, us = blade_velocity_field(spec, appendix_pi=True)

    # independent transliteration of the original field script
    omega = 1000.0 * 2.0 * 3.14 / 60.0
    vkt = 28.0 / 1.15077
    v = vkt / 0.5925
    y_acc, psi_acc = 0.0, 0.0
    for i in range(100):
        y_acc += (1 / 3) / 100
        for j in range(100):
            psi_acc += 2 * math.pi / 100
            expected = omega * y_acc + v * math.sin(psi_acc)
            assert abs(us[i, j] - expected) < 1e-9
            assert abs(xs[i, j] - y_acc * math.cos(psi_acc)) < 1e-9
            assert abs(ys[i, j] - y_acc * math.sin(psi_acc)) < 1e-9

    retreating = us[:, 50:]  # azimuth in (pi, 2*pi]
    assert retreating.min() < -50.0, (
        f"retreating-side minimum is {retreating.min():.2f} ft/s; the formula "
        f"bottoms out at omega*R/100 - V = {omega * (1 / 3) / 100 - v:.2f} ft/s"
    )


def test_criterion_11_codec_roundtrips():
    rng = np.random.default_rng(2025)
    for _ in range(10000):
        ch = ChannelSet(
            throttle=float(rng.uniform(0, 100)),
            roll=float(rng.uniform(-92, 92)),
            pitch=float(rng.uniform(-92, 92)),
            yaw=float(rng.uniform(-92, 92)),
            aux1=bool(rng.integers(0, 2)),
        )
        back = cppm_decode(cppm_encode(ch))
        # 1 us of quantization is 0.1923 units on symmetric channels
        assert abs(back.roll - ch.roll) < 0.2
        assert abs(back.pitch - ch.pitch) < 0.2
        assert abs(back.yaw - ch.yaw) < 0.2
        assert abs(back.throttle - ch.throttle) < 0.2
        assert back.aux1 == ch.aux1

    report = receiver_test(ChannelSet(pitch=110.0))
    assert "pitch" in report.range_violations


def test_criterion_12_determinism(tmp_path):
    shipped = load_scenario("scenarios/hover.json")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    csv_export(run_scenario(shipped), a)
    csv_export(run_scenario(shipped), b)
    assert a.read_bytes() == b.read_bytes()
