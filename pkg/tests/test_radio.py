import math

import numpy as np
import pytest

from quadsim.radio import (
    ChannelSet,
    ChannelTrim,
    CppmDecodeError,
    CppmFrame,
    RadioConfig,
    cppm_decode,
    cppm_encode,
    load_channel_trace,
    normalize,
    receiver_test,
    sample_channel_trace,
    save_channel_trace,
)


def random_channelset(rng) -> ChannelSet:
    # Stay inside the band both maps can represent exactly (the 1520 us
    # center leaves +92.3 units of headroom on symmetric channels).
    return ChannelSet(
        throttle=float(rng.uniform(0, 100)),
        roll=float(rng.uniform(-92, 92)),
        pitch=float(rng.uniform(-92, 92)),
        yaw=float(rng.uniform(-92, 92)),
        aux1=bool(rng.integers(0, 2)),
    )


class TestChannelSet:
    def test_rejects_excursions_beyond_band(self):
        with pytest.raises(ValueError):
            ChannelSet(roll=111.0)
        with pytest.raises(ValueError):
            ChannelSet(throttle=-1.0)
        with pytest.raises(ValueError):
            ChannelSet(pitch=math.nan)
        ChannelSet(roll=110.0, throttle=110.0)  # transient excursions tolerated

    def test_neutral_detection(self):
        assert ChannelSet(roll=4.0, pitch=-3.0, yaw=0.0).neutral_axes()
        assert not ChannelSet(yaw=6.0).neutral_axes()


class TestNormalize:
    def test_centered_symmetric_channel(self):
        ch = normalize([1520, 1520, 1000, 1520, 1000])
        assert ch.roll == 0.0
        assert ch.pitch == 0.0
        assert ch.yaw == 0.0
        assert ch.throttle == 0.0
        assert ch.aux1 is False

    def test_full_travel_lands_in_band(self):
        ch = normalize([2000, 1000, 2000, 1520, 2000])
        assert 90 <= ch.roll <= 100
        assert -100 <= ch.pitch <= -90
        assert ch.throttle == pytest.approx(100.0)
        assert ch.aux1 is True

    def test_reversal_negates(self):
        cfg = RadioConfig(
            channels=(ChannelTrim(reversed=True),) + tuple(ChannelTrim() for _ in range(7))
        )
        plain = normalize([1700, 1520, 1000, 1520, 1000])
        flipped = normalize([1700, 1520, 1000, 1520, 1000], cfg)
        assert flipped.roll == pytest.approx(-plain.roll, rel=1e-12)
        assert flipped.pitch == plain.pitch

    def test_trim_is_additive(self):
        cfg = RadioConfig(
            channels=(ChannelTrim(trim=5.0),) + tuple(ChannelTrim() for _ in range(7))
        )
        ch = normalize([1520, 1520, 1000, 1520, 1000], cfg)
        assert ch.roll == pytest.approx(5.0)

    def test_endpoint_scale(self):
        cfg = RadioConfig(
            channels=(ChannelTrim(endpoint_scale=0.9),) + tuple(ChannelTrim() for _ in range(7))
        )
        ch = normalize([2000, 1520, 1000, 1520, 1000], cfg)
        assert ch.roll == pytest.approx(0.9 * (2000 - 1520) * 100 / 520, rel=1e-12)


class TestCppmCodec:
    def test_neutral_set_gives_centered_pulses(self):
        frame = cppm_encode(ChannelSet())
        assert frame.pulses_us[0] == 1520  # aileron
        assert frame.pulses_us[1] == 1520  # elevator
        assert frame.pulses_us[2] == 1000  # throttle
        assert frame.pulses_us[3] == 1520  # rudder
        assert frame.pulses_us[4] == 1000  # aux off

    def test_full_throttle_pulse(self):
        frame = cppm_encode(ChannelSet(throttle=100.0))
        assert frame.pulses_us[2] == 2000

    def test_frame_period_invariant(self):
        frame = cppm_encode(ChannelSet(throttle=55, roll=20, pitch=-30, yaw=5))
        assert sum(frame.pulses_us) + frame.sync_us == frame.period_us

    def test_roundtrip_quantization_band(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(10000):
            ch = random_channelset(rng)
            back = cppm_decode(cppm_encode(ch))
            worst = max(
                worst,
                abs(back.throttle - ch.throttle) * (1000 / 100) / 10,  # 1 us = 0.1 units
                abs(back.roll - ch.roll) * (520 / 100) / 5.2,
                abs(back.pitch - ch.pitch) * (520 / 100) / 5.2,
                abs(back.yaw - ch.yaw) * (520 / 100) / 5.2,
            )
            assert back.aux1 == ch.aux1
            assert abs(back.throttle - ch.throttle) < 0.2
            assert abs(back.roll - ch.roll) < 0.2
            assert abs(back.pitch - ch.pitch) < 0.2
            assert abs(back.yaw - ch.yaw) < 0.2

    def test_decode_clamps_low_pulse(self):
        frame = CppmFrame((900, 1520, 1000, 1520, 1000))
        ch = cppm_decode(frame)
        assert ch.roll == pytest.approx((1000 - 1520) * 100 / 520, rel=1e-12)

    def test_rejects_malformed_arity(self):
        with pytest.raises(ValueError):
            CppmFrame(())
        with pytest.raises(ValueError):
            CppmFrame(tuple([1500] * 9))
        with pytest.raises(CppmDecodeError):
            cppm_decode(CppmFrame((1500, 1500, 1500)))

    def test_roundtrip_with_shaping_config(self):
        # Reversal stays off the throttle channel: a reversed throttle maps
        # positive values below the pulse floor (the misconfiguration the
        # receiver-test procedure exists to catch).
        rng = np.random.default_rng(23)
        for _ in range(500):
            channels = tuple(
                ChannelTrim(
                    reversed=bool(rng.integers(0, 2)) and idx != 2,
                    trim=float(rng.uniform(-3, 3)),
                    endpoint_scale=float(rng.uniform(0.95, 1.1)),
                )
                for idx in range(8)
            )
            cfg = RadioConfig(channels=channels)
            ch = ChannelSet(
                throttle=float(rng.uniform(5, 90)),
                roll=float(rng.uniform(-75, 75)),
                pitch=float(rng.uniform(-75, 75)),
                yaw=float(rng.uniform(-75, 75)),
            )
            back = cppm_decode(cppm_encode(ch, cfg), cfg)
            assert abs(back.roll - ch.roll) < 0.25
            assert abs(back.pitch - ch.pitch) < 0.25
            assert abs(back.yaw - ch.yaw) < 0.25
            assert abs(back.throttle - ch.throttle) < 0.25


class TestReceiverTest:
    def test_neutral_is_safe_zone(self):
        report = receiver_test(ChannelSet())
        assert report.zone == "Safe Zone"
        assert report.throttle_label == "Idle"
        assert report.ok

    def test_arm_zone(self):
        report = receiver_test(ChannelSet(throttle=0, yaw=95))
        assert report.zone == "Arm"

    def test_disarm_zone(self):
        report = receiver_test(ChannelSet(throttle=0, yaw=-95))
        assert report.zone == "Disarm"

    def test_full_throttle_label(self):
        report = receiver_test(ChannelSet(throttle=95))
        assert report.throttle_label == "Full"
        assert report.zone == "Safe Zone"

    def test_numeric_label_between(self):
        report = receiver_test(ChannelSet(throttle=50))
        assert report.throttle_label == "50"

    def test_travel_violation_flagged(self):
        report = receiver_test(ChannelSet(roll=110.0))
        assert "roll" in report.range_violations
        assert not report.ok

    def test_no_signal(self):
        report = receiver_test(None)
        assert report.no_signal
        assert report.zone == "No signal"

    def test_zone_labels_exclusive_and_total(self):
        rng = np.random.default_rng(5)
        labels = {"Safe Zone", "Arm", "Disarm"}
        for _ in range(2000):
            ch = ChannelSet(
                throttle=float(rng.uniform(0, 100)),
                yaw=float(rng.uniform(-100, 100)),
            )
            assert receiver_test(ch).zone in labels

    def test_arming_gate_requires_idle_throttle(self):
        report = receiver_test(ChannelSet(throttle=50, yaw=100))
        assert report.zone == "Safe Zone"


class TestChannelTrace:
    def test_roundtrip_and_interpolation(self, tmp_path):
        rows = [
            (0.0, ChannelSet()),
            (1.0, ChannelSet(throttle=50, roll=10)),
            (3.0, ChannelSet(throttle=50, roll=-10, aux1=True)),
        ]
        path = tmp_path / "trace.csv"
        save_channel_trace(rows, path)
        loaded = load_channel_trace(path)
        assert len(loaded) == 3
        assert loaded[1][1].throttle == 50

        mid = sample_channel_trace(loaded, 0.5)
        assert mid.throttle == pytest.approx(25.0)
        assert mid.roll == pytest.approx(5.0)
        late = sample_channel_trace(loaded, 2.0)
        assert late.roll == pytest.approx(0.0)
        assert late.aux1 is False  # holds the earlier row's switch state
        assert sample_channel_trace(loaded, 99.0).roll == -10

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,thr\n0,0\n")
        with pytest.raises(ValueError):
            load_channel_trace(path)

    def test_rejects_decreasing_time(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t_s,throttle,roll,pitch,yaw,aux1\n1,0,0,0,0,0\n0.5,0,0,0,0,0\n")
        with pytest.raises(ValueError):
            load_channel_trace(path)
