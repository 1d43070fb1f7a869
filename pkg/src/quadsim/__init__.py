"""Deterministic quadcopter flight simulator with a KK2-style flight
controller emulation, an RC link model, battery endurance math, and a live
telemetry/command service for piloted flight."""

from .dynamics import (
    AirframeParams,
    Attitude,
    ControlInputs,
    ModelVariant,
    MotorThrusts,
    RigidBodyState,
    Waypoint,
    angular_accel,
    control_inputs,
    desired_angles,
    rotation_matrix,
    step,
    translational_accel,
)
from .propulsion import (
    BatteryState,
    BladeFieldSpec,
    MotorSpec,
    alarm_beep_interval,
    battery_step,
    blade_velocity,
    blade_velocity_field,
    low_voltage_alarm,
    peukert_capacity,
    pwm_to_throttle,
    required_current,
    throttle_to_thrust,
)
from .controller import (
    ArmMode,
    ArmState,
    ControllerConfig,
    ControllerState,
    MotorOutputs,
    PiGains,
    SensorReading,
    arm_step,
    attitude_estimate,
    controller_update,
    height_dampening,
    mixer,
    pi_step,
    servo_filter,
    stick_scale,
)
from .radio import (
    ChannelSet,
    CppmFrame,
    RadioConfig,
    cppm_decode,
    cppm_encode,
    normalize,
    receiver_test,
)

__version__ = "0.1.0"
