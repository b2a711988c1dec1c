"""Vehicle and pedestrian motion models with explicit Euler pose integration.

Two vehicle models are provided: a linear one-track (OT) model driven by the
front steering angle and a commanded acceleration, and a two-track (TT) model
driven by steering plus a commanded longitudinal tire slip.  Poses advance by
the Euler scheme with second-order position and yaw terms.  All functions are
pure and numpy-broadcastable: scalars in, scalars out; arrays in, arrays out.
Batched rollouts simply pass per-hypothesis arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import GRAVITY
from .vehicles import VehicleParameters


@dataclass(frozen=True)
class VehicleDynamicState:
    """Single-vehicle dynamic state (global frame, vehicle-frame accelerations)."""

    x: float
    y: float
    yaw: float           # rad
    velocity: float      # m/s over ground
    sideslip: float      # rad
    yaw_rate: float      # rad/s
    accel_x: float = 0.0  # m/s^2, vehicle frame
    accel_y: float = 0.0  # m/s^2, vehicle frame

    @classmethod
    def initial(cls, x, y, yaw, velocity, sideslip=0.0, yaw_rate=0.0,
                acceleration=0.0) -> "VehicleDynamicState":
        ax, ay = body_acceleration(velocity, sideslip, 0.0, yaw_rate, acceleration)
        return cls(x, y, yaw, velocity, sideslip, yaw_rate, float(ax), float(ay))


def one_track_derivatives(velocity, sideslip, yaw_rate, steering, params: VehicleParameters):
    """Linear one-track lateral dynamics: returns (sideslip_rate, yaw_accel).

    Valid above the low-speed threshold only; the caller guards v.
    """
    cf = params.cornering_stiffness_front
    cr = params.cornering_stiffness_rear
    lf = params.cog_to_front
    lr = params.cog_to_rear
    m = params.mass
    iz = params.yaw_inertia
    v = np.asarray(velocity, dtype=float)

    beta_dot = (
        -(cf + cr) / (m * v) * sideslip
        + ((cr * lr - cf * lf) / (m * v * v) - 1.0) * yaw_rate
        + cf / (m * v) * steering
    )
    yaw_acc = (
        (cr * lr - cf * lf) / iz * sideslip
        - (cf * lf * lf + cr * lr * lr) / (iz * v) * yaw_rate
        + cf * lf / iz * steering
    )
    return beta_dot, yaw_acc


def steady_state_cornering(velocity: float, steering: float,
                           params: VehicleParameters) -> tuple[float, float]:
    """(sideslip, yaw_rate) with vanishing one-track derivatives at fixed inputs."""
    cf = params.cornering_stiffness_front
    cr = params.cornering_stiffness_rear
    lf = params.cog_to_front
    lr = params.cog_to_rear
    m = params.mass
    iz = params.yaw_inertia
    v = velocity
    a = np.array([
        [-(cf + cr) / (m * v), (cr * lr - cf * lf) / (m * v * v) - 1.0],
        [(cr * lr - cf * lf) / iz, -(cf * lf * lf + cr * lr * lr) / (iz * v)],
    ])
    b = np.array([cf / (m * v), cf * lf / iz]) * steering
    beta, yaw_rate = np.linalg.solve(a, -b)
    return float(beta), float(yaw_rate)


def wheel_loads(params: VehicleParameters) -> tuple[float, float]:
    """Static per-wheel normal load (front, rear), N.  No load transfer."""
    wheelbase = params.wheelbase
    front = params.mass * GRAVITY * params.cog_to_rear / (2.0 * wheelbase)
    rear = params.mass * GRAVITY * params.cog_to_front / (2.0 * wheelbase)
    return front, rear


WHEELS = ("front_left", "front_right", "rear_left", "rear_right")


def tire_forces(velocity, sideslip, yaw_rate, steering, slip, params: VehicleParameters,
                slip_stiffness_factor: float = 10.0, friction: float = 1.0,
                low_speed_threshold: float = 1.0):
    """Per-wheel tire forces of the two-track model.

    Lateral force is linear in the wheel slip angle, longitudinal force
    linear in the commanded slip; both are clipped to the friction circle
    per wheel.  Static axle loads, no load transfer: left and right wheels
    of an axle carry the same forces.  Returns a dict keyed by wheel name
    holding (longitudinal, lateral, normal) triples in wheel coordinates.
    """
    v = np.asarray(velocity, dtype=float)
    fz_front, fz_rear = wheel_loads(params)

    vx = v * np.cos(sideslip)
    vy = v * np.sin(sideslip)
    moving = v >= low_speed_threshold
    # Wheel slip angles from velocity geometry; lateral response is frozen
    # below the low-speed threshold where the angles lose meaning.
    alpha_front = np.where(
        moving, steering - np.arctan2(vy + params.cog_to_front * yaw_rate, np.maximum(vx, 0.1)), 0.0)
    alpha_rear = np.where(
        moving, -np.arctan2(vy - params.cog_to_rear * yaw_rate, np.maximum(vx, 0.1)), 0.0)

    half_cf = params.cornering_stiffness_front / 2.0
    half_cr = params.cornering_stiffness_rear / 2.0
    forces = {}
    for axle, fz, lateral_raw in (
        ("front", fz_front, half_cf * alpha_front),
        ("rear", fz_rear, half_cr * alpha_rear),
    ):
        longitudinal_raw = slip_stiffness_factor * fz * np.asarray(slip, dtype=float)
        magnitude = np.hypot(longitudinal_raw, lateral_raw)
        limit = friction * fz
        scale = np.where(magnitude > limit, limit / np.where(magnitude > 0, magnitude, 1.0), 1.0)
        for side in ("left", "right"):
            forces[f"{axle}_{side}"] = (longitudinal_raw * scale, lateral_raw * scale, fz)
    return forces


def two_track_derivatives(velocity, sideslip, yaw_rate, steering, slip,
                          params: VehicleParameters,
                          slip_stiffness_factor: float = 10.0, friction: float = 1.0,
                          low_speed_threshold: float = 1.0):
    """Two-track force/moment balance: returns (accel, sideslip_rate, yaw_accel)."""
    forces = tire_forces(velocity, sideslip, yaw_rate, steering, slip, params,
                         slip_stiffness_factor, friction, low_speed_threshold)
    cos_d = np.cos(steering)
    sin_d = np.sin(steering)

    fx = 0.0
    fy = 0.0
    mz = 0.0
    for wheel in WHEELS:
        longitudinal, lateral, _ = forces[wheel]
        if wheel.startswith("front"):
            wheel_fx = longitudinal * cos_d - lateral * sin_d
            wheel_fy = longitudinal * sin_d + lateral * cos_d
            arm = params.cog_to_front
        else:
            wheel_fx = longitudinal
            wheel_fy = lateral
            arm = -params.cog_to_rear
        fx = fx + wheel_fx
        fy = fy + wheel_fy
        # Lateral lever arms cancel across each axle (symmetric forces).
        mz = mz + arm * wheel_fy

    v = np.asarray(velocity, dtype=float)
    cos_b = np.cos(sideslip)
    sin_b = np.sin(sideslip)
    v_dot = (fx * cos_b + fy * sin_b) / params.mass
    moving = v >= low_speed_threshold
    beta_dot = np.where(
        moving,
        (fy * cos_b - fx * sin_b) / (params.mass * np.maximum(v, low_speed_threshold))
        - yaw_rate,
        0.0,
    )
    yaw_acc = np.where(moving, mz / params.yaw_inertia, 0.0)
    return v_dot, beta_dot, yaw_acc


def body_acceleration(velocity, sideslip, sideslip_rate, yaw_rate, v_dot):
    """Vehicle-frame accelerations (a_x, a_y) from the current state rates."""
    cos_b = np.cos(sideslip)
    sin_b = np.sin(sideslip)
    turn = np.asarray(velocity, dtype=float) * (np.asarray(sideslip_rate) + np.asarray(yaw_rate))
    return cos_b * v_dot - sin_b * turn, sin_b * v_dot + cos_b * turn


def euler_step(x, y, yaw, velocity, sideslip, yaw_rate, accel_x, accel_y,
               v_dot, beta_dot, yaw_acc, tau):
    """One explicit Euler step of the pose integration scheme.

    Velocity and sideslip advance first order; yaw and position carry the
    tau^2/2 terms, the position using the stored vehicle-frame accelerations
    of the previous step.  Velocity is clamped at zero: within the short
    emergency horizon vehicles brake to a stop, they do not reverse.
    Returns the full successor state tuple including the refreshed (a_x, a_y).
    """
    v = np.asarray(velocity, dtype=float)
    # Braking cannot push v below zero; cap the deceleration at what stops
    # the vehicle within this step, which also freezes the pose once stopped.
    v_dot_eff = np.maximum(np.asarray(v_dot, dtype=float), -v / tau)

    v_next = v + v_dot_eff * tau
    beta_next = sideslip + beta_dot * tau
    yaw_next = yaw + yaw_rate * tau + yaw_acc * (tau * tau / 2.0)
    yaw_rate_next = yaw_rate + yaw_acc * tau

    cos_h = np.cos(yaw + sideslip)
    sin_h = np.sin(yaw + sideslip)
    cos_y = np.cos(yaw)
    sin_y = np.sin(yaw)
    half_tau2 = tau * tau / 2.0
    x_next = x + cos_h * v * tau + cos_y * accel_x * half_tau2 - sin_y * accel_y * half_tau2
    y_next = y + sin_h * v * tau + sin_y * accel_x * half_tau2 + cos_y * accel_y * half_tau2

    ax_next, ay_next = body_acceleration(v, sideslip, beta_dot, yaw_rate, v_dot_eff)
    return x_next, y_next, yaw_next, v_next, beta_next, yaw_rate_next, ax_next, ay_next


def integrate_vehicle(state: VehicleDynamicState, derivatives: tuple[float, float, float],
                      tau: float) -> VehicleDynamicState:
    """Advance one vehicle state by one step; derivatives = (v_dot, beta_dot, yaw_acc)."""
    v_dot, beta_dot, yaw_acc = derivatives
    out = euler_step(state.x, state.y, state.yaw, state.velocity, state.sideslip,
                     state.yaw_rate, state.accel_x, state.accel_y,
                     v_dot, beta_dot, yaw_acc, tau)
    return VehicleDynamicState(*(float(v) for v in out))


def pedestrian_step(x, y, velocity, heading, v_dot, tau, v_max=2.7):
    """One kinematic pedestrian step along a fixed heading.

    Position advances with the velocity and acceleration terms; speed is
    clamped to [0, v_max] afterwards.  Deceleration is capped so a standing
    pedestrian never walks backwards.
    """
    v = np.asarray(velocity, dtype=float)
    v_dot_eff = np.maximum(np.asarray(v_dot, dtype=float), -v / tau)
    ds = v * tau + v_dot_eff * (tau * tau / 2.0)
    x_next = x + np.cos(heading) * ds
    y_next = y + np.sin(heading) * ds
    v_next = np.clip(v + v_dot_eff * tau, 0.0, v_max)
    return x_next, y_next, v_next


def integrate_pedestrian(x: float, y: float, velocity: float, heading: float,
                         v_dot: float, tau: float, v_max: float = 2.7):
    """Scalar pedestrian step; returns (x, y, velocity)."""
    out = pedestrian_step(x, y, velocity, heading, v_dot, tau, v_max)
    return tuple(float(v) for v in out)
