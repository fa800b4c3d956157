"""
Classic-control dynamics

CartPole, Pendulum, MountainCar, MountainCarContinuous and Acrobot with the
constants of the widely used v0/v1 benchmark definitions. State is kept as
plain floats and observations are built on demand.
"""

from __future__ import annotations

from collections.abc import Callable
from math import cos, pi, sin

import numpy as np

from policy_capacity.envs.base import Env, EnvSpec, NoiseConfig

# ===== CARTPOLE =====

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_POLE_LENGTH = 0.5
POLE_MASS_LENGTH = MASS_POLE * HALF_POLE_LENGTH
FORCE_MAG = 10.0
TAU = 0.02
THETA_THRESHOLD = 12 * 2 * pi / 360
X_THRESHOLD = 2.4


class CartPole(Env):
    """Pole balancing; reward 1 per step including the failing one

    Noise: reset draws all four state dims from U(-u_init, u_init); each step
    adds U(-u_dyn, u_dyn) to the angular velocity when u_dyn > 0.
    """

    def __init__(self, spec: EnvSpec):
        super().__init__(spec)
        self.noise = spec.noise or NoiseConfig()
        self.state = (0.0, 0.0, 0.0, 0.0)

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        u = self.noise.u_init
        self.state = tuple(float(v) for v in rng.uniform(-u, u, size=4))
        return np.array(self.state)

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        x, x_dot, theta, theta_dot = self.state
        force = FORCE_MAG if int(action) == 1 else -FORCE_MAG
        costheta = cos(theta)
        sintheta = sin(theta)

        temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sintheta) / TOTAL_MASS
        thetaacc = (GRAVITY * sintheta - costheta * temp) / (
            HALF_POLE_LENGTH * (4.0 / 3.0 - MASS_POLE * costheta * costheta / TOTAL_MASS)
        )
        xacc = temp - POLE_MASS_LENGTH * thetaacc * costheta / TOTAL_MASS

        x = x + TAU * x_dot
        x_dot = x_dot + TAU * xacc
        theta = theta + TAU * theta_dot
        theta_dot = theta_dot + TAU * thetaacc
        if self.noise.u_dyn > 0:
            theta_dot += float(self.rng.uniform(-self.noise.u_dyn, self.noise.u_dyn))

        self.state = (x, x_dot, theta, theta_dot)
        terminated = (
            x < -X_THRESHOLD
            or x > X_THRESHOLD
            or theta < -THETA_THRESHOLD
            or theta > THETA_THRESHOLD
        )
        return np.array(self.state), 1.0, terminated


# ===== PENDULUM =====

PENDULUM_MAX_SPEED = 8.0
PENDULUM_MAX_TORQUE = 2.0
PENDULUM_DT = 0.05
PENDULUM_G = 10.0
PENDULUM_M = 1.0
PENDULUM_L = 1.0


def angle_normalize(x: float) -> float:
    return ((x + pi) % (2 * pi)) - pi


class Pendulum(Env):
    """Torque-limited swing-up; reward -(phi^2 + 0.1*phidot^2 + 0.001*u^2)"""

    def __init__(self, spec: EnvSpec):
        super().__init__(spec)
        self.th = 0.0
        self.thdot = 0.0

    def _obs(self) -> np.ndarray:
        return np.array([cos(self.th), sin(self.th), self.thdot])

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        self.th, self.thdot = (float(v) for v in rng.uniform([-pi, -1.0], [pi, 1.0]))
        return self._obs()

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        th, thdot = self.th, self.thdot
        u = min(max(float(np.ravel(action)[0]), -PENDULUM_MAX_TORQUE), PENDULUM_MAX_TORQUE)
        cost = angle_normalize(th) ** 2 + 0.1 * thdot**2 + 0.001 * u**2

        newthdot = thdot + (
            -3 * PENDULUM_G / (2 * PENDULUM_L) * sin(th + pi)
            + 3.0 / (PENDULUM_M * PENDULUM_L**2) * u
        ) * PENDULUM_DT
        newth = th + newthdot * PENDULUM_DT
        self.th = newth
        self.thdot = min(max(newthdot, -PENDULUM_MAX_SPEED), PENDULUM_MAX_SPEED)
        return self._obs(), -cost, False


# ===== MOUNTAIN CAR =====

MIN_POSITION = -1.2
MAX_POSITION = 0.6
MAX_SPEED = 0.07
CAR_GRAVITY = 0.0025


class _HillCar(Env):
    goal_position = 0.5

    def __init__(self, spec: EnvSpec):
        super().__init__(spec)
        self.position = -0.5
        self.velocity = 0.0

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        self.position = float(rng.uniform(-0.6, -0.4))
        self.velocity = 0.0
        return np.array([self.position, self.velocity])

    def _move(self, acceleration: float) -> bool:
        velocity = self.velocity + acceleration - CAR_GRAVITY * cos(3 * self.position)
        velocity = min(max(velocity, -MAX_SPEED), MAX_SPEED)
        position = min(max(self.position + velocity, MIN_POSITION), MAX_POSITION)
        if position == MIN_POSITION and velocity < 0:
            velocity = 0.0
        self.position, self.velocity = position, velocity
        return position >= self.goal_position and velocity >= 0


class MountainCar(_HillCar):
    """Three pushes (left, none, right); reward -1 per step until the goal"""

    force = 0.001

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        terminated = self._move((int(action) - 1) * self.force)
        return np.array([self.position, self.velocity]), -1.0, terminated


class MountainCarContinuous(_HillCar):
    """Continuous push in [-1, 1]; reward 100 at the goal minus 0.1*a^2 per step"""

    goal_position = 0.45
    power = 0.0015

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        a = float(np.ravel(action)[0])
        force = min(max(a, -1.0), 1.0)
        terminated = self._move(force * self.power)
        reward = (100.0 if terminated else 0.0) - 0.1 * a * a
        return np.array([self.position, self.velocity]), reward, terminated


# ===== ACROBOT =====

ACROBOT_DT = 0.2
LINK_LENGTH_1 = 1.0
LINK_MASS_1 = 1.0
LINK_MASS_2 = 1.0
LINK_COM_POS_1 = 0.5
LINK_COM_POS_2 = 0.5
LINK_MOI = 1.0
MAX_VEL_1 = 4 * pi
MAX_VEL_2 = 9 * pi
AVAIL_TORQUE = (-1.0, 0.0, 1.0)

State4 = tuple[float, float, float, float]


def rk4(derivs: Callable[[State4, float], State4], y0: State4, a: float, dt: float) -> State4:
    """Single fourth-order Runge-Kutta step with the action held constant"""
    half = dt / 2.0
    k1 = derivs(y0, a)
    k2 = derivs(tuple(y + half * k for y, k in zip(y0, k1)), a)
    k3 = derivs(tuple(y + half * k for y, k in zip(y0, k2)), a)
    k4 = derivs(tuple(y + dt * k for y, k in zip(y0, k3)), a)
    return tuple(
        y + dt / 6.0 * (p + 2 * q + 2 * r + s)
        for y, p, q, r, s in zip(y0, k1, k2, k3, k4)
    )


def acrobot_dsdt(s: State4, a: float) -> State4:
    m1, m2 = LINK_MASS_1, LINK_MASS_2
    l1 = LINK_LENGTH_1
    lc1, lc2 = LINK_COM_POS_1, LINK_COM_POS_2
    i1 = i2 = LINK_MOI
    g = 9.8
    theta1, theta2, dtheta1, dtheta2 = s

    d1 = m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * cos(theta2)) + i1 + i2
    d2 = m2 * (lc2**2 + l1 * lc2 * cos(theta2)) + i2
    phi2 = m2 * lc2 * g * cos(theta1 + theta2 - pi / 2.0)
    phi1 = (
        -m2 * l1 * lc2 * dtheta2**2 * sin(theta2)
        - 2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * sin(theta2)
        + (m1 * lc1 + m2 * l1) * g * cos(theta1 - pi / 2)
        + phi2
    )
    ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1**2 * sin(theta2) - phi2) / (
        m2 * lc2**2 + i2 - d2**2 / d1
    )
    ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
    return (dtheta1, dtheta2, ddtheta1, ddtheta2)


def wrap(x: float, low: float, high: float) -> float:
    diff = high - low
    while x > high:
        x -= diff
    while x < low:
        x += diff
    return x


class Acrobot(Env):
    """Two-link swing-up; reward -1 per step until the tip clears the bar"""

    def __init__(self, spec: EnvSpec):
        super().__init__(spec)
        self.state: State4 = (0.0, 0.0, 0.0, 0.0)

    def _obs(self) -> np.ndarray:
        s = self.state
        return np.array([cos(s[0]), sin(s[0]), cos(s[1]), sin(s[1]), s[2], s[3]])

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        self.state = tuple(float(v) for v in rng.uniform(-0.1, 0.1, size=4))
        return self._obs()

    def _step(self, action) -> tuple[np.ndarray, float, bool]:
        torque = AVAIL_TORQUE[int(action)]
        ns = rk4(acrobot_dsdt, self.state, torque, ACROBOT_DT)
        self.state = (
            wrap(ns[0], -pi, pi),
            wrap(ns[1], -pi, pi),
            min(max(ns[2], -MAX_VEL_1), MAX_VEL_1),
            min(max(ns[3], -MAX_VEL_2), MAX_VEL_2),
        )
        terminated = -cos(self.state[0]) - cos(self.state[1] + self.state[0]) > 1.0
        return self._obs(), 0.0 if terminated else -1.0, terminated
