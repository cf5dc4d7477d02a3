"""Shared oracles and swap-in dynamics models for the test suite.

Everything here is deliberately independent of the library's propagation
path: oracles use scipy's solve_ivp directly, finite differences, or closed
forms, so they can gate the analytic implementations.
"""
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

I3 = np.eye(3)


class DoubleIntegrator:
    """F = [v; 0]; minimum-energy costs have textbook closed forms."""

    def field(self, x):
        return np.concatenate([x[3:6], np.zeros(3)])

    def jacobian(self, x):
        jac = np.zeros((6, 6))
        jac[0:3, 3:6] = I3
        return jac


class HarmonicOscillator:
    """Three uncoupled unit-frequency oscillators; period 2*pi exactly."""

    period = 2.0 * np.pi

    def field(self, x):
        return np.concatenate([x[3:6], -x[0:3]])

    def jacobian(self, x):
        jac = np.zeros((6, 6))
        jac[0:3, 3:6] = I3
        jac[3:6, 0:3] = -I3
        return jac


def finite_difference_jacobian(func, x, h=1e-6):
    """Central-difference Jacobian of a vector map."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(func(x))
    jac = np.empty((f0.size, x.size))
    for j in range(x.size):
        step = np.zeros(x.size)
        step[j] = h
        jac[:, j] = (np.asarray(func(x + step)) - np.asarray(func(x - step))) / (2.0 * h)
    return jac


def collinear_axis_equation(x, mu):
    """Scalar force balance along the x axis for zero-velocity states."""
    return (x - (1.0 - mu) * (x + mu) / abs(x + mu) ** 3
            - mu * (x - 1.0 + mu) / abs(x - 1.0 + mu) ** 3)


def collinear_points(mu):
    """Root-find the three collinear equilibria; returns [L1, L2, L3] x."""
    g = lambda x: collinear_axis_equation(x, mu)
    l1 = brentq(g, 0.5, 1.0 - mu - 1e-4, xtol=1e-15, rtol=8.9e-16)
    l2 = brentq(g, 1.0 - mu + 1e-4, 2.0, xtol=1e-15, rtol=8.9e-16)
    l3 = brentq(g, -2.0, -mu - 1e-4, xtol=1e-15, rtol=8.9e-16)
    return [l1, l2, l3]


def propagate_stm6_oracle(orbit, rtol=1e-13, atol=1e-13):
    """State-only 6x6 monodromy via scipy's own driver and the plain
    variational equations; independent of the augmented 12x12 path."""
    from haloreach import cr3bp_field, cr3bp_jacobian

    params = orbit.params

    def rhs(_t, z):
        state = z[0:6]
        phi = z[6:42].reshape(6, 6)
        dz = np.empty(42)
        dz[0:6] = cr3bp_field(state, params)
        dz[6:42] = (cr3bp_jacobian(state, params) @ phi).reshape(36)
        return dz

    z0 = np.concatenate([orbit.initial_state, np.eye(6).reshape(36)])
    sol = solve_ivp(rhs, (0.0, orbit.period), z0, method="DOP853",
                    rtol=rtol, atol=atol, dense_output=False)
    assert sol.success
    return sol.y[6:42, -1].reshape(6, 6)


def mirror_state(state):
    """CR3BP mirror map across the x-z plane (with time reversal)."""
    x, y, z, vx, vy, vz = state
    return np.array([x, -y, z, -vx, vy, -vz])
