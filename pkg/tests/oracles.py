"""Independent closed-form references used by the test suite."""

import math

import numpy as np


def two_link_torque(q, qd, qdd, m, lc, l1, inertia, g):
    """Textbook planar two-link dynamics M(q) qdd + C(q, qd) qd + G(q).

    Gravity of magnitude ``g`` acts along -y in the arm's plane.
    """
    m1, m2 = m
    lc1, lc2 = lc
    i1, i2 = inertia
    c2 = math.cos(q[1])
    s2 = math.sin(q[1])
    m11 = m1 * lc1**2 + i1 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * c2) + i2
    m12 = m2 * (lc2**2 + l1 * lc2 * c2) + i2
    m22 = m2 * lc2**2 + i2
    h = m2 * l1 * lc2 * s2
    g1 = (m1 * lc1 + m2 * l1) * g * math.cos(q[0]) + m2 * lc2 * g * math.cos(q[0] + q[1])
    g2 = m2 * lc2 * g * math.cos(q[0] + q[1])
    tau1 = m11 * qdd[0] + m12 * qdd[1] - h * (2 * qd[0] * qd[1] + qd[1] ** 2) + g1
    tau2 = m12 * qdd[0] + m22 * qdd[1] + h * qd[0] ** 2 + g2
    return np.array([tau1, tau2])


def two_link_kinetic(q, qd, m, lc, l1, inertia):
    m1, m2 = m
    lc1, lc2 = lc
    i1, i2 = inertia
    c2 = math.cos(q[1])
    m11 = m1 * lc1**2 + i1 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * c2) + i2
    m12 = m2 * (lc2**2 + l1 * lc2 * c2) + i2
    m22 = m2 * lc2**2 + i2
    return 0.5 * (m11 * qd[0] ** 2 + 2 * m12 * qd[0] * qd[1] + m22 * qd[1] ** 2)


def central_difference_jacobian(fun, q, h=1e-6):
    q = np.asarray(q, dtype=float)
    cols = []
    for j in range(len(q)):
        step = np.zeros_like(q)
        step[j] = h
        cols.append((fun(q + step) - fun(q - step)) / (2 * h))
    return np.stack(cols, axis=1)


def trapezoid(values, dt):
    values = list(values)
    return dt * (sum(values) - 0.5 * (values[0] + values[-1]))
