"""Closed-form potentials for the rectangular, rhombus and toroidal setups.

Sign convention
---------------
The Coulomb-gauge potentials here are the gauge transform of the temporal
potential ``A_y = pi W(t) X(x) delta(y)`` by ``Lambda = -W(t) F(x, y)``, which
is the solution of ``lap Lambda = -div A`` (``F`` itself solves
``lap F = +div A``).  Hence ``A' = -W grad F`` and ``phi' = W'(t) F``; the
magnetic flux of ``A'`` around the core at the origin is ``+pi``, matching
the temporal-gauge magnetic field.
"""

import math

import numpy as np

from . import kernels as K
from .model import BranchCutError, FluxonCoreError, PotentialField


def eval_F(x, y, L, side=None):
    """``F(x, y) = (arctan(x/y) - arctan((x-L)/y)) / 2``.

    On ``y == 0`` with ``0 <= x <= L`` the value jumps by pi; pass
    ``side=+1`` or ``side=-1`` for the one-sided limit, otherwise
    BranchCutError is raised.
    """
    x = float(x)
    y = float(y)
    if y == 0.0:
        if 0.0 <= x <= L:
            if side is None:
                raise BranchCutError("F is discontinuous on y=0 for 0<=x<=L; give side=+1/-1")
            y = math.copysign(0.0, side)
        else:
            y = 0.0
    return 0.5 * math.atan2(L * y, y * y + x * (x - L))


def F_array(x, y, L):
    """Vectorized F.  On the cut the mean of the one-sided limits (0) is
    returned, mirroring the step convention step(0) = 1/2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ypos = np.where(y == 0.0, 0.0, y)  # drops the sign of zero
    return 0.5 * np.arctan2(L * ypos, ypos * ypos + x * (x - L))


def grad_F(x, y, L):
    """Classical (off-cut) gradient of F; singular only at the two cores."""
    r0 = x * x + y * y
    r1 = (x - L) ** 2 + y * y
    gx = 0.5 * (y / r0 - y / r1)
    gy = 0.5 * (-x / r0 + (x - L) / r1)
    return gx, gy


def time_window(t, cfg, reg):
    return K.window(t, 0.0, cfg.T, reg.eps_t)


def time_window_d(t, cfg, reg):
    return K.window_d(t, 0.0, cfg.T, reg.eps_t)


class RectTemporalGauge(PotentialField):
    """``phi = 0``, ``A = pi W(t) X(x) delta(y) y-hat`` (regularized)."""

    gauge = "temporal"

    def evaluate(self, t, x, y):
        cfg, reg = self.cfg, self.reg
        ay = (
            math.pi
            * time_window(t, cfg, reg)
            * K.window(x, 0.0, cfg.L, reg.eps_x)
            * K.delta(y, reg.eps_y)
        )
        zero = np.zeros_like(ay)
        return zero, zero, ay

    def time_window(self, t):
        return time_window(t, self.cfg, self.reg)

    def divergence(self, t, x, y):
        cfg, reg = self.cfg, self.reg
        return (
            math.pi
            * time_window(t, cfg, reg)
            * K.window(x, 0.0, cfg.L, reg.eps_x)
            * K.delta_prime(y, reg.eps_y)
        )

    def landmarks(self):
        c, r = self.cfg, self.reg
        ex, ey, et = (K.CUTOFF * e for e in (r.eps_x, r.eps_y, r.eps_t))
        return {
            "t": [-et, 0.0, et, c.T - et, c.T, c.T + et],
            "x": [-ex, 0.0, ex, c.L - ex, c.L, c.L + ex],
            "y": [-ey, 0.0, ey],
        }


def eval_rect_temporal(p, cfg, reg):
    return RectTemporalGauge(cfg, reg).at(p)


class RectCoulombGauge(PotentialField):
    """Closed-form Coulomb-gauge potentials; only time factors are smoothed."""

    gauge = "coulomb"

    def evaluate(self, t, x, y):
        cfg, reg = self.cfg, self.reg
        core_tol = 1e-12 * cfg.L
        if np.any((np.hypot(x, y) <= core_tol) | (np.hypot(x - cfg.L, y) <= core_tol)):
            raise FluxonCoreError("evaluation point on a fluxon core")
        w = time_window(t, cfg, reg)
        wd = time_window_d(t, cfg, reg)
        gx, gy = grad_F(x, y, cfg.L)
        phi = wd * F_array(x, y, cfg.L)
        return phi, -w * gx, -w * gy

    def time_window(self, t):
        return time_window(t, self.cfg, self.reg)

    def divergence(self, t, x, y):
        # divergence-free away from the cores by construction
        return np.zeros(np.broadcast(t, x, y).shape)

    def landmarks(self):
        c, r = self.cfg, self.reg
        et = K.CUTOFF * r.eps_t
        return {"t": [-et, 0.0, et, c.T - et, c.T, c.T + et], "x": [0.0, c.L], "y": [0.0]}

    def cores(self):
        return [(0.0, 0.0), (self.cfg.L, 0.0)]


def eval_rect_coulomb(p, cfg, reg):
    return RectCoulombGauge(cfg, reg).at(p)


class StepProduct:
    """Product of smoothed steps ``prod_i step(a_i t + b_i x + c_i)`` with its
    analytic first and second derivatives in t and x."""

    def __init__(self, a, b, c, eps):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.eps = eps

    def _parts(self, t, x):
        u = [ai * t + bi * x + ci for ai, bi, ci in zip(self.a, self.b, self.c)]
        s = [K.step(ui, self.eps) for ui in u]
        d = [K.delta(ui, self.eps) for ui in u]
        dp = [K.delta_prime(ui, self.eps) for ui in u]
        return s, d, dp

    @staticmethod
    def _prod(factors, skip=()):
        out = 1.0
        for k, f in enumerate(factors):
            if k not in skip:
                out = out * f
        return out

    def value(self, t, x):
        s, _, _ = self._parts(t, x)
        return self._prod(s)

    def derivatives(self, t, x):
        """Return dict with keys R, t, x, tt, xx, tx."""
        s, d, dp = self._parts(t, x)
        n = len(s)
        coef = {"t": self.a, "x": self.b}
        out = {"R": self._prod(s)}
        for key in ("t", "x"):
            c = coef[key]
            out[key] = sum(c[i] * d[i] * self._prod(s, (i,)) for i in range(n))
        for key, (c1, c2) in {"tt": ("t", "t"), "xx": ("x", "x"), "tx": ("t", "x")}.items():
            p, q = coef[c1], coef[c2]
            acc = sum(p[i] * q[i] * dp[i] * self._prod(s, (i,)) for i in range(n))
            for i in range(n):
                for j in range(n):
                    if i != j:
                        acc = acc + p[i] * q[j] * d[i] * d[j] * self._prod(s, (i, j))
            out[key] = acc
        return out


def rhombus_profile(cfg, reg):
    """Step product for the rhombus ``|x| < v min(t, T - t)``."""
    v, T = cfg.v, cfg.T
    # arguments: vt - x, vt + x, x - v(t - T), -v(t - T) - x
    a = [v, v, -v, -v]
    b = [-1.0, 1.0, 1.0, -1.0]
    c = [0.0, 0.0, v * T, v * T]
    return StepProduct(a, b, c, reg.eps_x)


class RhombusTemporalGauge(PotentialField):
    """Boosted variant: ``A_y = pi R(t, x) delta(y)`` on the rhombus."""

    gauge = "temporal"

    def __init__(self, cfg, reg):
        super().__init__(cfg, reg)
        self.profile = rhombus_profile(cfg, reg)

    def evaluate(self, t, x, y):
        ay = math.pi * self.profile.value(t, x) * K.delta(y, self.reg.eps_y)
        zero = np.zeros_like(ay)
        return zero, zero, ay

    def landmarks(self):
        ey = K.CUTOFF * self.reg.eps_y
        return {"t": [0.0, self.cfg.T / 2, self.cfg.T], "x": [0.0], "y": [-ey, 0.0, ey]}


def eval_rhombus_temporal(p, cfg, reg):
    return RhombusTemporalGauge(cfg, reg).at(p)


class ToroidalTemporalGauge(PotentialField):
    """Axisymmetric variant in (t, r, z): ``A_z = pi W(t) step(R - r) delta(z)``.

    The two spatial inputs are (r, z) and the returned components are
    ``(phi, A_r, A_z)``, so loops in a meridional half-plane can be
    integrated exactly like planar ones.
    """

    gauge = "temporal"

    def evaluate(self, t, r, z):
        cfg, reg = self.cfg, self.reg
        az = (
            math.pi
            * time_window(t, cfg, reg)
            * K.step(cfg.R_tor - r, reg.eps_x)
            * K.delta(z, reg.eps_y)
        )
        zero = np.zeros_like(az)
        return zero, zero, az

    def landmarks(self):
        c, r = self.cfg, self.reg
        ex, ey, et = (K.CUTOFF * e for e in (r.eps_x, r.eps_y, r.eps_t))
        return {
            "t": [-et, 0.0, et, c.T - et, c.T, c.T + et],
            "x": [c.R_tor - ex, c.R_tor, c.R_tor + ex],
            "y": [-ey, 0.0, ey],
        }


def eval_toroidal_temporal(p, cfg, reg):
    return ToroidalTemporalGauge(cfg, reg)(p.t, p.r, p.z)
