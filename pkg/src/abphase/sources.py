"""Fields, charge/current densities and the source consistency checks.

Every density here follows from the potential through Gauss's law
``div E = 4 pi rho`` and the temporal-gauge wave equation
``lap A - d_tt A - grad div A = -4 pi j``.  Derivatives of the smoothed
kernels are analytic; finite differences are only used by the checks.
"""

import io
import math
from dataclasses import dataclass

import numpy as np

from . import kernels as K
from .gauges import rhombus_profile

SETUPS = ("rect", "rhombus", "toroidal")


@dataclass(frozen=True)
class FieldSample:
    Ex: float
    Ey: float
    Bz: float


@dataclass(frozen=True)
class SourceSample:
    rho: float
    jx: float
    jy: float


# -- rectangular setup -------------------------------------------------------


def _rect_factors(t, x, cfg, reg):
    W = K.window(t, 0.0, cfg.T, reg.eps_t)
    Wd = K.window_d(t, 0.0, cfg.T, reg.eps_t)
    Wdd = K.window_dd(t, 0.0, cfg.T, reg.eps_t)
    X = K.window(x, 0.0, cfg.L, reg.eps_x)
    Xd = K.window_d(x, 0.0, cfg.L, reg.eps_x)
    Xdd = K.window_dd(x, 0.0, cfg.L, reg.eps_x)
    return W, Wd, Wdd, X, Xd, Xdd


def rect_fields(t, x, y, cfg, reg):
    """``(E_x, E_y, B_z)`` of the rectangular temporal potential."""
    W, Wd, _, X, Xd, _ = _rect_factors(t, x, cfg, reg)
    dy = K.delta(y, reg.eps_y)
    Ey = -math.pi * Wd * X * dy
    Bz = math.pi * W * Xd * dy
    return np.zeros_like(Ey), Ey, Bz


def fields_analytic(p, cfg, reg):
    Ex, Ey, Bz = rect_fields(p.t, p.x, p.y, cfg, reg)
    return FieldSample(float(Ex), float(Ey), float(Bz))


def rect_sources(t, x, y, cfg, reg, solenoids=True):
    """Return ``rho, (jc_x, jc_y), (js_x, js_y)`` for the rectangle.

    ``j_c`` is the capacitor current, ``j_s = 1/4 W curl(X' delta(y) z-hat)``
    the solenoid current with the planar curl ``(d_y M, -d_x M)``.
    """
    W, Wd, Wdd, X, Xd, Xdd = _rect_factors(t, x, cfg, reg)
    dy = K.delta(y, reg.eps_y)
    dpy = K.delta_prime(y, reg.eps_y)
    rho = -0.25 * Wd * X * dpy
    jc = (np.zeros_like(rho), 0.25 * Wdd * X * dy)
    if solenoids:
        js = (0.25 * W * Xd * dpy, -0.25 * W * Xdd * dy)
    else:
        js = (np.zeros_like(rho), np.zeros_like(rho))
    return rho, jc, js


def charge_density(p, cfg, reg):
    rho, _, _ = rect_sources(p.t, p.x, p.y, cfg, reg)
    return float(rho)


def current_density(p, cfg, reg):
    """Capacitor and solenoid currents ``(j_c, j_s)`` at ``p``."""
    _, jc, js = rect_sources(p.t, p.x, p.y, cfg, reg)
    return tuple(map(float, jc)), tuple(map(float, js))


# -- rhombus setup -----------------------------------------------------------


def rhombus_fields(t, x, y, cfg, reg):
    d = rhombus_profile(cfg, reg).derivatives(t, x)
    dy = K.delta(y, reg.eps_y)
    Ey = -math.pi * d["t"] * dy
    Bz = math.pi * d["x"] * dy
    return np.zeros_like(Ey), Ey, Bz


def rhombus_sources(t, x, y, cfg, reg, solenoids=True):
    """Sources of the rhombus potential, split like the rectangle's.

    ``j_c`` carries the ``d_tt R`` part, ``j_s = 1/4 curl(d_x R delta(y))``.
    """
    d = rhombus_profile(cfg, reg).derivatives(t, x)
    dy = K.delta(y, reg.eps_y)
    dpy = K.delta_prime(y, reg.eps_y)
    rho = -0.25 * d["t"] * dpy
    jc = (np.zeros_like(rho), 0.25 * d["tt"] * dy)
    if solenoids:
        js = (0.25 * d["x"] * dpy, -0.25 * d["xx"] * dy)
    else:
        js = (np.zeros_like(rho), np.zeros_like(rho))
    return rho, jc, js


def dipole_trajectories(t, x, cfg, reg):
    """Smoothed trajectory densities ``f+, f-`` (electric dipoles) and
    ``g+, g-`` (magnetic dipoles) of the boosted setup."""
    v, T = cfg.v, cfg.T
    ex, et = reg.eps_x, reg.eps_t
    xwin = K.window(x, -v * T / 2, v * T / 2, ex)
    f_plus = (K.delta(v * t - x, ex) + K.delta(v * t + x, ex)) * K.window(t, 0.0, T / 2, et) * xwin
    f_minus = (
        (K.delta(x - v * (t - T), ex) + K.delta(-v * (t - T) - x, ex))
        * K.window(t, T / 2, T, et)
        * xwin
    )
    active = K.window(t, 0.0, T, et)
    g_plus = (K.delta(v * t - x, ex) + K.delta(-v * (t - T) - x, ex)) * active * K.window(
        x, 0.0, v * T / 2, ex
    )
    g_minus = (K.delta(v * t + x, ex) + K.delta(-v * (t - T) + x, ex)) * active * K.window(
        x, -v * T / 2, 0.0, ex
    )
    return f_plus, f_minus, g_plus, g_minus


def dipole_densities(p, cfg, reg, v=None):
    """Charge density and solenoidal current of the boosted setup in
    trajectory form; ``v`` overrides ``cfg.v``.

    Returns ``(rho, (js_x, js_y))``.  The x-derivative needed for the curl is
    taken by a 5-point difference of the smoothed trajectories.
    """
    if v is not None:
        cfg = type(cfg)(L=cfg.L, T=cfg.T, v=v, R_tor=cfg.R_tor)
    t, x, y = p.t, p.x, p.y
    fp, fm, gp, gm = dipole_trajectories(t, x, cfg, reg)
    rho = -(cfg.v / 4) * (fp - fm) * K.delta_prime(y, reg.eps_y)

    def g(xx):
        _, _, a, b = dipole_trajectories(t, xx, cfg, reg)
        return a - b

    h = reg.eps_x / 50
    dg = (g(x - 2 * h) - 8 * g(x - h) + 8 * g(x + h) - g(x + 2 * h)) / (12 * h)
    js_x = -0.25 * (gp - gm) * K.delta_prime(y, reg.eps_y)
    js_y = 0.25 * dg * K.delta(y, reg.eps_y)
    return float(rho), (float(js_x), float(js_y))


# -- toroidal setup ----------------------------------------------------------


def toroidal_fields(t, r, z, cfg, reg):
    """``(E_r, E_z, B_phi)`` of the toroidal potential."""
    W = K.window(t, 0.0, cfg.T, reg.eps_t)
    Wd = K.window_d(t, 0.0, cfg.T, reg.eps_t)
    P = K.step(cfg.R_tor - r, reg.eps_x)
    ring = K.delta(cfg.R_tor - r, reg.eps_x)
    dz = K.delta(z, reg.eps_y)
    Ez = -math.pi * Wd * P * dz
    Bphi = math.pi * W * ring * dz
    return np.zeros_like(Ez), Ez, Bphi


def toroidal_sources(t, r, z, cfg, reg, solenoids=True):
    """Return ``rho, (jc_r, jc_z), (js_r, js_z)`` in cylindrical components;
    ``j_s = 1/4 W curl(delta(R - r) delta(z) phi-hat)``."""
    W = K.window(t, 0.0, cfg.T, reg.eps_t)
    Wd = K.window_d(t, 0.0, cfg.T, reg.eps_t)
    Wdd = K.window_dd(t, 0.0, cfg.T, reg.eps_t)
    s = cfg.R_tor - r
    P = K.step(s, reg.eps_x)
    ring = K.delta(s, reg.eps_x)
    ring_p = K.delta_prime(s, reg.eps_x)
    dz = K.delta(z, reg.eps_y)
    dpz = K.delta_prime(z, reg.eps_y)
    rho = -0.25 * Wd * P * dpz
    jc = (np.zeros_like(rho), 0.25 * Wdd * P * dz)
    if solenoids:
        js = (-0.25 * W * ring * dpz, 0.25 * W * (ring / r - ring_p) * dz)
    else:
        js = (np.zeros_like(rho), np.zeros_like(rho))
    return rho, jc, js


def toroidal_densities(p, cfg, reg):
    rho, _, js = toroidal_sources(p.t, p.r, p.z, cfg, reg)
    return float(rho), tuple(map(float, js))


# -- numerical fields --------------------------------------------------------


def _dstencil(f, h, order):
    if order == 2:
        return (f(h) - f(-h)) / (2 * h)
    if order == 4:
        return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)
    raise ValueError("order must be 2 or 4")


def fields_numeric(field, p, h, order=2):
    """E and B of ``field`` at ``p`` by central differences of step ``h``.

    ``E = -grad phi - d_t A``, ``B_z = d_x A_y - d_y A_x``.
    """
    t, x, y = p.t, p.x, p.y
    dphi_dx = _dstencil(lambda s: field(t, x + s, y)[0], h, order)
    dphi_dy = _dstencil(lambda s: field(t, x, y + s)[0], h, order)
    dAx_dt = _dstencil(lambda s: field(t + s, x, y)[1], h, order)
    dAy_dt = _dstencil(lambda s: field(t + s, x, y)[2], h, order)
    dAy_dx = _dstencil(lambda s: field(t, x + s, y)[2], h, order)
    dAx_dy = _dstencil(lambda s: field(t, x, y + s)[1], h, order)
    return FieldSample(
        float(-dphi_dx - dAx_dt), float(-dphi_dy - dAy_dt), float(dAy_dx - dAx_dy)
    )


# -- sampling lattices and residual checks -----------------------------------


@dataclass(frozen=True)
class SamplingBox:
    """Tensor lattice of sample centres.  For the toroidal setup the second
    and third axes are ``r`` and ``z``."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def mesh(self):
        return np.meshgrid(self.t, self.x, self.y, indexing="ij")

    @classmethod
    def uniform(cls, cfg, n=(7, 61, 41)):
        """Default box ``[-T/4, 5T/4] x [-L/4, 5L/4] x [-L/4, L/4]``."""
        L, T = cfg.L, cfg.T
        return cls(
            np.linspace(-0.25 * T, 1.25 * T, n[0]),
            np.linspace(-0.25 * L, 1.25 * L, n[1]),
            np.linspace(-0.25 * L, 0.25 * L, n[2]),
        )

    @classmethod
    def around_support(cls, cfg, reg, setup="rect", n=9):
        """Lattice clustered on the thin source support of ``setup``."""
        et, ex, ey = reg.eps_t, reg.eps_x, reg.eps_y
        local = np.linspace(-4, 4, n)
        ys = local * ey
        if setup == "rect":
            ts = np.concatenate([local * et, cfg.T + local * et, [cfg.T / 2]])
            xs = np.concatenate([local * ex, cfg.L + local * ex, [cfg.L / 2]])
        elif setup == "rhombus":
            ts = np.linspace(-4 * et, cfg.T + 4 * et, 4 * n + 1)
            half = cfg.v * cfg.T / 2 + 4 * ex
            xs = np.linspace(-half, half, 4 * n + 1)
        elif setup == "toroidal":
            ts = np.concatenate([local * et, cfg.T + local * et, [cfg.T / 2]])
            xs = np.concatenate([cfg.R_tor + local * ex, [cfg.R_tor / 2]])
        else:
            raise ValueError(f"unknown setup {setup!r}")
        return cls(np.sort(ts), np.sort(xs), ys)


def _sources(setup, cfg, reg, solenoids):
    if setup == "rect":
        return lambda t, x, y: rect_sources(t, x, y, cfg, reg, solenoids)
    if setup == "rhombus":
        return lambda t, x, y: rhombus_sources(t, x, y, cfg, reg, solenoids)
    if setup == "toroidal":
        return lambda t, x, y: toroidal_sources(t, x, y, cfg, reg, solenoids)
    raise ValueError(f"unknown setup {setup!r}")


def _total(src):
    rho, jc, js = src
    return rho, jc[0] + js[0], jc[1] + js[1]


def continuity_residual(setup, cfg, reg, box, h, solenoids=True, zero_sources=False):
    """Max-norm of ``div j + d_t rho`` over the lattice, by second-order
    central differences of step ``h``.  Returns ``(residual, scale)`` with
    ``scale`` the max-norm of the ``d_t rho`` term alone."""
    if zero_sources:
        return 0.0, 0.0
    src = _sources(setup, cfg, reg, solenoids)
    t, x, y = box.mesh()

    def total(tt, xx, yy):
        return _total(src(tt, xx, yy))

    drho = (total(t + h, x, y)[0] - total(t - h, x, y)[0]) / (2 * h)
    if setup == "toroidal":
        # (1/r) d_r (r j_r) + d_z j_z
        rjr = lambda rr: rr * total(t, rr, y)[1]
        div = (rjr(x + h) - rjr(x - h)) / (2 * h) / x
    else:
        div = (total(t, x + h, y)[1] - total(t, x - h, y)[1]) / (2 * h)
    div = div + (total(t, x, y + h)[2] - total(t, x, y - h)[2]) / (2 * h)
    res = div + drho
    return float(np.max(np.abs(res))), float(np.max(np.abs(drho)))


def gauss_residual(setup, cfg, reg, box, h):
    """Max-norm of ``div E - 4 pi rho`` with ``div E`` by central differences
    (planar setups).  Returns ``(residual, scale)``."""
    fields = {"rect": rect_fields, "rhombus": rhombus_fields}[setup]
    src = _sources(setup, cfg, reg, True)
    t, x, y = box.mesh()
    divE = (fields(t, x + h, y, cfg, reg)[0] - fields(t, x - h, y, cfg, reg)[0]) / (2 * h)
    divE = divE + (fields(t, x, y + h, cfg, reg)[1] - fields(t, x, y - h, cfg, reg)[1]) / (2 * h)
    four_pi_rho = 4 * math.pi * src(t, x, y)[0]
    return float(np.max(np.abs(divE - four_pi_rho))), float(np.max(np.abs(four_pi_rho)))


def ampere_residual(setup, field, cfg, reg, box, h, solenoids=True):
    """Max-norm of ``lap A - d_tt A - grad div A + 4 pi j`` for a temporal
    potential with only a y-component, by central differences.

    Returns ``(residual, scale)``; ``scale`` is the max-norm of ``4 pi j``.
    """
    src = _sources(setup, cfg, reg, solenoids)
    t, x, y = box.mesh()
    A = lambda tt, xx, yy: field(tt, xx, yy)[2]
    a0 = A(t, x, y)
    d2x = (A(t, x + h, y) - 2 * a0 + A(t, x - h, y)) / h**2
    d2t = (A(t + h, x, y) - 2 * a0 + A(t - h, x, y)) / h**2
    dxy = (
        A(t, x + h, y + h) - A(t, x + h, y - h) - A(t, x - h, y + h) + A(t, x - h, y - h)
    ) / (4 * h * h)
    _, jx, jy = _total(src(t, x, y))
    rx = -dxy + 4 * math.pi * jx
    ry = d2x - d2t + 4 * math.pi * jy
    res = max(np.max(np.abs(rx)), np.max(np.abs(ry)))
    scale = max(np.max(np.abs(4 * math.pi * jx)), np.max(np.abs(4 * math.pi * jy)))
    return float(res), float(scale)


def grid_csv(setup, cfg, reg, box, solenoids=True):
    """CSV text ``t,x,y,Ex,Ey,Bz,rho,jx,jy`` row-major over ``box``.

    For the toroidal setup the columns hold ``(t, r, z, E_r, E_z, B_phi,
    rho, j_r, j_z)``.
    """
    fields = {"rect": rect_fields, "rhombus": rhombus_fields, "toroidal": toroidal_fields}[setup]
    t, x, y = box.mesh()
    f = fields(t, x, y, cfg, reg)
    rho, jx, jy = _total(_sources(setup, cfg, reg, solenoids)(t, x, y))
    cols = [t, x, y, f[0], f[1], f[2], rho, jx, jy]
    buf = io.StringIO()
    buf.write("t,x,y,Ex,Ey,Bz,rho,jx,jy\n")
    flat = [np.broadcast_to(c, t.shape).ravel() for c in cols]
    for row in zip(*flat):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()
