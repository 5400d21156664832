"""Temporal -> Coulomb gauge transformation.

The gauge function solves ``lap Lambda = -div A = -4 pi C``.  For the
rectangular setup the time dependence factorizes, ``Lambda = W(t) L_s(x, y)``,
so a single spatial Poisson problem is solved and scaled by the window.
"""

import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import kernels as K
from .gauges import F_array, RectTemporalGauge, eval_F, time_window
from .model import GridDomainError, PotentialField


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual, iterations):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


def divergence_source(p, cfg, reg):
    """``C = div A / (4 pi) = 1/4 W(t) X(x) delta'(y)`` at ``p``."""
    return float(time_window(p.t, cfg, reg) * spatial_source(p.x, p.y, cfg, reg))


def spatial_source(x, y, cfg, reg):
    return 0.25 * K.window(x, 0.0, cfg.L, reg.eps_x) * K.delta_prime(y, reg.eps_y)


def greens_log(p, p0):
    """``-2 ln|p - p0|``, the free-space Green's function of
    ``lap G = -4 pi delta``."""
    r = math.hypot(p[0] - p0[0], p[1] - p0[1])
    if r == 0.0:
        raise ValueError("Green's function undefined at coincident points")
    return -2.0 * math.log(r)


def lambda_analytic(p, cfg, reg, side=None):
    """Gauge function ``Lambda = -W(t) F(x, y)`` that carries the temporal
    potential to the Coulomb gauge.  ``side`` selects a one-sided limit on
    the cut as in :func:`eval_F`."""
    w = float(time_window(p.t, cfg, reg))
    return -w * eval_F(p.x, p.y, cfg.L, side=side)


def lambda_spatial(x, y, cfg):
    return -F_array(x, y, cfg.L)


# -- Poisson problem ---------------------------------------------------------


def perimeter_index(nx, ny):
    """Index arrays (i, j) of the perimeter nodes in storage order: bottom
    row, top row, left column, right column (corners once)."""
    i = np.arange(nx)
    j = np.arange(1, ny - 1)
    ii = np.concatenate([i, i, np.zeros_like(j), np.full_like(j, nx - 1)])
    jj = np.concatenate([np.zeros_like(i), np.full_like(i, ny - 1), j, j])
    return ii, jj


@dataclass(frozen=True)
class PoissonProblem:
    """``lap u = -4 pi C`` on a uniform vertex grid with Dirichlet data.

    ``source`` has shape ``(nx, ny)`` (``ij`` indexing); ``boundary`` holds
    the perimeter values in :func:`perimeter_index` order.
    """

    x: np.ndarray
    y: np.ndarray
    source: np.ndarray
    boundary: np.ndarray

    def __post_init__(self):
        nx, ny = len(self.x), len(self.y)
        if nx < 3 or ny < 3:
            raise ValueError("grid needs at least 3 nodes per axis")
        hx, hy = np.diff(self.x), np.diff(self.y)
        h = hx[0]
        if not (np.allclose(hx, h, rtol=1e-9) and np.allclose(hy, h, rtol=1e-9)):
            raise ValueError("grid spacing must be uniform and equal in x and y")
        if self.source.shape != (nx, ny):
            raise ValueError("source shape does not match the grid")
        if len(self.boundary) != 2 * nx + 2 * (ny - 2):
            raise ValueError("boundary length does not match the perimeter")

    @property
    def h(self):
        return float(self.x[1] - self.x[0])

    @property
    def shape(self):
        return (len(self.x), len(self.y))

    @classmethod
    def from_functions(cls, x, y, source_fn, boundary_fn):
        X, Y = np.meshgrid(x, y, indexing="ij")
        ii, jj = perimeter_index(len(x), len(y))
        src = np.asarray(source_fn(X, Y), dtype=float) * np.ones_like(X)
        bnd = np.asarray(boundary_fn(X[ii, jj], Y[ii, jj]), dtype=float) * np.ones(len(ii))
        return cls(np.asarray(x, float), np.asarray(y, float), src, bnd)

    def initial(self):
        u = np.zeros(self.shape)
        ii, jj = perimeter_index(*self.shape)
        u[ii, jj] = self.boundary
        return u


def grid_axes(domain, n):
    """Uniform axes over ``domain = (x0, x1, y0, y1)`` with ``n = (nx, ny)``
    nodes.  The spacing must come out equal in x and y."""
    x0, x1, y0, y1 = domain
    return np.linspace(x0, x1, n[0]), np.linspace(y0, y1, n[1])


@dataclass
class SolverReport:
    method: str
    shape: tuple
    iterations: int
    residual: float
    history: list = field(default_factory=list)
    wall_time: float = 0.0

    def text(self, with_time=False):
        lines = [
            f"method: {self.method}",
            f"grid: {self.shape[0]} x {self.shape[1]}",
            f"iterations: {self.iterations}",
            f"final_residual: {self.residual!r}",
        ]
        if with_time:
            lines.append(f"wall_time_s: {self.wall_time:.3f}")
        return "\n".join(lines) + "\n"


@dataclass
class GaugeFunction:
    """Spatial gauge function on the grid; the full function is
    ``window(t) * values``."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    report: SolverReport

    def csv(self):
        buf = io.StringIO()
        buf.write("x,y,lambda\n")
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        for a, b, c in zip(X.ravel(), Y.ravel(), self.values.ravel()):
            buf.write(f"{float(a)!r},{float(b)!r},{float(c)!r}\n")
        return buf.getvalue()


def _laplacian(u, h):
    return (u[:-2, 1:-1] + u[2:, 1:-1] + u[1:-1, :-2] + u[1:-1, 2:] - 4 * u[1:-1, 1:-1]) / (h * h)


def residual(u, f, h):
    """Interior residual ``f - lap_h u`` (boundary rows are zero)."""
    r = np.zeros_like(u)
    r[1:-1, 1:-1] = f[1:-1, 1:-1] - _laplacian(u, h)
    return r


def _color_masks(shape):
    i, j = np.meshgrid(np.arange(1, shape[0] - 1), np.arange(1, shape[1] - 1), indexing="ij")
    red = (i + j) % 2 == 0
    return red, ~red


def rb_sweep(u, f, h, omega=1.0, masks=None):
    """One red-black SOR sweep in place.  Nodes of one colour only touch
    nodes of the other, so each half-sweep is a race-free array update."""
    red, black = masks if masks is not None else _color_masks(u.shape)
    h2 = h * h
    for mask in (red, black):
        nb = u[:-2, 1:-1] + u[2:, 1:-1] + u[1:-1, :-2] + u[1:-1, 2:]
        gs = (nb - h2 * f[1:-1, 1:-1]) / 4.0
        inner = u[1:-1, 1:-1]
        inner[mask] += omega * (gs[mask] - inner[mask])
    return u


def _restrict(r):
    """Full-weighting restriction on a vertex grid."""
    c = r[::2, ::2].copy()
    c[1:-1, 1:-1] = (
        4 * r[2:-2:2, 2:-2:2]
        + 2 * (r[1:-3:2, 2:-2:2] + r[3:-1:2, 2:-2:2] + r[2:-2:2, 1:-3:2] + r[2:-2:2, 3:-1:2])
        + (r[1:-3:2, 1:-3:2] + r[3:-1:2, 1:-3:2] + r[1:-3:2, 3:-1:2] + r[3:-1:2, 3:-1:2])
    ) / 16.0
    c[0, :] = c[-1, :] = 0.0
    c[:, 0] = c[:, -1] = 0.0
    return c


def _prolong(e, shape):
    """Bilinear interpolation from a coarse to the next fine vertex grid."""
    f = np.zeros(shape)
    f[::2, ::2] = e
    f[1::2, ::2] = 0.5 * (e[:-1, :] + e[1:, :])
    f[::2, 1::2] = 0.5 * (e[:, :-1] + e[:, 1:])
    f[1::2, 1::2] = 0.25 * (e[:-1, :-1] + e[1:, :-1] + e[:-1, 1:] + e[1:, 1:])
    return f


def _coarsenable(shape):
    return all((n - 1) % 2 == 0 and n > 3 for n in shape)


def _vcycle(u, f, h, nu1=2, nu2=2, bottom_sweeps=100):
    masks = _color_masks(u.shape)
    if not _coarsenable(u.shape):
        omega = _sor_omega(u.shape)
        for _ in range(bottom_sweeps):
            rb_sweep(u, f, h, omega, masks)
        return u
    for _ in range(nu1):
        rb_sweep(u, f, h, 1.0, masks)
    rc = _restrict(residual(u, f, h))
    ec = _vcycle(np.zeros(rc.shape), rc, 2 * h, nu1, nu2, bottom_sweeps)
    u += _prolong(ec, u.shape)
    for _ in range(nu2):
        rb_sweep(u, f, h, 1.0, masks)
    return u


def roundoff_floor(u, h):
    """Smallest residual the 5-point stencil can resolve in double precision."""
    return 64 * np.finfo(float).eps * float(np.max(np.abs(u))) / (h * h)


def _sor_omega(shape):
    rho = 0.5 * (math.cos(math.pi / (shape[0] - 1)) + math.cos(math.pi / (shape[1] - 1)))
    return 2.0 / (1.0 + math.sqrt(1.0 - rho * rho))


def solve_poisson(problem, method="sor", tol=1e-10, max_iter=100_000, batch=10):
    """Solve ``lap u = -4 pi C`` with the 5-point stencil.

    ``method`` is ``"sor"`` (red-black SOR, optimal omega; ``iterations``
    counts sweeps, residual checked every ``batch`` sweeps) or
    ``"multigrid"`` (V-cycles with red-black Gauss-Seidel smoothing;
    ``iterations`` counts cycles).  Raises ConvergenceError if the max-norm
    residual is still above ``tol`` after ``max_iter`` iterations.
    """
    start = time.perf_counter()
    h = problem.h
    f = -4 * math.pi * problem.source
    u = problem.initial()
    res = float(np.max(np.abs(residual(u, f, h))))
    history = [res]
    it = 0
    if method == "sor":
        omega = _sor_omega(u.shape)
        masks = _color_masks(u.shape)
        while res > tol and it < max_iter:
            if it and history[-1] >= history[-2] and res <= roundoff_floor(u, h):
                break
            for _ in range(batch):
                rb_sweep(u, f, h, omega, masks)
            it += batch
            res = float(np.max(np.abs(residual(u, f, h))))
            history.append(res)
    elif method == "multigrid":
        if not _coarsenable(u.shape):
            raise ValueError("multigrid needs 2^k + 1 nodes per axis")
        max_cycles = min(max_iter, 200)
        while res > tol and it < max_cycles:
            _vcycle(u, f, h)
            it += 1
            new = float(np.max(np.abs(residual(u, f, h))))
            history.append(new)
            if new >= res and new > tol:
                # stagnated at round-off level
                res = new
                break
            res = new
    else:
        raise ValueError(f"unknown method {method!r}")
    report = SolverReport(method, u.shape, it, res, history, time.perf_counter() - start)
    if res > max(tol, roundoff_floor(u, h)):
        raise ConvergenceError(f"{method} did not reach tolerance {tol:g}", res, it)
    return GaugeFunction(problem.x, problem.y, u, report)


# -- numerical Coulomb gauge -------------------------------------------------


DEFAULT_DOMAIN_FACTORS = (-0.5, 1.5, -0.5, 0.5)


def default_domain(cfg):
    a, b, c, d = DEFAULT_DOMAIN_FACTORS
    return (a * cfg.L, b * cfg.L, c * cfg.L, d * cfg.L)


def build_gauge_problem(field, n=(257, 129), domain=None, t_ref=None, boundary="analytic"):
    """Poisson problem for the spatial gauge function of ``field``.

    The source is ``div A(t_ref) / (4 pi W(t_ref))`` from the field's own
    divergence; ``boundary`` is ``"analytic"`` (``-F``, rectangle only) or
    ``"zero"``.
    """
    cfg = field.cfg
    domain = domain or default_domain(cfg)
    t_ref = cfg.T / 2 if t_ref is None else t_ref
    w = float(field.time_window(t_ref))
    if w == 0.0:
        raise ValueError("t_ref lies outside the active window")
    x, y = grid_axes(domain, n)

    def source(X, Y):
        return field.divergence(t_ref, X, Y) / (4 * math.pi * w)

    if boundary == "analytic":
        bfn = lambda X, Y: lambda_spatial(X, Y, cfg)
    elif boundary == "zero":
        bfn = lambda X, Y: np.zeros_like(X)
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    return PoissonProblem.from_functions(x, y, source, bfn)


class NumericCoulombGauge(PotentialField):
    """``A' = A + W(t) grad_h L_s`` and ``phi' = phi - W'(t) L_s`` built from
    a solved gauge function ``L_s``.

    ``grad_h`` is the central-difference gradient on the grid and ``W'`` a
    central difference across time samples ``t +- tau``; both are
    interpolated off the grid with bicubic splines.
    """

    gauge = "numeric-coulomb"

    def __init__(self, base, solution, tau=None):
        super().__init__(base.cfg, base.reg)
        self.base = base
        self.solution = solution
        self.tau = tau if tau is not None else base.reg.eps_t / 10
        x, y, u = solution.x, solution.y, solution.values
        h = x[1] - x[0]
        gx, gy = np.gradient(u, h, h)
        self._lam = RectBivariateSpline(x, y, u)
        self._gx = RectBivariateSpline(x, y, gx)
        self._gy = RectBivariateSpline(x, y, gy)
        self.domain = (x[0], x[-1], y[0], y[-1])

    def time_window(self, t):
        return self.base.time_window(t)

    def evaluate(self, t, x, y):
        x0, x1, y0, y1 = self.domain
        if np.any((x < x0) | (x > x1) | (y < y0) | (y > y1)):
            raise GridDomainError("point outside the numerical gauge grid")
        phi, ax, ay = self.base(t, x, y)
        w = self.base.time_window(t)
        wd = (self.base.time_window(t + self.tau) - self.base.time_window(t - self.tau)) / (
            2 * self.tau
        )
        lam = self._lam.ev(x, y)
        return (
            phi - wd * lam,
            ax + w * self._gx.ev(x, y),
            ay + w * self._gy.ev(x, y),
        )

    def landmarks(self):
        return self.base.landmarks()

    def cores(self):
        return [(0.0, 0.0), (self.cfg.L, 0.0)]

    def divergence_nodes(self, t):
        """``div A'`` on interior grid nodes by central differences."""
        x, y = self.solution.x, self.solution.y
        X, Y = np.meshgrid(x, y, indexing="ij")
        _, ax, ay = self(t, X, Y)
        h = x[1] - x[0]
        return np.gradient(ax, h, axis=0)[1:-1, 1:-1] + np.gradient(ay, h, axis=1)[1:-1, 1:-1]


def numeric_coulomb_transform(field, problem, method="multigrid", tol=1e-10, max_iter=100_000):
    """Solve ``problem`` and wrap ``field`` in its numerical Coulomb gauge."""
    solution = solve_poisson(problem, method=method, tol=tol, max_iter=max_iter)
    return NumericCoulombGauge(field, solution)


def coulomb_from_temporal(cfg, reg, n=(257, 129), domain=None, method="multigrid", tol=1e-10):
    """Numerical Coulomb gauge of the rectangular temporal potential."""
    base = RectTemporalGauge(cfg, reg)
    problem = build_gauge_problem(base, n=n, domain=domain)
    return numeric_coulomb_transform(base, problem, method=method, tol=tol)
