"""Loop phases, their electric/magnetic split, and the canonical paths.

The total phase of a closed spacetime loop is ``oint A.dl - oint phi dt``;
this is the gauge-invariant combination under ``A -> A + grad Lambda``,
``phi -> phi - d_t Lambda``.  The electric part is ``-oint phi dt`` and the
magnetic part ``oint A.dl``.  With these signs the loops built here
reproduce the closed forms of :func:`closed_form_phases`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import FluxonCoreError, PathError, PhaseBreakdown, PolyPath

# Gauss-Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
WEIGHTS_G = np.zeros(15)
WEIGHTS_G[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 400

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")


def _segment_breaks(field, p0, p1):
    """Parameter values in (0, 1) where the segment meets a landmark or
    passes closest to a core."""
    d = p1 - p0
    marks = field.landmarks()
    s = [0.0, 1.0]
    for k, key in enumerate(("t", "x", "y")):
        if d[k] != 0.0:
            for v in marks.get(key, ()):
                s.append((v - p0[k]) / d[k])
    dxy = d[1:]
    n2 = float(dxy @ dxy)
    if n2 > 0.0:
        for cx, cy in field.cores():
            s.append(float((np.array([cx, cy]) - p0[1:]) @ dxy / n2))
    s = np.unique(np.clip(np.asarray(s), 0.0, 1.0))
    return s[np.diff(np.concatenate([[-1.0], s])) > 1e-14]


def _integrand(field, p0, d, s):
    pts = p0[None, :] + s[:, None] * d[None, :]
    phi, ax, ay = field(pts[:, 0], pts[:, 1], pts[:, 2])
    mag = ax * d[1] + ay * d[2]
    ele = -phi * d[0] if d[0] != 0.0 else np.zeros_like(mag)
    return ele, mag


def integrate_segment(field, p0, p1, spec=QuadratureSpec()):
    """Adaptive Gauss-Kronrod integral of the electric and magnetic
    integrands along one straight segment.

    Returns ``(electric, magnetic, error)``.  Intervals are refined in
    batches until each meets its share of the tolerance.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    d = p1 - p0
    breaks = _segment_breaks(field, p0, p1)
    todo = np.column_stack([breaks[:-1], breaks[1:]])
    ele = mag = err = 0.0
    splits = 0
    while len(todo):
        a, b = todo[:, 0], todo[:, 1]
        half = 0.5 * (b - a)
        s = (0.5 * (a + b))[:, None] + half[:, None] * NODES[None, :]
        e_vals, m_vals = _integrand(field, p0, d, s.ravel())
        e_vals = e_vals.reshape(s.shape)
        m_vals = m_vals.reshape(s.shape)
        eK = half * (e_vals @ WEIGHTS_K)
        mK = half * (m_vals @ WEIGHTS_K)
        est = np.abs(eK - half * (e_vals @ WEIGHTS_G)) + np.abs(mK - half * (m_vals @ WEIGHTS_G))
        allowed = np.maximum(spec.abs_tol, spec.rel_tol * (np.abs(eK) + np.abs(mK))) * (b - a)
        done = (est <= allowed) | (half < 1e-15) | (splits >= spec.max_subdivisions)
        ele += float(np.sum(eK[done]))
        mag += float(np.sum(mK[done]))
        err += float(np.sum(est[done]))
        rest = todo[~done]
        mid = 0.5 * (rest[:, 0] + rest[:, 1])
        todo = np.concatenate([
            np.column_stack([rest[:, 0], mid]),
            np.column_stack([mid, rest[:, 1]]),
        ])
        splits += len(rest)
    return ele, mag, err


def _check_cores(field, loop):
    cores = field.cores()
    if not cores:
        return
    radius = field.reg.core_radius
    arr = loop.array[:, 1:]
    for c in cores:
        if min_distance(arr, np.asarray(c)) < radius:
            raise FluxonCoreError("loop enters fluxon core exclusion zone")


def min_distance(poly, point):
    """Smallest distance from ``point`` to a 2D polyline."""
    a, b = poly[:-1], poly[1:]
    ab = b - a
    n2 = np.einsum("ij,ij->i", ab, ab)
    safe = np.where(n2 > 0, n2, 1.0)
    u = np.clip(np.einsum("ij,ij->i", point - a, ab) / safe, 0.0, 1.0)
    u = np.where(n2 > 0, u, 0.0)
    closest = a + u[:, None] * ab
    return float(np.min(np.linalg.norm(closest - point, axis=1)))


def loop_phase(field, loop: PolyPath, spec=QuadratureSpec()) -> PhaseBreakdown:
    """Electric, magnetic and total phase of a closed loop in ``field``."""
    if not loop.closed:
        raise PathError("loop not closed")
    if field.gauge in ("coulomb", "numeric-coulomb"):
        _check_cores(field, loop)
    ele = mag = err = 0.0
    # fixed summation order keeps results reproducible
    for p0, p1 in loop.segments():
        e, m, r = integrate_segment(field, p0, p1, spec)
        ele += e
        mag += m
        err += r
    return PhaseBreakdown(ele, mag, ele + mag, err)


# -- closed forms and canonical loops -----------------------------------------


def _exact_step(u):
    return 0.0 if u < 0 else (0.5 if u == 0 else 1.0)


def closed_form_phases(x, d, cfg):
    """Electric and magnetic phase of the path-1 loop split at ``(x, +-d)``.

    ``theta_e = arctan(x/d) - arctan((x - L)/d)`` and
    ``theta_m = pi [step(x) - step(x - L)] - theta_e``.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    theta_e = math.atan(x / d) - math.atan((x - cfg.L) / d)
    theta_m = math.pi * (_exact_step(x) - _exact_step(x - cfg.L)) - theta_e
    return theta_e, theta_m


def electric_path_loop(x, d, t_interfere, cfg, y_center=0.0, t_split=None):
    """Path 1: packets at ``y_center -+ d`` from ``t_split`` (before the
    first kick) until they rejoin at ``t_interfere``.

    Traversal: forward in time along the lower packet, across at
    ``t_interfere``, back along the upper packet, across at ``t_split``.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    ts = -0.25 * cfg.T if t_split is None else t_split
    lo, hi = y_center - d, y_center + d
    return PolyPath.loop([
        (ts, x, lo),
        (t_interfere, x, lo),
        (t_interfere, x, hi),
        (ts, x, hi),
    ])


def circle_loop(center, radius, t, n=64):
    """Counter-clockwise ``n``-gon in the (x, y) plane at fixed time."""
    ang = 2 * np.pi * np.arange(n) / n
    cx, cy = center
    return PolyPath.loop([(t, cx + radius * np.cos(a), cy + radius * np.sin(a)) for a in ang])


def magnetic_path_loop(which, radius, t_mid, cfg, reg, n=64, margin=None):
    """Path 2/3 loops at fixed ``t_mid``.

    ``which`` is ``left`` / ``right`` (circle of ``radius`` about that
    core), ``both`` (circle about the midpoint clearing both cores by
    ``radius``) or ``neither`` (circle of ``radius`` centred at
    ``x = -1.5 L``). ``t_mid`` must sit at least ``margin`` (default
    ``8 eps_t``) inside ``[0, T]``.
    """
    margin = 8 * reg.eps_t if margin is None else margin
    if not (margin <= t_mid <= cfg.T - margin):
        raise PathError(f"t_mid must lie inside [0, T] with a margin of {margin:g}")
    L = cfg.L
    centers = {
        "left": ((0.0, 0.0), radius),
        "right": ((L, 0.0), radius),
        "both": ((L / 2, 0.0), L / 2 + radius),
        "neither": ((-1.5 * L, 0.0), radius),
    }
    if which not in centers:
        raise ValueError(f"which must be one of {sorted(centers)}")
    center, r = centers[which]
    return circle_loop(center, r, t_mid, n)


def electric_path_phase(x, d, t_interfere, field, spec=QuadratureSpec(), y_center=0.0):
    loop = electric_path_loop(x, d, t_interfere, field.cfg, y_center=y_center)
    return loop_phase(field, loop, spec)


def magnetic_path_phase(which, radius, t_mid, field, spec=QuadratureSpec(), n=64, margin=None):
    if field.cores() and radius <= field.reg.core_radius:
        raise FluxonCoreError("radius must exceed core_radius")
    loop = magnetic_path_loop(which, radius, t_mid, field.cfg, field.reg, n, margin)
    return loop_phase(field, loop, spec)


# -- topology ------------------------------------------------------------------


@dataclass(frozen=True)
class PathClassification:
    sheet_crossings: int
    winding_left: int
    winding_right: int

    @property
    def predicted_phase(self):
        return math.pi * self.sheet_crossings


def winding_number(poly, point):
    """Winding number of a closed 2D polyline about ``point``."""
    v = poly - point
    a, b = v[:-1], v[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = np.einsum("ij,ij->i", a, b)
    return int(round(float(np.sum(np.arctan2(cross, dot))) / (2 * math.pi)))


def classify_path(loop: PolyPath, cfg, reg) -> PathClassification:
    """Signed crossings of the active sheet (y = 0, 0 < x < L, 0 < t < T;
    upward crossings count +1) and windings of the spatial projection about
    the two cores."""
    if not loop.closed:
        raise PathError("loop not closed")
    arr = loop.array
    xy = arr[:, 1:]
    tol = max(reg.eps_x, reg.eps_y)
    for c in ((0.0, 0.0), (cfg.L, 0.0)):
        if min_distance(xy, np.asarray(c)) < tol:
            raise PathError("loop passes within eps of a core")
    crossings = 0
    for p0, p1 in zip(arr[:-1], arr[1:]):
        y0, y1 = p0[2], p1[2]
        # half-open convention: a vertex on y = 0 counts as y >= 0
        up = y0 < 0 <= y1
        down = y1 < 0 <= y0
        if not (up or down):
            continue
        s = y0 / (y0 - y1)
        t, x = p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])
        near_edge = min(abs(x), abs(x - cfg.L)) < 8 * reg.eps_x or min(abs(t), abs(t - cfg.T)) < 8 * reg.eps_t
        inside = 0 < x < cfg.L and 0 < t < cfg.T
        if near_edge and (inside or min(abs(x), abs(x - cfg.L)) < 8 * reg.eps_x):
            if 0 < t < cfg.T or min(abs(t), abs(t - cfg.T)) < 8 * reg.eps_t:
                raise PathError("loop crosses y=0 too close to the edge of the active sheet")
        if inside:
            crossings += 1 if up else -1
    return PathClassification(
        crossings,
        winding_number(xy, np.array([0.0, 0.0])),
        winding_number(xy, np.array([cfg.L, 0.0])),
    )
