"""Domain types shared by every other module.

Units are natural throughout (hbar = c = e = 1, unit permittivity and
permeability).  Planar setups live in the reduced (t, x, y) geometry; the
toroidal setup uses (t, r, z).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """A configuration invariant is violated."""


class PathError(ValueError):
    """A path is malformed or unusable for the requested operation."""


class GeometryError(ValueError):
    """A geometric precondition of an evaluation or loop is violated."""


class FluxonCoreError(GeometryError):
    """A point or path comes too close to a fluxon core."""


class GridDomainError(GeometryError):
    """A point lies outside a finite numerical grid."""


class BranchCutError(ValueError):
    """Evaluation requested exactly on the branch cut of F(x, y)."""


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float
    y: float

    def __post_init__(self):
        for name in ("t", "x", "y"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def as_tuple(self):
        return (self.t, self.x, self.y)


@dataclass(frozen=True)
class CylPoint:
    t: float
    r: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.r, self.z)):
            raise ValueError("coordinates must be finite")
        if self.r < 0:
            raise ValueError("r must be non-negative")


@dataclass(frozen=True)
class SetupConfig:
    """Geometry and timing: capacitor length ``L``, active interval ``T``,
    boost speed ``v`` of the rhombus variant and torus radius ``R_tor``."""

    L: float = 1.0
    T: float = 1.0
    v: float = 0.5
    R_tor: float = 1.0


@dataclass(frozen=True)
class RegularizationParams:
    eps_x: float = 0.01
    eps_y: float = 0.01
    eps_t: float = 0.01
    core_radius: float = 0.03

    @property
    def eps_max(self):
        return max(self.eps_x, self.eps_y)


def validate_config(cfg: SetupConfig, reg: RegularizationParams):
    """Return ``(cfg, reg)`` unchanged, or raise ConfigError naming the first
    violated invariant."""
    checks = [
        (cfg.L > 0, "L must be positive"),
        (cfg.T > 0, "T must be positive"),
        (cfg.R_tor > 0, "R_tor must be positive"),
        (cfg.v >= 0, "v must be non-negative"),
        (reg.eps_x > 0, "eps_x must be positive"),
        (reg.eps_y > 0, "eps_y must be positive"),
        (reg.eps_t > 0, "eps_t must be positive"),
        (reg.core_radius > 0, "core_radius must be positive"),
        (reg.eps_x <= cfg.L / 10, "eps_x exceeds L/10"),
        (reg.eps_y <= cfg.L / 10, "eps_y exceeds L/10"),
        (reg.eps_t <= cfg.T / 10, "eps_t exceeds T/10"),
        (reg.core_radius >= 3 * reg.eps_max, "core_radius below 3*max(eps_x, eps_y)"),
    ]
    if not all(math.isfinite(v) for v in _values(cfg, reg)):
        raise ConfigError("configuration values must be finite")
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    return cfg, reg


def _values(cfg, reg):
    return (cfg.L, cfg.T, cfg.v, cfg.R_tor, reg.eps_x, reg.eps_y, reg.eps_t, reg.core_radius)


CONFIG_KEYS = ("L", "T", "v", "R_tor", "eps_x", "eps_y", "eps_t", "core_radius")


def load_config(path):
    """Read a JSON config with keys ``L, T, v, R_tor, eps_x, eps_y, eps_t,
    core_radius``.  Missing keys take the defaults; unknown keys are an error."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        values = {k: float(v) for k, v in data.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config values must be numbers: {exc}") from exc
    cfg = SetupConfig(**{k: values[k] for k in ("L", "T", "v", "R_tor") if k in values})
    reg = RegularizationParams(
        **{k: values[k] for k in ("eps_x", "eps_y", "eps_t", "core_radius") if k in values}
    )
    return validate_config(cfg, reg)


def dump_config(cfg, reg):
    d = {"L": cfg.L, "T": cfg.T, "v": cfg.v, "R_tor": cfg.R_tor}
    d.update(eps_x=reg.eps_x, eps_y=reg.eps_y, eps_t=reg.eps_t, core_radius=reg.core_radius)
    return json.dumps(d, indent=2)


@dataclass(frozen=True)
class PolyPath:
    """Ordered vertices in (t, x, y); a closed path repeats its first vertex
    as its last."""

    vertices: tuple
    closed: bool = False

    def __post_init__(self):
        verts = tuple(
            v if isinstance(v, SpacetimePoint) else SpacetimePoint(*map(float, v))
            for v in self.vertices
        )
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 2:
            raise PathError("a path needs at least two vertices")
        for a, b in zip(verts, verts[1:]):
            if a == b:
                raise PathError("consecutive vertices must be distinct")
        if self.closed and verts[0] != verts[-1]:
            raise PathError("closed path must end at its first vertex")

    @classmethod
    def loop(cls, points):
        """Close ``points`` by appending the first vertex."""
        points = [tuple(map(float, p)) for p in points]
        return cls(tuple(points) + (points[0],), closed=True)

    @property
    def array(self):
        return np.array([v.as_tuple() for v in self.vertices], dtype=float)

    def reversed(self):
        return PolyPath(self.vertices[::-1], closed=self.closed)

    def segments(self):
        arr = self.array
        return list(zip(arr[:-1], arr[1:]))


def path_length(path: PolyPath) -> float:
    """Sum of Euclidean segment lengths in (t, x, y)."""
    arr = path.array
    return float(np.sum(np.linalg.norm(np.diff(arr, axis=0), axis=1)))


def read_path(path) -> PolyPath:
    """Parse a path file: one ``t x y`` vertex per line, optional trailing
    ``closed`` line.  Blank lines and ``#`` comments are ignored."""
    rows = []
    closed = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if closed:
            raise PathError(f"line {lineno}: nothing may follow 'closed'")
        if line.lower() == "closed":
            closed = True
            continue
        parts = line.split()
        if len(parts) != 3:
            raise PathError(f"line {lineno}: expected 't x y'")
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError as exc:
            raise PathError(f"line {lineno}: {exc}") from exc
    if closed and rows and rows[0] != rows[-1]:
        rows.append(rows[0])
    return PolyPath(tuple(rows), closed=closed)


def write_path(path: PolyPath, dest):
    lines = [" ".join(repr(float(c)) for c in v.as_tuple()) for v in path.vertices]
    if path.closed:
        lines.append("closed")
    Path(dest).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class PhaseBreakdown:
    """Electric, magnetic and total loop phase in radians (not reduced mod
    2 pi) with the accumulated quadrature error estimate."""

    theta_e: float
    theta_m: float
    theta_total: float
    quad_error: float = 0.0

    def __neg__(self):
        return PhaseBreakdown(-self.theta_e, -self.theta_m, -self.theta_total, self.quad_error)

    def csv(self):
        head = "theta_e,theta_m,theta_total,quad_error"
        vals = (self.theta_e, self.theta_m, self.theta_total, self.quad_error)
        return head + "\n" + ",".join(repr(float(v)) for v in vals) + "\n"


class PotentialField:
    """Evaluatable four-potential.

    Subclasses implement ``evaluate(t, x, y)`` returning ``(phi, A_x, A_y)``
    arrays broadcast over the inputs.  ``landmarks`` lists coordinate values
    where the integrand changes character, so quadrature can split there.
    """

    gauge = "abstract"

    def __init__(self, cfg: SetupConfig, reg: RegularizationParams):
        self.cfg = cfg
        self.reg = reg

    def evaluate(self, t, x, y):
        raise NotImplementedError

    def __call__(self, t, x, y):
        t, x, y = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (t, x, y)))
        out = self.evaluate(t, x, y)
        return tuple(np.broadcast_to(c, t.shape).astype(float)[()] for c in out)

    def at(self, p):
        return self(p.t, p.x, p.y)

    def landmarks(self):
        return {"t": [], "x": [], "y": []}

    def cores(self):
        """Spatial positions of singular fluxon cores, if any."""
        return []
