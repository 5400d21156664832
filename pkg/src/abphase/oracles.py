"""Independent oracles and the verification suite.

Each check recomputes its reference through a separate code path
(scipy quadrature, closed forms typed out here, or plain differencing) so
that a bug in the module under test cannot cancel against its own oracle.
"""

import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, special

from . import gauges, sources
from .gauge_transform import build_gauge_problem, coulomb_from_temporal, solve_poisson
from .model import PolyPath, RegularizationParams, SpacetimePoint
from .phase import QuadratureSpec, classify_path, closed_form_phases, electric_path_loop, loop_phase, magnetic_path_phase

LIMITS = (1e-1, 1e-2, 1e-3, 1e-4)
# relative finite-difference residual bound at h = eps/20
RESIDUAL_TOL = 1e-2


@dataclass(frozen=True)
class OracleReport:
    name: str
    measured: float
    expected: float
    tolerance: float
    passed: bool
    order: float = float("nan")

    @classmethod
    def compare(cls, name, measured, expected, tolerance, order=float("nan")):
        ok = bool(abs(measured - expected) <= tolerance)
        return cls(name, float(measured), float(expected), float(tolerance), ok, float(order))

    def text(self):
        flag = "PASS" if self.passed else "FAIL"
        order = "" if math.isnan(self.order) else f" order={self.order:.3g}"
        return (
            f"{flag} {self.name}: measured={self.measured!r} expected={self.expected!r}"
            f" tol={self.tolerance!r}{order}"
        )


def reports_csv(reports):
    buf = io.StringIO()
    buf.write("check,measured,expected,tolerance,pass,order\n")
    for r in reports:
        buf.write(
            f"{r.name},{r.measured!r},{r.expected!r},{r.tolerance!r},{str(r.passed).lower()},{r.order!r}\n"
        )
    return buf.getvalue()


def reports_text(reports):
    return "".join(r.text() + "\n" for r in reports)


# -- distributional identities ------------------------------------------------


def _monotone(errors):
    return all(b < a for a, b in zip(errors, errors[1:]))


def _order(errors, limits):
    e, s = np.log(errors[-2:]), np.log(limits[-2:])
    return float((e[0] - e[1]) / (s[0] - s[1]))


def _lorentz_pairing(x, f):
    """``int (1/pi) x/(x^2+y^2) f(y) dy`` via ``y = |x| tan(theta)``."""
    if x == 0.0:
        return 0.0
    val, _ = integrate.quad(lambda th: f(abs(x) * math.tan(th)), -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val / math.pi if x > 0 else -val / math.pi


def _test2d(x, y):
    return math.exp(-x * x - y * y) * (1 + y * x * (1 - x * x))


def _test2d_dx(x, y):
    g = math.exp(-x * x - y * y)
    return g * (-2 * x * (1 + y * x * (1 - x * x)) + y * (1 - 3 * x * x))


def _test2d_dy(x, y):
    g = math.exp(-x * x - y * y)
    return g * (-2 * y * (1 + y * x * (1 - x * x)) + x * (1 - x * x))


def _kernel_pairing(s, df):
    """``-int int g_s(x, y) df(x, y) dx dy`` for ``g_s = s x/(s^2 x^2 + y^2)``.

    The substitution ``y = s|x| tan(theta)`` gives ``g_s dy = sign(x) dtheta``,
    leaving a bounded integrand.
    """

    def inner(x):
        w = s * abs(x)
        if w == 0.0:
            return 0.0
        # split where |y| reaches the scale of the test function
        cuts = [math.atan(k / w) for k in (1.0, 4.0)]
        pts = sorted([-c for c in cuts] + cuts)
        val, _ = integrate.quad(lambda th: df(x, w * math.tan(th)), -math.pi / 2, math.pi / 2, points=pts, limit=200, epsabs=1e-12, epsrel=1e-11)
        return val if x > 0 else -val

    total = 0.0
    for a, b in ((-7.0, 0.0), (0.0, 7.0)):
        val, _ = integrate.quad(inner, a, b, limit=200, epsabs=1e-11, epsrel=1e-10)
        total += val
    return -total


def check_delta_identities(limits=LIMITS):
    """Pair the three limits and the defining identity with smooth test
    functions as the limit parameter shrinks.

    (a) ``(1/pi) x/(x^2+y^2) -> sign(x) delta(y)`` against ``exp(-y^2)``;
    the exact pairing ``exp(x^2) erfc(|x|)`` cross-checks the quadrature.
    (b) ``d_y arctan(x/y) -> -pi sign(x) delta(y)``.
    (c) ``d_x [x/(x^2+y^2)] -> 2 pi delta(x) delta(y)`` and (d)
    ``d_y [x/(x^2+y^2)] -> 0`` on the family ``s x/(s^2 x^2 + y^2)``,
    ``s -> 0``, paired by parts against a 2D test function.
    """
    with warnings.catch_warnings():
        # quadpack's round-off notices near the tiny limits are expected
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _delta_reports(limits)


def _delta_reports(limits):
    f = lambda y: math.exp(-y * y)
    out = []

    vals_a = [_lorentz_pairing(x, f) for x in limits]
    exact_a = [math.exp(x * x) * special.erfc(x) for x in limits]
    quad_gap = max(abs(v - e) for v, e in zip(vals_a, exact_a))
    out.append(OracleReport.compare("delta_a_quadrature_vs_exact", quad_gap, 0.0, 1e-10))
    out.append(_limit_report("delta_a", vals_a, 1.0, limits))
    out.append(OracleReport.compare("delta_a_at_zero", _lorentz_pairing(0.0, f), 0.0, 0.0))

    # d_y arctan(x/y) = -x/(x^2+y^2) off y = 0, negative x side included
    vals_b = [-math.pi * _lorentz_pairing(-x, f) for x in limits]
    out.append(_limit_report("delta_b", vals_b, math.pi, limits))

    vals_c = [_kernel_pairing(s, _test2d_dx) for s in limits]
    out.append(_limit_report("delta_c", vals_c, 2 * math.pi * _test2d(0.0, 0.0), limits))
    vals_d = [_kernel_pairing(s, _test2d_dy) for s in limits]
    out.append(_limit_report("delta_d", vals_d, 0.0, limits))
    return out


def _limit_report(name, values, target, limits):
    errors = [abs(v - target) for v in values]
    order = _order(errors, limits) if min(errors) > 0 else float("inf")
    rep = OracleReport.compare(name, values[-1], target, 1e-3, order)
    if not _monotone(errors):
        rep = replace(rep, passed=False)
    return rep


# -- helpers shared by the suite ----------------------------------------------


def _F_oracle(x, y, L):
    """F from the two-arctan form, valid off y = 0."""
    return 0.5 * (np.arctan(x / y) - np.arctan((x - L) / y))


def _probe_outside(cfg, reg, setup, rng, n=400):
    """Random probe events beyond the 8*eps inflated support of ``setup``."""
    L, T = cfg.L, cfg.T
    et, ex, ey = (8 * e for e in (reg.eps_t, reg.eps_x, reg.eps_y))
    pts = []
    while len(pts) < n:
        t = rng.uniform(-0.5 * T, 1.5 * T)
        if setup == "rhombus":
            x = rng.uniform(-cfg.v * T - L, cfg.v * T + L)
        elif setup == "toroidal":
            x = rng.uniform(0.05 * cfg.R_tor, 2.0 * cfg.R_tor)
        else:
            x = rng.uniform(-L, 2 * L)
        y = rng.uniform(-L, L)
        margin = 0.01 * min(L, T)
        if abs(y) > ey + margin:
            pts.append((t, x, y))
            continue
        if t < -et - margin or t > T + et + margin:
            pts.append((t, x, y))
            continue
        if setup == "rect" and (x < -ex - margin or x > L + ex + margin):
            pts.append((t, x, y))
        elif setup == "rhombus" and abs(x) > cfg.v * min(max(t, 0), max(T - t, 0)) + ex + margin + cfg.v * et:
            pts.append((t, x, y))
        elif setup == "toroidal" and x > cfg.R_tor + ex + margin:
            pts.append((t, x, y))
    return pts


def check_non_radiating(cfg, reg, setup, seed=0, v=None):
    """Max |E|, |B| by central differences of the potential at probes
    outside the inflated support."""
    if v is not None:
        cfg = replace(cfg, v=v)
    field = {
        "rect": gauges.RectTemporalGauge,
        "rhombus": gauges.RhombusTemporalGauge,
        "toroidal": gauges.ToroidalTemporalGauge,
    }[setup](cfg, reg)
    rng = np.random.default_rng(seed)
    h = min(reg.eps_x, reg.eps_y, reg.eps_t) / 10
    worst = 0.0
    for t, x, y in _probe_outside(cfg, reg, setup, rng):
        s = sources.fields_numeric(field, SpacetimePoint(t, x, y), h)
        worst = max(worst, abs(s.Ex), abs(s.Ey), abs(s.Bz))
    name = f"non_radiating_{setup}" + (f"_v{v:g}" if v is not None else "")
    return OracleReport.compare(name, worst, 0.0, 1e-12)


def check_continuity(cfg, reg, setup, solenoids=True):
    """Relative continuity residual and its observed order under h -> h/2."""
    box = sources.SamplingBox.around_support(cfg, reg, setup)
    h0 = min(reg.eps_x, reg.eps_y, reg.eps_t) / 10
    res = []
    for h in (h0, h0 / 2):
        r, scale = sources.continuity_residual(setup, cfg, reg, box, h, solenoids=solenoids)
        res.append(r / scale)
    order = math.log2(res[0] / res[1]) if res[1] > 0 else float("inf")
    name = f"continuity_{setup}" + ("" if solenoids else "_no_solenoids")
    rep = OracleReport.compare(name, res[1], 0.0, RESIDUAL_TOL, order)
    return rep if order >= 1.9 else replace(rep, passed=False)


def check_ampere(cfg, reg, solenoids=True):
    """Temporal-gauge wave equation with the full current; the solenoid
    currents are essential here."""
    box = sources.SamplingBox.around_support(cfg, reg, "rect")
    field = gauges.RectTemporalGauge(cfg, reg)
    h0 = min(reg.eps_x, reg.eps_y, reg.eps_t) / 10
    res = []
    for h in (h0, h0 / 2):
        r, scale = sources.ampere_residual("rect", field, cfg, reg, box, h, solenoids=solenoids)
        res.append(r / scale)
    order = math.log2(res[0] / res[1]) if res[1] > 0 else float("inf")
    return OracleReport.compare("ampere_rect", res[1], 0.0, RESIDUAL_TOL, order)


def check_gauss(cfg, reg, setup):
    box = sources.SamplingBox.around_support(cfg, reg, setup)
    h0 = min(reg.eps_x, reg.eps_y, reg.eps_t) / 10
    res = []
    for h in (h0, h0 / 2):
        r, scale = sources.gauss_residual(setup, cfg, reg, box, h)
        res.append(r / scale)
    order = math.log2(res[0] / res[1]) if res[1] > 0 else float("inf")
    return OracleReport.compare(f"gauss_{setup}", res[1], 0.0, RESIDUAL_TOL, order)


def _d4(f, h):
    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)


def check_gauge_relation(cfg, reg, seed=0, n=50):
    """``A' - A = grad Lambda`` and ``phi' - phi = -d_t Lambda`` with
    ``Lambda = -W(t) F`` by central differences, away from y=0 and cores."""
    rng = np.random.default_rng(seed)
    temporal = gauges.RectTemporalGauge(cfg, reg)
    coulomb = gauges.RectCoulombGauge(cfg, reg)
    L, T = cfg.L, cfg.T
    ey = 8 * reg.eps_y

    def W(t):
        return 0.5 * (special.erfc(-t / (reg.eps_t * math.sqrt(2))) - special.erfc(-(t - T) / (reg.eps_t * math.sqrt(2))))

    lam = lambda t, x, y: -W(t) * _F_oracle(x, y, L)
    worst = 0.0
    for _ in range(n):
        t = rng.uniform(-4 * reg.eps_t, T + 4 * reg.eps_t)
        x = rng.uniform(-0.5 * L, 1.5 * L)
        y = rng.choice([-1, 1]) * rng.uniform(max(ey, 0.1 * L), L)
        h = 1e-3 * L
        ht = 1e-2 * reg.eps_t
        d_x = _d4(lambda s: lam(t, x + s, y), h)
        d_y = _d4(lambda s: lam(t, x, y + s), h)
        d_t = _d4(lambda s: lam(t + s, x, y), ht)
        p0, ax0, ay0 = temporal(t, x, y)
        p1, ax1, ay1 = coulomb(t, x, y)
        scale = max(abs(d_x), abs(d_y), abs(d_t), 1e-3)
        err = max(abs(ax1 - ax0 - d_x), abs(ay1 - ay0 - d_y), abs(p1 - p0 + d_t)) / scale
        worst = max(worst, err)
    return OracleReport.compare("gauge_relation", worst, 0.0, 1e-6)


def poisson_errors(cfg, reg, sizes, domain=None, exclude=4.0):
    """Relative L2 error of the solved gauge function against ``-F`` on
    nodes with ``|y| >= exclude * eps_y``, one entry per grid size."""
    L = cfg.L
    domain = domain or (-0.5 * L, 1.5 * L, -L, L)
    base = gauges.RectTemporalGauge(cfg, reg)
    errors = []
    for n in sizes:
        problem = build_gauge_problem(base, n=(n, n), domain=domain)
        sol = solve_poisson(problem, method="multigrid")
        X, Y = np.meshgrid(problem.x, problem.y, indexing="ij")
        mask = np.abs(Y) >= exclude * reg.eps_y
        exact = -_F_oracle(X[mask], Y[mask], L)
        errors.append(float(np.linalg.norm(sol.values[mask] - exact) / np.linalg.norm(exact)))
    return errors


def check_poisson(cfg, reg):
    err = poisson_errors(cfg, reg, [257])[0]
    return OracleReport.compare("poisson_vs_analytic", err, 0.0, 1e-3)


def check_poisson_order(cfg):
    """Second-order convergence, measured where the smoothed source no
    longer differs from the singular one (|y| >= 8 eps)."""
    e = cfg.L / 50
    reg = RegularizationParams(e, e, e, 3 * e)
    errs = poisson_errors(cfg, reg, [129, 257, 513], exclude=8.0)
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    rep = OracleReport.compare("poisson_order", ratios[-1], 4.0, 0.5, math.log2(ratios[-1]))
    return rep if abs(ratios[0] - 4.0) <= 0.5 else replace(rep, passed=False)


# -- loop batteries ------------------------------------------------------------


def random_loops(cfg, reg, rng, n=12):
    """Rectangles in the (t, y) plane and circles in the (x, y) plane kept
    clear of the cores and inside the default numerical gauge grid."""
    L, T = cfg.L, cfg.T
    clear = 3 * reg.core_radius
    loops = []
    while len(loops) < n:
        if len(loops) % 2 == 0:
            x = rng.uniform(-0.4 * L, 1.4 * L)
            if min(abs(x), abs(x - L)) < clear:
                continue
            # legs outside the smeared sheet, where every gauge sees the sharp limit
            leg = max(0.1 * L, 10 * reg.eps_y)
            y1, y2 = rng.uniform(-0.4 * L, -leg), rng.uniform(leg, 0.4 * L)
            t1, t2 = rng.uniform(-0.3 * T, -0.1 * T), rng.uniform(0.1 * T, 1.4 * T)
            loops.append(PolyPath.loop([(t1, x, y1), (t2, x, y1), (t2, x, y2), (t1, x, y2)]))
        else:
            cx, cy = rng.uniform(-0.25 * L, 1.25 * L), rng.uniform(-0.15 * L, 0.15 * L)
            r = rng.uniform(0.05 * L, 0.25 * L)
            t = rng.uniform(8 * reg.eps_t, T - 8 * reg.eps_t)
            if any(abs(math.hypot(cx - c, cy) - r) < clear for c in (0.0, L)):
                continue
            if cx - r < -0.45 * L or cx + r > 1.45 * L or abs(cy) + r > 0.45 * L:
                continue
            ang = 2 * np.pi * np.arange(48) / 48
            loops.append(PolyPath.loop([(t, cx + r * np.cos(a), cy + r * np.sin(a)) for a in ang]))
    return loops


def check_gauge_invariance(cfg, reg, spec, seed, numeric=None):
    rng = np.random.default_rng(seed)
    loops = random_loops(cfg, reg, rng)
    temporal = gauges.RectTemporalGauge(cfg, reg)
    coulomb = gauges.RectCoulombGauge(cfg, reg)
    numeric = numeric or coulomb_from_temporal(cfg, reg)
    d_c = d_n = 0.0
    for loop in loops:
        a = loop_phase(temporal, loop, spec).theta_total
        d_c = max(d_c, abs(loop_phase(coulomb, loop, spec).theta_total - a))
        d_n = max(d_n, abs(loop_phase(numeric, loop, spec).theta_total - a))
    return [
        OracleReport.compare("gauge_invariance_coulomb", d_c, 0.0, 1e-6),
        OracleReport.compare("gauge_invariance_numeric", d_n, 0.0, 1e-3),
    ]


def check_split_sweep(cfg, reg, spec, n=20):
    """Quadrature on the Coulomb field against the closed forms over an
    ``n x n`` grid of split positions and separations."""
    coulomb = gauges.RectCoulombGauge(cfg, reg)
    L, T = cfg.L, cfg.T
    xs = np.linspace(-L, 2 * L, n)
    ds = np.linspace(L / 100, L, n)
    worst = worst_sum = 0.0
    for x in xs:
        for d in ds:
            if min(abs(x), abs(x - L)) < reg.core_radius and d < reg.core_radius:
                continue
            # x on an edge: the closed form is half-quantized there
            if x in (0.0, L):
                continue
            ph = loop_phase(coulomb, electric_path_loop(x, d, T / 2, cfg), spec)
            te, tm = closed_form_phases(x, d, cfg)
            worst = max(worst, abs(ph.theta_e - te), abs(ph.theta_m - tm))
            target = math.pi if 0 < x < L else 0.0
            worst_sum = max(worst_sum, abs(ph.theta_total - target))
    return [
        OracleReport.compare("split_closed_form", worst, 0.0, 1e-5),
        OracleReport.compare("split_sum_rule", worst_sum, 0.0, 1e-6),
    ]


def disk_flux(cfg, reg, center, radius=None, t=None):
    """Flux of B_z through a disk by 2D polar quadrature."""
    radius = radius or 8 * reg.eps_max
    t = cfg.T / 2 if t is None else t
    cx, cy = center

    def integrand(r, th):
        _, _, bz = sources.rect_fields(t, cx + r * math.cos(th), cy + r * math.sin(th), cfg, reg)
        return float(bz) * r

    val, _ = integrate.dblquad(integrand, 0.0, 2 * math.pi, 0.0, radius, epsabs=1e-12, epsrel=1e-11)
    return val


def check_flux(cfg, reg, spec):
    coulomb = gauges.RectCoulombGauge(cfg, reg)
    both = magnetic_path_phase("both", cfg.L / 4, cfg.T / 2, coulomb, spec).theta_total
    return [
        OracleReport.compare("flux_left", disk_flux(cfg, reg, (0.0, 0.0)), math.pi, 1e-6),
        OracleReport.compare("flux_right", disk_flux(cfg, reg, (cfg.L, 0.0)), -math.pi, 1e-6),
        OracleReport.compare("flux_path3", both, 0.0, 1e-6),
    ]


def check_deformation(cfg, reg, spec, seed, n=10):
    """Random polygonal deformations of the path-1 loop share its
    classification and its total phase."""
    rng = np.random.default_rng(seed + 1)
    L, T = cfg.L, cfg.T
    temporal = gauges.RectTemporalGauge(cfg, reg)
    base_loop = electric_path_loop(L / 2, L / 4, T / 2, cfg)
    base_cls = classify_path(base_loop, cfg, reg)
    base = loop_phase(temporal, base_loop, spec).theta_total
    leg = max(0.1 * L, 10 * reg.eps_y)
    worst = 0.0
    ok_cls = True
    for _ in range(n):
        k = 4
        ts = np.sort(rng.uniform(-0.2 * T, 0.45 * T, k))
        lower = [(t, rng.uniform(0.2 * L, 0.8 * L), rng.uniform(-0.4 * L, -leg)) for t in ts]
        upper = [(t, rng.uniform(0.2 * L, 0.8 * L), rng.uniform(leg, 0.4 * L)) for t in ts[::-1]]
        start = (-0.25 * T, L / 2, -L / 4)
        turn = [(T / 2, L / 2, -L / 4), (T / 2, L / 2, L / 4)]
        loop = PolyPath.loop([start] + lower + turn + upper + [(-0.25 * T, L / 2, L / 4)])
        ok_cls &= classify_path(loop, cfg, reg) == base_cls
        worst = max(worst, abs(loop_phase(temporal, loop, spec).theta_total - base))
    rep = OracleReport.compare("deformation_invariance", worst, 0.0, 1e-6)
    return rep if ok_cls else replace(rep, passed=False)


def check_eps_convergence(cfg, reg, spec):
    """Quantization error of a crossing loop at ``x = 2 eps`` shrinks as
    eps is halved."""
    x = 2 * reg.eps_x
    errors = []
    for k in (1, 2):
        r = RegularizationParams(reg.eps_x / k, reg.eps_y / k, reg.eps_t / k, reg.core_radius / k)
        ph = loop_phase(gauges.RectTemporalGauge(cfg, r), electric_path_loop(x, cfg.L / 4, cfg.T / 2, cfg), spec)
        errors.append(abs(ph.theta_total - math.pi))
    order = math.log2(errors[0] / errors[1]) if errors[1] > 0 else float("inf")
    rep = OracleReport.compare("eps_convergence", errors[1], 0.0, errors[0], order)
    return rep if order >= 1 else replace(rep, passed=False)


def run_suite(cfg, reg, spec=QuadratureSpec(rel_tol=1e-9, abs_tol=1e-12), seed=0, threads=1, drop_solenoids=False):
    """Run every check; failures are collected, never raised.  Reports
    are ordered by check name."""
    sol = not drop_solenoids
    jobs = [
        lambda: check_non_radiating(cfg, reg, "rect", seed),
        lambda: check_non_radiating(cfg, reg, "rhombus", seed, v=0.5),
        lambda: check_non_radiating(cfg, reg, "rhombus", seed, v=2.0),
        lambda: check_non_radiating(cfg, reg, "toroidal", seed),
        lambda: check_gauss(cfg, reg, "rect"),
        lambda: check_gauss(cfg, reg, "rhombus"),
        lambda: check_continuity(cfg, reg, "rect", sol),
        lambda: check_continuity(cfg, reg, "rhombus", sol),
        lambda: check_continuity(cfg, reg, "toroidal", sol),
        lambda: check_ampere(cfg, reg, sol),
        lambda: check_gauge_relation(cfg, reg, seed),
        lambda: check_poisson(cfg, reg),
        lambda: check_poisson_order(cfg),
        lambda: check_gauge_invariance(cfg, reg, spec, seed),
        lambda: check_split_sweep(cfg, reg, spec),
        lambda: check_flux(cfg, reg, spec),
        lambda: check_deformation(cfg, reg, spec, seed),
        lambda: check_eps_convergence(cfg, reg, spec),
        check_delta_identities,
    ]
    reports = []

    def run(job):
        try:
            out = job()
        except Exception as exc:  # a crashing check is a failed check
            name = getattr(job, "__name__", "check")
            return [OracleReport(f"{name}_error: {exc}", float("nan"), float("nan"), 0.0, False)]
        return out if isinstance(out, list) else [out]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for out in pool.map(run, jobs):
            reports.extend(out)
    reports.append(OracleReport("seed", float(seed), float(seed), 0.0, True))
    return sorted(reports, key=lambda r: r.name)
