import math

import numpy as np
import pytest
from scipy import integrate

from abphase import kernels as K
from abphase.gauges import RectTemporalGauge
from abphase.gauge_transform import (
    ConvergenceError,
    PoissonProblem,
    build_gauge_problem,
    coulomb_from_temporal,
    divergence_source,
    greens_log,
    lambda_analytic,
    lambda_spatial,
    perimeter_index,
    roundoff_floor,
    solve_poisson,
)
from abphase.model import GridDomainError, RegularizationParams, SpacetimePoint


def test_divergence_source_examples(cfg, reg):
    assert divergence_source(SpacetimePoint(0.5, 0.5, 0.0), cfg, reg) == 0.0
    val = divergence_source(SpacetimePoint(0.5, 0.5, reg.eps_y), cfg, reg)
    assert val < 0
    assert val == pytest.approx(0.25 * K.delta_prime(reg.eps_y, reg.eps_y), rel=1e-14)
    assert divergence_source(SpacetimePoint(2.0, 0.5, 0.001), cfg, reg) == 0.0


def test_greens_log():
    assert greens_log((1.0, 0.0), (0.0, 0.0)) == 0.0
    assert greens_log((math.e, 0.0), (0.0, 0.0)) == pytest.approx(-2.0, abs=1e-15)
    with pytest.raises(ValueError):
        greens_log((0.3, 0.2), (0.3, 0.2))
    h, p = 1e-3, (0.7, -0.4)
    lap = sum(greens_log((p[0] + a, p[1] + b), (0, 0)) for a, b in ((h, 0), (-h, 0), (0, h), (0, -h)))
    lap = (lap - 4 * greens_log(p, (0, 0))) / h**2
    assert abs(lap) < 1e-4


def test_lambda_analytic_examples(cfg, reg):
    # Lambda = -W F: the sign that solves lap Lambda = -div A
    assert lambda_analytic(SpacetimePoint(0.5, 0.5, 0.5), cfg, reg) == pytest.approx(-math.pi / 4, abs=1e-15)
    assert lambda_analytic(SpacetimePoint(2.0, 0.3, 0.2), cfg, reg) == 0.0


def test_lambda_matches_green_quadrature(cfg, reg):
    # Lambda(p) = int G(p, p') C(p') dA' with G = -2 ln r and C = div A / (4 pi)
    p = (0.5, 0.5)
    ex, ey = 8 * reg.eps_x, 8 * reg.eps_y

    def integrand(yp, xp):
        c = 0.25 * K.window(xp, 0.0, 1.0, reg.eps_x) * K.delta_prime(yp, reg.eps_y)
        return c * greens_log(p, (xp, yp))

    val, _ = integrate.dblquad(integrand, -ex, 1.0 + ex, -ey, ey, epsabs=1e-9, epsrel=1e-9)
    assert val == pytest.approx(lambda_analytic(SpacetimePoint(0.5, *p), cfg, reg), abs=1e-4)


def test_perimeter_index_covers_boundary_once():
    ii, jj = perimeter_index(5, 4)
    pairs = set(zip(ii.tolist(), jj.tolist()))
    assert len(pairs) == len(ii) == 2 * 5 + 2 * 2
    assert all(i in (0, 4) or j in (0, 3) for i, j in pairs)


def test_problem_validation():
    x = np.linspace(0, 1, 5)
    with pytest.raises(ValueError, match="uniform"):
        PoissonProblem(x, np.linspace(0, 2, 5), np.zeros((5, 5)), np.zeros(16))
    with pytest.raises(ValueError, match="boundary"):
        PoissonProblem(x, x, np.zeros((5, 5)), np.zeros(3))


def _manufactured(n):
    # u = sin(pi x) sin(pi y) on the unit square: lap u = -2 pi^2 u = -4 pi C
    x = np.linspace(0, 1, n)
    exact = lambda X, Y: np.sin(np.pi * X) * np.sin(np.pi * Y)
    prob = PoissonProblem.from_functions(x, x, lambda X, Y: 0.5 * np.pi * exact(X, Y), lambda X, Y: 0 * X)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return prob, exact(X, Y)


@pytest.mark.parametrize("method", ["sor", "multigrid"])
def test_poisson_second_order(method):
    errs = []
    for n in (17, 33, 65):
        prob, exact = _manufactured(n)
        sol = solve_poisson(prob, method=method, tol=1e-11)
        assert sol.report.residual <= max(1e-11, roundoff_floor(sol.values, prob.h))
        errs.append(np.max(np.abs(sol.values - exact)))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.8 < r < 4.2 for r in ratios)


def test_sor_and_multigrid_agree():
    prob, _ = _manufactured(33)
    a = solve_poisson(prob, method="sor", tol=1e-12).values
    b = solve_poisson(prob, method="multigrid", tol=1e-12).values
    assert np.max(np.abs(a - b)) < 1e-12


def test_solver_is_deterministic():
    prob, _ = _manufactured(33)
    a = solve_poisson(prob, method="sor")
    b = solve_poisson(prob, method="sor")
    assert np.array_equal(a.values, b.values) and a.report.iterations == b.report.iterations


def test_convergence_error():
    prob, _ = _manufactured(65)
    with pytest.raises(ConvergenceError) as info:
        solve_poisson(prob, method="sor", max_iter=10)
    assert info.value.iterations <= 10 and info.value.residual > 1e-10


def test_gauge_function_vs_analytic(cfg, reg):
    prob = build_gauge_problem(RectTemporalGauge(cfg, reg), n=(257, 257), domain=(-0.5, 1.5, -1.0, 1.0))
    sol = solve_poisson(prob, method="multigrid")
    X, Y = np.meshgrid(prob.x, prob.y, indexing="ij")
    mask = np.abs(Y) >= 4 * reg.eps_y
    exact = lambda_spatial(X, Y, cfg)[mask]
    assert np.linalg.norm(sol.values[mask] - exact) / np.linalg.norm(exact) < 1e-3


def test_exports(cfg, reg):
    prob = build_gauge_problem(RectTemporalGauge(cfg, reg), n=(17, 9))
    sol = solve_poisson(prob, method="sor")
    lines = sol.csv().splitlines()
    assert lines[0] == "x,y,lambda" and len(lines) == 1 + 17 * 9
    text = sol.report.text()
    assert "grid: 17 x 9" in text and "iterations:" in text and "final_residual:" in text
    assert "wall_time" not in text and "wall_time" in sol.report.text(with_time=True)


def test_numeric_coulomb_divergence_second_order(cfg):
    reg = RegularizationParams(0.05, 0.05, 0.05, 0.15)
    norms = []
    for n in ((65, 33), (129, 65), (257, 129)):
        d = coulomb_from_temporal(cfg, reg, n=n).divergence_nodes(0.5)
        norms.append(np.sqrt(np.mean(d**2)))
    assert all(r > 3.3 for r in (norms[0] / norms[1], norms[1] / norms[2]))


def test_numeric_coulomb_outside_grid(cfg, reg):
    g = coulomb_from_temporal(cfg, reg, n=(65, 33))
    with pytest.raises(GridDomainError):
        g(0.5, 3.0, 0.0)
