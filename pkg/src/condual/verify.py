"""End-to-end verification of the duality relations.

Three checks: the conjugacy between the primal and dual value functions on
finite grids (with an explicit grid-resolution allowance derived from
concavity), the agreement of three independent routes to the critical
initial wealth, and the per-leaf first-order linkage between the optimal
terminal wealth and the marginal conjugate at the dual optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dual import min_support, solve_dual
from .market import MarketModel
from .numbers import INF, NEG_INF
from .primal import primal_feasible, solve_primal
from .utility import UtilityFunction, inverse_marginal

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class ConjugacyRecord:
    kind: str  # "dual-from-primal" | "primal-from-dual"
    point: float
    lhs: object
    rhs: object
    residual: float
    bound: float
    tolerance: float
    boundary: bool  # grid argmax/argmin sat on the edge of the grid
    ok: bool


@dataclass
class DualityReport:
    records: list = field(default_factory=list)
    worst_gap: float = 0.0
    xbar: object = None
    tolerance: float = 0.0

    @property
    def ok(self):
        return all(r.ok for r in self.records)


def verify_conjugacy(market: MarketModel, utility: UtilityFunction,
                     x_grid, y_grid, tol=1e-5) -> DualityReport:
    """Check v(y) ~ sup_x (u(x) - xy) and u(x) ~ inf_y (v(y) + xy) on grids.

    Grid extrema are one-sided approximations of the true conjugates, so
    each verdict allows tol plus a concavity-based resolution bound; a grid
    whose extremum sits on its edge is flagged (the bracket missed the
    optimizer) and fails the verdict.
    """
    if not x_grid or not y_grid:
        raise ValueError("grids must be nonempty")
    xs = [float(x) for x in x_grid]
    ys = [float(y) for y in y_grid]
    ms = min_support(market)
    if ms.xbar != NEG_INF and min(xs) <= float(ms.xbar):
        raise ValueError("every x grid point must exceed the critical "
                         f"initial wealth {ms.xbar}")

    u_vals = [solve_primal(market, utility, x).value for x in xs]
    v_vals = [solve_dual(market, utility, y).value for y in ys]
    report = DualityReport(xbar=ms.xbar, tolerance=tol)

    for y, v in zip(ys, v_vals):
        candidates = [u - x * y for u, x in zip(u_vals, xs)]
        k = max(range(len(xs)), key=lambda i: candidates[i])
        target = candidates[k]
        bound, boundary = _overshoot_bound(xs, candidates, k)
        residual = float(v) - float(target)  # in [0 - eps, bound + eps]
        ok = -tol <= residual <= tol + bound
        report.records.append(ConjugacyRecord(
            "dual-from-primal", y, v, target, abs(residual), bound, tol,
            boundary, ok))

    for x, u in zip(xs, u_vals):
        candidates = [v + x * y for v, y in zip(v_vals, ys)]
        k = min(range(len(ys)), key=lambda i: candidates[i])
        target = candidates[k]
        bound, boundary = _overshoot_bound(ys, [-c for c in candidates], k)
        residual = float(target) - float(u)
        ok = -tol <= residual <= tol + bound
        report.records.append(ConjugacyRecord(
            "primal-from-dual", x, u, target, abs(residual), bound, tol,
            boundary, ok))

    report.worst_gap = max((r.residual - r.bound for r in report.records
                            if r.bound != INF),
                           default=0.0)
    return report


def _overshoot_bound(grid, values, k):
    """(bound, boundary flag) for the grid max of a concave function.

    An interior max gets the adjacent-slope bound; a max on the grid edge
    cannot be bounded from grid data at all (the function may keep rising
    past the edge), so the bound is infinite, the point is flagged, and
    only the lower-side check remains meaningful there.
    """
    if len(grid) < 2:
        return 0.0, False
    if k in (0, len(grid) - 1):
        return INF, True
    return _concave_overshoot(grid, values, k), False


def _concave_overshoot(grid, values, k):
    """How far the max of a concave function interpolating the grid values
    can exceed the value at the interior grid-argmax k.

    By concavity the function lies below the line through the argmax with
    the incoming slope on the right interval, and below the line with the
    outgoing slope on the left interval; both slopes are divided
    differences of the given values.
    """
    if len(grid) < 2 or values[k] in (INF, NEG_INF):
        return 0.0
    bound = 0.0
    if 0 < k and values[k - 1] not in (INF, NEG_INF) and k + 1 < len(grid):
        s_in = (values[k] - values[k - 1]) / (grid[k] - grid[k - 1])
        bound = max(bound, s_in * (grid[k + 1] - grid[k]))
    if k + 1 < len(grid) and values[k + 1] not in (INF, NEG_INF) and k > 0:
        s_out = (values[k + 1] - values[k]) / (grid[k + 1] - grid[k])
        bound = max(bound, -s_out * (grid[k] - grid[k - 1]))
    return max(bound, 0.0)


@dataclass
class XbarReport:
    from_support: object
    from_essinf: object
    from_bisection: float
    spread: float
    tolerance: float
    ok: bool


def verify_xbar(market: MarketModel, tol=1e-6,
                bracket=(-100.0, 100.0)) -> XbarReport:
    """Three independent routes to the critical initial wealth: the support
    LP, the worst-leaf LP, and bisection on primal feasibility.

    An infinite critical wealth (constrained arbitrage pushes it to -inf,
    an empty admissible class to +inf) counts as agreement when the
    bisection route pins the matching bracket edge, since bisection can
    only certify "at or beyond the bracket".
    """
    ms = min_support(market)
    a = ms.xbar
    if ms.sup_essinf == INF:
        b = NEG_INF
    elif ms.sup_essinf == NEG_INF:
        b = INF
    else:
        b = -ms.sup_essinf
    lo, hi = bracket
    if primal_feasible(market, lo):
        c = lo  # the boundary is below the bracket: report its edge
    elif not primal_feasible(market, hi):
        c = hi
    else:
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if primal_feasible(market, mid):
                hi = mid
            else:
                lo = mid
        c = hi
    if a == NEG_INF or b == NEG_INF:
        ok = a == b and c == bracket[0]
        return XbarReport(a, b, c, 0.0 if ok else INF, tol, ok)
    if a == INF or b == INF:
        ok = a == b and c == bracket[1]
        return XbarReport(a, b, c, 0.0 if ok else INF, tol, ok)
    vals = [float(a), float(b), c]
    spread = max(vals) - min(vals)
    return XbarReport(a, b, c, spread, tol, spread <= tol)


@dataclass
class LinkReport:
    y_hat: float
    residuals: tuple
    max_residual: float
    attained: bool
    tolerance: float
    ok: bool | None  # None when the verifier abstains (dual not attained)


def verify_primal_dual_link(market: MarketModel, utility: UtilityFunction,
                            x, tol=1e-5, solver_tol=None) -> LinkReport:
    """Per-leaf check of optimal terminal wealth against the marginal
    conjugate at the dual optimizer.

    Applies to smooth, strictly concave utilities above the critical
    wealth; the conjugate slope then inverts the marginal utility, and the
    optimal terminal wealth must equal that inversion at the scaled dual
    density, leaf by leaf.
    """
    if not (utility.smooth and utility.strictly_concave):
        raise ValueError("the first-order linkage needs a smooth, strictly "
                         "concave utility family")
    solver_tol = tol * 1e-1 if solver_tol is None else solver_tol
    primal = solve_primal(market, utility, x, tol=solver_tol)
    if primal.status != "optimal":
        raise ValueError(f"primal solve did not converge: {primal.status}")

    # bracket for the conjugate point from the marginal utilities of the
    # achieved terminal wealth, then golden-section on y -> v(y) + x y
    marginals = [utility.marginal(max(float(w), 1e-12))[1]
                 for w in primal.terminal]
    y_lo = 0.5 * min(marginals)
    y_hi = 2.0 * max(marginals)

    def phi(y):
        sol = solve_dual(market, utility, y, tol=solver_tol)
        return float(sol.value) + float(x) * y

    a, b = y_lo, y_hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    while b - a > solver_tol * max(1.0, y_hi):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = phi(d)
    y_hat = c if fc <= fd else d

    dual = solve_dual(market, utility, y_hat, tol=solver_tol)
    if not dual.attained:
        return LinkReport(y_hat, (), INF, False, tol, None)
    residuals = tuple(
        abs(float(w) - inverse_marginal(utility, max(float(z), 1e-300)))
        for w, z in zip(primal.terminal, dual.measure.densities))
    worst = max(residuals)
    return LinkReport(y_hat, residuals, worst, True, tol, worst <= tol)
