"""The acceptance suite, shared by ``paralayer verify`` and the test-suite.

Each check returns a :class:`CheckResult`; tolerances and runtime budgets
are fixed here and are not configurable.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import asymptotics, fiber2d, geometry, potentials, spec1d

REFERENCE = {"alpha": 2.0, "k": 1.0, "a": 0.3}


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    runtime: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail} ({self.runtime:.2f} s)"


def _timed(fn: Callable[[], tuple[bool, str, dict]], budget: float | None):
    t0 = time.perf_counter()
    ok, detail, data = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        ok = False
        detail += f"; runtime {dt:.1f} s over budget {budget:g} s"
    return ok, detail, data, dt


# ---------------------------------------------------------------- checks


def hydrogen_levels():
    grid = spec1d.Grid1D(2000.0, 200_000)
    op = spec1d.discretize(lambda s: -1.0 / s, grid)
    ev = spec1d.eigenvalues_below(op, 0.0, 4)
    exact = np.array([-1 / (4 * n * n) for n in range(1, 5)])
    rel = np.abs(ev - exact) / np.abs(exact)
    ok = ev.size == 4 and bool(np.all(rel <= 1e-3))
    return ok, f"max rel error {rel.max():.2e} (tol 1e-3)", {"eigenvalues": ev.tolist(), "rel": rel.tolist()}


def hydrogen_counting():
    E = 1e-4
    L = spec1d.truncation_length(1.0, 1.0, E)
    grid = spec1d.Grid1D.with_spacing(L, 0.1)
    op = spec1d.discretize(lambda s: -1.0 / s, grid)
    n = spec1d.count_below(op, -E)
    asym = spec1d.sl_asymptote(1.0, 1.0, E)
    r = n / asym
    return 0.95 <= r <= 1.05, f"N = {n}, asymptote {asym:.4g}, ratio {r:.4f} (band [0.95, 1.05])", {"count": n, "ratio": r}


def closed_form_geometry():
    prof = geometry.LayerProfile(2.0, 1.0)
    x = np.linspace(0.01, 20.0, 100)
    s = 0.5 * x * np.sqrt(1 + 4 * x * x) + 0.25 * np.arcsinh(2 * x)
    arc = geometry.solve_arc_length(prof, float(s.max()) * 1.01)
    inv_err = float(np.max(np.abs(arc.phi_at(s) - x)))
    arc_t = geometry.solve_arc_length(prof, 1e6)
    curv_t = geometry.curvature_tables(prof, arc_t)
    rep = geometry.appendix_limits(arc_t, curv_t, prof)
    four = ("phi", "dphi", "ddphi", "dddphi")
    e4 = rep.max_rel_error(four)
    eg = rep.max_rel_error(("gamma",))
    ok = inv_err <= 1e-8 and e4 <= 0.02 and eg <= 0.02
    detail = f"inversion {inv_err:.1e} (tol 1e-8), tail limits {e4:.1e}, gamma tail {eg:.1e} (tol 2%)"
    return ok, detail, {"inversion": inv_err, "tail": e4, "gamma_tail": eg}


def flat_box(L: float = 2.0, a: float = 0.3):
    exact = math.pi**2 / (4 * a * a) + math.pi**2 / L**2
    lam = []
    for ns, nu in ((50, 10), (100, 20), (200, 40)):
        lam.append(float(fiber2d.lowest_eigenvalues(fiber2d.assemble_box(L, a, ns, nu), 1)[0]))
    err = abs(lam[-1] - exact) / exact
    slope = math.log2((lam[0] - lam[1]) / (lam[1] - lam[2]))
    ok = err <= 5e-3 and abs(slope - 2) <= 0.3
    return ok, f"200x40 rel error {err:.2e} (tol 5e-3), refinement slope {slope:.3f}", {"lam": lam, "slope": slope}


def _reference_curv(s_max: float):
    return geometry.build(geometry.LayerProfile(2.0, 1.0), s_max, n=4000)


def bracketing(p: float = 5.0):
    a = REFERENCE["a"]
    curv = _reference_curv(100.0)
    # 60 x 20 lattice beyond the cut, nested in the full lattice
    nodes = np.concatenate([np.linspace(0, p, 21)[:-1], np.linspace(p, p + 30, 62)])
    full = fiber2d.StripGrid(nodes, 20, a)
    cut = full.cut(p)
    D = fiber2d.assemble_fiber(curv, fiber2d.FiberSpec(0, fiber2d.DirichletCut()), cut, check=False)
    R = fiber2d.assemble_fiber(curv, fiber2d.FiberSpec(0, fiber2d.RobinCut()), cut, check=False)
    ld = fiber2d.dense_eigenvalues(D)
    lr = fiber2d.dense_eigenvalues(R)[: ld.size]
    order_ok = bool(np.all(lr <= ld + 1e-10 * np.abs(ld)))
    # distances below the threshold where the counts change
    E = [3e-2, 1e-2, 3e-3, 1e-3]
    rep = fiber2d.bracketing_check(curv, 0, p, full, E)
    ok = order_ok and rep.ordering_ok and rep.excess_constant
    detail = (f"lambda_n(Robin) <= lambda_n(Dirichlet) for {ld.size} pairs: {order_ok}; "
              f"N_D {rep.n_dirichlet.tolist()} <= N_full {rep.n_full.tolist()}; "
              f"Robin excess {rep.robin_excess.tolist()}")
    return ok, detail, {"rows": list(rep.rows())}


def band_check(E_list=(1e-2, 1e-3, 1e-4)):
    res = asymptotics.ratio_study(asymptotics.StudyConfig(p=20.0), E_list)
    inside = res.in_band(0.1)
    ok = all(a and b for a, b in inside) and res.trending()
    lo, hi = res.band
    parts = [f"E={r.E:g}: {r.ratio_lower:.3f}/{r.ratio_upper:.3f}" for r in res.rows]
    detail = f"band [{lo - 0.1:.3f}, {hi + 0.1:.3f}]; lower/upper ratios " + ", ".join(parts) + f"; trending {res.trending()}"
    return ok, detail, {"rows": [(r.E, r.count_lower, r.count_upper, r.asymptote) for r in res.rows], "band": res.band}


def identity(seed: int = 0, n: int = 20):
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(n):
        alpha = 1 + 4 * (1 - rng.random())  # (1, 5]
        k = 10 * (1 - rng.random())  # (0, 10]
        E = 10 ** rng.uniform(-8, 0)
        g = asymptotics.g_alpha_k(alpha, k, E)
        s = spec1d.sl_asymptote(2 / alpha, k ** (2 / alpha) / 4, E)
        worst = max(worst, abs(g - s) / abs(s))
    return worst <= 1e-12, f"max rel deviation {worst:.1e} over {n} triples (tol 1e-12)", {"worst": worst}


def mode_scan(m_max: int = 10):
    a = REFERENCE["a"]
    grid = fiber2d.StripGrid.graded(450.0, 16, a, h0=0.05, growth=1.01)
    curv = _reference_curv(500.0)
    scan = fiber2d.nonzero_mode_scan(curv, grid, m_max)
    M = scan.M
    ok = M is not None and M <= 10 and scan.nonincreasing and scan.counts[0] >= 3
    detail = f"counts m=0..{m_max}: {scan.counts.tolist()}, M = {M}, pointwise-positive M = {scan.M_positive}"
    return ok, detail, {"counts": scan.counts.tolist(), "M": M}


def cross_method():
    a = REFERENCE["a"]
    curv = _reference_curv(100.0)
    grid = fiber2d.StripGrid.graded(60.0, 24, a, h0=0.025, growth=1.005)
    t0 = fiber2d.lowest_eigenvalues(fiber2d.assemble_fiber(curv, fiber2d.FiberSpec(0), grid), 3)
    F0 = fiber2d.lowest_eigenvalues(fiber2d.assemble_meridian_weighted(curv, 0, grid), 3)
    rel = np.abs(t0 - F0) / np.abs(F0)
    return bool(np.all(rel <= 0.02)), f"max rel gap {rel.max():.2e} (tol 2e-2); t0 {np.round(t0, 4).tolist()}, F0 {np.round(F0, 4).tolist()}", {"t0": t0.tolist(), "F0": F0.tolist()}


def robin_rank_one(p: float = 20.0):
    a = REFERENCE["a"]
    E = np.logspace(-1, -5, 17)
    beta, c = 1.0, 0.25 / 0.7
    L = spec1d.truncation_length(c, beta, E.min())
    curv = _reference_curv(L + p + 10)
    grid = spec1d.Grid1D.with_spacing(L, 0.1)
    op = spec1d.discretize(lambda t: potentials.potential_q("Upper6", t, p, a, curv), grid)
    rop = spec1d.robin_rank_one(op, potentials.robin_sigma_1d(p, a, curv))
    d = spec1d.count_below_many(rop, -E) - spec1d.count_below_many(op, -E)
    ok = bool(np.all(np.abs(d) <= 1))
    return ok, f"max |dN| = {int(np.abs(d).max())} over E in [1e-5, 1e-1] ({E.size} values)", {"diff": d.tolist()}


CHECKS = [
    (1, "hydrogen levels", hydrogen_levels, 30.0),
    (2, "half-line counting asymptote", hydrogen_counting, 60.0),
    (3, "closed-form geometry", closed_form_geometry, None),
    (4, "flat-strip box eigenvalue", flat_box, None),
    (5, "bracketing order", bracketing, None),
    (6, "ratio band and trend", band_check, 300.0),
    (7, "counting-law identity", identity, None),
    (8, "angular mode scan", mode_scan, None),
    (9, "straightened vs weighted meridian", cross_method, None),
    (10, "rank-one boundary coupling", robin_rank_one, None),
]


def run_check(number: int) -> CheckResult:
    for num, name, fn, budget in CHECKS:
        if num == number:
            try:
                ok, detail, data, dt = _timed(fn, budget)
            except Exception as exc:  # reported as a failure, not a crash
                return CheckResult(num, name, False, f"error: {exc!r}")
            return CheckResult(num, name, ok, detail, dt, data)
    raise KeyError(number)


def run_all(numbers=None, echo=None) -> list[CheckResult]:
    out = []
    for num, *_ in CHECKS:
        if numbers is None or num in numbers:
            res = run_check(num)
            if echo is not None:
                echo(res.line())
            out.append(res)
    return out
