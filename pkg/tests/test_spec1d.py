import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paralayer import potentials, spec1d
from paralayer.spec1d import Grid1D, RobinLeft


def coulomb(s):
    return -1.0 / s


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(1.0, 8)
    g = Grid1D(1.0, 99)
    assert g.h == pytest.approx(0.01)
    assert g.nodes[0] == pytest.approx(0.01) and g.nodes[-1] == pytest.approx(0.99)


def test_particle_in_box():
    for n in (100, 200):
        op = spec1d.discretize(lambda s: 0 * s, Grid1D(1.0, n))
        ev = spec1d.eigenvalues_below(op, 20.0, 1)
        err = abs(ev[0] - math.pi**2)
        assert err < 2 * (math.pi**4 / 12) * op.grid.h**2
    assert spec1d.count_below(op, 0.0) == 0
    assert spec1d.eigenvalues_below(op, 0.0, 3).size == 0


def test_nonfinite_potential():
    with pytest.raises(spec1d.DiscretizationError):
        spec1d.discretize(lambda s: np.where(s > 0.5, np.nan, 0.0), Grid1D(1.0, 20))


def test_hydrogen_levels():
    op = spec1d.discretize(coulomb, Grid1D(2000.0, 200_000))
    ev = spec1d.eigenvalues_below(op, 0.0, 4)
    exact = -1 / (4 * np.arange(1, 5) ** 2)
    assert np.all(np.abs(ev - exact) <= 1e-3 * np.abs(exact))
    assert spec1d.count_below(op, -0.01) == 4
    with pytest.raises(ValueError):
        spec1d.eigenvalues_below(op, 0.0, 0)


def test_hydrogen_counting_ratio():
    E = 1e-4
    L = spec1d.truncation_length(1.0, 1.0, E)
    op = spec1d.discretize(coulomb, Grid1D.with_spacing(L, 0.1))
    ratio = spec1d.count_below(op, -E) / spec1d.sl_asymptote(1.0, 1.0, E)
    assert 0.95 <= ratio <= 1.05


def test_truncation_doubling_and_mesh_halving():
    E = 1e-3
    L = spec1d.truncation_length(1.0, 1.0, E)
    counts = {}
    for LL, h in ((L, 0.2), (2 * L, 0.2), (L, 0.1), (L, 0.05)):
        op = spec1d.discretize(coulomb, Grid1D.with_spacing(LL, h))
        counts[(LL, h)] = spec1d.count_below(op, -E)
    assert counts[(L, 0.2)] == counts[(2 * L, 0.2)]
    assert abs(counts[(L, 0.1)] - counts[(L, 0.05)]) <= 1


def test_sl_asymptote_closed_forms():
    for E in (1e-1, 1e-4, 0.37):
        assert spec1d.sl_asymptote(1.0, 1.0, E) == pytest.approx(0.5 / math.sqrt(E), rel=1e-13)
    assert spec1d.sl_asymptote(1.0, 1.0, 1e-4) == pytest.approx(50.0, rel=1e-13)
    assert math.isfinite(spec1d.sl_asymptote(1.999, 1.0, 1e-3))
    for bad in ((2.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 0.0)):
        with pytest.raises(ValueError):
            spec1d.sl_asymptote(*bad)


def _random_op(seed, n):
    rng = np.random.default_rng(seed)
    grid = Grid1D(float(rng.uniform(1, 50)), n)
    vals = rng.normal(0, 5, n)
    return spec1d.discretize(lambda s: vals, grid)


@pytest.mark.parametrize("seed,n", [(0, 16), (1, 100), (2, 700), (3, 2000)])
def test_sturm_matches_dense(seed, n):
    op = _random_op(seed, n)
    ev = np.linalg.eigvalsh(op.dense())
    lo, hi = op.gershgorin()
    xs = np.linspace(lo, hi, 41)
    counts = spec1d.count_below_many(op, xs)
    assert np.array_equal(counts, np.searchsorted(ev, xs, side="left"))
    assert np.all(np.diff(counts) >= 0)


def test_sturm_tie_retry():
    op = spec1d.discretize(lambda s: 0 * s, Grid1D(17.0, 16))
    # 2/h^2 - x with h = 1 makes the first pivot exactly zero at x = 2
    assert spec1d.count_below(op, 2.0) == int(np.sum(np.linalg.eigvalsh(op.dense()) < 2.0))


def test_robin_zero_and_strong():
    op = _random_op(5, 300)
    xs = np.linspace(*op.gershgorin(), 30)
    neumann = spec1d.robin_rank_one(op, 0.0)
    d = spec1d.count_below_many(neumann, xs) - spec1d.count_below_many(op, xs)
    assert np.all((d >= 0) & (d <= 1))
    same = spec1d.robin_rank_one(neumann, 0.0)
    assert np.array_equal(same.diag, neumann.diag)
    box = spec1d.discretize(lambda s: 0 * s, Grid1D(1.0, 200))
    strong = spec1d.robin_rank_one(box, -100.0)
    assert spec1d.count_below(box, 0.0) == 0
    assert spec1d.count_below(strong, 0.0) == 1
    assert np.sum(np.linalg.eigvalsh(strong.dense()) < 0) == 1
    assert isinstance(strong.boundary, RobinLeft)
    # -sigma^2 for the half-line Robin problem; the one-sided boundary is first order in h
    fine = spec1d.robin_rank_one(spec1d.discretize(lambda s: 0 * s, Grid1D(1.0, 20_000)), -100.0)
    assert spec1d.eigenvalues_below(fine, 0.0, 1)[0] == pytest.approx(-1e4, rel=0.01)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), sigma=st.floats(-1e3, 1e3))
def test_robin_rank_one_property(seed, sigma):
    op = _random_op(seed, 120)
    rop = spec1d.robin_rank_one(op, sigma)
    xs = np.linspace(op.gershgorin()[0] - 1e3, op.gershgorin()[1] + 1e3, 60)
    d = spec1d.count_below_many(rop, xs) - spec1d.count_below_many(op, xs)
    assert np.all(np.abs(d) <= 1)


def test_robin_upper6_sweep(ref_curv):
    p, a = 10.0, 0.3
    E = np.logspace(-1, -4, 13)
    op = spec1d.discretize(lambda t: potentials.potential_q("Upper6", t, p, a, ref_curv),
                           Grid1D.with_spacing(spec1d.truncation_length(0.35, 1.0, 1e-4), 0.1))
    rop = spec1d.robin_rank_one(op, potentials.robin_sigma_1d(p, a, ref_curv))
    d = spec1d.count_below_many(rop, -E) - spec1d.count_below_many(op, -E)
    assert np.all(np.abs(d) <= 1)


def test_bound5_finite_and_stable(ref_curv):
    q = lambda t: potentials.potential_q("Bound5", t, 0.0, 0.3, ref_curv)
    counts = [spec1d.count_below(spec1d.discretize(q, Grid1D.with_spacing(L, 0.02)), 0.0) for L in (200.0, 400.0)]
    assert counts[0] == counts[1]
    ev = spec1d.eigenvalues_below(spec1d.discretize(q, Grid1D.with_spacing(200.0, 0.02)), 0.0, 50)
    assert ev.size == counts[0] and np.all(np.isfinite(ev))


def test_counting_csv(tmp_path):
    path = tmp_path / "c.csv"
    spec1d.write_counting_csv(path, [spec1d.CountingResult(1e-4, 49, 50.0)])
    assert path.read_text().splitlines() == ["E,count,asymptote,ratio", "0.0001,49,50,0.97999999999999998"]
