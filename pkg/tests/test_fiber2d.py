import math

import numpy as np
import pytest

from paralayer import fiber2d, geometry
from paralayer.fiber2d import DirichletCut, FiberSpec, RobinCut, StripGrid

A = 0.3


@pytest.fixture(scope="module")
def curv():
    return geometry.build(geometry.LayerProfile(2.0, 1.0), 500.0, n=4000)


@pytest.fixture(scope="module")
def small_grid():
    return StripGrid.graded(12.0, 10, A, h0=0.2, s_uniform=2.0, growth=1.05)


def test_grid_validation_and_cut():
    with pytest.raises(fiber2d.GridError):
        StripGrid.uniform(0, 1, 4, 10, A)
    with pytest.raises(fiber2d.GridError):
        StripGrid.uniform(0, 1, 20, 4, A)
    g = StripGrid.graded(100.0, 12, A)
    assert g.p == 0 and g.s_max == 100.0
    assert np.allclose(g.u, -g.u[::-1])
    c = g.cut(5.0)
    assert c.is_subgrid_of(g) and abs(c.p - 5.0) <= 0.05
    other = StripGrid.uniform(5.0, 100.0, 50, 12, A)
    assert not other.is_subgrid_of(g)


def test_box_eigenvalue_and_refinement():
    L = 2.0
    exact = math.pi**2 / (4 * A * A) + math.pi**2 / L**2
    lam = [fiber2d.lowest_eigenvalues(fiber2d.assemble_box(L, A, ns, nu), 1)[0] for ns, nu in ((50, 10), (100, 20), (200, 40))]
    assert abs(lam[-1] - exact) / exact <= 5e-3
    slope = math.log2((lam[0] - lam[1]) / (lam[1] - lam[2]))
    assert abs(slope - 2) <= 0.3


def test_box_has_no_discrete_spectrum():
    op = fiber2d.assemble_box(3.0, A, 60, 12)
    for E in (0.0, 1e-3, 1.0, (math.pi / (2 * A)) ** 2):
        assert fiber2d.count_below_threshold(op, A, E) == 0


def test_block_inertia_matches_dense(curv, small_grid):
    for spec in (FiberSpec(0), FiberSpec(0, RobinCut()), FiberSpec(2)):
        grid = small_grid if isinstance(spec.left_bc, DirichletCut) else small_grid.cut(3.0)
        op = fiber2d.assemble_fiber(curv, spec, grid, check=False)
        assert op.is_symmetric()
        ev = fiber2d.dense_eigenvalues(op)
        xs = np.concatenate([np.linspace(ev[0] - 1, 0.5 * (ev[40] + ev[41]), 25), [op.threshold]])
        assert np.array_equal(fiber2d.count_below_many(op, xs), np.searchsorted(ev, xs))


def test_inertia_tie_retry():
    b = 4
    eye = np.broadcast_to(np.eye(b), (10, b, b)).copy()
    op = fiber2d.BlockTridiagonal(eye, np.zeros((9, b, b)), eye.copy(), np.zeros((9, b, b)), 1.0)
    assert fiber2d.count_below(op, 1.0) in (0, 40)
    assert fiber2d.count_below(op, 0.5) == 0 and fiber2d.count_below(op, 1.5) == 40


def test_robin_below_dirichlet(curv):
    nodes = np.concatenate([np.linspace(0, 5, 11)[:-1], np.linspace(5, 25, 32)])
    cut = StripGrid(nodes, 10, A).cut(5.0)
    ld = fiber2d.dense_eigenvalues(fiber2d.assemble_fiber(curv, FiberSpec(0), cut, check=False))
    lr = fiber2d.dense_eigenvalues(fiber2d.assemble_fiber(curv, FiberSpec(0, RobinCut()), cut, check=False))
    assert np.all(lr[: ld.size] <= ld + 1e-10 * np.abs(ld))


def test_bracketing_nested(curv):
    nodes = np.concatenate([np.linspace(0, 5, 21)[:-1], np.linspace(5, 60, 120)])
    full = StripGrid(nodes, 12, A)
    E = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
    rep = fiber2d.bracketing_check(curv, 0, 5.0, full, E)
    assert rep.ordering_ok
    assert np.all(rep.n_robin >= rep.n_dirichlet)
    zero = fiber2d.bracketing_check(curv, 0, 0.0, full, E)
    assert np.array_equal(zero.n_dirichlet, zero.n_full)
    with pytest.raises(fiber2d.GridError):
        fiber2d.bracketing_check(curv, 0, 5.0, full.cut(2.0), E)


def test_m_monotone_dense(curv, small_grid):
    prev = None
    for m in range(4):
        ev = fiber2d.dense_eigenvalues(fiber2d.assemble_fiber(curv, FiberSpec(m), small_grid, check=False))
        if prev is not None:
            assert np.all(ev >= prev - 1e-9 * np.abs(prev))
        prev = ev


def test_genuine_layer_counts(curv):
    grid = StripGrid.graded(450.0, 16, A)
    op = fiber2d.assemble_fiber(curv, FiberSpec(0), grid)
    E = np.array([1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4, 0.0])
    counts = fiber2d.count_below_many(op, op.threshold - E)
    assert np.all(np.diff(counts) >= 0)
    assert counts[-1] >= 3
    scan = fiber2d.nonzero_mode_scan(curv, grid, 6)
    assert scan.nonincreasing and scan.counts[0] > scan.counts[1]
    assert scan.M is not None and scan.M_positive is not None
    assert np.all(scan.counts[scan.m > scan.M_positive] == 0)


def test_meridian_mass_and_counts(curv):
    grid = StripGrid.graded(30.0, 10, A, h0=0.1, growth=1.03)
    F0 = fiber2d.assemble_meridian_weighted(curv, 0, grid)
    F1 = fiber2d.assemble_meridian_weighted(curv, 1, grid)
    for F in (F0, F1):
        assert F.is_symmetric()
        assert np.all(np.linalg.eigvalsh(F.mass().toarray()) > 0)
    n0 = fiber2d.count_below_threshold(F0, A, 0.0)
    n1 = fiber2d.count_below_threshold(F1, A, 0.0)
    assert n1 <= n0


def test_meridian_rejects_folded_mesh(curv):
    grid = StripGrid.graded(20.0, 10, 0.8, h0=0.1, growth=1.03)
    with pytest.raises(fiber2d.NumericalError):
        fiber2d.assemble_meridian_weighted(curv, 0, grid)
    with pytest.raises(fiber2d.NumericalError):
        fiber2d.assemble_fiber(curv, FiberSpec(0), grid)


def test_straightened_vs_meridian(curv):
    grid = StripGrid.graded(40.0, 16, A, h0=0.05, growth=1.01)
    t0 = fiber2d.lowest_eigenvalues(fiber2d.assemble_fiber(curv, FiberSpec(0), grid), 3)
    F0 = fiber2d.lowest_eigenvalues(fiber2d.assemble_meridian_weighted(curv, 0, grid), 3)
    assert np.all(np.abs(t0 - F0) <= 0.02 * F0)
    # both sit below their own discrete continuum edge: genuine bound states
    assert t0[0] < fiber2d.StripGrid.transverse_threshold(grid, "fd")
    assert F0[0] < fiber2d.StripGrid.transverse_threshold(grid, "p1")


def test_counts_csv(tmp_path):
    path = tmp_path / "f.csv"
    fiber2d.write_counts_csv(path, [(0, "dirichlet", 0.0, 1e-3, 4)])
    assert path.read_text().splitlines() == ["m,bc,p,E,count", "0,dirichlet,0,0.001,4"]
