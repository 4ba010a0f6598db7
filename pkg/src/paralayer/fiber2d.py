"""Fiber operators on the straightened half-strip and the meridian domain.

Two discretizations are provided.

* :func:`assemble_fiber` discretizes the straightened form
  ``int |d_s psi|^2/g + |d_u psi|^2 + V_m |psi|^2`` by form-consistent finite
  differences on a tensor lattice (graded in ``s``, uniform in ``u``) with a
  lumped diagonal mass.
* :func:`assemble_meridian_weighted` maps the same lattice into the
  ``(r, z)`` half-plane, splits every cell into two triangles and assembles
  P1 finite elements for the ``r``-weighted form with consistent mass.

Both produce a :class:`BlockTridiagonal` pencil ``(A, M)`` whose blocks are
the ``u``-columns of one ``s``-layer.  Eigenvalue counts come from the block
LDL^T congruence (Haynsworth inertia additivity), which is exact for the
discrete pencil and needs only ``n_u x n_u`` dense linear algebra per layer.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import potentials
from .geometry import CurvatureTable, injectivity_check

log = logging.getLogger(__name__)

TIE_SHIFT = 1e-12


class GridError(ValueError):
    """Incompatible or malformed lattice."""


class NumericalError(ArithmeticError):
    """Degenerate mapped cell or inertia breakdown."""


# --------------------------------------------------------------------- grids


@dataclass(frozen=True, eq=False)
class StripGrid:
    """Tensor lattice on ``(p, s_max) x (-a, a)``.

    ``nodes`` holds ``x_0 = p < x_1 < ... < x_{n_s+1} = s_max``.  The ``u``
    lattice has ``n_u`` interior nodes ``u_j = -a + j h_u``.
    """

    nodes: np.ndarray
    n_u: int
    a: float

    def __post_init__(self):
        x = np.asarray(self.nodes, float)
        if x.ndim != 1 or x.size < 10:
            raise GridError("need at least 8 interior s-layers")
        if np.any(np.diff(x) <= 0):
            raise GridError("s-nodes must be strictly increasing")
        if self.n_u < 8:
            raise GridError(f"need n_u >= 8, got {self.n_u}")
        if not self.a > 0:
            raise GridError("half-width must be positive")
        object.__setattr__(self, "nodes", x)

    @property
    def p(self) -> float:
        return float(self.nodes[0])

    @property
    def s_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_s(self) -> int:
        return self.nodes.size - 2

    @property
    def h_u(self) -> float:
        return 2 * self.a / (self.n_u + 1)

    @property
    def u(self) -> np.ndarray:
        return -self.a + self.h_u * np.arange(1, self.n_u + 1)

    @classmethod
    def uniform(cls, p: float, s_max: float, n_s: int, n_u: int, a: float) -> "StripGrid":
        return cls(np.linspace(p, s_max, n_s + 2), n_u, a)

    @classmethod
    def graded(cls, s_max: float, n_u: int, a: float, h0: float = 0.05, s_uniform: float = 2.0,
               growth: float = 1.01, p: float = 0.0) -> "StripGrid":
        """Uniform spacing ``h0`` on ``[p, p + s_uniform]``, then geometric growth."""
        if growth < 1:
            raise GridError("growth factor must be >= 1")
        n0 = max(1, int(round(s_uniform / h0)))
        x = list(p + h0 * np.arange(n0 + 1))
        d = h0
        while x[-1] < s_max:
            d *= growth
            x.append(x[-1] + d)
        x = np.array(x)
        x[-1] = s_max
        if x[-1] - x[-2] < 0.5 * d:
            x = np.delete(x, -2)
        return cls(x, n_u, a)

    def cut(self, p: float) -> "StripGrid":
        """Sub-lattice starting at the node nearest to ``p``.

        The result shares every node beyond the cut, so forms assembled on it
        are restrictions of forms assembled on ``self``.
        """
        i = int(np.argmin(np.abs(self.nodes - p)))
        if i > self.nodes.size - 10:
            raise GridError(f"cut at {p} leaves fewer than 8 layers")
        return StripGrid(self.nodes[i:], self.n_u, self.a)

    def is_subgrid_of(self, other: "StripGrid") -> bool:
        if self.n_u != other.n_u or self.a != other.a:
            return False
        i = np.searchsorted(other.nodes, self.p)
        tail = other.nodes[i:]
        return tail.size == self.nodes.size and np.array_equal(tail, self.nodes)

    def transverse_threshold(self, method: str = "fd") -> float:
        """Bottom of the transverse spectrum on this ``u`` lattice.

        ``"fd"``: three-point Dirichlet Laplacian.  ``"p1"``: linear elements
        with consistent mass.  ``"exact"``: ``(pi / 2a)^2``.
        """
        h = self.h_u
        th = math.pi / (self.n_u + 1)
        if method == "fd":
            return 4 / h**2 * math.sin(th / 2) ** 2
        if method == "p1":
            return 6 / h**2 * (1 - math.cos(th)) / (2 + math.cos(th))
        if method == "exact":
            return (math.pi / (2 * self.a)) ** 2
        raise ValueError(f"unknown threshold method {method!r}")


def fiber_truncation(alpha: float, k: float, E: float, safety: float = 3.0) -> float:
    """``s_max`` from the turning point of the Coulomb-like tail ``-(k^{2/alpha}/4) s^{-2/alpha}``."""
    c = k ** (2.0 / alpha) / 4
    return safety * (c / E) ** (alpha / 2)


# ------------------------------------------------------------------ operator


@dataclass(frozen=True, eq=False)
class BlockTridiagonal:
    """Symmetric block-tridiagonal pencil ``(A, M)``.

    ``A_diag[i]`` is block ``(i, i)`` and ``A_low[i]`` is block ``(i+1, i)``;
    same for ``M``.  ``threshold`` is the discrete transverse level of the
    lattice the pencil was built on.
    """

    A_diag: np.ndarray
    A_low: np.ndarray
    M_diag: np.ndarray
    M_low: np.ndarray
    threshold: float
    meta: dict = field(default_factory=dict)

    @property
    def n_blocks(self) -> int:
        return self.A_diag.shape[0]

    @property
    def block(self) -> int:
        return self.A_diag.shape[1]

    @property
    def size(self) -> int:
        return self.n_blocks * self.block

    def _sparse(self, D, L) -> scipy.sparse.csr_matrix:
        nb = self.n_blocks
        blocks = [[None] * nb for _ in range(nb)]
        for i in range(nb):
            blocks[i][i] = scipy.sparse.csr_matrix(D[i])
        for i in range(nb - 1):
            blocks[i + 1][i] = scipy.sparse.csr_matrix(L[i])
            blocks[i][i + 1] = scipy.sparse.csr_matrix(L[i].T)
        return scipy.sparse.bmat(blocks, format="csr")

    def stiffness(self) -> scipy.sparse.csr_matrix:
        return self._sparse(self.A_diag, self.A_low)

    def mass(self) -> scipy.sparse.csr_matrix:
        return self._sparse(self.M_diag, self.M_low)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.abs(self.A_diag).max()))
        return bool(
            np.allclose(self.A_diag, np.swapaxes(self.A_diag, 1, 2), atol=tol * scale)
            and np.allclose(self.M_diag, np.swapaxes(self.M_diag, 1, 2), atol=tol * scale)
        )


def _inertia_many(op: BlockTridiagonal, sigmas: np.ndarray):
    """Negative counts of ``A - sigma M`` for a batch of shifts.

    Returns ``(counts, gap)`` where ``gap`` is the smallest relative pivot
    eigenvalue seen per shift (a tie indicator).
    """
    sig = np.asarray(sigmas, float)[:, None, None]
    nb = op.n_blocks
    counts = np.zeros(sig.shape[0], dtype=np.int64)
    gap = np.full(sig.shape[0], np.inf)
    S = None  # Schur complement correction for the current block
    for i in range(nb):
        D = op.A_diag[i][None] - sig * op.M_diag[i][None]
        if S is not None:
            D = D - S
        w, Q = np.linalg.eigh(D)
        counts += np.count_nonzero(w < 0, axis=1)
        scale = np.maximum(np.abs(w).max(axis=1), 1e-300)
        gap = np.minimum(gap, np.abs(w).min(axis=1) / scale)
        if i + 1 < nb:
            # exact zero pivots are flagged through ``gap``; keep the sweep finite
            floor = (np.finfo(float).eps * scale)[:, None]
            w = np.where(np.abs(w) < floor, np.where(w < 0, -floor, floor), w)
            C = op.A_low[i][None] - sig * op.M_low[i][None]
            CQ = C @ Q
            S = (CQ / w[:, None, :]) @ np.swapaxes(CQ, 1, 2)
    return counts, gap


def count_below(op: BlockTridiagonal, sigma: float) -> int:
    """Number of generalized eigenvalues of ``(A, M)`` strictly below ``sigma``."""
    return int(count_below_many(op, [sigma])[0])


def count_below_many(op: BlockTridiagonal, sigmas: Sequence[float]) -> np.ndarray:
    sig = np.asarray(sigmas, float)
    counts, gap = _inertia_many(op, sig)
    tol = 1e3 * np.finfo(float).eps
    for idx in np.flatnonzero(gap < tol):
        for tries in range(1, 9):
            shift = TIE_SHIFT * max(1.0, abs(sig[idx])) * tries
            c, g = _inertia_many(op, sig[idx : idx + 1] + shift)
            if g[0] >= tol:
                log.debug("inertia tie at %r resolved with shift %.3g", sig[idx], shift)
                counts[idx] = c[0]
                break
        else:
            raise NumericalError(f"block factorization breakdown near shift {sig[idx]!r}")
    return counts


def count_below_threshold(op: BlockTridiagonal, a: float, E: float, threshold: str = "discrete") -> int:
    """Count of eigenvalues below ``lambda_e - E``.

    ``threshold="discrete"`` takes ``lambda_e`` from the lattice (the bottom
    of the discrete continuum), ``"exact"`` uses ``(pi / 2a)^2``.
    """
    lam = op.threshold if threshold == "discrete" else (math.pi / (2 * a)) ** 2
    return count_below(op, lam - E)


def dense_eigenvalues(op: BlockTridiagonal) -> np.ndarray:
    """All eigenvalues of the pencil (small grids only)."""
    if op.size > 6000:
        raise GridError(f"dense solve refused for {op.size} unknowns")
    return scipy.linalg.eigh(op.stiffness().toarray(), op.mass().toarray(), eigvals_only=True)


def lowest_eigenvalues(op: BlockTridiagonal, k: int = 3, tol: float = 1e-10) -> np.ndarray:
    """Lowest ``k`` eigenvalues by shift-invert Lanczos below the spectrum."""
    if op.size <= 1500:
        return dense_eigenvalues(op)[:k]
    lo = op.threshold - 1.0
    step = 1.0
    while count_below(op, lo) > 0:
        step *= 2
        lo = op.threshold - step
    vals = scipy.sparse.linalg.eigsh(op.stiffness().tocsc(), k=k, M=op.mass().tocsc(), sigma=lo,
                                     which="LM", return_eigenvectors=False, tol=tol)
    vals = np.sort(vals)
    # shift-invert around a point below the spectrum returns the lowest ones;
    # confirm with the exact count
    if count_below(op, vals[-1] * (1 + 1e-9) + 1e-12) < k:
        raise NumericalError("Lanczos missed eigenvalues")
    return vals


# ------------------------------------------------------ straightened fibers


@dataclass(frozen=True)
class DirichletCut:
    """``psi = 0`` on the left edge ``s = p``."""


@dataclass(frozen=True)
class RobinCut:
    """Natural condition at ``s = p`` with the boundary coupling ``B_p(u)``."""


@dataclass(frozen=True)
class FiberSpec:
    m: int = 0
    left_bc: DirichletCut | RobinCut = DirichletCut()

    @property
    def bc_name(self) -> str:
        return "robin" if isinstance(self.left_bc, RobinCut) else "dirichlet"


def _lattice_fd(grid: StripGrid, inv_g_face, V, robin=None, mass_only=False):
    """Block arrays for the finite-difference form on ``grid``.

    ``inv_g_face`` has shape ``(n_s + 1, n_u)`` (faces between consecutive
    nodes), ``V`` shape ``(n_layers, n_u)`` on the unknown layers.  With
    ``robin`` given, layer ``x_0`` is an unknown and ``robin`` (shape
    ``(n_u,)``) is its boundary coupling; otherwise ``x_0`` is Dirichlet.
    """
    x = grid.nodes
    dx = np.diff(x)
    hu = grid.h_u
    nu = grid.n_u
    first = 0 if robin is not None else 1
    layers = np.arange(first, x.size - 1)
    w = np.empty(layers.size)
    for k, i in enumerate(layers):
        w[k] = 0.5 * (dx[i - 1] + dx[i]) if i > 0 else 0.5 * dx[0]
    nb = layers.size
    face = hu * inv_g_face / dx[:, None]  # (n_s + 1, n_u), face i between x_i and x_{i+1}

    Ad = np.zeros((nb, nu, nu))
    jj = np.arange(nu)
    for k, i in enumerate(layers):
        diag = w[k] * 2 / hu + w[k] * hu * V[k] + face[i]
        if i > 0:
            diag = diag + face[i - 1]
        if robin is not None and i == 0:
            diag = diag + hu * robin
        Ad[k, jj, jj] = diag
        Ad[k, jj[:-1], jj[1:]] = -w[k] / hu
        Ad[k, jj[1:], jj[:-1]] = -w[k] / hu
    Al = np.zeros((nb - 1, nu, nu))
    for k in range(nb - 1):
        Al[k, jj, jj] = -face[layers[k]]
    Md = np.zeros((nb, nu, nu))
    Md[:, jj, jj] = (w * hu)[:, None]
    Ml = np.zeros((nb - 1, nu, nu))
    return Ad, Al, Md, Ml, layers


def assemble_fiber(curv: CurvatureTable, spec: FiberSpec, grid: StripGrid, check: bool = True) -> BlockTridiagonal:
    """Finite-difference pencil of the straightened fiber form ``t_m``.

    The ``s``-coefficient ``1/g`` is sampled at face midpoints and ``V_m`` at
    the nodes; Dirichlet on ``u = +-a`` and ``s = s_max``.  The left edge is
    Dirichlet or carries the Robin coupling ``B_p(u)`` per ``spec``.
    """
    if check:
        rep = injectivity_check(curv.profile, grid.a, curv=curv, sample={"s_extent": min(grid.s_max, 50.0)})
        if not rep.ok:
            raise NumericalError(f"layer not injective: {rep.reason}")
    if grid.s_max > curv.s[-1]:
        raise GridError(f"geometry table ends at {curv.s[-1]:g} < s_max = {grid.s_max:g}")
    x = grid.nodes
    u = grid.u
    mid = 0.5 * (x[1:] + x[:-1])
    J = potentials.jacobian(mid[:, None], u[None, :], curv).J
    robin = None
    if isinstance(spec.left_bc, RobinCut):
        robin = potentials.robin_coefficient(grid.p, u, curv)
        xs = x[:-1]
    else:
        xs = x[1:-1]
    V = potentials.potential_full(xs[:, None], u[None, :], spec.m, curv)
    if not np.all(np.isfinite(V)):
        raise NumericalError("potential not finite on the lattice (Robin cut on the axis?)")
    Ad, Al, Md, Ml, _ = _lattice_fd(grid, 1.0 / J**2, V, robin)
    meta = {"kind": "fiber", "m": abs(spec.m), "bc": spec.bc_name, "p": grid.p, "n_s": grid.n_s, "n_u": grid.n_u}
    return BlockTridiagonal(Ad, Al, Md, Ml, grid.transverse_threshold("fd"), meta)


def assemble_box(L: float, a: float, n_s: int, n_u: int) -> BlockTridiagonal:
    """Pure Dirichlet Laplacian on ``(0, L) x (-a, a)`` on the same lattice code path."""
    grid = StripGrid.uniform(0.0, L, n_s, n_u, a)
    Ad, Al, Md, Ml, _ = _lattice_fd(grid, np.ones((n_s + 1, n_u)), np.zeros((n_s, n_u)))
    return BlockTridiagonal(Ad, Al, Md, Ml, grid.transverse_threshold("fd"), {"kind": "box"})


# ------------------------------------------------------- weighted meridian


def _tau(curv: CurvatureTable, s, u):
    loc = curv.local(s)
    r = loc.phi[:, None] - u[None, :] * (loc.df * loc.dphi)[:, None]
    z = curv.profile.f(loc.phi)[:, None] + u[None, :] * loc.dphi[:, None]
    return r, z


def assemble_meridian_weighted(curv: CurvatureTable, m: int, grid: StripGrid) -> BlockTridiagonal:
    """P1 pencil of the weighted meridian form on the mapped lattice.

    Stiffness ``int r (grad v . grad w + m^2 v w / r^2)`` and mass
    ``int r v w`` over the image of the lattice under the normal map.  For
    ``m = 0`` the axis layer ``s = 0`` stays free (natural condition); for
    ``m != 0`` it is Dirichlet.  ``u = +-a`` and ``s = s_max`` are Dirichlet.
    """
    if grid.p != 0:
        raise GridError("the meridian mesh must start on the axis")
    if grid.s_max > curv.s[-1]:
        raise GridError(f"geometry table ends at {curv.s[-1]:g} < s_max = {grid.s_max:g}")
    m = abs(int(m))
    x = grid.nodes
    nu = grid.n_u
    u_all = -grid.a + grid.h_u * np.arange(nu + 2)
    r, z = _tau(curv, x, u_all)
    r[0] = 0.0
    ns = x.size

    first = 0 if m == 0 else 1
    nb = ns - 1 - first  # unknown layers first..ns-2

    def gid(i, j):
        # -1 for Dirichlet nodes
        ok = (i >= first) & (i <= ns - 2) & (j >= 1) & (j <= nu)
        return np.where(ok, (i - first) * nu + (j - 1), -1)

    I, Jc = np.meshgrid(np.arange(ns - 1), np.arange(nu + 1), indexing="ij")
    I = I.ravel()
    Jc = Jc.ravel()
    # split along the (i, j)-(i+1, j+1) diagonal
    tri = [
        (np.stack([I, I + 1, I + 1], 1), np.stack([Jc, Jc, Jc + 1], 1)),
        (np.stack([I, I + 1, I], 1), np.stack([Jc, Jc + 1, Jc + 1], 1)),
    ]
    Ai = np.zeros((nb, nu, nu))
    Al = np.zeros((nb - 1, nu, nu))
    Mi = np.zeros_like(Ai)
    Ml = np.zeros_like(Al)
    w3 = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
    for ti, tj in tri:
        R = r[ti, tj]
        Z = z[ti, tj]
        e1r, e1z = R[:, 1] - R[:, 0], Z[:, 1] - Z[:, 0]
        e2r, e2z = R[:, 2] - R[:, 0], Z[:, 2] - Z[:, 0]
        det = e1r * e2z - e1z * e2r
        if np.any(det <= 0):
            raise NumericalError("mapped cell with non-positive area (half-width beyond the layer reach)")
        area = 0.5 * det
        # barycentric gradients
        gr = np.stack([Z[:, 1] - Z[:, 2], Z[:, 2] - Z[:, 0], Z[:, 0] - Z[:, 1]], 1) / det[:, None]
        gz = np.stack([R[:, 2] - R[:, 1], R[:, 0] - R[:, 2], R[:, 1] - R[:, 0]], 1) / det[:, None]
        rbar = R.mean(axis=1)
        K = (rbar * area)[:, None, None] * (gr[:, :, None] * gr[:, None, :] + gz[:, :, None] * gz[:, None, :])
        # int r phi_a phi_b = sum_c r_c int phi_a phi_b phi_c
        Mloc = np.empty_like(K)
        for a_ in range(3):
            for b_ in range(3):
                if a_ == b_:
                    coef = np.where(np.arange(3) == a_, 1 / 10, 1 / 30)
                else:
                    coef = np.where((np.arange(3) == a_) | (np.arange(3) == b_), 1 / 30, 1 / 60)
                Mloc[:, a_, b_] = area * (R @ coef)
        if m:
            rq = R @ w3.T  # r at the three interior quadrature points
            with np.errstate(divide="ignore"):
                inv = np.where(rq > 0, 1.0 / rq, 0.0)
            Cm = (area / 3)[:, None, None] * np.einsum("eq,qa,qb->eab", inv, w3, w3)
            K = K + m * m * Cm
        G = gid(ti, tj)
        for a_ in range(3):
            for b_ in range(3):
                ga, gb = G[:, a_], G[:, b_]
                ok = (ga >= 0) & (gb >= 0)
                ba, la = np.divmod(ga[ok], nu)
                bb, lb = np.divmod(gb[ok], nu)
                kv, mv = K[ok, a_, b_], Mloc[ok, a_, b_]
                same = ba == bb
                np.add.at(Ai, (ba[same], la[same], lb[same]), kv[same])
                np.add.at(Mi, (ba[same], la[same], lb[same]), mv[same])
                low = ba == bb + 1
                np.add.at(Al, (bb[low], la[low], lb[low]), kv[low])
                np.add.at(Ml, (bb[low], la[low], lb[low]), mv[low])
    meta = {"kind": "meridian", "m": m, "n_s": grid.n_s, "n_u": nu}
    return BlockTridiagonal(Ai, Al, Mi, Ml, grid.transverse_threshold("p1"), meta)


# ----------------------------------------------------------- experiments


@dataclass
class BracketingReport:
    p: float
    E: np.ndarray
    n_dirichlet: np.ndarray
    n_full: np.ndarray
    n_robin: np.ndarray | None  # no Robin cut on the axis (p = 0)

    @property
    def ordering_ok(self) -> bool:
        return bool(np.all(self.n_dirichlet <= self.n_full))

    @property
    def robin_excess(self) -> np.ndarray | None:
        return None if self.n_robin is None else self.n_robin - self.n_full

    @property
    def excess_constant(self) -> bool:
        ex = self.robin_excess
        return ex is None or bool(np.all(ex == ex[0]))

    def rows(self):
        robin = self.n_robin if self.n_robin is not None else [None] * len(self.E)
        for E, d, f, r in zip(self.E, self.n_dirichlet, self.n_full, robin):
            yield {"E": float(E), "dirichlet": int(d), "full": int(f), "robin": None if r is None else int(r)}


def bracketing_check(curv: CurvatureTable, m: int, p: float, grid: StripGrid, E_list: Sequence[float],
                     threshold: str = "discrete") -> BracketingReport:
    """Counts of the ``p``-cut Dirichlet, full and ``p``-cut Robin fibers.

    ``grid`` is the full lattice (starting at ``s = 0``); the cut lattices
    are its tails, so the Dirichlet-cut form is a restriction of the full
    form.
    """
    if grid.p != 0:
        raise GridError("bracketing needs the full lattice starting at s = 0")
    cut = grid.cut(p)
    if not cut.is_subgrid_of(grid):
        raise GridError("cut lattice is not nested in the full lattice")
    full = assemble_fiber(curv, FiberSpec(m, DirichletCut()), grid)
    dcut = assemble_fiber(curv, FiberSpec(m, DirichletCut()), cut, check=False)
    lam = full.threshold if threshold == "discrete" else (math.pi / (2 * grid.a)) ** 2
    sig = lam - np.asarray(E_list, float)
    n_robin = None
    if cut.p > 0:
        rcut = assemble_fiber(curv, FiberSpec(m, RobinCut()), cut, check=False)
        n_robin = count_below_many(rcut, sig)
    return BracketingReport(cut.p, np.asarray(E_list, float), count_below_many(dcut, sig),
                            count_below_many(full, sig), n_robin)


@dataclass
class ModeScan:
    m: np.ndarray
    counts: np.ndarray
    M_positive: int | None  # from pointwise positivity of U_m

    @property
    def M(self) -> int | None:
        """Smallest ``M`` with zero count for every scanned ``m > M``."""
        nz = np.flatnonzero(self.counts > 0)
        if nz.size == 0:
            return -1
        last = int(self.m[nz[-1]])
        return last if last < int(self.m[-1]) else None

    @property
    def nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.counts) <= 0))


def nonzero_mode_scan(curv: CurvatureTable, grid: StripGrid, m_max: int, E: float = 0.0,
                      threshold: str = "discrete", workers: int = 1) -> ModeScan:
    """Counts below ``lambda_e - E`` for the fibers ``m = 0..m_max``."""
    ms = np.arange(m_max + 1)

    def one(m):
        op = assemble_fiber(curv, FiberSpec(int(m)), grid, check=(m == 0))
        return count_below_threshold(op, grid.a, E, threshold)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as ex:
            counts = np.array(list(ex.map(one, ms)))
    else:
        counts = np.array([one(m) for m in ms])
    try:
        Mpos = potentials.smallest_positive_mode(grid.a, curv, s=grid.nodes[1:])
    except potentials.PotentialError:
        Mpos = None
    return ModeScan(ms, counts, Mpos)


def write_counts_csv(path, rows) -> None:
    """Rows of ``(m, bc, p, E, count)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "bc", "p", "E", "count"])
        for m, bc, p, E, n in rows:
            w.writerow([int(m), bc, f"{p:.17g}", f"{E:.17g}", int(n)])
