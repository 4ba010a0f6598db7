"""Half-line Schrödinger operators ``-d^2/ds^2 + q`` on a truncated grid.

The operator is discretized by the three-point stencil of the quadratic
form ``int |psi'|^2 + q |psi|^2`` with a Dirichlet condition at ``s = 0``
and at the truncation point ``s = L``.  Eigenvalues are counted with
Sturm sequences (see :mod:`paralayer.kernels`), never by full
diagonalization.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import betaln

from . import kernels

log = logging.getLogger(__name__)

TIE_SHIFT = 1e-13


class DiscretizationError(ValueError):
    """Raised when a potential cannot be sampled on the grid."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``n`` interior nodes on ``(0, L)``."""

    L: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"Grid1D needs at least 16 interior nodes, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"truncation length must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    @classmethod
    def with_spacing(cls, L: float, h: float, n_min: int = 16) -> "Grid1D":
        n = max(n_min, int(math.ceil(L / h)) - 1)
        return cls(L, n)


@dataclass(frozen=True)
class Dirichlet:
    """Dirichlet condition at both ends of the grid."""


@dataclass(frozen=True)
class RobinLeft:
    """Natural condition at ``s = 0`` plus the boundary term ``sigma |psi(0)|^2``.

    The form domain is ``H^1`` near the origin; negative ``sigma`` is
    attractive and ``sigma = 0`` is the Neumann condition.
    """

    sigma: float


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    diag: np.ndarray
    offdiag: np.ndarray
    grid: Grid1D
    boundary: Dirichlet | RobinLeft = Dirichlet()

    def __post_init__(self):
        if self.offdiag.shape[0] != self.diag.shape[0] - 1:
            raise ValueError("off-diagonal must be one shorter than the diagonal")

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    @property
    def off2(self) -> np.ndarray:
        return np.ascontiguousarray(self.offdiag**2)

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros_like(self.diag)
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))

    def dense(self) -> np.ndarray:
        return (
            np.diag(self.diag)
            + np.diag(self.offdiag, 1)
            + np.diag(self.offdiag, -1)
        )


@dataclass(frozen=True)
class CountingResult:
    E: float
    count: int
    asymptote: float

    @property
    def ratio(self) -> float:
        return self.count / self.asymptote if self.asymptote > 0 else 0.0


def discretize(
    q: Callable[[np.ndarray], np.ndarray],
    grid: Grid1D,
    boundary: Dirichlet | RobinLeft = Dirichlet(),
) -> TridiagonalOperator:
    """Assemble the three-point discretization of ``-psi'' + q psi``.

    ``q`` is evaluated at the interior nodes only, so potentials singular at
    the origin (Coulomb) need no regularization.
    """
    s = grid.nodes
    qs = np.asarray(q(s), dtype=float)
    if qs.shape != s.shape:
        qs = np.broadcast_to(qs, s.shape).astype(float)
    if not np.all(np.isfinite(qs)):
        bad = s[~np.isfinite(qs)][0]
        raise DiscretizationError(f"potential is not finite at s = {bad!r}")
    h2 = grid.h**2
    diag = np.ascontiguousarray(2.0 / h2 + qs)
    off = np.full(grid.n - 1, -1.0 / h2)
    op = TridiagonalOperator(diag, off, grid)
    if isinstance(boundary, RobinLeft):
        op = robin_rank_one(op, boundary.sigma)
    return op


def robin_rank_one(op: TridiagonalOperator, sigma: float) -> TridiagonalOperator:
    """Return ``op`` with the natural condition and ``sigma |psi(0)|^2`` at ``s = 0``.

    The boundary value is the one-sided ghost ``psi(0) = psi_1``: the face
    between the wall and the first node drops out of the form and the
    boundary term adds ``sigma / h``.  Only the first diagonal entry changes,
    so the result is a rank-one perturbation of ``op``.
    """
    h = op.grid.h
    if isinstance(op.boundary, RobinLeft):
        delta = (sigma - op.boundary.sigma) / h
    else:
        delta = -1.0 / h**2 + sigma / h
    diag = op.diag.copy()
    diag[0] += delta
    return replace(op, diag=diag, boundary=RobinLeft(float(sigma)))


def _count(diag, off2, x):
    c = kernels.sturm_count(diag, off2, x)
    shift = 0.0
    tries = 0
    while c < 0:
        tries += 1
        shift = TIE_SHIFT * max(1.0, abs(x)) * tries
        c = kernels.sturm_count(diag, off2, x + shift)
        if tries > 8:
            raise ArithmeticError(f"Sturm sequence breakdown near {x!r}")
    if shift:
        log.debug("Sturm tie at %r resolved with shift %.3g", x, shift)
    return int(c)


def count_below(op: TridiagonalOperator, E: float) -> int:
    """Number of eigenvalues of ``op`` strictly below ``E``."""
    return _count(op.diag, op.off2, float(E))


def count_below_many(op: TridiagonalOperator, energies: Iterable[float]) -> np.ndarray:
    xs = np.ascontiguousarray(np.asarray(list(energies), dtype=float))
    off2 = op.off2
    counts = kernels.sturm_count_many(op.diag, off2, xs)
    for i in np.flatnonzero(counts < 0):
        counts[i] = _count(op.diag, off2, xs[i])
    return counts


def eigenvalues_below(op: TridiagonalOperator, E: float, k_max: int, tol: float | None = None) -> np.ndarray:
    """Lowest ``min(k_max, count_below(op, E))`` eigenvalues by bisection."""
    if k_max <= 0:
        raise ValueError("k_max must be positive")
    off2 = op.off2
    n = _count(op.diag, off2, E)
    k = min(k_max, n)
    if k == 0:
        return np.empty(0)
    if tol is None:
        tol = 1e-10 * max(1.0, abs(E))
    lo0, _ = op.gershgorin()
    lo0 -= 1.0
    out = np.empty(k)
    lo = lo0
    for j in range(1, k + 1):
        a, b = kernels.bisect_kth(op.diag, off2, j, lo, float(E), tol, 400)
        out[j - 1] = 0.5 * (a + b)
        # eigenvalue j+1 >= eigenvalue j
        lo = a
    return out


def sl_asymptote(beta: float, c: float, E: float) -> float:
    """Leading term of the half-line counting function ``N_{-E}``.

    For a potential with tail ``-c s**-beta`` the count of eigenvalues below
    ``-E`` behaves like ``c**(1/beta) B(3/2, 1/beta - 1/2) / (pi beta E**(1/beta - 1/2))``.
    """
    if not 0 < beta < 2:
        raise ValueError(f"beta must lie in (0, 2), got {beta}")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    if not E > 0:
        raise ValueError(f"E must be positive, got {E}")
    inv = 1.0 / beta
    log_val = inv * math.log(c) + betaln(1.5, inv - 0.5) - math.log(math.pi * beta) - (inv - 0.5) * math.log(E)
    return math.exp(log_val)


def truncation_length(c: float, beta: float, E: float, safety: float = 3.0) -> float:
    """Truncation point ``safety * (c/E)**(1/beta)`` past the classical turning point."""
    return safety * (c / E) ** (1.0 / beta)


def write_counting_csv(path, rows: Sequence[CountingResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["E", "count", "asymptote", "ratio"])
        for r in rows:
            w.writerow([f"{r.E:.17g}", r.count, f"{r.asymptote:.17g}", f"{r.ratio:.17g}"])
