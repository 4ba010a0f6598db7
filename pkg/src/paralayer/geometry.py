"""Meridian curve of a generalized paraboloid and its curvatures.

The surface is generated by rotating the graph of ``f`` about the vertical
axis, with ``f(x) = k x**alpha`` for ``x >= R``.  Its meridian is
parametrized by arc length ``s``; ``phi(s)`` is the radial coordinate of
the point at arc length ``s`` and solves

    phi'(s) = (1 + f'(phi)**2) ** -1/2,   phi(0) = 0.

All derivatives of ``phi`` and of the signed curvature
``gamma = f''(phi) phi'**3`` are closed-form functions of ``phi``; only
``phi`` itself is obtained from the ODE solver.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize


class GeometryError(ValueError):
    """Invalid profile parameters or failed arc-length integration."""


class Cap(enum.Enum):
    PURE_POWER = "PurePower"
    QUINTIC_BLEND = "QuinticBlend"

    @classmethod
    def parse(cls, value) -> "Cap":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        for c in cls:
            if c.value.lower() == key or c.name.lower().replace("_", "") == key:
                return c
        raise GeometryError(f"unknown cap {value!r}")


def _power_derivs(coef: float, alpha: float, x: np.ndarray, order: int) -> np.ndarray:
    """``d^order/dx^order (coef * x**alpha)``, with exact zeros for vanishing factors."""
    c = coef
    for j in range(order):
        c *= alpha - j
    if c == 0.0:
        return np.zeros_like(x)
    e = alpha - order
    with np.errstate(divide="ignore", invalid="ignore"):
        if e == 0.0:
            return np.full_like(x, c)
        out = c * np.power(x, e)
    return out


@dataclass(frozen=True)
class LayerProfile:
    """Generating function ``f`` of the surface.

    ``f(x) = k x**alpha`` for ``x >= R``.  With ``cap = QuinticBlend`` the
    interval ``[0, R]`` carries the unique polynomial
    ``c2 x^2 + c3 x^3 + c4 x^4 + c5 x^5`` that matches value and the first
    three derivatives of the power at ``R``.
    """

    alpha: float
    k: float
    R: float = 0.0
    cap: Cap = Cap.PURE_POWER
    _coeffs: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        object.__setattr__(self, "cap", Cap.parse(self.cap))
        if not self.alpha > 1:
            raise GeometryError(f"alpha must exceed 1, got {self.alpha}")
        if not self.k > 0:
            raise GeometryError(f"k must be positive, got {self.k}")
        if self.R < 0:
            raise GeometryError(f"R must be non-negative, got {self.R}")
        if self.cap is Cap.PURE_POWER and self.R != 0:
            raise GeometryError("PurePower profile requires R = 0")
        if self.cap is Cap.QUINTIC_BLEND:
            if not self.R > 0:
                raise GeometryError("QuinticBlend profile requires R > 0")
            object.__setattr__(self, "_coeffs", self._blend_coeffs())

    def _blend_coeffs(self):
        R, a, k = self.R, self.alpha, self.k
        # rows: value, 1st, 2nd, 3rd derivative of x^2..x^5 at R
        A = np.array(
            [
                [R**2, R**3, R**4, R**5],
                [2 * R, 3 * R**2, 4 * R**3, 5 * R**4],
                [2.0, 6 * R, 12 * R**2, 20 * R**3],
                [0.0, 6.0, 24 * R, 60 * R**2],
            ]
        )
        b = np.array([k * R**a, a * k * R ** (a - 1), a * (a - 1) * k * R ** (a - 2), a * (a - 1) * (a - 2) * k * R ** (a - 3)])
        return tuple(np.linalg.solve(A, b))

    def deriv(self, x, order: int = 0) -> np.ndarray:
        """``f^(order)(x)`` for ``order`` in 0..4."""
        x = np.asarray(x, dtype=float)
        out = _power_derivs(self.k, self.alpha, x, order)
        if self.cap is Cap.QUINTIC_BLEND:
            inner = x < self.R
            if np.any(inner):
                xi = x[inner] if x.ndim else x
                poly = np.polynomial.Polynomial((0.0, 0.0) + self._coeffs).deriv(order)
                if x.ndim:
                    out = np.array(out, copy=True)
                    out[inner] = poly(xi)
                else:
                    out = np.asarray(poly(xi))
        return out

    def f(self, x):
        return self.deriv(x, 0)

    def curvature_at_apex(self) -> float:
        """``f''(0)``; infinite for a pure power with ``alpha < 2``."""
        if self.cap is Cap.QUINTIC_BLEND:
            return 2.0 * self._coeffs[0]
        if self.alpha == 2:
            return 2.0 * self.k
        return math.inf if self.alpha < 2 else 0.0

    @property
    def is_flat(self) -> bool:
        return False

    def config(self) -> dict:
        return {"alpha": self.alpha, "k": self.k, "R": self.R, "cap": self.cap.value}


@dataclass(frozen=True)
class FlatProfile:
    """``f == 0``: the meridian is the straight half-line, useful as a test double."""

    alpha: float = 2.0
    k: float = 0.0
    R: float = 0.0

    def deriv(self, x, order: int = 0) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))

    def f(self, x):
        return self.deriv(x)

    def curvature_at_apex(self) -> float:
        return 0.0

    @property
    def is_flat(self) -> bool:
        return True

    def config(self) -> dict:
        return {"alpha": self.alpha, "k": 0.0, "R": 0.0, "cap": "Flat"}


class LocalGeometry(NamedTuple):
    """Pointwise arc-length and curvature data at arc lengths ``s``."""

    s: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    dddphi: np.ndarray
    df: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    ddgamma: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray


def _local_from_phi(profile, s, phi) -> LocalGeometry:
    f1 = profile.deriv(phi, 1)
    f2 = profile.deriv(phi, 2)
    f3 = profile.deriv(phi, 3)
    f4 = profile.deriv(phi, 4)
    w = 1.0 + f1 * f1
    dphi = 1.0 / np.sqrt(w)
    # 0 * inf at the apex of a pure power with alpha < 2 (singular there)
    with np.errstate(invalid="ignore"):
        ddphi = -f1 * f2 / w**2
        dddphi = (3 * f1**2 * f2**2 - f2**2 - f1 * f3 - f1**3 * f3) / w**3.5
        gamma = f2 * dphi**3
        dgamma = 3 * dphi**2 * ddphi * f2 + dphi**4 * f3
        ddgamma = (
            6 * dphi * ddphi**2 * f2
            + 3 * dphi**2 * dddphi * f2
            + 7 * dphi**3 * ddphi * f3
            + dphi**5 * f4
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa1 = -f1 * dphi / phi
    at_axis = phi == 0
    if np.any(at_axis):
        kappa1 = np.where(at_axis, -profile.curvature_at_apex(), kappa1)
    kappa2 = -gamma
    return LocalGeometry(s, phi, dphi, ddphi, dddphi, f1, gamma, dgamma, ddgamma, kappa1, kappa2)


@dataclass(frozen=True, eq=False)
class ArcLengthTable:
    """``phi`` and its first three derivatives sampled on ``s``.

    Values between nodes come from the solver's dense output; values beyond
    ``s[-1]`` are obtained by inverting the arc-length integral with
    quadrature.
    """

    profile: LayerProfile | FlatProfile
    s: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    dddphi: np.ndarray
    tol: float
    _dense: object = field(repr=False, default=None)

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    def phi_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.profile.is_flat:
            return s.copy()
        out = np.empty_like(s)
        flat = s.reshape(-1)
        res = out.reshape(-1)
        inside = flat <= self.s_max
        if np.any(inside):
            res[inside] = np.asarray(self._dense(flat[inside])).reshape(-1)
        if np.any(~inside):
            res[~inside] = [self._phi_beyond(x) for x in flat[~inside]]
        if np.any(flat < 0):
            raise GeometryError("arc length must be non-negative")
        return out

    def _phi_beyond(self, s: float) -> float:
        x0, s0 = float(self.phi[-1]), self.s_max
        prof = self.profile

        def arc(x):
            val, _ = integrate.quad(lambda t: math.sqrt(1.0 + float(prof.deriv(t, 1)) ** 2), x0, x, limit=200, epsabs=0.0, epsrel=1e-13)
            return s0 + val - s

        hi = x0 + (s - s0)
        return optimize.brentq(arc, x0, hi, xtol=1e-14 * max(1.0, hi), rtol=1e-15)

    def local(self, s) -> LocalGeometry:
        s = np.asarray(s, dtype=float)
        return _local_from_phi(self.profile, s, self.phi_at(s))


def _default_grid(s_max: float, n: int) -> np.ndarray:
    first = min(1e-3, s_max / (n - 1))
    if s_max / first < 50:
        return np.linspace(0.0, s_max, n)
    return np.concatenate(([0.0], np.geomspace(first, s_max, n - 1)))


def solve_arc_length(profile, s_max: float, n: int = 2000, tol: float = 1e-12, grid: np.ndarray | None = None) -> ArcLengthTable:
    """Integrate the arc-length ODE of the meridian and tabulate ``phi``.

    Parameters
    ----------
    profile : LayerProfile or FlatProfile
    s_max : float
        Largest tabulated arc length.
    n : int
        Number of nodes (geometrically spaced, first node at 0) when ``grid``
        is not given.
    tol : float
        Relative and absolute tolerance of the Dormand-Prince 8(5,3) pair.
    """
    if not s_max > 0:
        raise GeometryError("s_max must be positive")
    if grid is None:
        if n < 2:
            raise GeometryError("need at least two nodes")
        s = _default_grid(float(s_max), int(n))
    else:
        s = np.asarray(grid, dtype=float)
        if s[0] != 0 or np.any(np.diff(s) <= 0):
            raise GeometryError("grid must start at 0 and increase strictly")
        s_max = float(s[-1])
    if not tol > 0:
        raise GeometryError("tol must be positive")

    if profile.is_flat:
        phi = s.copy()
        dense = None
    else:

        def rhs(_, y):
            d1 = profile.deriv(y, 1)
            return 1.0 / np.sqrt(1.0 + d1 * d1)

        sol = integrate.solve_ivp(
            rhs, (0.0, s_max), [0.0], method="DOP853", t_eval=s, dense_output=True, rtol=tol, atol=tol
        )
        if not sol.success:
            raise GeometryError(f"arc-length integration failed: {sol.message}")
        phi = sol.y[0]
        dense = lambda x, _sol=sol.sol: _sol(x)[0]  # noqa: E731
    loc = _local_from_phi(profile, s, phi)
    return ArcLengthTable(profile, s, phi, loc.dphi, loc.ddphi, loc.dddphi, tol, dense)


@dataclass(frozen=True, eq=False)
class CurvatureTable:
    """Curvatures of the meridian and of the surface on the arc-length grid."""

    arc: ArcLengthTable
    gamma: np.ndarray
    dgamma: np.ndarray
    ddgamma: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    mean: np.ndarray
    gauss: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return self.arc.s

    @property
    def profile(self):
        return self.arc.profile

    def local(self, s) -> LocalGeometry:
        return self.arc.local(s)

    def xi(self, a: float, p: float) -> float:
        return a * _sup_curvature(self, float(p))

    def rho_m(self) -> float:
        sup = _sup_curvature(self, 0.0)
        return math.inf if sup == 0 else 1.0 / sup


def curvature_tables(profile, arc: ArcLengthTable) -> CurvatureTable:
    """Signed curvature, its two derivatives, and the principal curvatures."""
    if arc.profile is not profile and arc.profile != profile:
        raise GeometryError("arc-length table belongs to a different profile")
    loc = _local_from_phi(profile, arc.s, arc.phi)
    k1, k2 = loc.kappa1, loc.kappa2
    return CurvatureTable(arc, loc.gamma, loc.dgamma, loc.ddgamma, k1, k2, 0.5 * (k1 + k2), k1 * k2)


def build(profile, s_max: float, n: int = 2000, tol: float = 1e-12) -> CurvatureTable:
    """Shortcut for ``curvature_tables(profile, solve_arc_length(...))``."""
    return curvature_tables(profile, solve_arc_length(profile, s_max, n, tol))


def _curv_magnitude(curv: CurvatureTable, s) -> np.ndarray:
    loc = curv.local(np.atleast_1d(s))
    return np.maximum(np.abs(loc.gamma), np.abs(loc.kappa1))


@lru_cache(maxsize=256)
def _sup_curvature(curv: CurvatureTable, p: float) -> float:
    """``sup_{s >= p} max(|gamma|, |f'(phi) phi'/phi|)``.

    Grid maximum over ``[p, s_max]`` refined by a bounded local search around
    the best node, plus the value at ``s_max`` which bounds the monotone
    power-law tail beyond the table.
    """
    s = curv.s
    if p > s[-1]:
        return float(_curv_magnitude(curv, p)[0])
    mask = s >= p
    nodes = np.concatenate(([p], s[mask]))
    vals = np.maximum(np.abs(curv.gamma[mask]), np.abs(curv.kappa1[mask]))
    vals = np.concatenate((_curv_magnitude(curv, p), vals))
    if not np.all(np.isfinite(vals)):
        return math.inf
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo = nodes[max(i - 1, 0)]
    hi = nodes[min(i + 1, len(nodes) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda x: -float(_curv_magnitude(curv, x)[0]), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * max(1.0, hi)}
        )
        best = max(best, -float(res.fun))
    return best


def xi_zeta(curv: CurvatureTable, a: float, p: float) -> tuple[float, float]:
    """``xi_p = a sup_{s>=p} max(|kappa1|, |kappa2|)`` and ``zeta_p = ((1-xi)/(1+xi))**2``.

    ``xi_p >= 1`` is returned as is; callers that need ``xi_p < 1`` check it.
    """
    if not a > 0:
        raise GeometryError("half-width a must be positive")
    if p < 0:
        raise GeometryError("p must be non-negative")
    xi = curv.xi(a, p)
    zeta = ((1.0 - xi) / (1.0 + xi)) ** 2 if math.isfinite(xi) else 0.0
    return xi, zeta


@dataclass(frozen=True)
class InjectivityReport:
    rho_m: float | None
    ok: bool
    witness: tuple | None = None
    reason: str = ""


def injectivity_check(
    profile, a: float, sample: dict | None = None, curv: CurvatureTable | None = None, curvature_gate: bool = True
) -> InjectivityReport:
    """Curvature-radius test plus a sampled self-overlap scan of the layer map.

    The map ``(s, u) -> (phi - u f'(phi) phi', f(phi) + u phi')`` is sampled
    on a lattice of ``[0, s_extent] x (-a, a)``; images are hashed into square
    cells of side ``a/8``.  Two samples in the same or adjacent cells whose
    images lie closer than ``a/8`` while their preimages are far apart prove
    an overlap.  Images with negative radius overlap the mirrored half-plane
    after rotation and are reported too.  This is a sampling heuristic, not a
    proof of injectivity.
    """
    if not a > 0:
        raise GeometryError("half-width a must be positive")
    sample = dict(sample or {})
    s_extent = float(sample.get("s_extent", 40.0 * max(1.0, getattr(profile, "R", 0.0))))
    ds = float(sample.get("ds", a / 16))
    n_u = int(sample.get("n_u", 17))
    if curv is None:
        curv = build(profile, max(s_extent, 10.0), n=int(sample.get("n_table", 2000)))

    rho = None if profile.is_flat else curv.rho_m()
    if rho is not None and not math.isfinite(rho):
        rho = None
    if curvature_gate and rho is not None and a >= rho:
        return InjectivityReport(rho, False, None, f"curvature bound violated: a = {a:g} >= rho_m = {rho:g}")

    s = np.arange(0.0, s_extent + 0.5 * ds, ds)
    u = np.linspace(-a, a, n_u + 2)[1:-1]
    S, U = np.meshgrid(s, u, indexing="ij")
    loc = curv.local(s)
    r = loc.phi[:, None] - U * (loc.df * loc.dphi)[:, None]
    z = np.asarray(profile.f(loc.phi))[:, None] + U * loc.dphi[:, None]

    neg = (r < -1e-12 * max(1.0, a)) & (S > 0)
    if np.any(neg):
        i, j = np.argwhere(neg)[0]
        return InjectivityReport(rho, False, ((S[i, j], U[i, j]), (S[i, j], -U[i, j])), "layer crosses the rotation axis")

    cell = a / 8.0
    xi0 = 0.0 if rho is None else a / rho
    local_reach = 2.0 * cell / max(1.0 - xi0, 1e-3) + 2.0 * max(ds, 2 * a / (n_u + 1))
    pts = np.column_stack((r.ravel(), z.ravel()))
    pre = np.column_stack((S.ravel(), U.ravel()))
    keys = np.floor(pts / cell).astype(np.int64)
    buckets: dict[tuple, list] = {}
    for idx, key in enumerate(map(tuple, keys)):
        buckets.setdefault(key, []).append(idx)
    for (kx, ky), members in buckets.items():
        cand = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cand.extend(buckets.get((kx + dx, ky + dy), ()))
        cand = np.array(cand)
        for idx in members:
            d_img = np.hypot(*(pts[cand] - pts[idx]).T)
            d_pre = np.hypot(*(pre[cand] - pre[idx]).T)
            hit = (d_img < cell) & (d_pre > local_reach)
            if np.any(hit):
                other = cand[np.argmax(hit)]
                return InjectivityReport(rho, False, (tuple(pre[idx]), tuple(pre[other])), "sampled self-overlap")
    return InjectivityReport(rho, True, None, "")


@dataclass(frozen=True)
class LimitRow:
    quantity: str
    measured: float
    limit: float

    @property
    def rel_error(self) -> float:
        return abs(self.measured - self.limit) / abs(self.limit)


def tail_limits(alpha: float, k: float) -> dict:
    """Large-``s`` limits of the rescaled arc-length and curvature quantities.

    ``phi ~ (s/k)**(1/alpha)`` and every derivative follows by differentiating
    the power law; the curvature constants follow by substituting these into
    the expressions of ``gamma`` and its derivatives on the power branch.
    """
    c = k ** (-1.0 / alpha)
    a = alpha
    lim = {
        "phi": c,
        "dphi": c / a,
        "ddphi": -(a - 1) / a**2 * c,
        "dddphi": (a - 1) * (2 * a - 1) / a**3 * c,
    }
    kap = a * (a - 1) * k
    P, D1, D2, D3 = lim["phi"], lim["dphi"], lim["ddphi"], lim["dddphi"]
    # leading powers of s cancel in each product below
    lim["gamma"] = kap * P ** (a - 2) * D1**3
    lim["dgamma"] = kap * (3 * P ** (a - 2) * D1**2 * D2 + (a - 2) * P ** (a - 3) * D1**4)
    lim["ddgamma"] = kap * (
        P ** (a - 2) * (6 * D1 * D2**2 + 3 * D1**2 * D3)
        + 7 * (a - 2) * P ** (a - 3) * D1**3 * D2
        + (a - 2) * (a - 3) * P ** (a - 4) * D1**5
    )
    return lim


TAIL_EXPONENTS = {
    "phi": lambda a: -1.0 / a,
    "dphi": lambda a: (a - 1) / a,
    "ddphi": lambda a: (2 * a - 1) / a,
    "dddphi": lambda a: (3 * a - 1) / a,
    "gamma": lambda a: (2 * a - 1) / a,
    "dgamma": lambda a: (3 * a - 1) / a,
    "ddgamma": lambda a: (4 * a - 1) / a,
}


@dataclass(frozen=True)
class LimitReport:
    rows: list
    s_eval: float
    short_window: bool

    def max_rel_error(self, names=None) -> float:
        return max(r.rel_error for r in self.rows if names is None or r.quantity in names)


def appendix_limits(arc: ArcLengthTable, curv: CurvatureTable, profile) -> LimitReport:
    """Compare rescaled tail values at ``s_max`` with their analytic limits."""
    if profile.is_flat:
        raise GeometryError("flat profile has no power-law tail")
    s_max = arc.s_max
    short = s_max < 100.0 * max(1.0, profile.R)
    if s_max / 2 <= profile.R:
        raise GeometryError("tail window [s_max/2, s_max] must lie beyond R")
    if short:
        warnings.warn("tail window spans fewer than two decades beyond R", RuntimeWarning, stacklevel=2)
    loc = curv.local(np.array([s_max]))
    lim = tail_limits(profile.alpha, profile.k)
    measured = {
        "phi": loc.phi[0],
        "dphi": loc.dphi[0],
        "ddphi": loc.ddphi[0],
        "dddphi": loc.dddphi[0],
        "gamma": loc.gamma[0],
        "dgamma": loc.dgamma[0],
        "ddgamma": loc.ddgamma[0],
    }
    rows = [
        LimitRow(name, float(measured[name] * s_max ** TAIL_EXPONENTS[name](profile.alpha)), float(lim[name]))
        for name in TAIL_EXPONENTS
    ]
    return LimitReport(rows, s_max, short)


TABLE_COLUMNS = ("s", "phi", "dphi", "ddphi", "dddphi", "gamma", "dgamma", "ddgamma", "kappa1", "kappa2", "M", "K")


def write_tables_csv(path, arc: ArcLengthTable, curv: CurvatureTable) -> None:
    cols = (arc.s, arc.phi, arc.dphi, arc.ddphi, arc.dddphi, curv.gamma, curv.dgamma, curv.ddgamma, curv.kappa1, curv.kappa2, curv.mean, curv.gauss)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_COLUMNS)
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])
