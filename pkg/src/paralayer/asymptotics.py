"""Counting law of the layer and the one-dimensional ratio study.

The layer's discrete spectrum below ``lambda_e = (pi/2a)^2`` accumulates at
the threshold with ``N(lambda_e - E) ~ g_{alpha,k}(E)`` as ``E -> 0``.  The
ratio study compares ``g`` with counts of the two half-line comparison
operators (``Lower6`` with Dirichlet at the cut, ``Upper6`` with the
boundary coupling) whose counts bracket the layer count.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import betaln

from . import geometry, potentials, spec1d

log = logging.getLogger(__name__)


class StudyError(ValueError):
    pass


@dataclass(frozen=True)
class AsymptoticLaw:
    """``g(E) = coefficient * E**-exponent``."""

    alpha: float
    k: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1 (the Beta factor has a pole at 1), got {self.alpha}")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")

    @property
    def exponent(self) -> float:
        return self.alpha / 2 - 0.5

    @property
    def coefficient(self) -> float:
        a = self.alpha
        return math.exp(math.log(a * self.k / 2**a) + betaln(1.5, self.exponent)) / (2 * math.pi)

    def __call__(self, E: float) -> float:
        if not E > 0:
            raise ValueError(f"E must be positive, got {E}")
        return self.coefficient * E ** (-self.exponent)


def g_alpha_k(alpha: float, k: float, E: float) -> float:
    """Leading term of the counting function below ``lambda_e - E``.

    For ``alpha = 2`` this is ``k / (8 sqrt(E))``.
    """
    return AsymptoticLaw(alpha, k)(E)


def conical_reference(k: float, E: float) -> float:
    """Logarithmic comparison curve ``(k / 4 pi) |ln E|`` for ``E in (0, 1)``."""
    if not 0 < E < 1:
        raise ValueError(f"E must lie in (0, 1), got {E}")
    return k / (4 * math.pi) * abs(math.log(E))


def transverse_level(n: int, a: float) -> float:
    """Dirichlet level ``(n pi / 2a)^2`` of the cross-section ``(-a, a)``."""
    if n < 1:
        raise ValueError("n starts at 1")
    return (n * math.pi / (2 * a)) ** 2


def ratio_band(alpha: float, xi: float, zeta: float) -> tuple[float, float]:
    """Pre-limit ratio bounds ``(zeta^{a/2} (1-xi)^{1-a}, zeta^{-a/2} (1+xi)^{1-a})``."""
    return (zeta ** (alpha / 2) * (1 - xi) ** (1 - alpha), zeta ** (-alpha / 2) * (1 + xi) ** (1 - alpha))


# ------------------------------------------------------------------- study


@dataclass(frozen=True)
class StudyConfig:
    alpha: float = 2.0
    k: float = 1.0
    a: float = 0.3
    p: float = 20.0
    h: float = 0.1
    safety: float = 3.0
    R: float = 0.0
    cap: str = "PurePower"

    def profile(self) -> geometry.LayerProfile:
        return geometry.LayerProfile(self.alpha, self.k, self.R, geometry.Cap.parse(self.cap))


@dataclass(frozen=True)
class StudyRow:
    E: float
    count_lower: int
    count_upper: int
    asymptote: float

    @property
    def ratio_lower(self) -> float:
        return self.count_lower / self.asymptote if self.asymptote > 0 else 0.0

    @property
    def ratio_upper(self) -> float:
        return self.count_upper / self.asymptote if self.asymptote > 0 else 0.0


@dataclass
class StudyResult:
    rows: list[StudyRow]
    band: tuple[float, float]
    xi: float
    zeta: float
    meta: dict = field(default_factory=dict)

    def in_band(self, slack: float = 0.0) -> list[tuple[bool, bool]]:
        lo, hi = self.band[0] - slack, self.band[1] + slack
        return [(lo <= r.ratio_lower <= hi, lo <= r.ratio_upper <= hi) for r in self.rows]

    def passes(self, tol: float = 0.1) -> bool:
        """One-sided proxy test: lower ratios at most ``1 + tol``, upper
        ratios at least ``1 - tol``, and both trending toward 1."""
        ok = all(r.ratio_lower <= 1 + tol and r.ratio_upper >= 1 - tol for r in self.rows)
        return ok and self.trending()

    def trending(self) -> bool:
        """Ratios at the smallest ``E`` closer to 1 than at the largest ``E``."""
        first = max(self.rows, key=lambda r: r.E)
        last = min(self.rows, key=lambda r: r.E)
        return (abs(last.ratio_lower - 1) < abs(first.ratio_lower - 1)
                and abs(last.ratio_upper - 1) < abs(first.ratio_upper - 1))


def proxy_counts(
    q_lower: Callable[[np.ndarray], np.ndarray],
    q_upper: Callable[[np.ndarray], np.ndarray],
    sigma_upper: float,
    E_list: Sequence[float],
    scale_lower: float,
    scale_upper: float,
    L: float,
    h: float,
    asymptote: Callable[[float], float],
    workers: int = 1,
) -> list[StudyRow]:
    """Counts of ``h_{q_lower}`` below ``-E scale_lower`` and of the
    boundary-coupled ``h_{q_upper}`` below ``-E scale_upper``.

    Both operators are assembled once on ``(0, L)`` with spacing ``h``.
    """
    if len(E_list) == 0:
        raise StudyError("E_list is empty")
    grid = spec1d.Grid1D.with_spacing(L, h)
    lo = spec1d.discretize(q_lower, grid)
    up = spec1d.discretize(q_upper, grid, spec1d.RobinLeft(sigma_upper))

    def one(E):
        return StudyRow(float(E), spec1d.count_below(lo, -E * scale_lower),
                        spec1d.count_below(up, -E * scale_upper), float(asymptote(E)))

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, E_list))
    return [one(E) for E in E_list]


def ratio_study(config: StudyConfig, E_list: Sequence[float], curv=None, workers: int = 1) -> StudyResult:
    """Compare the half-line proxy counts with ``g_{alpha,k}`` at each ``E``.

    The truncation length follows the turning-point law of the stronger
    (upper) tail at the smallest ``E``.
    """
    E_list = [float(E) for E in E_list]
    if not E_list:
        raise StudyError("E_list is empty")
    if min(E_list) <= 0:
        raise StudyError("energies must be positive")
    law = AsymptoticLaw(config.alpha, config.k)
    prof = config.profile()
    beta = 2.0 / config.alpha
    c_up = config.k ** beta / 4
    if curv is None:
        # the upper tail constant is c_up / zeta_p <= c_up / zeta_0; size the table generously
        L_guess = spec1d.truncation_length(4 * c_up, beta, min(E_list), config.safety)
        curv = geometry.build(prof, L_guess + config.p + 10.0, n=4000)
    xi, zeta = potentials.xi_zeta(curv, config.a, config.p)
    _, c = potentials.tail_constant("Upper6", config.p, config.a, curv)
    L = spec1d.truncation_length(c, beta, min(E_list), config.safety)
    if L + config.p > curv.s[-1]:
        curv = geometry.build(prof, L + config.p + 10.0, n=4000)
    sigma = potentials.robin_sigma_1d(config.p, config.a, curv)
    rows = proxy_counts(
        lambda t: potentials.potential_q("Lower6", t, config.p, config.a, curv),
        lambda t: potentials.potential_q("Upper6", t, config.p, config.a, curv),
        sigma, E_list, (1 - xi) ** 2, (1 + xi) ** 2, L, config.h, law, workers,
    )
    meta = {"L": L, "h": config.h, "sigma": sigma, "backend": spec1d.kernels.BACKEND}
    return StudyResult(rows, ratio_band(config.alpha, xi, zeta), xi, zeta, meta)


def band_sequence(curv, alpha: float, a: float, p_values: Sequence[float]) -> list[tuple[float, float, float]]:
    """``(p, lower, upper)`` band edges along a sequence of cuts."""
    out = []
    for p in p_values:
        xi, zeta = potentials.xi_zeta(curv, a, p)
        out.append((float(p), *ratio_band(alpha, xi, zeta)))
    return out


STUDY_COLUMNS = ("E", "count_lower", "count_upper", "asymptote", "ratio_lower", "ratio_upper")


def write_study_csv(path, rows: Sequence[StudyRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STUDY_COLUMNS)
        for r in rows:
            w.writerow([f"{r.E:.17g}", r.count_lower, r.count_upper, f"{r.asymptote:.17g}",
                        f"{r.ratio_lower:.17g}", f"{r.ratio_upper:.17g}"])


def plot_study_svg(path, result: StudyResult) -> None:
    """Log-log plot of both ratios against ``E`` with the pre-limit band."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    E = np.array([r.E for r in result.rows])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.axhspan(*result.band, color="0.9", label="pre-limit band")
    ax.axhline(1.0, color="0.5", lw=0.8)
    ax.semilogx(E, [r.ratio_lower for r in result.rows], "o-", label="lower proxy")
    ax.semilogx(E, [r.ratio_upper for r in result.rows], "s-", label="upper proxy")
    ax.set_xlabel("E")
    ax.set_ylabel("count / g(E)")
    ax.invert_xaxis()
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
