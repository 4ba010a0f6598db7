"""Metric and effective potentials on the straightened half-strip.

Coordinates ``(s, u)`` are arc length along the meridian and signed normal
offset, ``|u| < a``.  Every function here is vectorized over ``s`` and
``u`` (numpy broadcasting) and reads the geometry through a
:class:`~paralayer.geometry.CurvatureTable`.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .geometry import CurvatureTable, xi_zeta


class PotentialError(ValueError):
    """Point outside the layer, or half-width too large for the estimates."""


@dataclass(frozen=True)
class StripPoint:
    s: float
    u: float


class MetricField(tuple):
    """``(J, g)`` with ``J = 1 - u gamma`` and ``g = J**2``."""

    __slots__ = ()

    def __new__(cls, J, g):
        return super().__new__(cls, (J, g))

    @property
    def J(self):
        return self[0]

    @property
    def g(self):
        return self[1]


class Variant(enum.Enum):
    BOUND5 = "Bound5"
    LOWER6 = "Lower6"
    UPPER6 = "Upper6"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        for v in cls:
            if str(value).lower() in (v.value.lower(), v.name.lower()):
                return v
        raise PotentialError(f"unknown potential variant {value!r}")


def _xi(curv: CurvatureTable, a: float, p: float) -> tuple[float, float]:
    xi, zeta = xi_zeta(curv, a, p)
    if not xi < 1:
        raise PotentialError(f"xi_{p:g} = {xi:.6g} >= 1: half-width {a:g} too large for the bounds")
    return xi, zeta


def jacobian(s, u, curv: CurvatureTable) -> MetricField:
    """Jacobian ``J = 1 - u gamma(s)`` of the straightening map and ``g = J**2``."""
    s, u = np.broadcast_arrays(np.asarray(s, float), np.asarray(u, float))
    gamma = curv.local(s).gamma
    J = 1.0 - u * gamma
    if np.any(J <= 0):
        raise PotentialError("non-positive Jacobian: half-width exceeds the curvature radius")
    return MetricField(J, J * J)


def centrifugal_radius(s, u, curv: CurvatureTable, loc=None) -> np.ndarray:
    """Distance ``phi - u f'(phi) phi'`` of the point ``tau(s, u)`` from the axis."""
    if loc is None:
        loc = curv.local(s)
    return loc.phi - u * loc.df * loc.dphi


def potential_full(s, u, m: int, curv: CurvatureTable) -> np.ndarray:
    """Curvature-induced plus centrifugal potential of the ``m``-th fiber.

    ``V_m = u gamma''/(2 g^{3/2}) - gamma^2/(4 g) - 5 u^2 gamma'^2/(4 g^2) + (m^2 - 1/4)/r^2``
    where ``r`` is the distance to the rotation axis.  On the axis (``s = 0``)
    the centrifugal term is infinite with the sign of ``m^2 - 1/4``.
    """
    m = abs(int(m))
    s, u = np.broadcast_arrays(np.asarray(s, float), np.asarray(u, float))
    loc = curv.local(s)
    J = 1.0 - u * loc.gamma
    if np.any(J <= 0):
        raise PotentialError("non-positive Jacobian: half-width exceeds the curvature radius")
    g = J * J
    r = centrifugal_radius(s, u, curv, loc)
    on_axis = s == 0
    if np.any((r <= 0) & ~on_axis):
        raise PotentialError("point lies across the rotation axis")
    num = m * m - 0.25
    with np.errstate(divide="ignore"):
        vc = np.where(on_axis, math.copysign(math.inf, num), num / np.where(on_axis, 1.0, r) ** 2)
    curvature = u * loc.ddgamma / (2 * g**1.5) - loc.gamma**2 / (4 * g) - 1.25 * u**2 * loc.dgamma**2 / g**2
    return curvature + vc


def potential_W(s, p: float, a: float, curv: CurvatureTable) -> np.ndarray:
    """One-dimensional majorant of ``V_0`` on ``s >= p``."""
    xi, _ = _xi(curv, a, p)
    loc = curv.local(np.asarray(s, float))
    with np.errstate(divide="ignore"):
        return a * np.abs(loc.ddgamma) / (2 * (1 - xi) ** 3) - 1.0 / (4 * (1 + xi) ** 2 * loc.phi**2)


def potential_U_upper(s, p: float, a: float, curv: CurvatureTable) -> np.ndarray:
    """One-dimensional minorant of ``V_0`` on ``s >= p``."""
    xi, _ = _xi(curv, a, p)
    loc = curv.local(np.asarray(s, float))
    d = 1 - xi
    with np.errstate(divide="ignore"):
        return (
            -loc.gamma**2 / (4 * d**2)
            - 5 * a**2 * loc.dgamma**2 / (4 * d**4)
            - a * np.abs(loc.ddgamma) / (2 * d**3)
            - 1.0 / (4 * d**2 * loc.phi**2)
        )


def potential_U_m(s, m: int, a: float, curv: CurvatureTable) -> np.ndarray:
    """Minorant used for the non-radial fibers; positive everywhere once ``|m|`` is large."""
    m = abs(int(m))
    xi0, _ = _xi(curv, a, 0.0)
    loc = curv.local(np.asarray(s, float))
    phi2 = loc.phi**2
    d = 1 - xi0
    bracket = (
        (m * m - 0.25) / (1 + xi0) ** 2
        - phi2 * loc.gamma**2 / (4 * d**2)
        - a * phi2 * np.abs(loc.ddgamma) / (2 * d**3)
        - 1.25 * a**2 * phi2 * loc.dgamma**2 / d**4
    )
    with np.errstate(divide="ignore"):
        return bracket / phi2


def potential_U_m_bracket(s, m: int, a: float, curv: CurvatureTable) -> np.ndarray:
    """``phi^2 U_m``: same sign as ``U_m`` and finite on the axis."""
    m = abs(int(m))
    xi0, _ = _xi(curv, a, 0.0)
    loc = curv.local(np.asarray(s, float))
    phi2 = loc.phi**2
    d = 1 - xi0
    return (
        (m * m - 0.25) / (1 + xi0) ** 2
        - phi2 * loc.gamma**2 / (4 * d**2)
        - a * phi2 * np.abs(loc.ddgamma) / (2 * d**3)
        - 1.25 * a**2 * phi2 * loc.dgamma**2 / d**4
    )


def smallest_positive_mode(a: float, curv: CurvatureTable, s=None, m_max: int = 1000) -> int | None:
    """Smallest ``M`` with ``U_m > 0`` on the sample for every ``|m| >= M``.

    ``U_m`` increases with ``|m|``, so the first positive ``m`` is the answer.
    """
    if s is None:
        s = curv.s
    for m in range(0, m_max + 1):
        if np.all(potential_U_m_bracket(s, m, a, curv) > 0):
            return m
    return None


def potential_q(variant, t, p: float, a: float, curv: CurvatureTable) -> np.ndarray:
    """Effective half-line potential at half-line coordinate ``t >= 0``.

    ``Bound5`` lives on the whole meridian (``t = s``).  ``Lower6`` and
    ``Upper6`` describe the strip cut at ``s = p``: the half-line coordinate
    is ``t = s - p``, so they evaluate ``W_p`` and ``U_p`` at ``s = t + p``
    and rescale by ``(1 - xi_p)^2`` and ``(1 + xi_p)^2`` respectively.
    """
    variant = Variant.parse(variant)
    t = np.asarray(t, float)
    if np.any(t < 0):
        raise PotentialError("half-line coordinate must be non-negative")
    if variant is Variant.BOUND5:
        xi0, zeta0 = _xi(curv, a, 0.0)
        loc = curv.local(t)
        return -(loc.gamma**2 / 4 + a * np.abs(loc.ddgamma) / (2 * (1 - xi0)) + 1.25 * a**2 * loc.dgamma**2 / (1 - xi0) ** 2) / zeta0
    xi, _ = _xi(curv, a, p)
    if variant is Variant.LOWER6:
        return potential_W(t + p, p, a, curv) * (1 - xi) ** 2
    return potential_U_upper(t + p, p, a, curv) * (1 + xi) ** 2


def tail_constant(variant, p: float, a: float, curv: CurvatureTable) -> tuple[float, float]:
    """``(beta, c)`` with ``q(t) ~ -c t**-beta`` for the cut-strip variants."""
    variant = Variant.parse(variant)
    prof = curv.profile
    beta = 2.0 / prof.alpha
    _, zeta = _xi(curv, a, p)
    base = prof.k ** (2.0 / prof.alpha) / 4
    if variant is Variant.LOWER6:
        return beta, zeta * base
    if variant is Variant.UPPER6:
        return beta, base / zeta
    return 2.0, 0.0


def robin_coefficient(p: float, u, curv: CurvatureTable) -> np.ndarray:
    """Boundary coupling ``gamma'(p) u / (2 J(p, u)**3)`` at the cut ``s = p``."""
    u = np.asarray(u, float)
    loc = curv.local(np.array([p]))
    J = 1.0 - u * loc.gamma[0]
    if np.any(J <= 0):
        raise PotentialError("non-positive Jacobian at the cut")
    return loc.dgamma[0] * u / (2 * J**3)


def robin_bound(p: float, a: float, curv: CurvatureTable) -> float:
    """Lower bound ``-a |gamma'(p)| / (2 (1 - xi_p)^3)`` of the boundary coupling."""
    xi, _ = _xi(curv, a, p)
    dg = float(curv.local(np.array([p])).dgamma[0])
    return -a * abs(dg) / (2 * (1 - xi) ** 3)


def robin_sigma_1d(p: float, a: float, curv: CurvatureTable) -> float:
    """Boundary coefficient of the rank-one perturbed half-line form."""
    xi, zeta = _xi(curv, a, p)
    dg = float(curv.local(np.array([p])).dgamma[0])
    return -a * abs(dg) / (2 * (1 - xi) * zeta)


def write_trace_csv(path, s, u, m: int, p: float, a: float, curv: CurvatureTable, variant="Lower6") -> None:
    """Potential trace along ``s`` at fixed offset ``u``: ``(s, u, V_m, W_p, U_p, q)``."""
    s = np.asarray(s, float)
    V = potential_full(s, u, m, curv)
    W = potential_W(s, p, a, curv)
    U = potential_U_upper(s, p, a, curv)
    q = potential_q(variant, np.maximum(s - p, 0.0), p, a, curv)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "u", "V_m", "W_p", "U_p", f"q_{Variant.parse(variant).value}"])
        for row in zip(s, np.broadcast_to(u, s.shape), V, W, U, q):
            w.writerow([f"{x:.17g}" for x in row])
