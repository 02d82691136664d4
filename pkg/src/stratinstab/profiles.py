"""Shear/stratification equilibria and Richardson-number diagnostics.

An equilibrium is a pair ``(rho_s(z), U_s(z))`` on the channel ``[-1, 1]``.
Profiles are plain evaluation maps, so derivative chains stay exact for the
analytic families (tanh, Couette).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import AlphaOutOfRange, DegenerateShear, NonMonotoneShear

ArrayFn = Callable[[np.ndarray], np.ndarray]

_SAMPLE_GRID = np.linspace(-1.0, 1.0, 1001)
_N_SIMPSON = 4097


@dataclass(frozen=True)
class ShearProfile:
    """Horizontal velocity ``U_s`` with its first three derivatives."""

    eval: ArrayFn
    d1: ArrayFn
    d2: ArrayFn
    d3: ArrayFn
    sup_norm: float
    kind: str
    beta: Optional[float] = None

    def __call__(self, z):
        return self.eval(z)

    def strictly_monotone(self, z: np.ndarray = _SAMPLE_GRID) -> bool:
        d = np.asarray(self.d1(z))
        return bool(np.all(d > 0) or np.all(d < 0))


def tanh_shear(beta: float) -> ShearProfile:
    """``U_s(z) = tanh(beta z)``."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    b = float(beta)

    def f(z):
        return np.tanh(b * np.asarray(z, dtype=float))

    def d1(z):
        return b / np.cosh(b * np.asarray(z, dtype=float)) ** 2

    def d2(z):
        t = np.tanh(b * np.asarray(z, dtype=float))
        return -2.0 * b * b * t * (1.0 - t * t)

    def d3(z):
        t = np.tanh(b * np.asarray(z, dtype=float))
        s2 = 1.0 - t * t
        return -2.0 * b**3 * s2 * (1.0 - 3.0 * t * t)

    return ShearProfile(f, d1, d2, d3, sup_norm=float(np.tanh(b)), kind="tanh", beta=b)


def couette_shear() -> ShearProfile:
    """``U_s(z) = z``."""

    def f(z):
        return np.asarray(z, dtype=float) * 1.0

    def one(z):
        return np.ones_like(np.asarray(z, dtype=float))

    def zero(z):
        return np.zeros_like(np.asarray(z, dtype=float))

    return ShearProfile(f, one, zero, zero, sup_norm=1.0, kind="couette")


def custom_shear(f: ArrayFn, d1: ArrayFn, d2: ArrayFn, d3: ArrayFn) -> ShearProfile:
    sup = float(np.max(np.abs(f(np.linspace(-1.0, 1.0, 4001)))))
    return ShearProfile(f, d1, d2, d3, sup_norm=sup, kind="custom")


@dataclass(frozen=True)
class Stratification:
    """Background density ``rho_s`` with two derivatives."""

    eval: ArrayFn
    d1: ArrayFn
    d2: ArrayFn

    def __call__(self, z):
        return self.eval(z)

    def stable(self, z: np.ndarray = _SAMPLE_GRID) -> bool:
        """True when ``rho_s' < 0`` at every sample point."""
        return bool(np.all(np.asarray(self.d1(z)) < 0))


def linear_stratification(slope: float) -> Stratification:
    """``rho_s(z) = slope * z``."""
    s = float(slope)
    return Stratification(
        eval=lambda z: s * np.asarray(z, dtype=float),
        d1=lambda z: s * np.ones_like(np.asarray(z, dtype=float)),
        d2=lambda z: np.zeros_like(np.asarray(z, dtype=float)),
    )


def homogeneous() -> Stratification:
    return linear_stratification(0.0)


@dataclass(frozen=True)
class StratifiedEquilibrium:
    shear: ShearProfile
    strat: Stratification
    # Friedlander parameter; None for equilibria not built by build_friedlander.
    alpha: Optional[float] = None

    @property
    def is_friedlander(self) -> bool:
        return self.alpha is not None

    def friedlander_defect(self, n: int = 1000) -> float:
        """Relative max of ``|rho_s' + a(1-a) U_s'^2|`` on ``n`` points."""
        if self.alpha is None:
            raise ValueError("not a Friedlander equilibrium")
        z = np.linspace(-1.0, 1.0, n)
        a = self.alpha * (1.0 - self.alpha)
        u1 = self.shear.d1(z)
        scale = max(1.0, a * float(np.max(u1 * u1)))
        return float(np.max(np.abs(self.strat.d1(z) + a * u1 * u1))) / scale


def couette_stable() -> StratifiedEquilibrium:
    """``U_s = z``, ``rho_s = -z``: Richardson number identically 1."""
    return StratifiedEquilibrium(couette_shear(), linear_stratification(-1.0))


def check_alpha(alpha: float, allow_half: bool = False) -> float:
    """Validate a Friedlander parameter; ``allow_half`` admits the marginal 1/2."""
    a = float(alpha)
    lo_ok = a >= 0.5 if allow_half else a > 0.5
    if not (np.isfinite(a) and lo_ok and a <= 1.0):
        raise AlphaOutOfRange(f"AlphaOutOfRange: alpha={alpha!r} not in (1/2, 1]")
    return a


def build_friedlander(shear: ShearProfile, alpha: float) -> StratifiedEquilibrium:
    """Stratification with ``-rho_s' = alpha (1 - alpha) U_s'^2``.

    Tanh shears use the closed-form antiderivative; other shears get a
    composite-Simpson antiderivative on 4097 points, normalised to
    ``rho_s(0) = 0``. The derivatives are always evaluated exactly from the
    shear, only ``rho_s`` itself is tabulated.

    ``alpha = 1/2`` is accepted (marginal Miles-Howard profile, Ri = 1/4) even
    though the dispersion solvers need ``alpha > 1/2``.
    """
    a = check_alpha(alpha, allow_half=True)
    if not shear.strictly_monotone():
        raise NonMonotoneShear("NonMonotoneShear: U_s' changes sign on [-1, 1]")
    amp = a * (1.0 - a)

    def d1(z):
        u1 = shear.d1(z)
        return -amp * u1 * u1

    def d2(z):
        return -2.0 * amp * shear.d1(z) * shear.d2(z)

    if shear.kind == "tanh":
        b = shear.beta

        def rho(z):
            t = np.tanh(b * np.asarray(z, dtype=float))
            return amp * (-b * t + (b / 3.0) * t**3)

    else:
        rho = _tabulated_antiderivative(d1)
    return StratifiedEquilibrium(shear, Stratification(rho, d1, d2), alpha=a)


def _tabulated_antiderivative(deriv: ArrayFn) -> ArrayFn:
    zs = np.linspace(-1.0, 1.0, _N_SIMPSON)
    vals = cumulative_simpson(deriv(zs), x=zs, initial=0.0)
    vals -= vals[(_N_SIMPSON - 1) // 2]
    spline = CubicSpline(zs, vals)
    return lambda z: spline(np.asarray(z, dtype=float))


def numerical_antiderivative(eq: StratifiedEquilibrium) -> ArrayFn:
    """Simpson antiderivative of ``rho_s'`` (normalised at 0), for cross-checks."""
    return _tabulated_antiderivative(eq.strat.d1)


def richardson(eq: StratifiedEquilibrium, z) -> float:
    """Local Richardson number ``-rho_s'(z) / U_s'(z)^2``."""
    u1 = float(eq.shear.d1(np.asarray(float(z))))
    if u1 * u1 < np.finfo(float).tiny:
        raise DegenerateShear(f"DegenerateShear: U_s'({z}) = {u1:g}")
    return float(-eq.strat.d1(np.asarray(float(z))) / (u1 * u1))


@dataclass(frozen=True)
class RichardsonReport:
    min_ri: float
    argmin_z: float
    miles_howard_satisfied: bool
    samples: list = field(default_factory=list)


def miles_howard_check(eq: StratifiedEquilibrium, n_samples: int = 401) -> RichardsonReport:
    """Sample ``Ri`` on ``n_samples`` interior points; Ri >= 1/4 counts as stable."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    h = 2.0 / (n_samples + 1)
    zs = -1.0 + h * np.arange(1, n_samples + 1)
    ris = [richardson(eq, z) for z in zs]
    i = int(np.argmin(ris))
    return RichardsonReport(
        min_ri=float(ris[i]),
        argmin_z=float(zs[i]),
        miles_howard_satisfied=bool(ris[i] >= 0.25),
        samples=[(float(z), float(r)) for z, r in zip(zs, ris)],
    )
