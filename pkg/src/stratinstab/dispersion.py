"""Dispersion functions for the hydrostatic and long-wave Taylor-Goldstein problems.

With ``phi = (U - c)^alpha psi`` the Taylor-Goldstein equation for a Friedlander
equilibrium becomes the Volterra-type fixed point problem

    psi = D + (1 - alpha) S[psi] + kappa^2 S~[psi],

    D(z)     = int_{-1}^z (U - c)^{-2 alpha}
    S[f](z)  = int_{-1}^z (U - c)^{-2 alpha} int_{-1}^r (U - c)^{2 alpha - 1} U'' f
    S~[f](z) = int_{-1}^z (U - c)^{-2 alpha} int_{-1}^r (U - c)^{2 alpha} f

which is solved by its Neumann series. Unstable phase speeds are the zeros of
``psi(1)`` in the upper half-plane. ``shoot_tg`` integrates the original ODE
and gives an independent characterisation of the same zeros.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    BranchViolation,
    NonContractive,
    NonMonotoneShear,
    NotFriedlander,
    ToleranceNotReached,
)
from .profiles import StratifiedEquilibrium
from .quadrature import PanelGrid, adaptive_edges

DEFAULT_PANELS = 64
DEFAULT_TOL = 1e-12
SHOOT_STEPS = 4096


@dataclass(frozen=True)
class DispersionQuery:
    c: complex
    equilibrium: StratifiedEquilibrium
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")

    @property
    def alpha(self) -> float:
        a = self.equilibrium.alpha
        if a is None:
            raise NotFriedlander("NotFriedlander: equilibrium has no Friedlander parameter")
        return a

    def with_c(self, c) -> "DispersionQuery":
        return DispersionQuery(c, self.equilibrium, self.kappa)


@dataclass
class NeumannSolution:
    """Series solution on ``z = [-1, grid nodes..., 1]``."""

    z: np.ndarray
    psi: np.ndarray
    terms_used: int
    fixed_point_residual: float
    contraction_estimate: float
    grid: PanelGrid = field(repr=False)

    @property
    def end_value(self) -> complex:
        return complex(self.psi[-1])


@dataclass(frozen=True)
class DispersionValue:
    value: complex
    estimated_error: float


def _require_upper(c: complex):
    if not c.imag > 0:
        raise BranchViolation(f"BranchViolation: Im(c) = {c.imag:g} must be > 0")


def _power(U, c: complex, p: float):
    # principal branch; U - c stays in the lower half-plane when Im c > 0
    return np.exp(p * np.log(U - c))


def critical_grid(q: DispersionQuery, n_panels: int = DEFAULT_PANELS, rtol: float = 1e-13) -> PanelGrid:
    """Uniform panels, bisected further wherever the kernel ``(U - c)^{-2a}``
    is not resolved (near the critical layer ``U(z) = Re c``)."""
    c = q.c
    a = q.equilibrium.alpha if q.equilibrium.alpha is not None else 1.0
    U = q.equilibrium.shear.eval

    def kernel(z):
        return _power(U(z), c, -2.0 * a)

    return PanelGrid(adaptive_edges(kernel, n_start=n_panels, rtol=rtol))


def _power_integral(shear, alpha: float, c: complex, z: float, grid: Optional[PanelGrid] = None) -> complex:
    """``int_{-1}^z (U - c)^{-2 alpha}`` on the principal branch, any ``c`` off the real axis."""
    if z <= -1.0:
        return 0j
    if grid is None:
        edges = adaptive_edges(lambda r: _power(shear.eval(r), c, -2.0 * alpha), -1.0, z, n_start=32)
        grid = PanelGrid(edges)
    else:
        grid = PanelGrid(np.concatenate((grid.edges[grid.edges < z], [z]))) if z < 1.0 else grid
    return complex(grid.integral(_power(shear.eval(grid.nodes), c, -2.0 * alpha)))


def d_alpha(q: DispersionQuery, z: float) -> complex:
    """``D_alpha^z(c) = int_{-1}^z (U - c)^{-2 alpha} dr``."""
    _require_upper(q.c)
    if not -1.0 <= z <= 1.0:
        raise ValueError("z must lie in [-1, 1]")
    return _power_integral(q.equilibrium.shear, q.alpha, q.c, float(z))


class _Kernels:
    """Node samples of the weights that enter S and S~ for one query."""

    def __init__(self, q: DispersionQuery, grid: PanelGrid):
        _require_upper(q.c)
        a = q.alpha
        sh = q.equilibrium.shear
        U = sh.eval(grid.nodes)
        if np.any(np.imag(U - q.c) >= 0):
            raise BranchViolation("BranchViolation: U - c left the lower half-plane")
        self.grid = grid
        self.outer = _power(U, q.c, -2.0 * a)
        self.inner_s = _power(U, q.c, 2.0 * a - 1.0) * sh.d2(grid.nodes)
        self.inner_t = _power(U, q.c, 2.0 * a)

    def nested(self, inner_weight, f):
        """Node values and right-end value of ``int outer * cum(inner_weight * f)``."""
        g = self.outer * self.grid.cumulative(inner_weight * f)
        return self.grid.cumulative(g), complex(self.grid.integral(g))


def _grid_for(q: DispersionQuery, grid: Optional[PanelGrid]) -> PanelGrid:
    return grid if grid is not None else critical_grid(q)


def apply_S(f: np.ndarray, q: DispersionQuery, grid: Optional[PanelGrid] = None) -> np.ndarray:
    """Nested operator ``S`` on grid-node samples ``f``; returns node values."""
    k = _Kernels(q, _grid_for(q, grid))
    return k.nested(k.inner_s, np.asarray(f, dtype=complex))[0]


def apply_S_tilde(f: np.ndarray, q: DispersionQuery, grid: Optional[PanelGrid] = None) -> np.ndarray:
    """Composed long-wave operator ``S~`` (outer integral included); vanishes at -1."""
    k = _Kernels(q, _grid_for(q, grid))
    return k.nested(k.inner_t, np.asarray(f, dtype=complex))[0]


def solve_neumann(
    q: DispersionQuery,
    tol: float = DEFAULT_TOL,
    max_terms: int = 200,
    grid: Optional[PanelGrid] = None,
) -> NeumannSolution:
    """Sum ``sum_n K^n D`` with ``K = (1 - a) S + kappa^2 S~``.

    Stops once the newest term satisfies ``|t_n| < tol (1 - ratio)`` where
    ``ratio`` is the measured ratio of successive term sup-norms.
    """
    grid = _grid_for(q, grid)
    k = _Kernels(q, grid)
    a = q.alpha
    ks = 1.0 - a
    kt = q.kappa**2

    def K(f):
        node = np.zeros(f.size, dtype=complex)
        end = 0j
        if ks != 0.0:
            n, e = k.nested(k.inner_s, f)
            node += ks * n
            end += ks * e
        if kt != 0.0:
            n, e = k.nested(k.inner_t, f)
            node += kt * n
            end += kt * e
        return node, end

    term = grid.cumulative(k.outer)
    term_end = complex(grid.integral(k.outer))
    psi = term.copy()
    psi_end = term_end
    terms = 1
    ratio = 0.0
    bad = 0
    prev = max(np.max(np.abs(term)), abs(term_end))
    if ks != 0.0 or kt != 0.0:
        while True:
            if terms >= max_terms:
                raise ToleranceNotReached(
                    f"ToleranceNotReached: {max_terms} terms, last ratio {ratio:.3g}"
                )
            term, term_end = K(term)
            terms += 1
            psi += term
            psi_end += term_end
            size = max(np.max(np.abs(term)), abs(term_end))
            ratio = size / prev if prev > 0 else 0.0
            prev = size
            bad = bad + 1 if ratio >= 1.0 else 0
            if bad >= 3:
                raise NonContractive(
                    f"NonContractive: term ratio {ratio:.3g} >= 1 at c={q.c}"
                )
            scale = max(np.max(np.abs(psi)), abs(psi_end))
            if ratio < 1.0 and size <= tol * scale * (1.0 - ratio):
                break
            if size == 0.0:
                break
    # a-posteriori check of psi = D + K psi
    d_node = grid.cumulative(k.outer)
    d_end = complex(grid.integral(k.outer))
    kn, ke = K(psi)
    res = max(np.max(np.abs(psi - d_node - kn)), abs(psi_end - d_end - ke))
    scale = max(np.max(np.abs(psi)), abs(psi_end))
    z = np.concatenate(([-1.0], grid.nodes, [1.0]))
    full = np.concatenate(([0j], psi, [psi_end]))
    return NeumannSolution(z, full, terms, float(res / scale), float(ratio), grid)


def dispersion_value(q: DispersionQuery, tol: float = DEFAULT_TOL, grid: Optional[PanelGrid] = None) -> DispersionValue:
    """``psi(1)`` together with the change under panel doubling."""
    grid = _grid_for(q, grid)
    v = solve_neumann(q, tol, grid=grid).end_value
    v2 = solve_neumann(q, tol, grid=grid.refined()).end_value
    return DispersionValue(v2, abs(v2 - v))


def dispersion_function(
    equilibrium: StratifiedEquilibrium,
    kappa: float = 0.0,
    tol: float = DEFAULT_TOL,
) -> Callable[[complex], complex]:
    """Cheap handle ``c -> psi(1)`` (single resolution) for root finding."""

    def f(c):
        return solve_neumann(DispersionQuery(c, equilibrium, kappa), tol).end_value

    return f


class _ShootingTable:
    """Equilibrium samples at the RK4 stage points; independent of ``c``."""

    def __init__(self, eq: StratifiedEquilibrium, n_steps: int):
        h = 2.0 / n_steps
        zs = -1.0 + 0.5 * h * np.arange(2 * n_steps + 1)
        self.h = h
        self.n = n_steps
        self.U = eq.shear.eval(zs)
        self.U2 = eq.shear.d2(zs)
        self.R1 = eq.strat.d1(zs)


def _shoot(table: _ShootingTable, c: complex, kappa: float, full: bool = False):
    w = table.U - c
    coef = (kappa * kappa + table.U2 / w + table.R1 / (w * w)).tolist()
    h = table.h
    h2 = 0.5 * h
    h6 = h / 6.0
    y, p = 0j, 1 + 0j
    ys = [y] if full else None
    ps = [p] if full else None
    for i in range(table.n):
        q0 = coef[2 * i]
        qm = coef[2 * i + 1]
        q1 = coef[2 * i + 2]
        k1y, k1p = p, q0 * y
        y2 = y + h2 * k1y
        p2 = p + h2 * k1p
        k2y, k2p = p2, qm * y2
        y3 = y + h2 * k2y
        p3 = p + h2 * k2p
        k3y, k3p = p3, qm * y3
        y4 = y + h * k3y
        p4 = p + h * k3p
        k4y, k4p = p4, q1 * y4
        y = y + h6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        p = p + h6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if full:
            ys.append(y)
            ps.append(p)
    if full:
        return np.array(ys), np.array(ps)
    return y


def shoot_tg(q: DispersionQuery, n_steps: int = SHOOT_STEPS) -> complex:
    """``phi(1)`` for ``phi'' = [kappa^2 + U''/(U-c) + rho'/(U-c)^2] phi``,
    ``phi(-1) = 0``, ``phi'(-1) = 1``, by fixed-step RK4."""
    _require_upper(q.c)
    return _shoot(_ShootingTable(q.equilibrium, n_steps), q.c, q.kappa)


def shooting_function(
    equilibrium: StratifiedEquilibrium, kappa: float = 0.0, n_steps: int = SHOOT_STEPS
) -> Callable[[complex], complex]:
    """Handle ``c -> phi(1)`` reusing the equilibrium samples across calls."""
    table = _ShootingTable(equilibrium, n_steps)

    def f(c):
        c = complex(c)
        _require_upper(c)
        return _shoot(table, c, kappa)

    return f


def shooting_trajectory(q: DispersionQuery, n_steps: int = SHOOT_STEPS):
    """Nodes, ``phi`` and ``phi'`` along the shooting integration."""
    _require_upper(q.c)
    table = _ShootingTable(q.equilibrium, n_steps)
    phi, dphi = _shoot(table, q.c, q.kappa, full=True)
    return np.linspace(-1.0, 1.0, n_steps + 1), phi, dphi


def operator_norm_bound(q: DispersionQuery, n: int = 2001) -> float:
    """Envelope ``(1 + 4|U|^2/Im(c)^2)^a * |U''/U'|_{W^{1,inf}}`` with unit constant."""
    sh = q.equilibrium.shear
    if not sh.strictly_monotone():
        raise NonMonotoneShear("NonMonotoneShear: U_s' changes sign on [-1, 1]")
    _require_upper(q.c)
    a = q.equilibrium.alpha if q.equilibrium.alpha is not None else 1.0
    z = np.linspace(-1.0, 1.0, n)
    u1, u2, u3 = sh.d1(z), sh.d2(z), sh.d3(z)
    g = u2 / u1
    dg = (u3 * u1 - u2 * u2) / (u1 * u1)
    w1 = float(np.max(np.abs(g)) + np.max(np.abs(dg)))
    return (1.0 + 4.0 * sh.sup_norm**2 / q.c.imag**2) ** a * w1
