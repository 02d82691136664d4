"""Per-wavenumber linearised dynamics about a stratified shear flow.

For the x-mode ``exp(ikx)`` the perturbation amplitudes obey

    d/dt rho   = -ik U rho   + ik rho_s' phi
    d/dt omega = -ik U omega + ik U'' phi + ik rho

with ``(D2 - kappa^2) phi = omega`` and ``phi = 0`` at the walls; ``kappa = 0``
is the hydrostatic model.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import solve_banded

from ..profiles import ShearProfile, StratifiedEquilibrium, Stratification
from .grid import Grid1D

MODELS = ("hydrostatic", "boussinesq")


@dataclass
class ModeState:
    k: int
    kappa: float
    rho_hat: np.ndarray
    omega_hat: np.ndarray
    t: float = 0.0

    def norm(self, grid: Grid1D) -> float:
        return grid.l2(self.rho_hat, self.omega_hat)

    def scaled(self, a) -> "ModeState":
        return replace(self, rho_hat=a * self.rho_hat, omega_hat=a * self.omega_hat)

    def as_vector(self) -> np.ndarray:
        return np.concatenate((self.rho_hat, self.omega_hat))


def _banded(grid: Grid1D, kappa: float) -> np.ndarray:
    n, h2 = grid.n, grid.h**2
    ab = np.empty((3, n))
    ab[0, :] = 1.0 / h2
    ab[2, :] = 1.0 / h2
    ab[1, :] = -2.0 / h2 - kappa * kappa
    return ab


def poisson_full(omega_hat: np.ndarray, kappa: float, grid: Grid1D) -> np.ndarray:
    """``(D2 - kappa^2) phi = omega`` with homogeneous Dirichlet data."""
    return solve_banded((1, 1), _banded(grid, kappa), omega_hat)


def poisson_hydro(omega_hat: np.ndarray, grid: Grid1D) -> np.ndarray:
    """``D2 phi = omega`` with homogeneous Dirichlet data."""
    return poisson_full(omega_hat, 0.0, grid)


class LinearOperator:
    """Right-hand side of the per-mode system with the coefficients cached."""

    def __init__(self, eq: StratifiedEquilibrium, grid: Grid1D, k: int, kappa: float, model: str = "hydrostatic"):
        if model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        z = grid.nodes
        self.grid = grid
        self.k = k
        self.kappa = kappa if model == "boussinesq" else 0.0
        self.ik = 1j * k
        self.U = eq.shear.eval(z)
        self.U2 = eq.shear.d2(z)
        self.R1 = eq.strat.d1(z)
        self.ab = _banded(grid, self.kappa)

    def phi(self, omega):
        return solve_banded((1, 1), self.ab, omega)

    def rhs(self, rho, omega):
        phi = self.phi(omega)
        ik = self.ik
        drho = ik * (self.R1 * phi - self.U * rho)
        domega = ik * (self.U2 * phi - self.U * omega + rho)
        return drho, domega

    def step(self, rho, omega, dt, forcing=None):
        """One RK4 step; ``forcing(s)`` (s in {0, 1/2, 1}) adds a source term."""

        def f(r, w, s):
            a, b = self.rhs(r, w)
            if forcing is not None:
                fr, fw = forcing(s)
                a, b = a + fr, b + fw
            return a, b

        k1 = f(rho, omega, 0.0)
        k2 = f(rho + 0.5 * dt * k1[0], omega + 0.5 * dt * k1[1], 0.5)
        k3 = f(rho + 0.5 * dt * k2[0], omega + 0.5 * dt * k2[1], 0.5)
        k4 = f(rho + dt * k3[0], omega + dt * k3[1], 1.0)
        r = rho + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w = omega + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        return r, w


def operator_for(state: ModeState, eq: StratifiedEquilibrium, grid: Grid1D, model: str) -> LinearOperator:
    return LinearOperator(eq, grid, state.k, state.kappa, model)


def step_linear(
    state: ModeState,
    eq: StratifiedEquilibrium,
    dt: float,
    model: str = "hydrostatic",
    grid: Optional[Grid1D] = None,
    op: Optional[LinearOperator] = None,
) -> ModeState:
    """One RK4 step of the linearised system for ``state.k``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if op is None:
        grid = grid or Grid1D(state.rho_hat.size)
        op = LinearOperator(eq, grid, state.k, state.kappa, model)
    r, w = op.step(state.rho_hat, state.omega_hat, dt)
    return ModeState(state.k, state.kappa, r, w, state.t + dt)


def transport_only(eq: StratifiedEquilibrium) -> StratifiedEquilibrium:
    """Same shear, but with ``U''`` and ``rho_s'`` suppressed (pure transport + buoyancy coupling)."""
    sh = eq.shear
    zero = lambda z: np.zeros_like(np.asarray(z, dtype=float))
    shear = ShearProfile(sh.eval, sh.d1, zero, zero, sh.sup_norm, "custom")
    return StratifiedEquilibrium(shear, Stratification(zero, zero, zero))


def transport_exact(state: ModeState, t: float, eq: StratifiedEquilibrium, grid: Optional[Grid1D] = None) -> ModeState:
    """Exact propagator of ``d/dt = -ikU + (ik rho coupling)`` over time ``t``."""
    z = (grid or Grid1D(state.rho_hat.size)).nodes
    ph = np.exp(-1j * state.k * t * eq.shear.eval(z))
    r = ph * state.rho_hat
    w = ph * (state.omega_hat + 1j * state.k * t * state.rho_hat)
    return ModeState(state.k, state.kappa, r, w, state.t + t)


# --------------------------------------------------------------------------- #
# growth fits

@dataclass
class GrowthSeries:
    times: List[float]
    norms: List[float]
    fitted_sigma: float = float("nan")
    fit_window: Tuple[float, float] = (float("nan"), float("nan"))
    fit_r2: float = float("nan")

    def fit(self, t_lo: Optional[float] = None, t_hi: Optional[float] = None) -> "GrowthSeries":
        t = np.asarray(self.times)
        y = np.log(np.asarray(self.norms))
        lo = t[0] if t_lo is None else t_lo
        hi = t[-1] if t_hi is None else t_hi
        sel = (t >= lo) & (t <= hi)
        if sel.sum() < 3:
            raise ValueError("fit window holds fewer than 3 samples")
        slope, icpt = np.polyfit(t[sel], y[sel], 1)
        pred = slope * t[sel] + icpt
        ss_res = float(np.sum((y[sel] - pred) ** 2))
        ss_tot = float(np.sum((y[sel] - y[sel].mean()) ** 2))
        self.fitted_sigma = float(slope)
        self.fit_window = (float(lo), float(hi))
        self.fit_r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        return self


def random_state(k: int, kappa: float, grid: Grid1D, seed: int = 0) -> ModeState:
    """Smooth random complex data (a few sine modes), unit L2 norm."""
    rng = np.random.default_rng(seed)
    z = grid.nodes
    m = np.arange(1, 9)
    basis = np.sin(0.5 * np.pi * np.outer(z + 1.0, m))
    coef = (rng.standard_normal((2, m.size)) + 1j * rng.standard_normal((2, m.size))) / m
    st = ModeState(k, kappa, basis @ coef[0], basis @ coef[1])
    return st.scaled(1.0 / st.norm(grid))


def run_linear(
    state: ModeState,
    eq: StratifiedEquilibrium,
    grid: Grid1D,
    t_end: float,
    dt: float,
    model: str = "hydrostatic",
    sample_every: int = 10,
) -> Tuple[ModeState, GrowthSeries]:
    """Evolve to ``t_end`` recording the L2 norm; no fit applied."""
    op = LinearOperator(eq, grid, state.k, state.kappa, model)
    n_steps = int(round(t_end / dt))
    r, w = state.rho_hat, state.omega_hat
    times, norms = [state.t], [grid.l2(r, w)]
    for i in range(1, n_steps + 1):
        r, w = op.step(r, w, dt)
        if i % sample_every == 0 or i == n_steps:
            times.append(state.t + i * dt)
            norms.append(grid.l2(r, w))
    end = ModeState(state.k, state.kappa, r, w, state.t + n_steps * dt)
    return end, GrowthSeries(times, norms)


def linear_growth(
    eq: StratifiedEquilibrium,
    k: int,
    grid: Grid1D,
    dt: float = 1e-3,
    t_end: Optional[float] = None,
    model: str = "hydrostatic",
    kappa: float = 0.0,
    seed: int = 0,
    expected: Optional[float] = None,
) -> GrowthSeries:
    """Growth rate of random initial data, fitted over the second half of the run."""
    if t_end is None:
        t_end = 16.0 / expected if expected else 20.0
    st = random_state(k, kappa, grid, seed)
    _, series = run_linear(st, eq, grid, t_end, dt, model, sample_every=max(1, int(round(0.01 / dt))))
    return series.fit(0.5 * t_end, t_end)
