"""Growing modes: reconstruction from a dispersion zero and cross-checks.

A zero ``c`` with ``Im c > 0`` gives the normal mode ``exp(ik(x - ct))`` with
stream amplitude ``phi = (U - c)^alpha psi``, density ``r = rho_s' phi/(U - c)``
and vorticity ``w = phi'' - kappa^2 phi``. The last one is read off from the
Taylor-Goldstein equation itself so no numerical differentiation enters.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .dispersion import DispersionQuery, shooting_trajectory, solve_neumann
from .errors import NoGrowth, NotAZero
from .evolve.grid import Grid1D
from .evolve.linear import LinearOperator, ModeState, random_state
from .profiles import StratifiedEquilibrium
from .rootfinder import Zero

ZERO_TOL = 1e-6


@dataclass
class GrowingMode:
    k: int
    c: complex
    z: np.ndarray        # includes both walls
    phi: np.ndarray
    r: np.ndarray
    w: np.ndarray
    kappa: float = 0.0

    @property
    def sigma(self) -> float:
        return self.k * self.c.imag

    @property
    def eigenvalue(self) -> complex:
        """Time exponent ``-ikc`` of ``exp(ik(x - ct))``."""
        return -1j * self.k * self.c

    def interior(self):
        return self.z[1:-1], self.phi[1:-1], self.r[1:-1], self.w[1:-1]

    def as_state(self) -> ModeState:
        _, _, r, w = self.interior()
        return ModeState(self.k, self.kappa, r.copy(), w.copy())


@dataclass(frozen=True)
class ModeResidualReport:
    tg_residual: float
    bc_defect: float


def _zgrid(grid) -> np.ndarray:
    if grid is None:
        return np.linspace(-1.0, 1.0, 1025)
    if isinstance(grid, Grid1D):
        return grid.full
    return np.asarray(grid, dtype=float)


def _amplitudes(eq: StratifiedEquilibrium, z, c, phi, kappa):
    w_ = eq.shear.eval(z) - c
    r1 = eq.strat.d1(z)
    r = r1 * phi / w_
    w = (eq.shear.d2(z) / w_ + r1 / (w_ * w_)) * phi
    return r, w


def reconstruct_mode(
    z0: Union[Zero, complex],
    k: int,
    q: DispersionQuery,
    grid=None,
    source: str = "neumann",
) -> GrowingMode:
    """Mode for wavenumber ``k`` at the zero ``z0`` of the dispersion function of ``q``.

    ``grid`` is a Grid1D (walls are added), an array of z values, or None for
    1025 uniform points. ``source`` selects the Neumann series or shooting.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    c = complex(z0.c if isinstance(z0, Zero) else z0)
    q = q.with_c(c)
    eq = q.equilibrium
    z = _zgrid(grid)
    if source == "neumann":
        sol = solve_neumann(q)
        if abs(sol.end_value) > ZERO_TOL:
            raise NotAZero(f"NotAZero: |psi(1)| = {abs(sol.end_value):.3g} at c={c}")
        inner = (z > -1.0) & (z < 1.0)
        psi = np.zeros(z.size, dtype=complex)
        psi[inner] = sol.grid.interpolate(sol.psi[1:-1], z[inner])
        psi[z >= 1.0] = sol.end_value
        phi = np.exp(q.alpha * np.log(eq.shear.eval(z) - c)) * psi
    elif source == "shooting":
        zs, ph, dph = shooting_trajectory(q)
        if abs(ph[-1]) > ZERO_TOL * np.max(np.abs(dph)):
            raise NotAZero(f"NotAZero: |phi(1)| = {abs(ph[-1]):.3g} at c={c}")
        phi = CubicHermiteSpline(zs, ph, dph)(z)
    else:
        raise ValueError("source must be 'neumann' or 'shooting'")
    phi = phi / phi[np.argmax(np.abs(phi))]
    r, w = _amplitudes(eq, z, c, phi, q.kappa)
    return GrowingMode(k, c, z, phi, r, w, q.kappa)


def mode_residual(m: GrowingMode, eq: StratifiedEquilibrium) -> ModeResidualReport:
    """Taylor-Goldstein defect with ``phi''`` from 4th-order central differences."""
    z, phi, c = m.z, m.phi, m.c
    h = np.diff(z)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("mode_residual needs a uniform grid")
    h = h[0]
    d2 = (-phi[4:] + 16 * phi[3:-1] - 30 * phi[2:-2] + 16 * phi[1:-3] - phi[:-4]) / (12 * h * h)
    zi = z[2:-2]
    pi = phi[2:-2]
    W = eq.shear.eval(zi) - c
    defect = W * W * (d2 - m.kappa**2 * pi) - W * eq.shear.d2(zi) * pi - eq.strat.d1(zi) * pi
    scale = np.max(np.abs(W * W * d2))
    sup = np.max(np.abs(phi))
    return ModeResidualReport(
        tg_residual=float(np.max(np.abs(defect)) / scale),
        bc_defect=float(max(abs(phi[0]), abs(phi[-1])) / sup),
    )


def dominant_mode(
    k: int,
    kappa: float,
    eq: StratifiedEquilibrium,
    grid: Grid1D,
    T: float = 1.0,
    dt: float = 5e-3,
    model: Optional[str] = None,
    seed: int = 0,
    rtol: float = 1e-4,
    window: int = 5,
    max_iter: int = 200,
    growth_floor: float = 1e-2,
) -> Tuple[float, ModeState]:
    """Power iteration on the time-``T`` propagator; returns (rate, unit eigenvector).

    ``model`` defaults to hydrostatic for ``kappa == 0`` and Boussinesq otherwise.
    Rates below ``growth_floor`` are reported as NoGrowth: the discretised
    neutral spectrum carries spurious real parts of order 1e-3 and transient
    algebraic growth, neither of which is an instability.
    """
    if grid.n < 64:
        raise ValueError("grid resolution must be >= 64")
    model = model or ("hydrostatic" if kappa == 0 else "boussinesq")
    op = LinearOperator(eq, grid, k, kappa, model)
    st = random_state(k, kappa, grid, seed)
    r, w = st.rho_hat, st.omega_hat
    n_steps = max(1, int(round(T / dt)))
    h = T / n_steps
    est = []
    converged = False
    for _ in range(max_iter):
        for _ in range(n_steps):
            r, w = op.step(r, w, h)
        amp = grid.l2(r, w)
        est.append(np.log(amp) / T)
        r, w = r / amp, w / amp
        if len(est) > window:
            ref = est[-1 - window]
            if abs(est[-1] - ref) <= rtol * abs(est[-1]):
                converged = True
                break
    # Without convergence (neutral or nearly neutral spectrum) the per-period
    # estimates oscillate; their mean over the second half is the honest rate.
    rate = float(est[-1]) if converged else float(np.mean(est[len(est) // 2:]))
    if rate <= growth_floor:
        raise NoGrowth(f"NoGrowth: dominant rate {rate:.3g} <= {growth_floor:g}")
    return rate, ModeState(k, kappa, r, w)


def dominant_growth(k: int, kappa: float, eq: StratifiedEquilibrium, grid: Grid1D, **kw) -> float:
    """Largest growth rate of the discretised per-mode linear operator."""
    return dominant_mode(k, kappa, eq, grid, **kw)[0]
