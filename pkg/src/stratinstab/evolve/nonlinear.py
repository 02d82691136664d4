"""Nonlinear Euler-Boussinesq in a periodic channel, pseudo-spectral in x.

The torus ``T_M`` of length ``2 pi M`` is mapped onto ``[0, 2 pi)`` by
``x = M x'``, ``t = M t'``. In those variables the equations keep their form,

    d_t rho   + u d_x rho   + v d_z rho   = 0
    d_t omega + u d_x omega + v d_z omega = d_x rho

with ``u = d_z phi``, ``v = -d_x phi`` and ``(M^-2 d_x^2 + d_z^2) phi = omega``:
Fourier mode ``j`` carries the advective wavenumber ``j`` and the Poisson
wavenumber ``kappa_j = j / M``, exactly as in the per-mode linear systems.
Growth rates measured here are therefore in units of ``1/M`` physical time.

Fields are stored as rfft coefficients ``a_j`` (``f = sum_j a_j e^{ijx}``).
Advection is written in flux form with the conservative z-derivative of
``Grid1D.ddz`` for both the fluxes and ``u = D phi``, so the discrete
velocity is divergence free and the domain integrals of rho and omega are
conserved to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

import numpy as np
from scipy.fft import irfft, rfft

from ..errors import CflViolation, NoBlowupWithinBudget
from ..profiles import StratifiedEquilibrium
from .grid import Grid1D
from .linear import GrowthSeries, ModeState


class SpectralChannel:
    """Discretisation shared by the nonlinear stepper and the Grenier iterates."""

    def __init__(self, nx: int, nz: int, M: float):
        if nx % 2 or nx < 4:
            raise ValueError("nx must be an even number >= 4")
        self.nx, self.nz, self.M = nx, nz, float(M)
        self.grid = Grid1D(nz)
        self.j = np.arange(nx // 2 + 1)
        self.ik = (1j * self.j)[:, None]
        self.kappa2 = (self.j / self.M) ** 2
        # 2/3 rule: modes above nx/3 are removed from every product
        self.mask = (self.j <= nx // 3).astype(float)[:, None]
        self.dx = 2.0 * np.pi / nx
        self.x = self.dx * np.arange(nx)
        self.weights = self.grid.cell_widths

    # transforms along axis 0
    def to_phys(self, a):
        return irfft(a * self.nx, n=self.nx, axis=0)

    def to_spec(self, f):
        return rfft(f, axis=0) / self.nx

    def stream(self, omega_hat):
        return self.grid.dirichlet_solve(omega_hat, self.kappa2)

    def velocity(self, omega_hat):
        phi = self.stream(omega_hat)
        return self.to_phys(self.grid.ddz(phi)), self.to_phys(-self.ik * phi)

    def advect(self, u, v, q_hat):
        """Dealiased ``-(d_x(u q) + D(v q))`` for the field with coefficients ``q_hat``."""
        q = self.to_phys(q_hat)
        fx = self.to_spec(u * q)
        fz = self.to_spec(v * q)
        return -self.mask * (self.ik * fx + self.grid.ddz(fz))

    def norm(self, a, b=None) -> float:
        """x-averaged discrete L2 norm (Parseval) with control-volume weights in z."""
        w = np.full(self.j.size, 2.0)
        w[0] = 1.0
        s = np.sum(w[:, None] * self.weights[None, :] * np.abs(a) ** 2)
        if b is not None:
            s += np.sum(w[:, None] * self.weights[None, :] * np.abs(b) ** 2)
        return float(np.sqrt(s))

    def integral(self, a) -> float:
        """Domain average over x times the z-integral (mode 0 only)."""
        return float(np.real(np.sum(self.weights * a[0])))


@dataclass
class Field2D:
    nx: int
    nz: int
    M: float
    rho: np.ndarray      # (nx//2 + 1, nz) spectral coefficients
    omega: np.ndarray
    t: float = 0.0
    _chan: Optional[SpectralChannel] = field(default=None, repr=False, compare=False)

    @property
    def channel(self) -> SpectralChannel:
        if self._chan is None:
            self._chan = SpectralChannel(self.nx, self.nz, self.M)
        return self._chan

    def physical(self) -> Tuple[np.ndarray, np.ndarray]:
        c = self.channel
        return c.to_phys(self.rho), c.to_phys(self.omega)

    def hermitian_ok(self) -> bool:
        # the mean and Nyquist coefficients of a real field are real
        return bool(np.allclose(self.rho[[0, -1]].imag, 0) and np.allclose(self.omega[[0, -1]].imag, 0))


def equilibrium_field(eq: StratifiedEquilibrium, nx: int, nz: int, M: float) -> Field2D:
    """The shear flow ``(rho_s, omega = U')`` as an x-independent field."""
    chan = SpectralChannel(nx, nz, M)
    z = chan.grid.nodes
    rho = np.zeros((nx // 2 + 1, nz), dtype=complex)
    omega = np.zeros_like(rho)
    rho[0] = eq.strat.eval(z)
    omega[0] = eq.shear.d1(z)
    return Field2D(nx, nz, M, rho, omega, 0.0, chan)


def _rhs(chan: SpectralChannel, rho, omega):
    u, v = chan.velocity(omega)
    drho = chan.advect(u, v, rho)
    domega = chan.advect(u, v, omega) + chan.ik * rho
    return drho, domega, u, v


def cfl_limit(fld: Field2D) -> float:
    chan = fld.channel
    u, v = chan.velocity(fld.omega)
    lim = np.inf
    um, vm = np.max(np.abs(u)), np.max(np.abs(v))
    if um > 0:
        lim = min(lim, chan.dx / um)
    if vm > 0:
        lim = min(lim, chan.grid.h / vm)
    return 0.5 * lim


def step_nonlinear(fld: Field2D, eq: Optional[StratifiedEquilibrium], dt: float) -> Field2D:
    """One RK4 step of the full system (the state, not a perturbation).

    ``eq`` is unused by the dynamics (the equilibrium is part of the state)
    and accepted for a uniform stepper signature.
    """
    chan = fld.channel
    k1r, k1w, u, v = _rhs(chan, fld.rho, fld.omega)
    um, vm = np.max(np.abs(u)), np.max(np.abs(v))
    if dt * um > 0.5 * chan.dx or dt * vm > 0.5 * chan.grid.h:
        raise CflViolation(
            f"CflViolation: dt={dt:g} exceeds 0.5*min(dx/|u|, h/|v|) (|u|={um:.3g}, |v|={vm:.3g})"
        )
    r, w = fld.rho, fld.omega
    k2r, k2w, _, _ = _rhs(chan, r + 0.5 * dt * k1r, w + 0.5 * dt * k1w)
    k3r, k3w, _, _ = _rhs(chan, r + 0.5 * dt * k2r, w + 0.5 * dt * k2w)
    k4r, k4w, _, _ = _rhs(chan, r + dt * k3r, w + dt * k3w)
    r = r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
    w = w + dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
    return replace(fld, rho=r, omega=w, t=fld.t + dt)


def deviation_norm(fld: Field2D, base: Field2D) -> float:
    return fld.channel.norm(fld.rho - base.rho, fld.omega - base.omega)


def mode_perturbation(mode, chan: SpectralChannel, k: int = 1):
    """Coefficients of ``Re(exp(ikx) (r, w))`` scaled to unit channel norm.

    ``mode`` is a ModeState on the channel grid or a GrowingMode whose z
    samples include the walls of that grid.
    """
    if isinstance(mode, ModeState):
        r, w = mode.rho_hat, mode.omega_hat
    else:
        _, _, r, w = mode.interior()
    if r.size != chan.nz:
        raise ValueError("mode grid does not match the channel grid")
    rho = np.zeros((chan.j.size, chan.nz), dtype=complex)
    omega = np.zeros_like(rho)
    rho[k] = 0.5 * r
    omega[k] = 0.5 * w
    s = chan.norm(rho, omega)
    return rho / s, omega / s


def perturbed_equilibrium(eq, mode, delta: float, nx: int, nz: int, M: float, k: int = 1) -> Tuple[Field2D, Field2D]:
    base = equilibrium_field(eq, nx, nz, M)
    pr, pw = mode_perturbation(mode, base.channel, k)
    start = replace(base, rho=base.rho + delta * pr, omega=base.omega + delta * pw)
    return start, base


def instability_time(
    delta: float,
    m: float,
    mode,
    eq: StratifiedEquilibrium,
    nx: int = 64,
    nz: int = 128,
    dt: float = 0.02,
    M: float = 1.0,
    Lambda: Optional[float] = None,
    budget_factor: float = 10.0,
) -> Tuple[float, GrowthSeries]:
    """First time the deviation from the equilibrium reaches ``m``.

    Starts from equilibrium + ``delta`` times the unit-norm real mode. The run
    is capped at ``budget_factor * |log delta| / Lambda``. The linear-phase
    growth rate is fitted where ``3 delta <= norm <= m / 5``.
    """
    if Lambda is None:
        Lambda = float(getattr(mode, "sigma", np.nan))
    if not Lambda > 0:
        raise ValueError("a positive growth rate Lambda is required")
    fld, base = perturbed_equilibrium(eq, mode, delta, nx, nz, M)
    n0 = deviation_norm(fld, base)
    times, norms = [0.0], [n0]
    if n0 >= m:
        return 0.0, GrowthSeries(times, norms)
    n_max = int(np.ceil(budget_factor * abs(np.log(delta)) / (Lambda * dt)))
    T = None
    for _ in range(n_max):
        fld = step_nonlinear(fld, eq, dt)
        times.append(fld.t)
        norms.append(deviation_norm(fld, base))
        if norms[-1] >= m:
            t0, t1 = times[-2], times[-1]
            a0, a1 = norms[-2], norms[-1]
            T = t0 + (m - a0) * (t1 - t0) / (a1 - a0)
            break
    series = GrowthSeries(times, norms)
    arr = np.asarray(norms)
    tt = np.asarray(times)
    sel = (arr >= 3 * delta) & (arr <= m / 5)
    if sel.sum() >= 3:
        series.fit(tt[sel][0], tt[sel][-1])
    if T is None:
        raise NoBlowupWithinBudget(
            f"NoBlowupWithinBudget: deviation {norms[-1]:.3g} < {m:g} after {n_max} steps", series
        )
    return float(T), series
