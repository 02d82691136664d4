"""Grenier iterates: eigenmode plus inductively forced linear correctors.

Iterate 1 is the real growing mode ``Re(exp(lam t) exp(ix) (r, w))``. For
``j >= 2`` the iterate solves the linearised system with zero data and the
forcing produced by the nonlinearity on lower iterates,

    (d_t - B) Z_j = - sum_{k=1}^{j-1} u[omega_k] . grad Z_{j-k},

so that ``Z_1 + Z_2 + ...`` is an approximate solution of the nonlinear
problem order by order in the amplitude. The forcing is assembled with the
same dealiased flux-form products as the nonlinear stepper; ``B`` is the
per-mode linear operator applied to every x-mode at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..profiles import StratifiedEquilibrium
from .linear import ModeState
from .nonlinear import SpectralChannel


@dataclass
class GrenierTrajectory:
    j: int
    times: np.ndarray
    norms: np.ndarray
    states: Optional[list] = None   # (rho_hat, omega_hat) of iterate j at each sample


class _LinearAllModes:
    def __init__(self, chan: SpectralChannel, eq: StratifiedEquilibrium):
        z = chan.grid.nodes
        self.chan = chan
        self.U = eq.shear.eval(z)[None, :]
        self.U2 = eq.shear.d2(z)[None, :]
        self.R1 = eq.strat.d1(z)[None, :]

    def __call__(self, rho, omega):
        phi = self.chan.stream(omega)
        ik = self.chan.ik
        return ik * (self.R1 * phi - self.U * rho), ik * (self.U2 * phi - self.U * omega + rho)


def _mode_arrays(mode):
    if isinstance(mode, ModeState):
        return mode.rho_hat, mode.omega_hat, mode.k
    _, _, r, w = mode.interior()
    return r, w, mode.k


def grenier_iterate(
    j: int,
    mode,
    Lambda: float,
    eq: StratifiedEquilibrium,
    nz: int,
    nx: int = 16,
    M: float = 1.0,
    omega_freq: float = 0.0,
    T: Optional[float] = None,
    dt: float = 0.01,
    sample_every: int = 5,
    amplitude: float = 1.0,
) -> List[GrenierTrajectory]:
    """Integrate iterates ``2..j`` on ``[0, T]`` (default ``T = 3 / Lambda``).

    ``mode`` is a ModeState or GrowingMode with x-wavenumber 1 sampled on the
    ``nz`` interior points; the iterate-1 exponent is
    ``Lambda - i * omega_freq``. Returns one trajectory per iterate 1..j.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    chan = SpectralChannel(nx, nz, M)
    r1, w1, k = _mode_arrays(mode)
    if k != 1:
        raise ValueError("iterate 1 must live on x-wavenumber 1")
    if r1.size != nz:
        raise ValueError("mode grid does not match nz")
    if T is None:
        T = 3.0 / Lambda
    lam = Lambda - 1j * omega_freq
    shape = (chan.j.size, nz)
    base_r = np.zeros(shape, dtype=complex)
    base_w = np.zeros(shape, dtype=complex)
    base_r[1] = 0.5 * amplitude * r1
    base_w[1] = 0.5 * amplitude * w1
    L = _LinearAllModes(chan, eq)

    def first(t):
        e = np.exp(lam * t)
        # coefficient of e^{ix}; the e^{-ix} partner is implied by rfft storage
        return base_r * e, base_w * e

    def forcing(Z):
        """Forcing for iterates 2..j given the list Z[0..j-1] of (rho, omega)."""
        vel = [chan.velocity(w) for _, w in Z]
        out = []
        for jj in range(2, j + 1):
            fr = np.zeros(shape, dtype=complex)
            fw = np.zeros(shape, dtype=complex)
            for kk in range(1, jj):
                u, v = vel[kk - 1]
                rr, ww = Z[jj - kk - 1]
                fr += chan.advect(u, v, rr)
                fw += chan.advect(u, v, ww)
            out.append((fr, fw))
        return out

    def rhs(t, Y):
        Z = [first(t)] + Y
        F = forcing(Z)
        out = []
        for (r, w), (fr, fw) in zip(Y, F):
            a, b = L(r, w)
            out.append((a + fr, b + fw))
        return out

    n_steps = int(np.ceil(T / dt))
    h = T / n_steps
    Y = [(np.zeros(shape, dtype=complex), np.zeros(shape, dtype=complex)) for _ in range(j - 1)]
    times = [0.0]
    norms = [[chan.norm(*first(0.0))]] + [[0.0] for _ in Y]
    t = 0.0
    for i in range(1, n_steps + 1):
        k1 = rhs(t, Y)
        k2 = rhs(t + 0.5 * h, [(r + 0.5 * h * a, w + 0.5 * h * b) for (r, w), (a, b) in zip(Y, k1)])
        k3 = rhs(t + 0.5 * h, [(r + 0.5 * h * a, w + 0.5 * h * b) for (r, w), (a, b) in zip(Y, k2)])
        k4 = rhs(t + h, [(r + h * a, w + h * b) for (r, w), (a, b) in zip(Y, k3)])
        Y = [
            (r + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4), w + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4))
            for (r, w), (a1, b1), (a2, b2), (a3, b3), (a4, b4) in zip(Y, k1, k2, k3, k4)
        ]
        t = i * h
        if i % sample_every == 0 or i == n_steps:
            times.append(t)
            norms[0].append(chan.norm(*first(t)))
            for n_list, (r, w) in zip(norms[1:], Y):
                n_list.append(chan.norm(r, w))
    tt = np.asarray(times)
    return [GrenierTrajectory(i + 1, tt, np.asarray(n)) for i, n in enumerate(norms)]


def iterate_rate(traj: GrenierTrajectory, frac: float = 2.0 / 3.0) -> float:
    """Least-squares log-slope of the norm over the last ``1 - frac`` of the run."""
    t, n = traj.times, traj.norms
    sel = (t >= frac * t[-1]) & (n > 0)
    return float(np.polyfit(t[sel], np.log(n[sel]), 1)[0])
