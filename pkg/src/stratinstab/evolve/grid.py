"""Uniform interior grid on (-1, 1) with Dirichlet walls at +-1."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dst, idst


@dataclass(frozen=True)
class Grid1D:
    n: int
    nodes: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need at least 3 interior points")
        h = 2.0 / (self.n + 1)
        object.__setattr__(self, "h", h)
        nodes = -1.0 + h * np.arange(1, self.n + 1)
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @property
    def full(self) -> np.ndarray:
        """Nodes with the two wall points appended."""
        return np.concatenate(([-1.0], self.nodes, [1.0]))

    @property
    def cell_widths(self) -> np.ndarray:
        """Control-volume widths; the end cells reach the walls (3h/2)."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 1.5 * self.h
        return w

    def l2(self, *fields) -> float:
        """Discrete L2 norm (trapezoid weights, walls carry zero)."""
        s = sum(float(np.sum(np.abs(f) ** 2)) for f in fields)
        return float(np.sqrt(self.h * s))

    # ---- operators acting along the last axis -------------------------- #

    def ddz(self, f: np.ndarray) -> np.ndarray:
        """Conservative first derivative with zero wall values.

        Face values are averages of neighbours and vanish at the walls, so
        ``sum(cell_widths * ddz(f)) == 0`` exactly; interior rows reduce to
        the central difference.
        """
        face = np.zeros(f.shape[:-1] + (self.n + 1,), dtype=f.dtype)
        face[..., 1:-1] = 0.5 * (f[..., 1:] + f[..., :-1])
        return (face[..., 1:] - face[..., :-1]) / self.cell_widths

    def laplacian_eigs(self) -> np.ndarray:
        """Eigenvalues of the Dirichlet second difference, DST-I ordering."""
        m = np.arange(1, self.n + 1)
        return -(4.0 / self.h**2) * np.sin(0.5 * np.pi * m / (self.n + 1)) ** 2

    def dirichlet_solve(self, rhs: np.ndarray, kappa2) -> np.ndarray:
        """Solve ``(D2 - kappa^2) phi = rhs`` row-wise via the sine transform.

        ``kappa2`` broadcasts against the leading axes of ``rhs``.
        """
        lam = self.laplacian_eigs() - np.asarray(kappa2)[..., None]
        return idst(dst(rhs, type=1, axis=-1) / lam, type=1, axis=-1)
