"""Hyperbolic rescaling between the hydrostatic and the thin-domain frames.

``(rho', u', v', p')(t', x', z) = (rho, u, v / eps, p)(t'/eps, x'/eps, z)``:
sample values are kept, horizontal length and time shrink by ``eps`` (so the
physical wavenumber of every Fourier index grows by ``1/eps``) and the
vertical velocity is divided by ``eps``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import IncompatibleEps


@dataclass(frozen=True)
class FlowSnapshot:
    t: float
    length: float          # horizontal period
    rho: np.ndarray        # (nx, nz) samples
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray

    def wavenumbers(self) -> np.ndarray:
        """Physical wavenumbers of the rfft indices."""
        nx = self.rho.shape[0]
        return 2.0 * np.pi / self.length * np.arange(nx // 2 + 1)


def check_eps(eps: float, M: float, tol: float = 1e-12) -> int:
    """Return ``l`` with ``eps = 1/(l M)``; raise IncompatibleEps otherwise."""
    if not eps > 0:
        raise IncompatibleEps(f"IncompatibleEps: eps={eps!r} must be positive")
    ell = 1.0 / (eps * M)
    li = int(round(ell))
    if li < 1 or abs(ell - li) > tol * max(1.0, ell):
        raise IncompatibleEps(f"IncompatibleEps: eps={eps!r} is not 1/(l*M) for integer l (M={M!r})")
    return li


def hydrostatic_rescale(snap: FlowSnapshot, eps: float, direction: str, M: float = 1.0) -> FlowSnapshot:
    check_eps(eps, M)
    if direction == "to_fast":
        s = eps
    elif direction == "to_slow":
        s = 1.0 / eps
    else:
        raise ValueError("direction must be 'to_fast' or 'to_slow'")
    return replace(snap, t=snap.t * s, length=snap.length * s, v=snap.v / s)
