"""Argument-principle root location for holomorphic dispersion functions.

Winding numbers are accumulated from phase increments along a sampled closed
path; the sampling is bisected until every increment is below pi/2, so the
discrete count equals the true one for a continuous, zero-free boundary
image. Zeros are isolated by quadrisection and polished by the secant method.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dispersion import (
    DispersionQuery,
    _power_integral,
    dispersion_function,
    shooting_function,
)
from .errors import (
    NotFriedlander,
    NoZeroFound,
    RefinementExhausted,
    ZeroOnContour,
)
from .profiles import (
    ShearProfile,
    StratifiedEquilibrium,
    build_friedlander,
    miles_howard_check,
    tanh_shear,
)

log = logging.getLogger(__name__)

HALF_PI = 0.5 * np.pi
ZERO_REL = 1e-13
SAMPLE_BUDGET = 20000

Holo = Callable[[complex], complex]


# --------------------------------------------------------------------------- #
# function evaluation with memo (one cache per search, never module-global)

class _Memo:
    def __init__(self, f: Holo):
        self.f = f
        self.store: Dict[complex, complex] = {}
        self.calls = 0

    def __call__(self, c: complex) -> complex:
        c = complex(c)
        v = self.store.get(c)
        if v is None:
            v = complex(self.f(c))
            self.calls += 1
            self.store[c] = v
        return v


# --------------------------------------------------------------------------- #
# contours

@dataclass(frozen=True)
class HalfDiskContour:
    """Boundary of ``{Im c > eps, |c - i eps| <= R}``, counter-clockwise."""

    eps: float
    radius: float
    n_base: int = 256
    n_arc: int = 64

    def __post_init__(self):
        if not (self.eps > 0 and self.radius > 0):
            raise ValueError("eps and radius must be positive")

    def pieces(self):
        e, R = self.eps, self.radius
        base = _Segment(complex(-R, e), complex(R, e), self.n_base)
        arc = _Arc(1j * e, R, 0.0, np.pi, self.n_arc)
        return [base, arc]


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned cell ``[x0, x1] x [y0, y1]``."""

    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, c: complex, pad: float = 0.0) -> bool:
        return (self.x0 - pad <= c.real <= self.x1 + pad) and (self.y0 - pad <= c.imag <= self.y1 + pad)

    def pieces(self, n_edge: int = 16):
        a = complex(self.x0, self.y0)
        b = complex(self.x1, self.y0)
        cc = complex(self.x1, self.y1)
        d = complex(self.x0, self.y1)
        return [_Segment(p, q, _edge_samples(p, q, n_edge)) for p, q in ((a, b), (b, cc), (cc, d), (d, a))]

    def split(self, fx: float = 0.5, fy: float = 0.5) -> List["Rectangle"]:
        xm = self.x0 + fx * (self.x1 - self.x0)
        ym = self.y0 + fy * (self.y1 - self.y0)
        return [
            Rectangle(self.x0, xm, self.y0, ym),
            Rectangle(xm, self.x1, self.y0, ym),
            Rectangle(self.x0, xm, ym, self.y1),
            Rectangle(xm, self.x1, ym, self.y1),
        ]


def _edge_samples(a: complex, b: complex, n_edge: int) -> int:
    # Near the real axis dispersion functions vary on the scale Im(c); seed
    # the edge with spacing at most that, the phase bisection does the rest.
    y = min(a.imag, b.imag)
    if y <= 0:
        return n_edge
    return int(min(max(n_edge, np.ceil(abs(b - a) / y)), 4096))


class _Segment:
    """Straight edge. Points are generated from the lexicographically smaller
    endpoint so neighbouring cells sample shared edges at identical ``c``."""

    def __init__(self, a: complex, b: complex, n: int):
        self.flip = (b.real, b.imag) < (a.real, a.imag)
        self.lo, self.hi = (b, a) if self.flip else (a, b)
        self.n = max(int(n), 1)

    def point(self, t: float) -> complex:
        s = 1.0 - t if self.flip else t
        return self.lo + (self.hi - self.lo) * s


class _Arc:
    def __init__(self, center: complex, R: float, th0: float, th1: float, n: int):
        self.center, self.R, self.th0, self.th1, self.n = center, R, th0, th1, max(int(n), 1)

    def point(self, t: float) -> complex:
        th = self.th0 + (self.th1 - self.th0) * t
        return self.center + self.R * complex(np.cos(th), np.sin(th))


@dataclass
class WindingReport:
    winding: int
    max_phase_step: float
    samples: List[Tuple[complex, complex]] = field(default_factory=list)

    def phases(self) -> np.ndarray:
        """Cumulative unwrapped phase of f along the samples (closing point included)."""
        vals = np.array([v for _, v in self.samples] + [self.samples[0][1]])
        steps = np.angle(vals[1:] / vals[:-1])
        return np.concatenate(([0.0], np.cumsum(steps)))


def _trace_piece(f: _Memo, piece, budget: List[int]):
    """Samples on one piece (start point included, end point excluded)."""
    ts = list(np.linspace(0.0, 1.0, piece.n + 1))
    vals = [f(piece.point(t)) for t in ts]
    budget[0] -= len(ts)
    i = 0
    out_t, out_v = [ts[0]], [vals[0]]
    # depth-first bisection on a stack keeps samples ordered
    stack = list(zip(ts[1:], vals[1:]))[::-1]
    while stack:
        t1, v1 = stack[-1]
        t0, v0 = out_t[-1], out_v[-1]
        step = abs(np.angle(v1 / v0))
        if step < HALF_PI * 0.9:
            out_t.append(t1)
            out_v.append(v1)
            stack.pop()
            continue
        if v0 == 0 or v1 == 0 or t1 - t0 < 1e-14:
            # a phase jump that survives bisection to round-off is a zero on the path
            c0 = piece.point(t0 if v0 == 0 else t1 if v1 == 0 else 0.5 * (t0 + t1))
            raise ZeroOnContour(f"ZeroOnContour: f vanishes near c={c0}")
        if budget[0] <= 0:
            raise RefinementExhausted(
                f"RefinementExhausted: phase step {step:.3f} rad not resolved near c={piece.point(t0)}"
            )
        tm = 0.5 * (t0 + t1)
        vm = f(piece.point(tm))
        budget[0] -= 1
        stack.append((tm, vm))
        i += 1
    return [piece.point(t) for t in out_t[:-1]], out_v[:-1]


def _winding_pieces(f: _Memo, pieces, budget: int = SAMPLE_BUDGET) -> WindingReport:
    b = [budget]
    cs: List[complex] = []
    vs: List[complex] = []
    for p in pieces:
        c, v = _trace_piece(f, p, b)
        cs += c
        vs += v
    mags = np.abs(vs)
    if np.any(mags < ZERO_REL * np.median(mags)) or np.any(mags == 0.0):
        j = int(np.argmin(mags))
        raise ZeroOnContour(f"ZeroOnContour: |f| = {mags[j]:.3g} at c={cs[j]}")
    arr = np.array(vs + vs[:1])
    steps = np.angle(arr[1:] / arr[:-1])
    total = float(np.sum(steps))
    return WindingReport(
        winding=int(np.rint(total / (2 * np.pi))),
        max_phase_step=float(np.max(np.abs(steps))),
        samples=list(zip(cs, vs)),
    )


def winding_number(f: Holo, contour, budget: int = SAMPLE_BUDGET) -> WindingReport:
    """Winding number of ``f(contour)`` about 0 (contour: half-disk or rectangle)."""
    memo = f if isinstance(f, _Memo) else _Memo(f)
    return _winding_pieces(memo, contour.pieces(), budget)


# --------------------------------------------------------------------------- #
# the Nyquist function

def nyquist_F(c: complex, shear: ShearProfile) -> complex:
    """``F(c) = int_{-1}^{1} dz / (U(z) - c)^2`` for ``Im c != 0``."""
    c = complex(c)
    if c.imag == 0.0:
        raise ValueError("nyquist_F needs Im(c) != 0")
    return _power_integral(shear, 1.0, c, 1.0)


def nyquist_function(shear: ShearProfile) -> Holo:
    return lambda c: nyquist_F(c, shear)


def exclusion_radius(shear_or_norm, tol: float = 1e-6) -> float:
    """Smallest ``R`` (to ``tol``) with ``S (1 - S/R)^2 > 1 - (1 - S/R)^2``, ``S = |U|_inf``.

    Beyond this radius ``F`` has no zeros, so searches may be truncated there.
    """
    S = float(getattr(shear_or_norm, "sup_norm", shear_or_norm))
    if S <= 0:
        raise ValueError("sup norm must be positive")

    def ok(R):
        x = (1.0 - S / R) ** 2
        return R > S and S * x > 1.0 - x

    lo, hi = S, 2.0 * S + 2.0
    while not ok(hi):
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --------------------------------------------------------------------------- #
# zeros

@dataclass(frozen=True)
class Zero:
    c: complex
    residual: float
    iterations: int
    multiplicity_hint: int = 1


def secant(f: Holo, c0: complex, c1: complex, tol: float, max_iter: int = 60) -> Tuple[complex, float, int]:
    f0, f1 = f(c0), f(c1)
    it = 0
    while it < max_iter:
        if abs(f1) < tol:
            break
        den = f1 - f0
        if den == 0:
            break
        c2 = c1 - f1 * (c1 - c0) / den
        it += 1
        c0, f0 = c1, f1
        c1, f1 = c2, f(c2)
        if abs(c1 - c0) <= 1e-15 * max(1.0, abs(c1)):
            break
    return c1, abs(f1), it


def find_zeros(
    f: Holo,
    region: Rectangle,
    tol: float = 1e-12,
    min_diameter: float = 1e-3,
    n_edge: int = 16,
    seed: int = 0,
    stats: Optional[dict] = None,
) -> List[Zero]:
    """All zeros of ``f`` inside ``region`` (which must lie in ``Im > 0``).

    Cells are quadrisected while they enclose zeros; when smaller than
    ``min_diameter`` the cell centre seeds a secant iteration.
    """
    if region.y0 <= 0:
        raise ValueError("region must lie strictly inside the upper half-plane")
    rng = np.random.default_rng(seed)
    memo = f if isinstance(f, _Memo) else _Memo(f)

    def wind(cell: Rectangle) -> int:
        return _winding_pieces(memo, cell.pieces(n_edge)).winding

    # top-level cell; jitter outward on trouble
    cell0 = region
    for attempt in range(6):
        try:
            w0 = wind(cell0)
            break
        except (ZeroOnContour, RefinementExhausted):
            if attempt == 5:
                raise RefinementExhausted("RefinementExhausted: region boundary hits a zero")
            d = 1e-3 * region.diameter * rng.uniform(0.5, 1.0)
            cell0 = Rectangle(region.x0 - d, region.x1 + d, region.y0, region.y1 + d)
    found: List[Zero] = []
    mismatches = 0
    queue = [(cell0, w0)] if w0 != 0 else []
    while queue:
        cell, w = queue.pop()
        if cell.diameter < min_diameter:
            h = 1e-4 * cell.diameter
            c, res, it = secant(memo, cell.center, cell.center + h, tol)
            if res >= tol:
                raise RefinementExhausted(f"RefinementExhausted: secant stalled at |f|={res:.3g}")
            if c.imag <= 0:
                continue
            found.append(Zero(c, res, it, multiplicity_hint=w))
            continue
        for attempt in range(6):
            fx, fy = (0.5, 0.5) if attempt == 0 else tuple(0.5 + rng.uniform(-0.05, 0.05, 2))
            kids = cell.split(fx, fy)
            try:
                ws = [wind(k) for k in kids]
                break
            except (ZeroOnContour, RefinementExhausted):
                if attempt == 5:
                    raise RefinementExhausted(f"RefinementExhausted: cannot split {cell}")
        if sum(ws) != w:
            mismatches += 1
            log.warning("winding not conserved: %d vs %s in %s", w, ws, cell)
        queue += [(k, wk) for k, wk in zip(kids, ws) if wk != 0]
    zeros = _dedupe(found, 10 * max(tol, 1e-12))
    if stats is not None:
        stats.update(evaluations=memo.calls, total_winding=w0, mismatches=mismatches)
    return zeros


def _dedupe(zs: Sequence[Zero], radius: float) -> List[Zero]:
    out: List[Zero] = []
    for z in sorted(zs, key=lambda z: z.residual):
        if all(abs(z.c - o.c) > radius for o in out):
            out.append(z)
    return sorted(out, key=lambda z: (-z.c.imag, z.c.real))


# --------------------------------------------------------------------------- #
# dispersion-level searches

def _handle(eq: StratifiedEquilibrium, kappa: float, method: str, tol: float) -> Holo:
    if method == "auto":
        method = "neumann" if eq.is_friedlander else "shooting"
    if method == "neumann":
        if not eq.is_friedlander:
            raise NotFriedlander("NotFriedlander: integral formulation needs a Friedlander equilibrium")
        return dispersion_function(eq, kappa, tol=min(tol, 1e-12))
    if method == "shooting":
        return shooting_function(eq, kappa)
    raise ValueError(f"unknown method {method!r}")


def search_region(eq: StratifiedEquilibrium, eps_floor: float) -> Rectangle:
    R = exclusion_radius(eq.shear)
    return Rectangle(-R, R, eps_floor, R)


def spectrum(
    eq: StratifiedEquilibrium,
    kappa: float = 0.0,
    eps_floor: float = 0.05,
    method: str = "auto",
    tol: float = 1e-12,
    region: Optional[Rectangle] = None,
    stats: Optional[dict] = None,
) -> List[Zero]:
    f = _handle(eq, kappa, method, tol)
    return find_zeros(f, region or search_region(eq, eps_floor), tol=tol, stats=stats)


def gamma0(
    alpha: Optional[float],
    eq: StratifiedEquilibrium,
    eps_floor: float = 0.05,
    method: str = "auto",
    kappa: float = 0.0,
    tol: float = 1e-12,
) -> float:
    """Largest ``Im c`` among zeros with ``Im c >= eps_floor``.

    For Friedlander equilibria ``alpha`` (if given) rebuilds the stratification
    on the same shear.
    """
    if alpha is not None and eq.is_friedlander and alpha != eq.alpha:
        eq = build_friedlander(eq.shear, alpha)
    zs = spectrum(eq, kappa, eps_floor, method, tol)
    if not zs:
        raise NoZeroFound(f"NoZeroFound: no zero with Im(c) >= {eps_floor}")
    return max(z.c.imag for z in zs)


@dataclass(frozen=True)
class ConditionReport:
    g1_pass: bool          # Re c inside the range of U
    miles_howard: bool     # equilibrium satisfies Ri >= 1/4
    spurious: bool         # a zero for a Miles-Howard profile cannot be genuine


def verify_necessary_conditions(z: Zero, eq: StratifiedEquilibrium, n: int = 2001) -> ConditionReport:
    zs = np.linspace(-1.0, 1.0, n)
    U = eq.shear.eval(zs)
    g1 = bool(U.min() <= z.c.real <= U.max())
    mh = miles_howard_check(eq).miles_howard_satisfied
    return ConditionReport(g1_pass=g1, miles_howard=mh, spurious=mh)


# --------------------------------------------------------------------------- #
# Nyquist-specific checks

def nyquist_contour(shear: ShearProfile, eps: float = 1e-2) -> HalfDiskContour:
    return HalfDiskContour(eps, exclusion_radius(shear))


def nyquist_winding(shear: ShearProfile, eps: float = 1e-2, check_eps: Optional[float] = 5e-3) -> WindingReport:
    """Winding of ``F`` on the half disk; optionally confirmed at a second ``eps``."""
    rep = winding_number(nyquist_function(shear), nyquist_contour(shear, eps))
    if check_eps is not None:
        other = winding_number(nyquist_function(shear), nyquist_contour(shear, check_eps))
        if other.winding != rep.winding:
            raise RefinementExhausted(
                f"RefinementExhausted: winding {rep.winding} at eps={eps} but {other.winding} at eps={check_eps}"
            )
    return rep


def beta_scan(betas: Sequence[float] = (1, 2, 3, 5, 8), eps: float = 1e-2) -> Dict[float, int]:
    """Nyquist winding for each tanh width ``beta``."""
    return {float(b): nyquist_winding(tanh_shear(b), eps, check_eps=None).winding for b in betas}


def first_unstable_beta(scan: Dict[float, int]) -> Optional[float]:
    for b in sorted(scan):
        if scan[b] == 1:
            return b
    return None


@dataclass(frozen=True)
class PlemeljReport:
    crossings: List[float]
    slope_at_crossing: float
    ok: bool


def plemelj_check(shear: ShearProfile, eps: float = 1e-3, n: int = 400, margin: float = 0.05) -> PlemeljReport:
    """Sign structure of ``Im F`` along ``Re c`` inside the range of ``U``.

    The range is shrunk by ``margin`` (relative) on both sides: near the end
    values of ``U`` the boundary contribution of the integral dominates the
    Plemelj term and produces additional sign changes.
    """
    lo, hi = float(shear.eval(np.array(-1.0))), float(shear.eval(np.array(1.0)))
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    a = np.linspace(mid - (1 - margin) * half, mid + (1 - margin) * half, n)
    im = np.array([nyquist_F(x + 1j * eps, shear).imag for x in a])
    sgn = np.sign(im)
    idx = np.nonzero(sgn[1:] * sgn[:-1] < 0)[0]
    crossings = []
    slope = 0.0
    for i in idx:
        x0, x1 = a[i], a[i + 1]
        crossings.append(float(x0 - im[i] * (x1 - x0) / (im[i + 1] - im[i])))
        slope = float((im[i + 1] - im[i]) / (x1 - x0))
    ok = len(crossings) == 1 and slope > 0
    return PlemeljReport(crossings, slope, ok)
