import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import C1, CSTAR
from stratinstab.errors import NoZeroFound, RefinementExhausted, ZeroOnContour
from stratinstab.profiles import couette_stable, tanh_shear
from stratinstab.rootfinder import (
    HalfDiskContour,
    Rectangle,
    Zero,
    beta_scan,
    exclusion_radius,
    find_zeros,
    first_unstable_beta,
    gamma0,
    nyquist_F,
    nyquist_winding,
    plemelj_check,
    spectrum,
    verify_necessary_conditions,
    winding_number,
)

BOX = Rectangle(-1.0, 1.0, 0.1, 2.0)


@pytest.mark.parametrize(
    "f, expected",
    [
        (lambda c: c - 0.5j, 1),
        (lambda c: (c - 0.3j) * (c - 1j), 2),
        (lambda c: (c - 0.3j) ** 2 * (c - 5), 2),
        (lambda c: 1.0 / (c - 0.5j), -1),
        (lambda c: c + 3, 0),
        (lambda c: np.exp(c), 0),
    ],
)
def test_winding_of_elementary_functions(f, expected):
    assert winding_number(f, BOX).winding == expected


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 3)), min_size=1, max_size=5))
def test_winding_counts_polynomial_roots(roots):
    box = Rectangle(-1.0, 1.0, 0.1, 2.0)
    roots = [complex(x, y) for x, y in roots]
    # keep roots well away from the boundary
    if any(min(abs(r.real - box.x0), abs(r.real - box.x1), abs(r.imag - box.y0), abs(r.imag - box.y1)) < 1e-2 for r in roots):
        return
    inside = sum(box.contains(r) for r in roots)
    rep = winding_number(lambda c: np.prod([c - r for r in roots]), box)
    assert rep.winding == inside
    assert rep.max_phase_step < np.pi / 2


def test_half_disk_winding():
    rep = winding_number(lambda c: (c - 0.5j) * (c + 2j), HalfDiskContour(0.01, 3.0))
    assert rep.winding == 1
    ph = rep.phases()
    assert ph[-1] == pytest.approx(2 * np.pi, abs=1e-9)


def test_zero_on_contour():
    with pytest.raises(ZeroOnContour):
        winding_number(lambda c: c - (0.25 + 0.1j), BOX)


def test_budget_exhaustion():
    with pytest.raises(RefinementExhausted):
        winding_number(lambda c: (c - 0.5j) ** 30, BOX, budget=50)


def test_find_zeros_quadratic():
    stats = {}
    zs = find_zeros(lambda c: c * c + 1, Rectangle(-2, 2, 0.1, 3), stats=stats)
    assert len(zs) == 1
    assert abs(zs[0].c - 1j) < 1e-12
    assert stats["mismatches"] == 0 and stats["total_winding"] == 1


def test_find_zeros_separates_close_pair():
    a = 0.31 + 0.47j
    zs = find_zeros(lambda c: (c - a) * (c - a - 0.003), Rectangle(-1, 1, 0.1, 1))
    got = sorted(z.c.real for z in zs)
    assert len(zs) == 2
    # |f'| = 0.003 at each root, so |f| < 1e-12 pins c only to ~3e-10
    assert got == pytest.approx([0.31, 0.313], abs=1e-9)


def test_find_zeros_pole_stalls():
    with pytest.raises(RefinementExhausted):
        find_zeros(lambda c: 1.0 / (c - 0.5j), Rectangle(-1, 1, 0.1, 1))


def test_find_zeros_rejects_lower_region():
    with pytest.raises(ValueError):
        find_zeros(lambda c: c, Rectangle(-1, 1, 0.0, 1))


# ---------------------------------------------------------------- Nyquist

def test_nyquist_far_field():
    # F(c) -> 2 / c^2 as |c| -> infinity
    sh = tanh_shear(5.0)
    for R in (50.0, 100.0):
        for th in (0.3, 1.2, 2.5):
            c = R * np.exp(1j * th)
            assert abs(nyquist_F(c, sh) * c * c / 2 - 1) < 2.0 / R**2 * 10


def test_nyquist_conjugation():
    sh = tanh_shear(5.0)
    c = 0.2 + 0.3j
    assert abs(nyquist_F(c.conjugate(), sh) - nyquist_F(c, sh).conjugate()) < 1e-12


def test_nyquist_zero_matches_oracle():
    sh = tanh_shear(5.0)
    f = lambda c: nyquist_F(c, sh)
    zs = find_zeros(f, Rectangle(-1, 1, 0.05, 1.5))
    assert len(zs) == 1
    assert abs(zs[0].c - C1) < 1e-10


def test_exclusion_radius_closed_form():
    for S in (0.1, 0.5, 1.0, np.tanh(5.0), 3.0):
        exact = S / (1 - 1 / np.sqrt(1 + S))
        assert exclusion_radius(S) == pytest.approx(exact, abs=2e-6)
        assert exclusion_radius(S) > S


def test_exclusion_radius_monotone():
    Ss = np.linspace(0.05, 4, 30)
    Rs = [exclusion_radius(S) for S in Ss]
    # R(S) is increasing for S >= 1 and tends to 2 as S -> 0
    assert exclusion_radius(1e-6) == pytest.approx(2.0, abs=1e-4)
    big = [R for S, R in zip(Ss, Rs) if S >= 1]
    assert np.all(np.diff(big) > 0)


def test_no_nyquist_zero_outside_exclusion_radius():
    sh = tanh_shear(5.0)
    R = exclusion_radius(sh)
    for th in np.linspace(0.05, np.pi - 0.05, 9):
        for r in (1.01 * R, 2 * R):
            assert abs(nyquist_F(r * np.exp(1j * th), sh)) > 0


def test_nyquist_winding_beta5():
    rep = nyquist_winding(tanh_shear(5.0))
    assert rep.winding == 1
    assert rep.max_phase_step < np.pi / 2


def test_beta_scan():
    scan = beta_scan((0.1, 2, 5))
    assert scan == {0.1: 0, 2.0: 1, 5.0: 1}
    assert first_unstable_beta(scan) == 2.0
    assert first_unstable_beta({1.0: 0}) is None


def test_plemelj_sign_structure():
    rep = plemelj_check(tanh_shear(5.0))
    assert rep.ok
    assert rep.crossings[0] == pytest.approx(0.0, abs=1e-3)
    assert rep.slope_at_crossing > 0


# ---------------------------------------------------------------- dispersion searches

def test_spectrum_friedlander(eq97):
    stats = {}
    zs = spectrum(eq97, stats=stats)
    assert len(zs) >= 1
    assert abs(zs[0].c - CSTAR[0.97]) < 1e-10
    assert stats["mismatches"] == 0
    rep = verify_necessary_conditions(zs[0], eq97)
    assert rep.g1_pass and not rep.spurious


def test_gamma0_couette_has_no_zeros():
    with pytest.raises(NoZeroFound):
        gamma0(None, couette_stable())


def test_conditions_flags():
    eq = couette_stable()
    rep = verify_necessary_conditions(Zero(2.0 + 0.1j, 0.0, 0), eq)
    assert not rep.g1_pass
    assert rep.miles_howard and rep.spurious
