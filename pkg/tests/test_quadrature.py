import numpy as np
import pytest
from scipy.integrate import quad

from stratinstab.quadrature import PanelGrid, adaptive_edges, adaptive_integral


def test_cumulative_matches_antiderivative():
    g = PanelGrid.uniform(8)
    f = np.cos(3 * g.nodes)
    assert np.allclose(g.cumulative(f), (np.sin(3 * g.nodes) + np.sin(3.0)) / 3, atol=1e-14)
    assert g.integral(f) == pytest.approx(2 * np.sin(3.0) / 3, abs=1e-14)


def test_refined_grid_has_twice_the_panels():
    g = PanelGrid.uniform(5)
    assert g.refined().n_panels == 10
    assert np.isclose(g.refined().weights.sum(), 2.0)


def test_interpolation_is_spectral():
    g = PanelGrid.uniform(4)
    z = np.linspace(-1, 1, 57)
    assert np.max(np.abs(g.interpolate(np.exp(g.nodes), z) - np.exp(z))) < 1e-13


def test_rejects_unsorted_edges():
    with pytest.raises(ValueError):
        PanelGrid([0.0, -1.0, 1.0])


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("c", [0.1 + 1e-3j, 0.5 + 0.05j, 1e-3j, 0.9999 + 0.01j])
def test_adaptive_integral_against_scipy(c):
    f = lambda z: 1.0 / (np.tanh(5 * z) - c) ** 2
    brk = [np.arctanh(min(c.real, 0.9999)) / 5]
    re = quad(lambda z: f(z).real, -1, 1, points=brk, limit=2000, epsabs=0, epsrel=1e-13)[0]
    im = quad(lambda z: f(z).imag, -1, 1, points=brk, limit=2000, epsabs=0, epsrel=1e-13)[0]
    val = adaptive_integral(f)
    assert abs(val - (re + 1j * im)) <= 1e-11 * max(1.0, abs(re + 1j * im))


def test_adaptive_edges_cluster_near_singularity():
    c = 0.3 + 1e-3j
    edges = adaptive_edges(lambda z: 1.0 / (np.tanh(5 * z) - c) ** 2)
    zc = np.arctanh(0.3) / 5
    widths = np.diff(edges)
    near = widths[np.argmin(np.abs(0.5 * (edges[1:] + edges[:-1]) - zc))]
    assert near < 1e-2 * widths.max()
    assert edges[0] == -1.0 and edges[-1] == 1.0
