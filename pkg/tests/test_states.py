import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abphase import (GridTooSmall, NotPeriodic, PhaseGrid, PhysicalConstants, WaveFunction,
                     make_gaussian_packet, make_ring_mode, to_momentum, to_position)
from abphase.states import apply_momentum, momentum_expectation, spectral_derivative


def test_constants_validation():
    with pytest.raises(ValueError):
        PhysicalConstants(hbar=0)
    with pytest.raises(ValueError):
        PhysicalConstants(mass=-1)


def test_grid_rejects_odd_or_inverted():
    with pytest.raises(ValueError):
        PhaseGrid(-1, 1, 7, -1, 1, 8)
    with pytest.raises(ValueError):
        PhaseGrid(1, -1, 8, -1, 1, 8)


def test_conjugate_grid_spacing():
    g = PhaseGrid.symmetric(10, 64, hbar=0.5)
    assert g.is_conjugate
    assert g.dq * g.dp * g.n_q == pytest.approx(2 * np.pi * 0.5)


def test_ground_state_peak_value(grid128):
    psi = make_gaussian_packet(grid128, 0.0, 0.0, 1.0)
    i0 = np.argmin(np.abs(grid128.q))
    assert grid128.q[i0] == pytest.approx(0.0, abs=1e-12)
    assert psi.values[i0].real == pytest.approx(np.pi ** -0.25, abs=1e-12)


def test_packet_normalized(grid128):
    psi = make_gaussian_packet(grid128, 1.3, -0.7, 0.8)
    assert abs(psi.norm() - 1) <= 1e-10


def test_packet_too_wide_raises():
    g = PhaseGrid.symmetric(5, 64)
    with pytest.raises(GridTooSmall):
        make_gaussian_packet(g, 0, 0, 2.0)


def test_momentum_peak_follows_center_p(grid128):
    for p0 in (0.0, 2.0, -1.5):
        phi = to_momentum(make_gaussian_packet(grid128, 0, p0, 1.0))
        assert grid128.p[np.argmax(phi.density())] == pytest.approx(p0, abs=grid128.dp)


def test_fourier_of_gaussian_is_gaussian(grid128):
    phi = to_momentum(make_gaussian_packet(grid128, 0, 0, 1.0))
    exact = np.pi ** -0.25 * np.exp(-grid128.p**2 / 2)
    assert np.max(np.abs(phi.values - exact)) <= 1e-12


def test_roundtrip_and_parseval(grid128):
    psi = make_gaussian_packet(grid128, -1.0, 0.5, 1.2)
    phi = to_momentum(psi)
    assert abs(phi.norm() - psi.norm()) <= 1e-12
    back = to_position(phi)
    assert np.max(np.abs(back.values - psi.values)) <= 1e-12


def test_ring_mode_zero_index_is_constant():
    g = PhaseGrid.ring(2.0, 32)
    psi = make_ring_mode(g, 0)
    assert np.allclose(psi.values, 1 / np.sqrt(2 * np.pi * 2.0), atol=1e-15)
    assert abs(psi.norm() - 1) <= 1e-12


def test_ring_mode_momentum_expectation():
    R = 3.0
    g = PhaseGrid.ring(R, 64)
    for n in (-5, 1, 7):
        psi = make_ring_mode(g, n)
        assert momentum_expectation(psi) == pytest.approx(n / R, abs=1e-12)
        # exact eigenvector of the spectral derivative
        resid = apply_momentum(psi).values - (n / R) * psi.values
        assert np.max(np.abs(resid)) <= 1e-12


def test_ring_modes_orthogonal():
    g = PhaseGrid.ring(1.5, 64)
    a, b = make_ring_mode(g, 3), make_ring_mode(g, -2)
    assert abs(a.inner(b)) <= 1e-12


def test_ring_mode_needs_periodic_grid(grid128):
    with pytest.raises(NotPeriodic):
        make_ring_mode(grid128, 1)


def test_spectral_derivative_of_sine():
    g = PhaseGrid.ring(1.0, 32)
    d = spectral_derivative(np.sin(3 * g.q), g.dq)
    assert np.max(np.abs(d - 3 * np.cos(3 * g.q))) <= 1e-12


packets = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.6, 1.8))


@settings(max_examples=30, deadline=None)
@given(packets)
def test_norm_preserved_by_fourier(params):
    g = PhaseGrid.symmetric(np.sqrt(128 * np.pi / 2), 128)
    psi = make_gaussian_packet(g, *params)
    assert abs(to_momentum(psi).norm() - psi.norm()) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(packets)
def test_grid_refinement_keeps_norm(params):
    g = PhaseGrid.symmetric(np.sqrt(128 * np.pi / 2), 128)
    fine = PhaseGrid.symmetric(g.q_max, 256)
    q0, p0, w = params
    raw = lambda grid: np.sum(np.exp(-(grid.q - q0) ** 2 / w**2)) * grid.dq
    assert abs(raw(fine) - raw(g)) <= 1e-8


def test_wavefunction_arithmetic(grid128):
    a = make_gaussian_packet(grid128, 1, 0, 1)
    b = make_gaussian_packet(grid128, -1, 0, 1)
    s = a + b
    assert isinstance(s, WaveFunction)
    assert s.norm() == pytest.approx(2 + 2 * a.inner(b).real, rel=1e-12)
