import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abphase import (AliasingDetected, GridMismatch, PhaseGrid, PolySymbol, TruncationTooSevere,
                     WaveFunction, cross_wigner, make_gaussian_packet, make_ring_mode,
                     marginal_momentum, marginal_position, to_momentum, wigner_from_momentum,
                     wigner_from_position)
from abphase.wigner import (OperatorMatrix, expectation, hermite_functions, ladder_qp, matrix_to_poly,
                            matrix_to_symbol, purity, read_wigner_csv, symbol_to_matrix,
                            weyl_to_matrix, write_wigner_csv)

GRID = PhaseGrid.symmetric(np.sqrt(128 * np.pi / 2), 128)


def ground_wigner():
    return wigner_from_position(make_gaussian_packet(GRID, 0, 0, 1.0))


def test_ground_state_closed_form():
    w = ground_wigner()
    Q, P = GRID.mesh()
    assert np.max(np.abs(w.values - np.exp(-Q**2 - P**2) / np.pi)) <= 1e-12
    i0 = np.argmin(np.abs(GRID.q))
    assert w.values[i0, i0] == pytest.approx(1 / np.pi, abs=1e-14)


def test_zero_state_gives_zero_field():
    zero = WaveFunction(GRID, np.zeros(GRID.n_q))
    assert not np.any(wigner_from_position(zero).values)
    assert not np.any(wigner_from_momentum(to_momentum(zero)).values)


def test_bound_and_negativity_of_excited_state():
    psi0 = make_gaussian_packet(GRID, 0, 0, 1.0)
    psi1 = WaveFunction(GRID, np.sqrt(2) * GRID.q * psi0.values).normalized()
    w = wigner_from_position(psi1)
    assert np.max(np.abs(w.values)) <= 1 / np.pi * (1 + 1e-9)
    # the first excited state reaches -1/pi at the origin
    assert w.values.min() == pytest.approx(-1 / np.pi, abs=1e-12)


def test_momentum_formula_matches_position_formula():
    psi = make_gaussian_packet(GRID, 0.7, -1.1, 0.9)
    a = wigner_from_position(psi)
    b = wigner_from_momentum(to_momentum(psi))
    assert np.max(np.abs(a.values - b.values)) <= 1e-8


def test_ring_mode_wigner_concentrates_on_momentum_row():
    R = 2.0
    g = PhaseGrid.ring(R, 32)
    n = 3
    for k in (n, -n):
        w = wigner_from_momentum(to_momentum(make_ring_mode(g, k)))
        row = np.argmin(np.abs(g.p - k / R))
        mass = np.sum(w.values, axis=0) * g.dq * g.dp
        assert mass[row] == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(np.delete(mass, row), 0, atol=1e-12)
        # no dependence on position along the row
        assert np.ptp(w.values[:, row]) <= 1e-12


def test_ring_cross_term_carries_double_carrier():
    R = 2.0
    g = PhaseGrid.ring(R, 32)
    n = 3
    plus, minus = make_ring_mode(g, n), make_ring_mode(g, -n)
    c = cross_wigner(plus, minus)
    # momentum profile peaks at p = 0
    prof = np.sum(np.abs(c.values), axis=0)
    assert g.p[np.argmax(prof)] == pytest.approx(0.0, abs=1e-12)
    row = np.argmin(np.abs(g.p))
    carrier = c.values[:, row] / c.values[0, row]
    assert np.max(np.abs(carrier - np.exp(2j * n * g.q / R))) <= 1e-10


def test_cross_wigner_conjugate_swap_and_diagonal():
    a = make_gaussian_packet(GRID, 1, 0.5, 1.0)
    b = make_gaussian_packet(GRID, -1, -0.3, 1.2)
    ab, ba = cross_wigner(a, b), cross_wigner(b, a)
    assert np.max(np.abs(ab.values - np.conj(ba.values))) <= 1e-12
    assert np.max(np.abs(cross_wigner(a, a).values - wigner_from_position(a).values)) <= 1e-12
    # the cross field integrates to the overlap <b|a>
    assert abs(ab.integral() - b.inner(a)) <= 1e-10


def test_cross_wigner_grid_mismatch():
    other = PhaseGrid.symmetric(12, 128)
    with pytest.raises(GridMismatch):
        cross_wigner(make_gaussian_packet(GRID, 0, 0, 1), make_gaussian_packet(other, 0, 0, 1))


def test_aliasing_detected():
    g = PhaseGrid.symmetric(6, 64)
    # legal packet tails but the offset integral reaches past the window
    psi = WaveFunction(g, np.exp(-g.q**2 / (2 * 1.2**2)) * (np.abs(g.q) < 5.5)).normalized()
    with pytest.raises(AliasingDetected):
        wigner_from_position(psi)


def test_marginals_of_ground_state():
    w = ground_wigner()
    rho = marginal_position(w)
    assert np.max(np.abs(rho - np.exp(-GRID.q**2) / np.sqrt(np.pi))) <= 1e-12
    assert np.sum(rho) * GRID.dq == pytest.approx(1, abs=1e-6)


def test_expectations_of_ground_state():
    w = ground_wigner()
    assert expectation(w, lambda q, p: np.ones_like(q)) == pytest.approx(1, abs=1e-6)
    assert expectation(w, lambda q, p: (q**2 + p**2) / 2) == pytest.approx(0.5, abs=1e-10)
    assert abs(expectation(w, lambda q, p: q)) <= 1e-10
    # same number from the operator side
    h = weyl_to_matrix((PolySymbol.q(2) + PolySymbol.p(2)) / 2, 20)
    assert h.entries[0, 0].real == pytest.approx(0.5, abs=1e-14)


def test_purity_of_pure_state():
    w = wigner_from_position(make_gaussian_packet(GRID, 0.5, 0.5, 1.3))
    assert purity(w) == pytest.approx(1 / (2 * np.pi), abs=1e-5)


def test_csv_roundtrip(tmp_path):
    g = PhaseGrid.symmetric(10, 32)
    w = wigner_from_position(make_gaussian_packet(g, 0, 0, 1.0))
    path = tmp_path / "w.csv"
    write_wigner_csv(w, path)
    text = path.read_text().splitlines()
    assert text[0] == "q,p,w"
    assert len(text) == 1 + 32 * 32
    back = read_wigner_csv(path, g)
    assert np.array_equal(back.values, w.values)


# -- matrix oracle --------------------------------------------------------------


def test_symbol_q_is_position_matrix():
    Q, _ = ladder_qp(30)
    m = weyl_to_matrix(PolySymbol.q(), 30)
    assert np.allclose(m.entries, Q, atol=1e-15)
    assert m.is_hermitian()
    assert matrix_to_poly(m, 1).allclose(PolySymbol.q())


def test_symbol_one_is_identity():
    assert np.allclose(weyl_to_matrix(PolySymbol.constant(1), 12).entries, np.eye(12))


def test_symbol_qp_is_symmetrized():
    Q, P = ladder_qp(40)
    m = weyl_to_matrix(PolySymbol.q() * PolySymbol.p(), 30)
    ref = ((Q @ P + P @ Q) / 2)[:30, :30]
    assert np.max(np.abs(m.entries - ref)) <= 1e-12


def test_truncation_too_severe():
    with pytest.raises(TruncationTooSevere):
        weyl_to_matrix(PolySymbol.q(4), 4)


def test_hermite_functions_orthonormal():
    x = np.linspace(-20, 20, 4001)
    phi = hermite_functions(x, 20, length=1.5)
    gram = phi.T @ phi * (x[1] - x[0])
    assert np.max(np.abs(gram - np.eye(20))) <= 1e-10


def test_matrix_to_symbol_of_vacuum_projector():
    rho = np.zeros((24, 24))
    rho[0, 0] = 1.0
    sym = matrix_to_symbol(OperatorMatrix(rho), GRID)
    Q, P = GRID.mesh()
    # the Weyl symbol of |0><0| is 2 pi hbar times its Wigner function
    assert np.max(np.abs(sym - 2 * np.exp(-Q**2 - P**2))) <= 1e-10


def test_symbol_to_matrix_inverts_matrix_to_symbol():
    rng = np.random.default_rng(3)
    m = np.zeros((16, 16), dtype=complex)
    m[:8, :8] = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    sym = matrix_to_symbol(OperatorMatrix(m), GRID)
    back = symbol_to_matrix(sym, GRID, 16)
    assert np.max(np.abs(back.entries - m)) <= 1e-9


packets = st.tuples(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5), st.floats(0.6, 1.6))


@settings(max_examples=25, deadline=None)
@given(packets)
def test_wigner_battery(params):
    psi = make_gaussian_packet(GRID, *params)
    w = wigner_from_position(psi)
    assert w.imag_residue <= 1e-12
    assert abs(w.integral() - 1) <= 1e-6
    assert np.max(np.abs(w.values)) <= 1 / np.pi * (1 + 1e-9)
    mq = marginal_position(w) - psi.density()
    mp = marginal_momentum(w) - to_momentum(psi).density()
    assert np.sqrt(np.sum(mq**2) * GRID.dq) <= 1e-6
    assert np.sqrt(np.sum(mp**2) * GRID.dp) <= 1e-6
