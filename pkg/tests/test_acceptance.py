"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run on its own with ``python3 tests/test_acceptance.py`` or through pytest,
where the lines are repeated in the terminal summary.
"""

import time

import numpy as np

from abphase import (ElectricScenario, GaugeWorldline, GridSymbol, HamiltonianSpec, MagneticScenario,
                     PhaseGrid, PlaneGrid, PolySymbol, SBFunction, WaveFunction, cross_wigner,
                     electric_ab_closed_form, evolve_wigner, gauge_phase, gauge_transform_check,
                     harmonic_spectrum, husimi_from_sb, husimi_from_wigner, intertwining_residual,
                     magnetic_phase_closed_form, make_gaussian_packet, marginal_momentum,
                     marginal_position, matrix_to_poly, moyal_bracket, sb_apply, sb_inner,
                     sb_inverse, sb_transform, simulate_electric_ab, simulate_magnetic_ring,
                     stable_dt, star_grid, star_poly, to_momentum, weyl_to_matrix,
                     wigner_from_position)
from abphase.aharonov_bohm import FORMALISMS, phase_distance, random_gauge, solenoid_loop
from abphase.moyal import classical_limit_probe
from abphase.suite import random_number_state
from abphase.symbols import erf_window
from abphase.wigner import hermite_functions

RESULTS = []


def report(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number} ({title}): {detail}"
    print(line)
    RESULTS.append(line)
    assert passed, line


def line_grid(n):
    return PhaseGrid.symmetric(np.sqrt(n * np.pi / 2), n)


def test_criterion_1_electric_closed_form():
    start = time.perf_counter()
    tau = ElectricScenario().tau
    angles = 2 * np.pi * (np.arange(8) + 0.5) / 8
    worst = 0.0
    for x in angles:
        scn = ElectricScenario(phi2=x / tau)
        for f in FORMALISMS:
            r = simulate_electric_ab(scn, f, n_times=2)
            worst = max(worst, abs(r.prob_at_tau - electric_ab_closed_form(scn)))
    dark = ElectricScenario()
    dark_prob = max(simulate_electric_ab(dark, f, n_times=2).prob_at_tau for f in FORMALISMS)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and dark_prob <= 1e-6 and elapsed <= 10
    report(1, "electric AB closed form", ok,
           f"max |P - closed form| = {worst:.2e} over 8 phases x 2 formalisms, "
           f"q dphi tau = pi gives P(tau) = {dark_prob:.2e}, {elapsed:.1f} s")


def test_criterion_2_magnetic_phase():
    start = time.perf_counter()
    worst = 0.0
    for b in (0.1, 0.35, 0.8, 1.3):
        scn = MagneticScenario(field_strength=b)
        closed = magnetic_phase_closed_form(scn)
        for f in FORMALISMS:
            worst = max(worst, phase_distance(simulate_magnetic_ring(scn, f).final_phase, closed))
    dark = MagneticScenario()
    runs = [simulate_magnetic_ring(dark, f) for f in FORMALISMS]
    dark_phase = max(phase_distance(r.final_phase, np.pi) for r in runs)
    dark_prob = max(r.prob_at_tau for r in runs)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-3 and dark_phase <= 1e-3 and dark_prob <= 1e-4 and elapsed <= 10
    report(2, "magnetic AB phase", ok,
           f"max phase error {worst:.2e} rad, A = p0/16q gives |phase - pi| = {dark_phase:.2e}, "
           f"P(tau) = {dark_prob:.2e}, {elapsed:.1f} s")


def test_criterion_3_wigner_battery():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    g = line_grid(128)
    imag = trace = bound = marg = 0.0
    for _ in range(20):
        psi = make_gaussian_packet(g, rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
                                   rng.uniform(0.6, 1.6))
        w = wigner_from_position(psi)
        imag = max(imag, w.imag_residue)
        trace = max(trace, abs(w.integral() - 1))
        bound = max(bound, np.max(np.abs(w.values)) * np.pi * g.hbar)
        mq = marginal_position(w) - psi.density()
        mp = marginal_momentum(w) - to_momentum(psi).density()
        marg = max(marg, np.sqrt(np.sum(mq**2) * g.dq), np.sqrt(np.sum(mp**2) * g.dp))
    elapsed = time.perf_counter() - start
    ok = (imag <= 1e-12 and trace <= 1e-6 and bound <= 1 + 1e-9 and marg <= 1e-6
          and elapsed <= 30)
    report(3, "Wigner property battery", ok,
           f"imag {imag:.1e}, |int W - 1| {trace:.1e}, max|W| pi hbar {bound:.12f}, "
           f"marginal L2 {marg:.1e}, {elapsed:.1f} s")


def test_criterion_4_star_oracles():
    rng = np.random.default_rng(4)
    q, p = PolySymbol.q(), PolySymbol.p()
    oracle = 0.0
    for _ in range(50):
        a = PolySymbol.random(int(rng.integers(1, 5)), rng)
        b = PolySymbol.random(int(rng.integers(1, 5)), rng)
        ref = star_poly(a, b)
        got = matrix_to_poly(weyl_to_matrix(a, 40) @ weyl_to_matrix(b, 40), a.degree + b.degree)
        oracle = max(oracle, (got - ref).norm() / ref.norm())
    g = PhaseGrid.symmetric(20, 256)
    window = erf_window(8, 1.0)
    Q, P = g.mesh()
    inner = (np.abs(Q) <= 2) & (np.abs(P) <= 2)
    grid_err = 0.0
    pairs = [(q, p)] + [(PolySymbol.random(4, rng), PolySymbol.random(4, rng)) for _ in range(3)]
    for a, b in pairs:
        got = star_grid(GridSymbol.from_poly(a, g, window), GridSymbol.from_poly(b, g, window)).values
        grid_err = max(grid_err, float(np.max(np.abs(got - star_poly(a, b).sample(g))[inner])))
    qp = (star_poly(q, p) - (q * p + 0.5j)).norm()
    br = (moyal_bracket(q, p) - PolySymbol.constant(1j)).norm()
    ok = oracle <= 1e-8 and grid_err <= 1e-8 and qp == 0 and br == 0
    report(4, "star-product oracle equivalence", ok,
           f"matrix oracle rel err {oracle:.1e} (50 pairs), grid vs poly {grid_err:.1e} "
           f"on |q|,|p| <= 2 ({len(pairs)} pairs), q*p and [q,p]_M exact")


def test_criterion_5_classical_limit():
    rng = np.random.default_rng(5)
    hbars = [1.0, 0.5, 0.25, 0.125]
    ratios = []
    quartics = [(PolySymbol.q(4) + PolySymbol.q() * PolySymbol.p(2),
                 PolySymbol.p(4) + PolySymbol.q(3) * PolySymbol.p())]
    quartics += [(PolySymbol.random(4, rng), PolySymbol.random(4, rng)) for _ in range(4)]
    for a, b in quartics:
        e = classical_limit_probe(a, b, hbars)
        ratios += list(e[:-1] / e[1:])
    g = line_grid(128)
    ga = GridSymbol.from_function(g, lambda Q, P: np.exp(-((Q - 0.5) ** 2 + P**2) / 2))
    gb = GridSymbol.from_function(g, lambda Q, P: Q * np.exp(-(Q**2 + (P - 0.4) ** 2) / 3))
    e = classical_limit_probe(ga, gb, [0.5, 0.25, 0.125, 0.0625])
    ratios += list(e[:-1] / e[1:])
    lo, hi = min(ratios), max(ratios)
    report(5, "classical limit", 3.5 <= lo and hi <= 4.5,
           f"error ratios per halving in [{lo:.4f}, {hi:.4f}] (5 quartic pairs, 1 Gaussian pair)")


def test_criterion_6_sb_battery():
    rng = np.random.default_rng(6)
    spec = float(np.max(np.abs(harmonic_spectrum(60) - (np.arange(60) + 0.5))))
    g = line_grid(128)
    rt = 0.0
    for _ in range(10):
        psi = make_gaussian_packet(g, rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.7, 1.4))
        back = sb_inverse(sb_transform(psi), g)
        rt = max(rt, float(np.sqrt(np.sum(np.abs(back.values - psi.values) ** 2) * g.dq)))
    vac = sb_transform(make_gaussian_packet(g, 0, 0, 1.0))
    vac_err = float(np.max(np.abs(vac.coeffs - np.eye(vac.size)[0])))
    adj = 0.0
    for _ in range(20):
        f = SBFunction.from_number_basis(random_number_state(rng, 64))
        h = SBFunction.from_number_basis(random_number_state(rng, 64))
        adj = max(adj, abs(sb_inner(sb_apply("annihilate", f), h) - sb_inner(f, sb_apply("create", h))))
    ok = spec <= 1e-10 and rt <= 1e-8 and vac_err <= 1e-10 and adj <= 1e-10
    report(6, "Segal-Bargmann battery", ok,
           f"spectrum {spec:.1e}, roundtrip L2 {rt:.1e}, phi0 - 1 {vac_err:.1e}, adjointness {adj:.1e}")


def test_criterion_7_two_path_husimi():
    rng = np.random.default_rng(7)
    g = line_grid(128)
    plane = PlaneGrid.from_phase_grid(g)
    states = [WaveFunction(g, hermite_functions(g.q, 2)[:, 1])]
    states += [make_gaussian_packet(g, rng.uniform(-2, 2), rng.uniform(-2, 2), 1.0) for _ in range(6)]
    cat = make_gaussian_packet(g, -1.5, 0.5, 1.0) + make_gaussian_packet(g, 1.5, -0.5, 1.0)
    states += [cat.normalized(), WaveFunction(g, hermite_functions(g.q, 4)[:, 3]),
               WaveFunction(g, hermite_functions(g.q, 3) @ np.array([1, 1j, -0.5])).normalized()]
    gap, low, neg_w = 0.0, np.inf, np.inf
    for psi in states:
        w = wigner_from_position(psi)
        h_w = husimi_from_wigner(w, plane)
        h_sb = husimi_from_sb(sb_transform(psi), plane)
        gap = max(gap, float(np.max(np.abs(h_w.values - h_sb.values))))
        low = min(low, float(h_w.values.min()), float(h_sb.values.min()))
        neg_w = min(neg_w, float(w.values.min()))
    ok = gap <= 1e-6 and low >= -1e-12 and len(states) == 10
    report(7, "two-path Husimi", ok,
           f"L_inf gap {gap:.1e} on {len(states)} states, min Husimi {low:.1e} "
           f"(min Wigner {neg_w:.3f})")


def test_criterion_8_gauge_invariance():
    rng = np.random.default_rng(8)
    scn = ElectricScenario(phi2=0.15)
    dev = max(gauge_transform_check(scn, random_gauge(rng)) for _ in range(10))
    g = PhaseGrid.symmetric(20, 256)
    psi = make_gaussian_packet(g, 0.5, 0.3, 1.0)
    chi = make_gaussian_packet(g, -0.5, -0.2, 1.1)
    w = GaugeWorldline(np.array([-20.0, 0.0]), [0.0, 1.0],
                       lambda x: 0.3 * np.exp(-np.asarray(x) ** 2 / 8), None)
    resid = max(intertwining_residual(psi, w), intertwining_residual(sb_transform(psi, size=48), w),
                intertwining_residual(cross_wigner(psi, chi), w))
    mag = MagneticScenario()
    flux = mag.consts.charge * np.pi * mag.solenoid_radius**2 * mag.field_strength
    loop = abs(gauge_phase(solenoid_loop(mag)) - flux)
    ok = dev <= 1e-10 and resid <= 1e-8 and loop <= 1e-8
    report(8, "gauge invariance", ok,
           f"max dP over 10 random gauges {dev:.1e}, intertwining {resid:.1e} "
           f"(wave function, SB, cross-Wigner), loop phase error {loop:.1e}")


def test_criterion_9_free_evolution():
    g = line_grid(256)
    w0 = wigner_from_position(make_gaussian_packet(g, -2.0, 1.5, 1.0))
    h = HamiltonianSpec()
    w1 = evolve_wigner(w0, h, 1.0, stable_dt(g, h))
    Q, P = g.mesh()
    exact = np.exp(-(Q - P + 2.0) ** 2 - (P - 1.5) ** 2) / np.pi
    err = float(np.max(np.abs(w1.values - exact)))
    drift = abs(w1.integral() - w0.integral())
    report(9, "free evolution", err <= 1e-6 and drift <= 1e-8,
           f"max |W - sheared W0| {err:.1e} at 256x256, trace drift {drift:.1e}")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
