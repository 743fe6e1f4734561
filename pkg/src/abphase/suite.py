"""Quick invariant batteries for every module, used by ``abphase suite``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aharonov_bohm import (GaugeWorldline, MagneticScenario, gauge_phase, intertwining_residual,
                            solenoid_loop)
from .bargmann import (PlaneGrid, SBFunction, harmonic_spectrum, husimi_from_sb, husimi_from_wigner,
                       sb_apply, sb_inner, sb_inverse, sb_transform)
from .moyal import HamiltonianSpec, classical_limit_probe, evolve_wigner, moyal_bracket, stable_dt, star_poly
from .states import PhaseGrid, make_gaussian_packet
from .symbols import PolySymbol
from .wigner import (marginal_position, matrix_to_poly, weyl_to_matrix,
                     wigner_from_position)


def random_number_state(rng, size, decay=3.0):
    """Random complex amplitudes b_n decaying like exp(-n/decay), top coefficient zero."""
    n = np.arange(size)
    b = (rng.normal(size=size) + 1j * rng.normal(size=size)) * np.exp(-n / decay)
    b[-1] = 0.0
    return b


@dataclass
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tol)


def _wigner_checks(rng):
    g = PhaseGrid.symmetric(np.sqrt(128 * np.pi / 2), 128)
    worst = dict(imag=0.0, trace=0.0, bound=0.0, marg=0.0)
    for _ in range(5):
        psi = make_gaussian_packet(g, rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.6, 1.5))
        w = wigner_from_position(psi)
        worst["imag"] = max(worst["imag"], w.imag_residue)
        worst["trace"] = max(worst["trace"], abs(w.integral() - 1))
        worst["bound"] = max(worst["bound"], np.max(np.abs(w.values)) * np.pi * g.hbar - 1)
        mq = marginal_position(w) - psi.density()
        worst["marg"] = max(worst["marg"], float(np.sqrt(np.sum(mq**2) * g.dq)))
    return [Check("wigner imaginary residue", worst["imag"], 1e-12),
            Check("wigner trace", worst["trace"], 1e-6),
            Check("wigner bound excess", worst["bound"], 1e-9),
            Check("wigner position marginal", worst["marg"], 1e-6)]


def _star_checks(rng):
    q, p = PolySymbol.q(), PolySymbol.p()
    err = (star_poly(q, p) - (q * p + 0.5j)).norm()
    br = (moyal_bracket(q, p) - 1j).norm()
    worst = 0.0
    for _ in range(5):
        a, b = PolySymbol.random(4, rng), PolySymbol.random(4, rng)
        ref = star_poly(a, b)
        got = matrix_to_poly(weyl_to_matrix(a, 40) @ weyl_to_matrix(b, 40), 8)
        worst = max(worst, (got - ref).norm() / ref.norm())
    a4 = PolySymbol.q(4) + PolySymbol.q(1) * PolySymbol.p(2)
    b4 = PolySymbol.p(4) + PolySymbol.q(3) * PolySymbol.p(1)
    e = classical_limit_probe(a4, b4, [1.0, 0.5, 0.25, 0.125])
    ratio_gap = float(np.max(np.abs(e[:-1] / e[1:] - 4.0)))
    return [Check("q*p identity", err, 1e-14), Check("[q,p]_M = i hbar", br, 1e-14),
            Check("matrix oracle vs star_poly", worst, 1e-8),
            Check("classical limit ratio gap from 4", ratio_gap, 0.5)]


def _sb_checks(rng):
    spec = harmonic_spectrum(60)
    g = PhaseGrid.symmetric(np.sqrt(128 * np.pi / 2), 128)
    psi = make_gaussian_packet(g, rng.uniform(-1, 1), rng.uniform(-1, 1), 1.0)
    f = sb_transform(psi)
    back = sb_inverse(f, g)
    rt = float(np.sqrt(np.sum(np.abs(back.values - psi.values) ** 2) * g.dq))
    vac = sb_transform(make_gaussian_packet(g, 0, 0, 1.0))
    f1, f2 = (SBFunction.from_number_basis(random_number_state(rng, 64)) for _ in range(2))
    adj = abs(sb_inner(sb_apply("annihilate", f1), f2) - sb_inner(f1, sb_apply("create", f2)))
    plane = PlaneGrid.from_phase_grid(g)
    h1 = husimi_from_sb(f, plane)
    h2 = husimi_from_wigner(wigner_from_position(psi), plane)
    return [Check("harmonic spectrum", float(np.max(np.abs(spec - (np.arange(60) + 0.5)))), 1e-10),
            Check("transform roundtrip", rt, 1e-8),
            Check("vacuum maps to 1", float(np.max(np.abs(vac.coeffs - np.eye(64)[0]))), 1e-10),
            Check("adjointness of d/dz and z", adj, 1e-10),
            Check("two-path Husimi gap", float(np.max(np.abs(h1.values - h2.values))), 1e-6),
            Check("Husimi negativity", float(max(0.0, -h2.values.min())), 1e-12)]


def _dynamics_checks():
    g = PhaseGrid.symmetric(np.sqrt(256 * np.pi / 2), 256)
    psi = make_gaussian_packet(g, -2.0, 1.5, 1.0)
    w = wigner_from_position(psi)
    h = HamiltonianSpec()
    w1 = evolve_wigner(w, h, 1.0, stable_dt(g, h))
    qq, pp = g.mesh()
    exact = np.exp(-(qq - pp + 2.0) ** 2 - (pp - 1.5) ** 2) / np.pi
    return [Check("free shear", float(np.max(np.abs(w1.values - exact))), 1e-6),
            Check("trace conservation", abs(w1.integral() - w.integral()), 1e-8)]


def _gauge_checks(rng):
    scn = MagneticScenario()
    flux = scn.consts.charge * np.pi * scn.solenoid_radius**2 * scn.field_strength
    loop = abs(gauge_phase(solenoid_loop(scn)) - flux)
    g = PhaseGrid.symmetric(20, 256)
    psi = make_gaussian_packet(g, 0.5, 0.3, 1.0)
    amp = rng.uniform(0.2, 0.5)
    w = GaugeWorldline(np.array([-20.0, 0.0]), [0.0, 1.0],
                       lambda x: amp * np.exp(-np.asarray(x) ** 2 / 8), None)
    return [Check("solenoid loop phase", loop, 1e-8),
            Check("intertwining residual", intertwining_residual(psi, w), 1e-8)]


def run_property_suite(seed=0):
    rng = np.random.default_rng(seed)
    checks = []
    for battery in (_wigner_checks, _star_checks, _sb_checks, _gauge_checks):
        checks += battery(rng)
    checks += _dynamics_checks()
    return checks
