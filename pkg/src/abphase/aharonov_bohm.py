"""Aharonov-Bohm scenarios run in the Wigner and Segal-Bargmann formalisms.

Phase convention: the interference phase is the phase of branch 1 relative
to branch 2, ``arg(psi_1 conj(psi_2))``.  With it the electric case gives
``+q dphi tau`` and the magnetic ring ``+2 p0 q A tau / m``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bargmann import SBFunction, coefficient_operators, sb_evolve, sb_inner, sb_inverse, sb_transform
from .errors import (FormalismMismatch, IncommensurateMomentum, PhaseSpaceError, TruncationOverflow,
                     UnsupportedState)
from .io import atomic_write_text
from .moyal import HamiltonianSpec, ScalarSchedule, evolve_wigner, stable_dt, star_mixed
from .states import (PhaseGrid, PhysicalConstants, WaveFunction, apply_momentum, make_gaussian_packet,
                     make_ring_mode)
from .symbols import PolySymbol
from .wigner import CrossWignerField, WignerField, cross_wigner, marginal_position, weyl_to_matrix

FORMALISMS = ("wigner", "segal-bargmann")


def wrap_phase(theta):
    """Reduce to (-pi, pi]."""
    t = np.mod(np.asarray(theta, dtype=float) + np.pi, 2 * np.pi) - np.pi
    t = np.where(t == -np.pi, np.pi, t)
    return float(t) if np.ndim(t) == 0 else t


def phase_distance(a, b):
    """Smallest angle between two phases."""
    return abs(wrap_phase(a - b))


# -- scenario descriptions ----------------------------------------------------


@dataclass(frozen=True)
class ElectricScenario:
    """Two conduits held at constant potentials phi1, phi2 during [0, tau]."""

    phi1: float = 0.0
    phi2: float = 0.25
    tau: float = 4 * np.pi
    e0: float = 0.5
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)
    split: float = 0.5
    packet_width: float = 3.0
    half_width: float = 60.0
    n_grid: int = 384
    sb_size: int = 128
    sb_length: Optional[float] = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.e0 > 0:
            raise ValueError("e0 must be positive")
        if not 0 < self.split < 1:
            raise ValueError("split must lie strictly between 0 and 1")

    @property
    def dphi(self):
        return self.phi2 - self.phi1

    @property
    def p0(self):
        return float(np.sqrt(2 * self.consts.mass * self.e0))

    def hamiltonian(self, branch):
        c = self.consts
        level = self.phi1 if branch == 1 else self.phi2
        return HamiltonianSpec(c.mass, c.charge, ScalarSchedule.pulse(level, 0.0, self.tau))

    def grid(self):
        return PhaseGrid.symmetric(self.half_width, self.n_grid, self.consts.hbar)

    @property
    def length_scale(self):
        """Segal-Bargmann length unit; the packet width makes the packet coherent."""
        return self.packet_width if self.sb_length is None else self.sb_length

    def packet(self):
        """Gaussian aimed so that it sits at the origin half way through the device."""
        c = self.consts
        q0 = -self.p0 * self.tau / (2 * c.mass)
        return make_gaussian_packet(self.grid(), q0, self.p0, self.packet_width, c)


@dataclass(frozen=True)
class MagneticScenario:
    """Ring of radius R around a solenoid (radius a, interior field B), on during [0, tau]."""

    solenoid_radius: float = 1.0
    field_strength: float = 0.5
    ring_radius: float = 4.0
    tau: float = 8 * np.pi
    p0: float = 1.0
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)
    split: float = 0.5
    n_ring: int = 64
    sb_size: int = 64

    def __post_init__(self):
        if not self.ring_radius > self.solenoid_radius:
            raise ValueError("ring radius must exceed solenoid radius")
        if not self.solenoid_radius > 0:
            raise ValueError("solenoid radius must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not 0 < self.split < 1:
            raise ValueError("split must lie strictly between 0 and 1")

    @property
    def vector_potential(self):
        """A = a^2 B / (2 R) along the ring."""
        return self.solenoid_radius**2 * self.field_strength / (2 * self.ring_radius)

    @property
    def mode_index(self):
        k = self.p0 * self.ring_radius / self.consts.hbar
        if abs(k - round(k)) > 1e-9:
            raise IncommensurateMomentum(
                f"p0 R / hbar = {k:.12g} is not an integer; the ring admits only p = hbar k / R")
        return int(round(k))

    @property
    def e0(self):
        return self.p0**2 / (2 * self.consts.mass)

    def grid(self):
        return PhaseGrid.ring(self.ring_radius, self.n_ring, self.consts.hbar)


@dataclass(frozen=True)
class GaugeWorldline:
    """Path x(lambda) with times t(lambda) through static A(x) and scalar phi(t).

    ``path`` is (n,) for one dimension or (n, d); ``vector_potential`` maps
    positions of that shape to A of the same shape.
    """

    path: np.ndarray
    times: np.ndarray
    vector_potential: Callable = None
    scalar_potential: object = None
    charge: float = 1.0

    def __post_init__(self):
        path = np.asarray(self.path, dtype=float)
        times = np.asarray(self.times, dtype=float)
        if path.shape[0] != times.shape[0] or path.shape[0] < 2:
            raise ValueError("path and times need the same number (>= 2) of samples")
        object.__setattr__(self, "path", path)
        object.__setattr__(self, "times", times)

    def potential_at(self, x):
        if self.vector_potential is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return np.asarray(self.vector_potential(x), dtype=float)

    def scalar_integral(self):
        """Integral of phi dt along the worldline's time samples."""
        phi, t = self.scalar_potential, self.times
        if phi is None:
            return 0.0
        if isinstance(phi, ScalarSchedule):
            return float(sum(np.sign(b - a) * phi.integral(min(a, b), max(a, b))
                             for a, b in zip(t[:-1], t[1:])))
        vals = np.asarray([phi(s) for s in t], dtype=float)
        return float(np.trapezoid(vals, t))


@dataclass
class ScenarioResult:
    formalism: str
    times: np.ndarray
    prob: np.ndarray
    phase: np.ndarray
    final_phase: float
    closed_form_phase: float
    prob_at_tau: float
    closed_form_prob: float
    frames: list = field(default_factory=list)

    def __post_init__(self):
        if np.any(self.prob < -1e-12) or np.any(self.prob > 1 + 1e-9):
            raise PhaseSpaceError(f"detection ratio left [0, 1]: {self.prob.min()}, {self.prob.max()}")

    @property
    def deviation(self):
        return phase_distance(self.final_phase, self.closed_form_phase)

    def summary(self):
        return {
            "formalism": self.formalism,
            "phase": self.final_phase,
            "closed_form_phase": self.closed_form_phase,
            "deviation": self.deviation,
            "prob_at_tau": self.prob_at_tau,
            "closed_form_prob": self.closed_form_prob,
        }


# -- closed forms ---------------------------------------------------------------


def _split_prob(split, theta):
    a1, a2 = split, 1 - split
    return (a1**2 + a2**2 + 2 * a1 * a2 * np.cos(theta)) / (a1 + a2) ** 2


def electric_ab_closed_form(scn: ElectricScenario, t=None):
    """1/2 [1 + cos(q dphi min(t, tau))] for the equal split (general split weights otherwise)."""
    t = scn.tau if t is None else t
    theta = scn.consts.charge * scn.dphi * np.minimum(t, scn.tau) / scn.consts.hbar
    return _split_prob(scn.split, theta)


def electric_phase_closed_form(scn: ElectricScenario, t=None):
    t = scn.tau if t is None else t
    return wrap_phase(scn.consts.charge * scn.dphi * np.minimum(t, scn.tau) / scn.consts.hbar)


def magnetic_phase_closed_form(scn: MagneticScenario, t=None):
    """Delta E tau = 2 p0 q A tau / m, reduced to (-pi, pi]."""
    t = scn.tau if t is None else t
    c = scn.consts
    de = 2 * scn.p0 * c.charge * scn.vector_potential / c.mass
    return wrap_phase(de * np.minimum(t, scn.tau) / c.hbar)


def magnetic_prob_closed_form(scn: MagneticScenario, t=None):
    t = scn.tau if t is None else t
    c = scn.consts
    de = 2 * scn.p0 * c.charge * scn.vector_potential / c.mass
    return _split_prob(scn.split, de * np.minimum(t, scn.tau) / c.hbar)


def _time_axis(tau, n_times):
    n_times = max(int(n_times), 2)
    return np.linspace(0.0, 1.25 * tau, n_times)


def _with_tau(times, tau):
    return np.unique(np.append(times, tau))


# -- electric scenario ----------------------------------------------------------


def _electric_wigner(scn, times, method):
    grid = scn.grid()
    psi = scn.packet()
    a = (scn.split, 1 - scn.split)
    w0 = cross_wigner(psi, psi)
    hs = (scn.hamiltonian(1), scn.hamiltonian(2))
    dt = min(stable_dt(grid, hs[0], hs[1]), stable_dt(grid, hs[1], hs[0]))
    free = HamiltonianSpec(scn.consts.mass, scn.consts.charge)
    norm0 = np.real(w0.integral())
    total0 = sum(a[i] * a[j] for i in range(2) for j in range(2)) * norm0
    terms = {(i, j): w0 for i in range(2) for j in range(2)}
    prev = 0.0
    out = []
    for t in times:
        if method == "stepped":
            terms = {(i, j): evolve_wigner(f, hs[i], t - prev, dt, hs[j], t0=prev)
                     for (i, j), f in terms.items()}
        else:
            # free shear once, then the exact two-sided stargenvalue phase
            shear = evolve_wigner(w0, free, t, dt)
            terms = {}
            for i in range(2):
                for j in range(2):
                    de = hs[i].scalar.integral(0, t) - hs[j].scalar.integral(0, t)
                    rot = np.exp(-1j * scn.consts.charge * de / scn.consts.hbar)
                    terms[(i, j)] = CrossWignerField(grid, shear.values * rot)
        prev = t
        total = sum(a[i] * a[j] * terms[(i, j)].values for i in range(2) for j in range(2))
        prob = float(np.real(np.sum(total)) * grid.dq * grid.dp / total0)
        phase = float(np.angle(terms[(0, 1)].integral()))
        cross_density = np.sum(terms[(0, 1)].values, axis=1) * grid.dp
        density = np.real(np.sum(total, axis=1)) * grid.dp / total0
        out.append((t, prob, phase, grid.q, density, np.angle(cross_density)))
    return out


def _sb_free_matrix(scn, size):
    c = scn.consts
    return weyl_to_matrix(PolySymbol.p(2) / (2 * c.mass), size, c.hbar, scn.length_scale)


def _electric_sb(scn, times):
    c = scn.consts
    grid = scn.grid()
    try:
        f0 = sb_transform(scn.packet(), scn.sb_size, scn.length_scale)
    except TruncationOverflow as exc:
        raise FormalismMismatch(f"packet is not admitted in Segal-Bargmann space: {exc}") from exc
    h_free = _sb_free_matrix(scn, scn.sb_size)
    eye = np.eye(scn.sb_size)
    a = (scn.split, 1 - scn.split)
    levels = (scn.phi1, scn.phi2)
    norm0 = (a[0] + a[1]) ** 2 * f0.norm()
    out = []
    for t in times:
        branches = []
        for lv in levels:
            h_on = h_free + type(h_free)(c.charge * lv * eye, c.hbar, h_free.length)
            try:
                f = sb_evolve(f0, h_on, min(t, scn.tau))
                if t > scn.tau:
                    f = sb_evolve(f, h_free, t - scn.tau)
            except TruncationOverflow as exc:
                raise FormalismMismatch(f"evolved packet leaves the truncated basis: {exc}") from exc
            branches.append(f)
        # admitted branches may cancel, so the mixture skips the tail test
        mix = SBFunction(a[0] * branches[0].coeffs + a[1] * branches[1].coeffs,
                         f0.length, f0.hbar, check=False)
        prob = sb_inner(mix, mix).real / norm0
        phase = float(np.angle(sb_inner(branches[1], branches[0])))
        psi1 = sb_inverse(branches[0], grid).values
        psi2 = sb_inverse(branches[1], grid).values
        density = np.abs(a[0] * psi1 + a[1] * psi2) ** 2 / norm0
        out.append((t, prob, phase, grid.q, density, np.angle(psi1 * np.conj(psi2))))
    return out


def _pack(formalism, rows, closed_phase, closed_prob, tau, stride):
    times = np.array([r[0] for r in rows])
    prob = np.clip(np.array([r[1] for r in rows]), 0.0, None)
    phase = wrap_phase(np.array([r[2] for r in rows]))
    k = int(np.argmin(np.abs(times - tau)))
    frames = []
    if stride:
        frames = [(r[0], r[3], r[4], r[5]) for r in rows[::stride]]
    return ScenarioResult(formalism, times, prob, phase, float(phase[k]), closed_phase,
                          float(prob[k]), closed_prob, frames)


def simulate_electric_ab(scn: ElectricScenario, formalism="wigner", n_times=9, stride=0,
                         method="phase") -> ScenarioResult:
    """Run the two-conduit experiment; ``method`` picks exact phases or time stepping (Wigner)."""
    times = _with_tau(_time_axis(scn.tau, n_times), scn.tau)
    if formalism == "wigner":
        rows = _electric_wigner(scn, times, method)
    elif formalism == "segal-bargmann":
        rows = _electric_sb(scn, times)
    else:
        raise ValueError(f"unknown formalism {formalism!r}")
    return _pack(formalism, rows, electric_phase_closed_form(scn),
                 float(electric_ab_closed_form(scn)), scn.tau, stride)


# -- magnetic ring --------------------------------------------------------------


def _ring_modes(scn, shift=0):
    grid = scn.grid()
    k = scn.mode_index
    if 2 * abs(k) + abs(shift) >= grid.n_q // 2:
        raise FormalismMismatch("ring grid too coarse for the cross term; raise n_ring")
    return make_ring_mode(grid, k + shift), make_ring_mode(grid, -k + shift)


def _magnetic_wigner(scn, times, extra_potential=0.0, shift=0):
    grid = scn.grid()
    c = scn.consts
    psis = _ring_modes(scn, shift)
    a = (scn.split, 1 - scn.split)
    on = HamiltonianSpec(c.mass, c.charge, vector_potential=scn.vector_potential + extra_potential)
    off = HamiltonianSpec(c.mass, c.charge, vector_potential=extra_potential)
    dt = stable_dt(grid, on)
    init = {(i, j): cross_wigner(psis[i], psis[j]) for i in range(2) for j in range(2)}

    def total(terms):
        return sum(a[i] * a[j] * terms[(i, j)].values for i in range(2) for j in range(2))

    rho0 = marginal_position(WignerField(grid, np.real(total(init))))
    out = []
    for t in times:
        terms = {}
        for key, f in init.items():
            g = evolve_wigner(f, on, min(t, scn.tau), dt)
            if t > scn.tau:
                g = evolve_wigner(g, off, t - scn.tau, dt, t0=scn.tau)
            terms[key] = g
        rho = np.real(np.sum(total(terms), axis=1)) * grid.dp
        prob = float(rho[0] / rho0[0])
        # the cross term sits on the p = 0 row and carries psi_1 conj(psi_2)
        row = int(np.argmin(np.abs(grid.p)))
        w12 = terms[(0, 1)].values[:, row]
        phase = float(np.angle(w12[0]))
        out.append((t, prob, phase, grid.q, rho / rho0[0], np.angle(w12)))
    return out


def ring_image(p0_units, size):
    """Truncated Taylor coefficients of exp(z (i 2 sqrt2 p + z) / 2), p in momentum units."""
    b = 1j * np.sqrt(2) * p0_units
    c = np.zeros(size, dtype=complex)
    c[0] = 1.0
    if size > 1:
        c[1] = b
    # phi' = (z + b) phi; the direct double sum cancels badly for large n
    for n in range(1, size - 1):
        c[n + 1] = (c[n - 1] + b * c[n]) / (n + 1)
    return c


def ring_energy_sb(scn, sign, size=None, extra_potential=0.0):
    """E of the ring eigenfunction with momentum sign * p0, read off T_SB[H] phi = E phi.

    Momenta are measured in units of ``m`` (length 1/m with hbar = 1).
    """
    c = scn.consts
    size = size or scn.sb_size
    unit = c.mass
    coeffs = ring_image(sign * scn.p0 / unit, size + 2)
    z, d = coefficient_operators(size + 2)
    p = unit * 1j * (z - d) / np.sqrt(2)
    kin = p - c.charge * (scn.vector_potential + extra_potential) * np.eye(size + 2)
    h = kin @ kin / (2 * c.mass)
    hphi = (h @ coeffs)[: size - 2]
    lower = coeffs[: size - 2]
    mask = np.abs(lower) > 1e-8 * np.max(np.abs(lower))
    ratios = hphi[mask] / lower[mask]
    energy = ratios[0]
    if np.max(np.abs(ratios - energy)) > 1e-8 * max(1.0, abs(energy)):
        raise FormalismMismatch("truncated ring image is not an eigenfunction of T_SB[H]")
    return float(energy.real)


def _magnetic_sb(scn, times):
    c = scn.consts
    a = (scn.split, 1 - scn.split)
    e_on = (ring_energy_sb(scn, +1), ring_energy_sb(scn, -1))
    e_off = (ring_energy_sb(scn, +1, extra_potential=-scn.vector_potential),
             ring_energy_sb(scn, -1, extra_potential=-scn.vector_potential))
    size = scn.sb_size
    images = (ring_image(scn.p0 / c.mass, size), ring_image(-scn.p0 / c.mass, size))
    grid = scn.grid()
    s = grid.q
    k = scn.mode_index
    out = []
    for t in times:
        t_on, t_off = min(t, scn.tau), max(t - scn.tau, 0.0)
        ph = [np.exp(-1j * (e_on[i] * t_on + e_off[i] * t_off) / c.hbar) for i in range(2)]
        phi = [SBFunction(images[i] * ph[i], check=False) for i in range(2)]
        mix0 = a[0] * images[0] + a[1] * images[1]
        mix = a[0] * phi[0].coeffs + a[1] * phi[1].coeffs
        prob = float(abs(mix[0]) ** 2 / abs(mix0[0]) ** 2)
        phase = float(np.angle(phi[0](0.0) * np.conj(phi[1](0.0))))
        # position picture on the ring for frames: each image is a plane wave e^{+-i p0 s}
        w1 = ph[0] * np.exp(1j * k * s / scn.ring_radius)
        w2 = ph[1] * np.exp(-1j * k * s / scn.ring_radius)
        density = np.abs(a[0] * w1 + a[1] * w2) ** 2 / abs(a[0] + a[1]) ** 2
        out.append((t, prob, phase, s, density, np.angle(w1 * np.conj(w2))))
    return out


def simulate_magnetic_ring(scn: MagneticScenario, formalism="wigner", n_times=9,
                           stride=0) -> ScenarioResult:
    scn.mode_index  # validates commensurability up front
    times = _with_tau(_time_axis(scn.tau, n_times), scn.tau)
    if formalism == "wigner":
        rows = _magnetic_wigner(scn, times)
    elif formalism == "segal-bargmann":
        rows = _magnetic_sb(scn, times)
    else:
        raise ValueError(f"unknown formalism {formalism!r}")
    return _pack(formalism, rows, magnetic_phase_closed_form(scn),
                 float(magnetic_prob_closed_form(scn)), scn.tau, stride)


# -- gauge structure --------------------------------------------------------------


def gauge_phase(w: GaugeWorldline) -> float:
    """theta = q [ int A . dx - int phi dt ] along the worldline (trapezoidal)."""
    x = w.path
    a = w.potential_at(x)
    dx = np.diff(x, axis=0)
    mid = (a[1:] + a[:-1]) / 2
    line = float(np.sum(mid * dx))
    return w.charge * (line - w.scalar_integral())


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _line_integral_from(w, x0, x):
    """int_{x0}^{x} A(x') dx' for many end points (Gauss-Legendre, 24 nodes per chord)."""
    x = np.asarray(x, dtype=float)
    half = (x - x0) / 2
    mid = (x + x0) / 2
    nodes = mid[..., None] + half[..., None] * _GL_NODES
    return np.sum(w.potential_at(nodes) * _GL_WEIGHTS, axis=-1) * half


def local_phase(w: GaugeWorldline, x, hbar=1.0):
    """theta(x)/hbar with the line integral started at the worldline's first point."""
    if w.path.ndim != 1:
        raise ValueError("local phases need a one-dimensional worldline")
    theta = w.charge * (_line_integral_from(w, w.path[0], x) - w.scalar_integral())
    return theta / hbar


def _left_multiply(fn, vals, grid):
    """fn(x) * W for a function of x, i.e. fn(x + i hbar/2 d/dp) W, done in Fourier-in-p."""
    eta = 2 * np.pi * np.fft.fftfreq(grid.n_p, grid.dp)
    shifted = fn(grid.q[:, None] - grid.hbar * eta[None, :] / 2)
    return np.fft.ifft(np.fft.fft(vals, axis=1) * shifted, axis=1)


def _right_multiply(fn, vals, grid):
    """W * fn(x) = fn(x - i hbar/2 d/dp) W."""
    eta = 2 * np.pi * np.fft.fftfreq(grid.n_p, grid.dp)
    shifted = fn(grid.q[:, None] + grid.hbar * eta[None, :] / 2)
    return np.fft.ifft(np.fft.fft(vals, axis=1) * shifted, axis=1)


def _position_function_matrix(fn, size, length):
    """fn(Q) in the number basis, computed in a padded basis and cropped."""
    pad = 3 * size
    a = np.diag(np.sqrt(np.arange(1, pad, dtype=float)), 1)
    q = length * (a + a.T) / np.sqrt(2)
    x, v = np.linalg.eigh(q)
    return (v * fn(x)) @ v.conj().T


def apply_phase_operator(state, w: GaugeWorldline, right: Optional[GaugeWorldline] = None):
    """Multiply by the gauge factor M = exp(i theta(x)/hbar).

    Cross-Wigner fields take M on the left (ket) and, if given, ``right`` on
    the bra; a diagonal Wigner field cannot show the phase and is rejected.
    """
    if isinstance(state, WaveFunction):
        g = state.grid
        return WaveFunction(g, state.values * np.exp(1j * local_phase(w, g.q, g.hbar)))
    if isinstance(state, SBFunction):
        m = _position_function_matrix(lambda x: np.exp(1j * local_phase(w, x, state.hbar)),
                                      state.size, state.length)
        b = m[: state.size, : state.size] @ state.number_basis()
        return SBFunction.from_number_basis(b, state.length, state.hbar, state.check)
    if isinstance(state, WignerField):
        raise UnsupportedState("a diagonal Wigner function does not carry global phases")
    if isinstance(state, CrossWignerField):
        g = state.grid
        vals = _left_multiply(lambda x: np.exp(1j * local_phase(w, x, g.hbar)), state.values, g)
        if right is not None:
            vals = _right_multiply(lambda x: np.exp(-1j * local_phase(right, x, g.hbar)), vals, g)
        return CrossWignerField(g, vals)
    raise UnsupportedState(f"cannot apply a phase operator to {type(state).__name__}")


def intertwining_residual(state, w: GaugeWorldline):
    """|| (P - q A) M s - M P s || / || P s || in the state's own representation."""
    q_c = w.charge
    if isinstance(state, WaveFunction):
        g = state.grid
        m_psi = apply_phase_operator(state, w)
        lhs = apply_momentum(m_psi).values - q_c * w.potential_at(g.q) * m_psi.values
        rhs = apply_phase_operator(apply_momentum(state), w).values
        return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if isinstance(state, SBFunction):
        n, pad = state.size, 3 * state.size
        hb, ln = state.hbar, state.length
        m = _position_function_matrix(lambda x: np.exp(1j * local_phase(w, x, hb)), n, ln)
        amat = _position_function_matrix(w.potential_at, n, ln)
        lad = np.diag(np.sqrt(np.arange(1, pad, dtype=float)), 1)
        p = 1j * (hb / ln) * (lad.T - lad) / np.sqrt(2)
        b = np.zeros(pad, dtype=complex)
        b[:n] = state.number_basis()
        lhs = (p - q_c * amat) @ (m @ b)
        rhs = m @ (p @ b)
        # the padded tail only absorbs truncation; compare on the state's block
        return float(np.linalg.norm((lhs - rhs)[:n]) / max(np.linalg.norm(rhs[:n]), 1e-300))
    if isinstance(state, CrossWignerField):
        g = state.grid
        p_sym = PolySymbol.p()
        mw = apply_phase_operator(state, w).values
        lhs = (star_mixed(p_sym, CrossWignerField(g, mw)).values
               - q_c * _left_multiply(w.potential_at, mw, g))
        pw = star_mixed(p_sym, state).values
        rhs = apply_phase_operator(CrossWignerField(g, pw), w).values
        return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))
    raise UnsupportedState(f"no intertwining check for {type(state).__name__}")


def _dense_kinetic(grid, mass, charge, a_values):
    """(P - q A(x))^2 / 2m as a dense matrix on the grid, P spectral."""
    n = grid.n_q
    k = 2 * np.pi * np.fft.fftfreq(n, grid.dq)
    f = np.fft.fft(np.eye(n), axis=0)
    p = np.fft.ifft(grid.hbar * k[:, None] * f, axis=0)
    p = (p + p.conj().T) / 2
    kin = p - charge * np.diag(a_values)
    return kin @ kin / (2 * mass)


def _electric_gauge_probs(scn, times, gauge):
    """P(t) for the electric scenario with A' = f'(x), phi' = phi - g'(t).

    ``gauge`` is None or ``(f, df, g)``; the static part is evolved with a
    dense Hamiltonian, the spatially constant g'(t) only contributes the
    exactly integrable factor exp(i q (g(t) - g(0)) / hbar).
    """
    c = scn.consts
    grid = scn.grid()
    psi = scn.packet().values
    if gauge is None:
        a_vals = np.zeros(grid.n_q)
        m0 = np.ones(grid.n_q)
    else:
        f, df, _ = gauge
        a_vals = df(grid.q)
        m0 = np.exp(1j * c.charge * f(grid.q) / c.hbar)
    energies, vecs = np.linalg.eigh(_dense_kinetic(grid, c.mass, c.charge, a_vals))
    start = vecs.conj().T @ (m0 * psi)
    a = (scn.split, 1 - scn.split)
    probs = []
    for t in times:
        free = vecs @ (np.exp(-1j * energies * t / c.hbar) * start)
        g_phase = 1.0
        if gauge is not None:
            g = gauge[2]
            g_phase = np.exp(1j * c.charge * (g(t) - g(0.0)) / c.hbar)
        branches = []
        for lv in (scn.phi1, scn.phi2):
            theta = c.charge * lv * min(t, scn.tau) / c.hbar
            branches.append(WaveFunction(grid, free * np.exp(-1j * theta) * g_phase))
        w = {(i, j): cross_wigner(branches[i], branches[j]) for i in range(2) for j in range(2)}
        total = sum(a[i] * a[j] * w[(i, j)].integral() for i in range(2) for j in range(2))
        probs.append(float(np.real(total)) / (a[0] + a[1]) ** 2 / float(np.sum(np.abs(psi) ** 2) * grid.dq))
    return np.array(probs)


def gauge_transform_check(scn, gauge=None, n_times=3):
    """max |P_gauge(t) - P(t)| after (A, phi) -> (A + dL/dx, phi - dL/dt).

    Electric scenario: ``gauge = (f, df, g)`` for L(x, t) = f(x) + g(t).
    Magnetic ring: ``gauge`` is an integer k for L = c s with c = hbar k / (q R),
    the single-valued large gauge transformations of the ring.
    """
    times = _with_tau(_time_axis(scn.tau, n_times), scn.tau)
    if isinstance(scn, ElectricScenario):
        base = _electric_gauge_probs(scn, times, None)
        moved = base if gauge is None else _electric_gauge_probs(scn, times, gauge)
        return float(np.max(np.abs(moved - base)))
    if isinstance(scn, MagneticScenario):
        base = np.array([r[1] for r in _magnetic_wigner(scn, times)])
        if not gauge:
            return 0.0
        k = int(gauge)
        c = scn.consts
        extra = c.hbar * k / (c.charge * scn.ring_radius)
        moved = np.array([r[1] for r in _magnetic_wigner(scn, times, extra, shift=k)])
        return float(np.max(np.abs(moved - base)))
    raise TypeError("unknown scenario type")


def random_gauge(rng, n_terms=3, scale=0.3, width=8.0):
    """Smooth L = f(x) + g(t): f a sum of Gaussian bumps, g linear plus a sine in t."""
    centers = rng.uniform(-width, width, n_terms)
    widths = rng.uniform(2.0, 5.0, n_terms)
    amps = rng.uniform(-scale, scale, n_terms) * widths
    coeffs = rng.uniform(-scale, scale, 3)

    def f(x):
        x = np.asarray(x, dtype=float)
        return sum(a * np.exp(-((x - c) / s) ** 2) for a, c, s in zip(amps, centers, widths))

    def df(x):
        x = np.asarray(x, dtype=float)
        return sum(-2 * a * (x - c) / s**2 * np.exp(-((x - c) / s) ** 2)
                   for a, c, s in zip(amps, centers, widths))

    def g(t):
        return coeffs[0] * t + coeffs[1] * np.sin(coeffs[2] * t)

    return f, df, g


def solenoid_loop(scn: MagneticScenario, n_samples=200_001, duration=1.0):
    """Closed circular worldline of radius R around the solenoid, A = a^2 B / (2 r) u_theta."""
    lam = np.linspace(0.0, 2 * np.pi, n_samples)
    path = scn.ring_radius * np.column_stack([np.cos(lam), np.sin(lam)])
    a2b = scn.solenoid_radius**2 * scn.field_strength

    def potential(x):
        r2 = np.sum(x**2, axis=-1, keepdims=True)
        return a2b / (2 * r2) * np.concatenate([-x[..., 1:2], x[..., 0:1]], axis=-1)

    return GaugeWorldline(path, np.linspace(0.0, duration, n_samples), potential, None,
                          scn.consts.charge)


# -- output ---------------------------------------------------------------------------


def write_timeseries_csv(result: ScenarioResult, path):
    lines = ["t,prob,phase"] + [f"{t:.17g},{p:.17g},{ph:.17g}"
                                for t, p, ph in zip(result.times, result.prob, result.phase)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_frame_csv(frame, path):
    _, q, density, phase = frame
    lines = ["q,density,phase"] + [f"{a:.17g},{b:.17g},{c:.17g}" for a, b, c in zip(q, density, phase)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_summary_json(summary, path):
    atomic_write_text(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
