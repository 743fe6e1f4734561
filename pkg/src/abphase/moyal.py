"""Star product, Moyal bracket, Moyal time evolution and stargenvalue residuals.

Two independent star-product backends are provided: the terminating Bopp
series for polynomials (:func:`star_poly`) and a spectral twist for
band-limited grid samples (:func:`star_grid`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BandwidthExceeded, DegreeOverflow, GridMismatch, StabilityViolation
from .states import wavenumbers
from .symbols import MAX_DEGREE, GridSymbol, PolySymbol, poisson_bracket
from .wigner import CrossWignerField, WignerField

BAND_TOL = 1e-8


# -- Hamiltonians -------------------------------------------------------------


@dataclass(frozen=True)
class ScalarSchedule:
    """Piecewise-constant phi(t): ``values[k]`` holds on [switch_times[k-1], switch_times[k])."""

    values: tuple = (0.0,)
    switch_times: tuple = ()

    def __post_init__(self):
        if len(self.values) != len(self.switch_times) + 1:
            raise ValueError("need one more value than switch times")
        if list(self.switch_times) != sorted(self.switch_times):
            raise ValueError("switch times must be increasing")

    @classmethod
    def pulse(cls, level, start, stop):
        """phi = level on [start, stop), zero elsewhere."""
        return cls((0.0, level, 0.0), (start, stop))

    def __call__(self, t):
        return self.values[int(np.searchsorted(self.switch_times, t, side="right"))]

    def integral(self, t0, t1):
        edges = [t0] + [s for s in self.switch_times if t0 < s < t1] + [t1]
        return sum(self((a + b) / 2) * (b - a) for a, b in zip(edges[:-1], edges[1:]))


@dataclass(frozen=True)
class HamiltonianSpec:
    """H = (p - charge*A)^2 / 2m + V(q) + charge*phi(t).

    ``vector_potential`` is the (static, spatially constant) A along the
    coordinate; ``potential`` is an optional static V(q), given as a
    q-only PolySymbol or a vectorized callable.
    """

    mass: float = 1.0
    charge: float = 1.0
    scalar: ScalarSchedule = field(default_factory=ScalarSchedule)
    vector_potential: float = 0.0
    potential: Optional[object] = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if isinstance(self.potential, PolySymbol) and any(j for _, j in self.potential.terms):
            raise ValueError("static potential must depend on q only")

    def kinetic(self, p):
        return (p - self.charge * self.vector_potential) ** 2 / (2 * self.mass)

    def static_potential(self, q):
        if self.potential is None:
            return np.zeros_like(np.asarray(q, dtype=float))
        if isinstance(self.potential, PolySymbol):
            return self.potential(q, np.zeros_like(q)).real
        return np.asarray(self.potential(q), dtype=float)

    def energy_offset(self, t):
        return self.charge * self.scalar(t)

    def symbol(self, t=0.0):
        p = PolySymbol.p()
        kin = (p - self.charge * self.vector_potential) * (p - self.charge * self.vector_potential)
        out = kin / (2 * self.mass) + self.energy_offset(t)
        if self.potential is not None:
            if not isinstance(self.potential, PolySymbol):
                raise TypeError("symbol() needs a polynomial static potential")
            out = out + self.potential
        return out


# -- star products ------------------------------------------------------------


def _bidiff_terms(order):
    """(coefficient, k) pairs of the order-n term of the Moyal exponential."""
    for k in range(order + 1):
        yield math.comb(order, k) * (-1) ** k, k


def star_poly(a: PolySymbol, b: PolySymbol, hbar=1.0) -> PolySymbol:
    """Exact A * B for polynomials (the Bopp-shift series terminates)."""
    if a.degree + b.degree > MAX_DEGREE:
        raise DegreeOverflow(f"deg A + deg B = {a.degree + b.degree} > {MAX_DEGREE}")
    out = a * b
    for n in range(1, min(a.degree, b.degree) + 1):
        pref = (1j * hbar / 2) ** n / math.factorial(n)
        for c, k in _bidiff_terms(n):
            left = a.derivative(n - k, k)
            if not left.terms:
                continue
            out = out + left * b.derivative(k, n - k) * (pref * c)
    return out


def _star_poly_grid(poly, values, grid, hbar, side):
    sym = GridSymbol(grid, values, check=False)
    out = poly.sample(grid) * values
    for n in range(1, poly.degree + 1):
        pref = (1j * hbar / 2) ** n / math.factorial(n)
        for c, k in _bidiff_terms(n):
            if side == "left":
                dpoly = poly.derivative(n - k, k)
                if dpoly.terms:
                    out = out + pref * c * dpoly.sample(grid) * sym.derivative(k, n - k).values
            else:
                dpoly = poly.derivative(k, n - k)
                if dpoly.terms:
                    out = out + pref * c * dpoly.sample(grid) * sym.derivative(n - k, k).values
    return out


def star_mixed(poly: PolySymbol, fld, hbar=None, side="left"):
    """poly * F (side='left') or F * poly (side='right') for a grid field F.

    Only derivatives of F that actually meet a nonzero derivative of the
    polynomial are formed, so p-only symbols never differentiate F along p.
    """
    grid = fld.grid
    hbar = grid.hbar if hbar is None else hbar
    return GridSymbol(grid, _star_poly_grid(poly, fld.values, grid, hbar, side), check=False)


def _upsample_p(spec, shifts, eta):
    """Values at p_min + l dp/2 (l < 2n) of rows with p-spectrum ``spec``, shifted by ``shifts``."""
    m, n = spec.shape
    ph = spec * np.exp(1j * shifts[:, None] * eta[None, :])
    pad = np.zeros((m, 2 * n), dtype=complex)
    pad[:, : n // 2] = ph[:, : n // 2]
    pad[:, -(n // 2):] = ph[:, -(n // 2):]
    return np.fft.ifft(pad, axis=1) * 2


def star_grid(a: GridSymbol, b: GridSymbol, hbar=None) -> GridSymbol:
    """Spectral star product of band-limited grid symbols.

    Uses A*B(q,p) = sum_{xa,xb} e^{i(xa+xb)q} A_xa(p + hbar xb/2) B_xb(p - hbar xa/2),
    i.e. the Moyal twist e^{-i hbar (xa eb - ea xb)/2} resolved along p by
    exact band-limited shifts.  Work is done on a 2x oversampled grid so the
    product does not alias; energy escaping the original band is an error.
    """
    g = a.grid
    if b.grid != g:
        raise GridMismatch("star product operands must share a grid")
    hb = g.hbar if hbar is None else hbar
    nq, npp = g.n_q, g.n_p
    xi = wavenumbers(nq, g.dq)
    eta = wavenumbers(npp, g.dp)
    mq = np.rint(np.fft.fftfreq(nq) * nq).astype(int)
    a_spec = np.fft.fft(np.fft.fft(a.values, axis=0), axis=1)
    b_spec = np.fft.fft(np.fft.fft(b.values, axis=0), axis=1)
    result_hat = np.zeros((2 * nq, 2 * npp), dtype=complex)
    b_rows_all = b_spec
    floor = 1e-17 * np.max(np.abs(a_spec), initial=0.0)
    for ia in range(nq):
        # rows this far below the peak cannot move the result at double precision
        if np.max(np.abs(a_spec[ia])) <= floor:
            continue
        a_rows = _upsample_p(np.broadcast_to(a_spec[ia], (nq, npp)), hb * xi / 2, eta)
        b_rows = _upsample_p(b_rows_all, np.full(nq, -hb * xi[ia] / 2), eta)
        target = (mq[ia] + mq) % (2 * nq)
        result_hat[target] += a_rows * b_rows
    up = np.fft.ifft(result_hat, axis=0) * (2 * nq) / nq**2
    spec = np.abs(np.fft.fft2(up)) ** 2
    fq = np.abs(np.fft.fftfreq(2 * nq) * 2 * nq)
    fp = np.abs(np.fft.fftfreq(2 * npp) * 2 * npp)
    outside = (fq[:, None] >= nq // 2) | (fp[None, :] >= npp // 2)
    total = spec.sum()
    if total > 0 and spec[outside].sum() / total > BAND_TOL:
        raise BandwidthExceeded(
            f"star product leaks {spec[outside].sum() / total:.2e} of its energy past Nyquist")
    return GridSymbol(g, up[::2, ::2], check=False)


def star(a, b, hbar=None):
    """Dispatch to the polynomial, grid or mixed backend."""
    if isinstance(a, PolySymbol) and isinstance(b, PolySymbol):
        return star_poly(a, b, 1.0 if hbar is None else hbar)
    if isinstance(a, PolySymbol):
        return star_mixed(a, b, hbar, "left")
    if isinstance(b, PolySymbol):
        return star_mixed(b, a, hbar, "right")
    return star_grid(a, b, hbar)


def moyal_bracket(a, b, hbar=None):
    """[A, B]_M = A*B - B*A."""
    return star(a, b, hbar) - star(b, a, hbar)


def _grid_poisson(a, b):
    return (a.derivative(1, 0).values * b.derivative(0, 1).values
            - a.derivative(0, 1).values * b.derivative(1, 0).values)


def classical_limit_probe(a, b, hbars):
    """e(hbar) = || [A,B]_M/(i hbar) - {A,B} || for each hbar in ``hbars``."""
    errs = []
    for hb in hbars:
        if isinstance(a, PolySymbol):
            diff = moyal_bracket(a, b, hb) * (1 / (1j * hb)) - poisson_bracket(a, b)
            errs.append(diff.norm())
        else:
            br = moyal_bracket(a, b, hb).values / (1j * hb)
            diff = GridSymbol(a.grid, br - _grid_poisson(a, b), check=False)
            errs.append(diff.norm())
    return np.array(errs)


# -- evolution ----------------------------------------------------------------


def stable_dt(grid, h_left, h_right=None):
    """0.1 * min(dq m / p_max, hbar / max|q phi|)."""
    h_right = h_right or h_left
    p_max = max(abs(grid.p_min), abs(grid.p_max))
    bound = grid.dq * min(h_left.mass, h_right.mass) / p_max
    phis = [abs(h.charge * v) for h in (h_left, h_right) for v in h.scalar.values]
    if max(phis) > 0:
        bound = min(bound, grid.hbar / max(phis))
    return 0.1 * bound


def _kinetic_factor(grid, hl, hr, h):
    xi = wavenumbers(grid.n_q, grid.dq)[:, None]
    p = grid.p[None, :]
    hb = grid.hbar
    return np.exp(-1j * h / hb * (hl.kinetic(p + hb * xi / 2) - hr.kinetic(p - hb * xi / 2)))


def _potential_factor(grid, hl, hr, h):
    eta = wavenumbers(grid.n_p, grid.dp)[None, :]
    q = grid.q[:, None]
    hb = grid.hbar
    vl = hl.static_potential(q - hb * eta / 2)
    vr = hr.static_potential(q + hb * eta / 2)
    return np.exp(-1j * h / hb * (vl - vr))


def _apply_q(vals, factor):
    return np.fft.ifft(np.fft.fft(vals, axis=0) * factor, axis=0)


def _apply_p(vals, factor):
    return np.fft.ifft(np.fft.fft(vals, axis=1) * factor, axis=1)


def evolve_wigner(w0, h, t_final, dt, h_right=None, t0=0.0, check_dt=True):
    """Integrate dW/dt = (H_L * W - W * H_R)/(i hbar) from t0 to t0 + t_final.

    ``h_right`` defaults to ``h`` (ordinary Moyal evolution); distinct
    Hamiltonians evolve a cross term W_ij.  Strang splitting alternates the
    kinetic flow (exact in Fourier-in-q) with the potential flow (exact in
    Fourier-in-p).  Scalar-potential switches are aligned to step boundaries.
    When no static potential is present the two flows commute and each
    constant-phi segment is advanced in one exact step.
    """
    hr = h_right or h
    grid = w0.grid
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if check_dt and dt > stable_dt(grid, h, hr) * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the stability bound {stable_dt(grid, h, hr):g}")
    vals = np.array(w0.values, dtype=complex)
    trace0 = np.sum(vals)
    t_end = t0 + t_final
    cuts = sorted({s for hh in (h, hr) for s in hh.scalar.switch_times if t0 < s < t_end})
    edges = [t0] + cuts + [t_end]
    static = h.potential is not None or hr.potential is not None
    for a, b in zip(edges[:-1], edges[1:]):
        span = b - a
        if span <= 0:
            continue
        mid = (a + b) / 2
        offset = np.exp(-1j * span / grid.hbar * (h.energy_offset(mid) - hr.energy_offset(mid)))
        if not static:
            vals = _apply_q(vals, _kinetic_factor(grid, h, hr, span)) * offset
            continue
        n = max(1, int(np.ceil(span / dt - 1e-12)))
        step = span / n
        half = _kinetic_factor(grid, h, hr, step / 2)
        full = half * half
        pot = _potential_factor(grid, h, hr, step)
        vals = _apply_q(vals, half)
        for k in range(n):
            vals = _apply_p(vals, pot)
            vals = _apply_q(vals, full if k < n - 1 else half)
        vals = vals * offset
    drift = abs(np.sum(vals) - trace0) * grid.dq * grid.dp
    # a cross term under two Hamiltonians legitimately rotates its trace
    if hr is h and t_final > 0 and drift / max(t_final, 1.0) > 1e-6:
        raise StabilityViolation(f"trace drifted by {drift:.2e}")
    if isinstance(w0, WignerField) and hr is h:
        resid = float(np.max(np.abs(vals.imag), initial=0.0))
        return WignerField(grid, vals.real, resid)
    if isinstance(w0, GridSymbol):
        return GridSymbol(grid, vals, check=False)
    return CrossWignerField(grid, vals)


def stargen_residual(hamiltonian, w, energy, side="left"):
    """||H*W - E W|| / ||W|| (side='left') or ||W*H - E W|| / ||W|| (side='right')."""
    poly = hamiltonian.symbol() if isinstance(hamiltonian, HamiltonianSpec) else hamiltonian
    prod = star_mixed(poly, w, side=side).values
    diff = prod - energy * np.asarray(w.values)
    norm_w = np.sqrt(np.sum(np.abs(w.values) ** 2))
    if norm_w == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(diff) ** 2)) / norm_w)
