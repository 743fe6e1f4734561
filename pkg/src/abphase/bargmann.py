"""Segal-Bargmann space with t = 1.

An :class:`SBFunction` stores the Taylor coefficients ``c_n`` of an entire
function ``phi(z) = sum c_n z^n``.  Because ``<z^n|z^m> = n! delta_nm``, the
vector ``b_n = sqrt(n!) c_n`` is the state in the orthonormal oscillator
number basis, which is how the transform pair and the evolution are built.

Dimensions enter only through ``length``: a wave function of q maps to the
dimensionless variable ``q / length`` and momenta are measured in units of
``hbar / length``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma

import numpy as np

from .errors import GridMismatch, NonHermitian, QuadratureDivergence, TruncationOverflow
from .states import PhysicalConstants, WaveFunction
from .wigner import OperatorMatrix, hermite_functions

DEFAULT_TRUNCATION = 64
GUARD_BAND = 4
TAIL_TOL = 1e-8


def oscillator_length(consts=None):
    """sqrt(hbar / (m omega)), the scale that makes q and p dimensionless."""
    c = consts or PhysicalConstants()
    return float(np.sqrt(c.hbar / (c.mass * c.omega)))


def _sqrt_factorials(n):
    return np.exp(0.5 * np.array([lgamma(k + 1) for k in range(n)]))


@dataclass(frozen=True, eq=False)
class SBFunction:
    coeffs: np.ndarray = field(repr=False)
    length: float = 1.0
    hbar: float = 1.0
    check: bool = True

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size <= GUARD_BAND:
            raise ValueError(f"need more than {GUARD_BAND} coefficients")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)
        if self.check:
            share = self.tail_share()
            if share > TAIL_TOL:
                raise TruncationOverflow(
                    f"top {GUARD_BAND} coefficients carry {share:.2e} of the norm")

    @classmethod
    def from_number_basis(cls, b, length=1.0, hbar=1.0, check=True):
        b = np.asarray(b, dtype=complex)
        return cls(b / _sqrt_factorials(b.size), length, hbar, check)

    @classmethod
    def monomial(cls, n, size=DEFAULT_TRUNCATION, length=1.0, hbar=1.0):
        c = np.zeros(size, dtype=complex)
        c[n] = 1.0
        return cls(c, length, hbar)

    @property
    def size(self):
        return self.coeffs.size

    def number_basis(self):
        return self.coeffs * _sqrt_factorials(self.size)

    def norm(self):
        """SB norm squared, sum n! |c_n|^2."""
        return float(np.sum(np.abs(self.number_basis()) ** 2))

    def tail_share(self):
        w = np.abs(self.number_basis()) ** 2
        total = w.sum()
        return 0.0 if total == 0 else float(w[-GUARD_BAND:].sum() / total)

    def __call__(self, z):
        """Horner evaluation of phi(z)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out

    def _like(self, coeffs, check=None):
        return SBFunction(coeffs, self.length, self.hbar, self.check if check is None else check)

    def __add__(self, other):
        _same_space(self, other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_space(self, other)
        return self._like(self.coeffs - other.coeffs)

    def __mul__(self, c):
        return self._like(self.coeffs * c)

    __rmul__ = __mul__


def _same_space(f, g):
    if f.size != g.size or not np.isclose(f.length, g.length) or not np.isclose(f.hbar, g.hbar):
        raise GridMismatch("SB functions differ in truncation or units")


def sb_transform(psi: WaveFunction, size=DEFAULT_TRUNCATION, length=None) -> SBFunction:
    """psi(q) -> phi(z) via c_n = <phi_n|psi> / sqrt(n!).

    ``<phi_n|psi>`` is evaluated by the trapezoidal rule on the wave function's
    own grid, which is spectrally accurate for the decaying packets we admit.
    """
    g = psi.grid
    length = np.sqrt(g.hbar) if length is None else float(length)
    phi = hermite_functions(g.q, size, length)
    b = phi.T @ psi.values * g.dq
    return SBFunction.from_number_basis(b, length, g.hbar)


def sb_inverse(f: SBFunction, grid, method="series") -> WaveFunction:
    """phi(z) -> psi(q) on ``grid``.

    ``method="series"`` sums ``b_n phi_n(q)``.  ``method="contour"`` evaluates
    the integral over y of exp(-y^2/2) phi(sqrt(2) u + i y) literally with
    Gauss-Hermite nodes; it is exact for polynomials but loses digits to
    cancellation once phi is large on the contour, which is detected.
    """
    if not np.isclose(grid.hbar, f.hbar):
        raise GridMismatch("grid and SB function disagree on hbar")
    if method == "series":
        phi = hermite_functions(grid.q, f.size, f.length)
        return WaveFunction(grid, phi @ f.number_basis())
    if method != "contour":
        raise ValueError(f"unknown method {method!r}")
    y, w = np.polynomial.hermite_e.hermegauss(f.size)
    u = grid.q / f.length
    vals = f(np.sqrt(2) * u[:, None] + 1j * y[None, :])
    pref = np.exp(-u**2 / 2) / (np.sqrt(2) * np.pi**0.75) / np.sqrt(f.length)
    out = pref * (vals @ w)
    bulk = pref * (np.abs(vals) @ w)
    peak = np.max(np.abs(out), initial=0.0)
    if peak == 0:
        return WaveFunction(grid, out)
    loss = np.max(bulk) * np.finfo(float).eps / peak
    if loss > TAIL_TOL:
        raise QuadratureDivergence(
            f"contour integrand exceeds the result by {np.max(bulk) / peak:.2e}; "
            "cancellation would destroy the answer")
    return WaveFunction(grid, out)


def sb_inner(f: SBFunction, g: SBFunction) -> complex:
    """<f|g> = sum n! conj(f_n) g_n."""
    _same_space(f, g)
    return complex(np.vdot(f.number_basis(), g.number_basis()))


def _annihilate(c):
    n = np.arange(1, c.size)
    return np.concatenate([n * c[1:], [0.0]])


def _create(c):
    return np.concatenate([[0.0], c[:-1]])


def sb_apply(op, f: SBFunction) -> SBFunction:
    """Apply ``annihilate`` (d/dz), ``create`` (z), ``position`` or ``momentum``.

    Position and momentum carry units: length (z + d/dz)/sqrt 2 and
    (hbar/length) i (z - d/dz)/sqrt 2.
    """
    c = f.coeffs
    if op == "create":
        if f.check and abs(c[-1]) > 0:
            raise TruncationOverflow("create would push the top coefficient out of the basis")
        out = _create(c)
    elif op == "annihilate":
        out = _annihilate(c)
    elif op == "position":
        out = f.length * (_create(c) + _annihilate(c)) / np.sqrt(2)
    elif op == "momentum":
        out = 1j * (f.hbar / f.length) * (_create(c) - _annihilate(c)) / np.sqrt(2)
    else:
        raise ValueError(f"unknown operator {op!r}")
    return f._like(out)


def sb_evolve(f: SBFunction, h: OperatorMatrix, t) -> SBFunction:
    """exp(-i H t / hbar) applied through the spectral decomposition of H.

    ``h`` is given in the orthonormal number basis, i.e. on ``b_n``.
    """
    if h.dim != f.size:
        raise GridMismatch(f"H has dimension {h.dim}, state has {f.size} coefficients")
    if not h.is_hermitian(1e-10):
        raise NonHermitian("Hamiltonian matrix is not Hermitian")
    energies, vecs = np.linalg.eigh(h.entries)
    b = vecs @ (np.exp(-1j * energies * t / h.hbar) * (vecs.conj().T @ f.number_basis()))
    return SBFunction.from_number_basis(b, f.length, f.hbar, f.check)


def coefficient_operators(size):
    """Matrices of z and d/dz on the monomial coefficients."""
    z = np.diag(np.ones(size - 1), -1)
    d = np.diag(np.arange(1, size, dtype=float), 1)
    return z, d


def harmonic_spectrum(size, omega=1.0):
    """Energies of (P'^2 + Q'^2)/2 built from z and d/dz, times omega.

    The operators are formed two rows larger than requested so squaring
    does not feel the cut, then cropped.
    """
    if size < 1:
        raise ValueError("size must be positive")
    z, d = coefficient_operators(size + 2)
    q = (z + d) / np.sqrt(2)
    p = 1j * (z - d) / np.sqrt(2)
    h = ((p @ p + q @ q) / 2)[:size, :size]
    return omega * np.sort(np.linalg.eigvals(h).real)


# -- Husimi function ------------------------------------------------------------


@dataclass(frozen=True)
class PlaneGrid:
    """Uniform grid over (re z, im z); right end points excluded."""

    re_min: float
    re_max: float
    n_re: int
    im_min: float
    im_max: float
    n_im: int

    @classmethod
    def square(cls, half_width, n):
        return cls(-half_width, half_width, n, -half_width, half_width, n)

    @classmethod
    def from_phase_grid(cls, grid):
        """Image of a dimensionless phase grid under z = (q - i p)/sqrt 2.

        The im z axis runs opposite to p, so it is listed in ascending order.
        """
        s = np.sqrt(2)
        return cls(grid.q_min / s, grid.q_max / s, grid.n_q,
                   -(grid.p_max - grid.dp) / s, (-grid.p_min + grid.dp) / s, grid.n_p)

    @property
    def d_re(self):
        return (self.re_max - self.re_min) / self.n_re

    @property
    def d_im(self):
        return (self.im_max - self.im_min) / self.n_im

    @property
    def re(self):
        return self.re_min + self.d_re * np.arange(self.n_re)

    @property
    def im(self):
        return self.im_min + self.d_im * np.arange(self.n_im)

    def mesh(self):
        x, y = np.meshgrid(self.re, self.im, indexing="ij")
        return x + 1j * y


@dataclass(frozen=True, eq=False)
class HusimiField:
    """H(z) = exp(-|z|^2) |phi(z)|^2 / (2 pi).

    Integrals use the phase-space measure dq dp = 2 d(re z) d(im z), under
    which a normalized state integrates to 1 and the peak bound is 1/(2 pi).
    """

    grid: PlaneGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_re, self.grid.n_im):
            raise GridMismatch(f"samples have shape {v.shape}")
        object.__setattr__(self, "values", v)

    def integral(self):
        return float(np.sum(self.values) * 2 * self.grid.d_re * self.grid.d_im)


def husimi_from_sb(f: SBFunction, plane: PlaneGrid) -> HusimiField:
    z = plane.mesh()
    h = np.exp(-np.abs(z) ** 2) * np.abs(f(z)) ** 2 / (2 * np.pi)
    return HusimiField(plane, h)


def husimi_from_wigner(w, plane: PlaneGrid) -> HusimiField:
    """Gaussian smoothing (1/pi) exp(-dq^2 - dp^2) * W done as a Fourier multiplier.

    ``plane`` must be the image of W's (dimensionless) phase grid.
    """
    g = w.grid
    if not np.isclose(g.hbar, 1.0):
        raise GridMismatch("husimi_from_wigner needs a dimensionless grid (hbar = 1)")
    if plane != PlaneGrid.from_phase_grid(g):
        raise GridMismatch("plane grid is not the image of the Wigner grid")
    xi = 2 * np.pi * np.fft.fftfreq(g.n_q, g.dq)
    eta = 2 * np.pi * np.fft.fftfreq(g.n_p, g.dp)
    mult = np.exp(-(xi[:, None] ** 2 + eta[None, :] ** 2) / 4)
    h = np.fft.ifft2(np.fft.fft2(np.asarray(w.values, dtype=float)) * mult).real
    return HusimiField(plane, h[:, ::-1])


def husimi_expectation(h: HusimiField, symbol, length=1.0, hbar=1.0):
    """Antinormal-rule average: integral of symbol(q, p) against H with q, p in units."""
    z = h.grid.mesh()
    q = np.sqrt(2) * z.real * length
    p = -np.sqrt(2) * z.imag * hbar / length
    return complex(np.sum(symbol(q, p) * h.values) * 2 * h.grid.d_re * h.grid.d_im)


def write_husimi_csv(h: HusimiField, path):
    """Rows ``re_z,im_z,h`` in row-major order (re z outer)."""
    from .io import atomic_write_text

    z = h.grid.mesh()
    rows = np.column_stack([z.real.ravel(), z.imag.ravel(), h.values.ravel()])
    lines = ["re_z,im_z,h"] + [",".join(f"{v:.17g}" for v in r) for r in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")
