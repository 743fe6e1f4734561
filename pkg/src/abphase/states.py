"""Grids, constants, wave-packet constructors and the position/momentum bridge.

Fourier convention used everywhere in the package::

    psi_tilde(p) = (2 pi hbar)^(-1/2) * integral dq exp(-i p q / hbar) psi(q)

discretized with the (periodic) trapezoidal rule on the uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, GridTooSmall, NotPeriodic

TAIL_ERROR = 1e-8


@dataclass(frozen=True)
class PhysicalConstants:
    """Natural-unit constants. Defaults reproduce hbar = m = q = omega = 1."""

    hbar: float = 1.0
    mass: float = 1.0
    charge: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.omega > 0:
            raise ValueError("omega must be positive")


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform rectangular (q, p) grid.

    Sample points are ``q_min + j*dq`` for ``j < n_q`` (the right end point is
    excluded), likewise for ``p``.  With ``periodic_q`` the q axis is a ring of
    circumference ``q_max - q_min = 2 pi R``.
    """

    q_min: float
    q_max: float
    n_q: int
    p_min: float
    p_max: float
    n_p: int
    periodic_q: bool = False
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("n_q", "n_p"):
            n = getattr(self, name)
            if n < 2 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 2, got {n}")
        if not self.q_max > self.q_min:
            raise ValueError("q_max must exceed q_min")
        if not self.p_max > self.p_min:
            raise ValueError("p_max must exceed p_min")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @classmethod
    def conjugate(cls, q_min, q_max, n, hbar=1.0, periodic=False):
        """Grid whose p axis is the discrete Fourier partner of the q axis.

        ``dq * dp = 2 pi hbar / n`` and the p axis is centred on zero, which
        makes :func:`to_momentum` exactly unitary.
        """
        dq = (q_max - q_min) / n
        dp = 2 * np.pi * hbar / (n * dq)
        return cls(q_min, q_max, n, -dp * n / 2, dp * n / 2, n, periodic, hbar)

    @classmethod
    def symmetric(cls, half_width, n, hbar=1.0):
        return cls.conjugate(-half_width, half_width, n, hbar)

    @classmethod
    def ring(cls, radius, n, hbar=1.0):
        """Periodic arc-length grid s in [0, 2 pi R); p runs over the lattice hbar*k/R."""
        return cls.conjugate(0.0, 2 * np.pi * radius, n, hbar, periodic=True)

    @property
    def dq(self):
        return (self.q_max - self.q_min) / self.n_q

    @property
    def dp(self):
        return (self.p_max - self.p_min) / self.n_p

    @property
    def q(self):
        return self.q_min + self.dq * np.arange(self.n_q)

    @property
    def p(self):
        return self.p_min + self.dp * np.arange(self.n_p)

    @property
    def radius(self):
        if not self.periodic_q:
            raise NotPeriodic("radius is only defined on a periodic grid")
        return (self.q_max - self.q_min) / (2 * np.pi)

    @property
    def is_conjugate(self):
        return self.n_q == self.n_p and np.isclose(
            self.dq * self.dp * self.n_q, 2 * np.pi * self.hbar, rtol=1e-12
        )

    def mesh(self):
        """(Q, P) arrays of shape (n_q, n_p); q varies along axis 0."""
        return np.meshgrid(self.q, self.p, indexing="ij")

    def refined(self):
        """Same extent with twice the samples on both axes."""
        return PhaseGrid(self.q_min, self.q_max, 2 * self.n_q, self.p_min, self.p_max,
                         2 * self.n_p, self.periodic_q, self.hbar)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_q,):
            raise GridMismatch(f"expected {self.grid.n_q} samples, got {values.shape}")
        object.__setattr__(self, "values", values)

    def norm(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dq)

    def normalized(self):
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return WaveFunction(self.grid, self.values / np.sqrt(n))

    def inner(self, other):
        """<self|other> by the periodic trapezoidal rule."""
        if other.grid != self.grid:
            raise GridMismatch("states live on different grids")
        return complex(np.vdot(self.values, other.values) * self.grid.dq)

    def density(self):
        return np.abs(self.values) ** 2

    def __add__(self, other):
        if other.grid != self.grid:
            raise GridMismatch("states live on different grids")
        return WaveFunction(self.grid, self.values + other.values)

    def __mul__(self, c):
        return WaveFunction(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class MomentumWaveFunction:
    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_p,):
            raise GridMismatch(f"expected {self.grid.n_p} samples, got {values.shape}")
        object.__setattr__(self, "values", values)

    def norm(self):
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dp)

    def density(self):
        return np.abs(self.values) ** 2


def _check_tails(grid, values, what="packet"):
    peak = np.max(np.abs(values))
    if peak == 0:
        return
    edge = max(abs(values[0]), abs(values[-1])) / peak
    if edge > TAIL_ERROR:
        raise GridTooSmall(
            f"{what} tail {edge:.3g} at the grid boundary exceeds {TAIL_ERROR:g}; "
            "enlarge the q range"
        )


def make_gaussian_packet(grid, center_q, center_p, width, consts=None):
    """Normalized Gaussian exp(-(q-q0)^2/(2 w^2) + i p0 q / hbar)."""
    consts = consts or PhysicalConstants(hbar=grid.hbar)
    if not width > 0:
        raise ValueError("width must be positive")
    if not np.isclose(consts.hbar, grid.hbar):
        raise GridMismatch("grid and constants disagree on hbar")
    q = grid.q
    if grid.periodic_q:
        # nearest image on the ring
        L = grid.q_max - grid.q_min
        d = (q - center_q + L / 2) % L - L / 2
    else:
        d = q - center_q
    values = np.exp(-d**2 / (2 * width**2) + 1j * center_p * q / consts.hbar)
    _check_tails(grid, values)
    return WaveFunction(grid, values).normalized()


def make_ring_mode(grid, wavenumber_index):
    """Periodic plane wave exp(i k s)/sqrt(2 pi R) with k = index / R."""
    if not grid.periodic_q:
        raise NotPeriodic("ring modes need a periodic q axis")
    if int(wavenumber_index) != wavenumber_index:
        raise ValueError("ring modes need an integer wavenumber index")
    R = grid.radius
    values = np.exp(1j * wavenumber_index * grid.q / R) / np.sqrt(2 * np.pi * R)
    return WaveFunction(grid, values)


def wavenumbers(n, d):
    """Angular wavenumbers matching numpy's FFT ordering."""
    return 2 * np.pi * np.fft.fftfreq(n, d)


def spectral_derivative(values, d, axis=-1, order=1):
    k = wavenumbers(values.shape[axis], d)
    shape = [1] * values.ndim
    shape[axis] = -1
    spectrum = np.fft.fft(values, axis=axis) * (1j * k.reshape(shape)) ** order
    return np.fft.ifft(spectrum, axis=axis)


def apply_momentum(psi):
    """-i hbar d/dq applied spectrally (exact for band-limited periodic samples)."""
    g = psi.grid
    return WaveFunction(g, -1j * g.hbar * spectral_derivative(psi.values, g.dq))


def momentum_expectation(psi):
    return psi.inner(apply_momentum(psi)).real / psi.norm()


def _fourier_kernel(grid, sign):
    return np.exp(sign * 1j * np.outer(grid.p, grid.q) / grid.hbar)


def to_momentum(psi):
    """psi(q) -> psi_tilde(p) on the grid's p axis (unitary on conjugate grids)."""
    g = psi.grid
    coef = g.dq / np.sqrt(2 * np.pi * g.hbar)
    return MomentumWaveFunction(g, coef * (_fourier_kernel(g, -1) @ psi.values))


def to_position(psi_tilde):
    g = psi_tilde.grid
    coef = g.dp / np.sqrt(2 * np.pi * g.hbar)
    return WaveFunction(g, coef * (_fourier_kernel(g, +1).T @ psi_tilde.values))
