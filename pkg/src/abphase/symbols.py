"""Phase-space symbols: sparse polynomials in (q, p) and band-limited grid samples."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import BandwidthExceeded, GridMismatch
from .states import PhaseGrid, wavenumbers

MAX_DEGREE = 12
BAND_FRACTION = 0.01
BAND_ENERGY_TOL = 1e-8


class PolySymbol:
    """Polynomial sum_{i,j} c_ij q^i p^j stored as ``{(i, j): c_ij}``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError("negative powers are not polynomial")
            c = complex(c)
            if not np.isfinite(c):
                raise ValueError("coefficients must be finite")
            if c != 0:
                clean[(int(i), int(j))] = clean.get((int(i), int(j)), 0) + c
        self.terms = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def q(cls, power=1):
        return cls({(power, 0): 1.0})

    @classmethod
    def p(cls, power=1):
        return cls({(0, power): 1.0})

    @classmethod
    def random(cls, degree, rng, low=-1.0, high=1.0, complex_coeffs=False):
        terms = {}
        for i in range(degree + 1):
            for j in range(degree + 1 - i):
                c = rng.uniform(low, high)
                if complex_coeffs:
                    c = c + 1j * rng.uniform(low, high)
                terms[(i, j)] = c
        return cls(terms)

    @property
    def degree(self):
        return max((i + j for i, j in self.terms), default=0)

    def __repr__(self):
        body = " + ".join(f"({c:.6g})q^{i}p^{j}" for (i, j), c in sorted(self.terms.items()))
        return f"PolySymbol({body or '0'})"

    def _coerce(self, other):
        if isinstance(other, PolySymbol):
            return other
        return PolySymbol.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return PolySymbol(out)

    __radd__ = __add__

    def __neg__(self):
        return PolySymbol({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        """Pointwise (commutative) product, not the star product."""
        if not isinstance(other, PolySymbol):
            return PolySymbol({k: v * other for k, v in self.terms.items()})
        out = {}
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + a * b
        return PolySymbol(out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / c)

    def derivative(self, nq=0, np_=0):
        out = {}
        for (i, j), c in self.terms.items():
            if i >= nq and j >= np_:
                scale = factorial(i) // factorial(i - nq) * (factorial(j) // factorial(j - np_))
                out[(i - nq, j - np_)] = c * scale
        return PolySymbol(out)

    def __call__(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        out = np.zeros(np.broadcast(q, p).shape, dtype=complex)
        for (i, j), c in self.terms.items():
            out = out + c * q**i * p**j
        return out

    def sample(self, grid):
        Q, P = grid.mesh()
        return self(Q, P)

    def coefficient_vector(self, degree=None):
        degree = self.degree if degree is None else degree
        return np.array([self.terms.get((i, n - i), 0) for n in range(degree + 1)
                         for i in range(n + 1)], dtype=complex)

    def norm(self):
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def allclose(self, other, rtol=1e-12, atol=1e-12):
        other = self._coerce(other)
        keys = set(self.terms) | set(other.terms)
        scale = max(self.norm(), other.norm(), 1.0)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= atol + rtol * scale
                   for k in keys)

    def is_real(self, tol=1e-14):
        return all(abs(c.imag) <= tol * max(1.0, abs(c)) for c in self.terms.values())


def poisson_bracket(a, b):
    """{A, B} = dA/dq dB/dp - dA/dp dB/dq for polynomials."""
    return a.derivative(1, 0) * b.derivative(0, 1) - a.derivative(0, 1) * b.derivative(1, 0)


def outer_band_share(samples, fraction=BAND_FRACTION):
    """Energy share carried by the highest-frequency ``fraction`` of 2D Fourier modes."""
    spec = np.abs(np.fft.fft2(samples)) ** 2
    total = spec.sum()
    if total == 0:
        return 0.0
    nq, np_ = samples.shape
    fq = np.abs(np.fft.fftfreq(nq)) * 2
    fp = np.abs(np.fft.fftfreq(np_)) * 2
    radius = np.maximum(fq[:, None], fp[None, :])
    flat = radius.ravel()
    count = max(1, int(np.ceil(fraction * flat.size)))
    threshold = np.partition(flat, flat.size - count)[flat.size - count]
    return float(spec[radius >= threshold].sum() / total)


@dataclass(frozen=True, eq=False)
class GridSymbol:
    """Complex phase-space function sampled on a :class:`PhaseGrid`."""

    grid: PhaseGrid
    values: np.ndarray = field(repr=False)
    check: bool = True

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_q, self.grid.n_p):
            raise GridMismatch(
                f"samples have shape {values.shape}, grid is {(self.grid.n_q, self.grid.n_p)}")
        object.__setattr__(self, "values", values)
        if self.check:
            share = outer_band_share(values)
            if share > BAND_ENERGY_TOL:
                raise BandwidthExceeded(
                    f"outer 1% of the spectrum carries {share:.2e} of the energy")

    @classmethod
    def from_function(cls, grid, fn, check=True):
        Q, P = grid.mesh()
        return cls(grid, fn(Q, P), check)

    @classmethod
    def from_poly(cls, poly, grid, window=None, check=True):
        """Sample a polynomial, optionally tapered by a smooth window so that it
        becomes band-limited; inside the window plateau the samples are exact."""
        vals = poly.sample(grid)
        if window is not None:
            Q, P = grid.mesh()
            vals = vals * window(Q, P)
        return cls(grid, vals, check)

    def __add__(self, other):
        return GridSymbol(self.grid, self.values + _vals(other, self.grid), False)

    def __sub__(self, other):
        return GridSymbol(self.grid, self.values - _vals(other, self.grid), False)

    def __mul__(self, c):
        return GridSymbol(self.grid, self.values * c, False)

    __rmul__ = __mul__

    def norm(self):
        g = self.grid
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * g.dq * g.dp))

    def derivative(self, nq=0, np_=0):
        g = self.grid
        vals = self.values
        if nq:
            kq = wavenumbers(g.n_q, g.dq)
            vals = np.fft.ifft(np.fft.fft(vals, axis=0) * ((1j * kq) ** nq)[:, None], axis=0)
        if np_:
            kp = wavenumbers(g.n_p, g.dp)
            vals = np.fft.ifft(np.fft.fft(vals, axis=1) * ((1j * kp) ** np_)[None, :], axis=1)
        return GridSymbol(g, vals, False)


def _vals(other, grid):
    if isinstance(other, GridSymbol):
        if other.grid != grid:
            raise GridMismatch("symbols live on different grids")
        return other.values
    return other


def erf_window(center_half_width, edge_width):
    """Entire (analytic) plateau window 1 on |x|, |y| << half width, smooth roll-off."""
    from scipy.special import erf

    a, s = center_half_width, edge_width

    def one(x):
        return 0.5 * (erf((x + a) / s) - erf((x - a) / s))

    return lambda Q, P: one(Q) * one(P)
