"""Wigner and cross-Wigner fields, marginals, expectations and the Weyl matrix oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import AliasingDetected, DegreeOverflow, GridMismatch, TruncationTooSevere
from .io import atomic_write_text
from .states import MomentumWaveFunction, PhaseGrid, WaveFunction, wavenumbers
from .symbols import MAX_DEGREE, PolySymbol

ALIAS_TOL = 1e-8
IMAG_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WignerField:
    grid: PhaseGrid
    values: np.ndarray = field(repr=False)
    imag_residue: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_q, self.grid.n_p):
            raise GridMismatch(f"field shape {values.shape} does not match the grid")
        object.__setattr__(self, "values", values)

    @property
    def hbar(self):
        return self.grid.hbar

    def integral(self):
        return float(np.sum(self.values) * self.grid.dq * self.grid.dp)

    def __add__(self, other):
        return WignerField(self.grid, self.values + other.values)

    def __mul__(self, c):
        return WignerField(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class CrossWignerField:
    """W_ij for the rank-one operator |psi_i><psi_j| (complex in general)."""

    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_q, self.grid.n_p):
            raise GridMismatch(f"field shape {values.shape} does not match the grid")
        object.__setattr__(self, "values", values)

    @property
    def hbar(self):
        return self.grid.hbar

    def integral(self):
        """Equals <psi_j|psi_i>."""
        return complex(np.sum(self.values) * self.grid.dq * self.grid.dp)

    def conj(self):
        return CrossWignerField(self.grid, np.conj(self.values))

    def real_field(self):
        return WignerField(self.grid, self.values.real,
                           float(np.max(np.abs(self.values.imag), initial=0.0)))

    def __add__(self, other):
        return CrossWignerField(self.grid, self.values + other.values)

    def __mul__(self, c):
        return CrossWignerField(self.grid, self.values * c)

    __rmul__ = __mul__


# -- construction -----------------------------------------------------------


def _offsets(n):
    """Symmetric offset indices -n/2..n/2 with trapezoidal end weights."""
    k = np.arange(-n // 2, n // 2 + 1)
    w = np.ones(k.size)
    w[0] = w[-1] = 0.5
    return k, w


def _shift_table(values, d, shifts):
    """Band-limited interpolation: out[j, m] = f(x_j + shifts[m])."""
    n = values.size
    k = wavenumbers(n, d)
    phase = np.exp(1j * np.outer(shifts, k))
    # split the Nyquist mode symmetrically so real input stays real under shifts
    phase[:, n // 2] = np.cos(np.pi / d * shifts)
    return np.fft.ifft(np.fft.fft(values)[None, :] * phase, axis=1).T


def _correlation(a, b, d):
    """C[j, k] = a(x_j + y_k/2) conj(b(x_j - y_k/2)) with y_k = k d."""
    k, w = _offsets(a.size)
    ys = k * d
    plus = _shift_table(a, d, ys / 2)
    minus = plus if b is a else _shift_table(b, d, ys / 2)
    # minus(x - y/2) is the column for the mirrored offset
    return plus * np.conj(minus[:, ::-1]), ys, w


def _check_alias(corr):
    peak = np.max(np.abs(corr))
    if peak == 0:
        return
    edge = max(np.max(np.abs(corr[:, 0])), np.max(np.abs(corr[:, -1]))) / peak
    if edge > ALIAS_TOL:
        raise AliasingDetected(
            f"correlation at the largest offset is {edge:.2e} of its peak; widen the grid")


def _cross_position(a, b, grid):
    corr, ys, w = _correlation(a, b, grid.dq)
    if not grid.periodic_q:
        _check_alias(corr)
    kernel = np.exp(-1j * np.outer(ys, grid.p) / grid.hbar) * (w * grid.dq)[:, None]
    return corr @ kernel / (2 * np.pi * grid.hbar)


def _finish_real(grid, vals):
    resid = float(np.max(np.abs(vals.imag), initial=0.0))
    scale = 1.0 / (np.pi * grid.hbar)
    if resid > IMAG_TOL * max(1.0, scale):
        raise AssertionError(f"Wigner field imaginary residue {resid:.2e} exceeds {IMAG_TOL}")
    return WignerField(grid, vals.real, resid)


def wigner_from_position(psi: WaveFunction) -> WignerField:
    """W(q,p) = (2 pi hbar)^-1 int dy exp(-i p y/hbar) psi(q+y/2) psi*(q-y/2)."""
    return _finish_real(psi.grid, _cross_position(psi.values, psi.values, psi.grid))


def cross_wigner(psi_i: WaveFunction, psi_j: WaveFunction) -> CrossWignerField:
    if psi_i.grid != psi_j.grid:
        raise GridMismatch("cross Wigner needs both states on the same grid")
    b = psi_i.values if psi_j is psi_i else psi_j.values
    return CrossWignerField(psi_i.grid, _cross_position(psi_i.values, b, psi_i.grid))


def _ring_momentum_wigner(phi, grid):
    # Finite circumference turns the u-integral's delta into a sinc on the lattice.
    R = grid.radius
    hb = grid.hbar
    nz = np.flatnonzero(np.abs(phi) > 1e-14 * max(np.max(np.abs(phi)), 1e-300))
    out = np.zeros((grid.n_q, grid.n_p), dtype=complex)
    p = grid.p
    s = grid.q
    for a in nz:
        for b in nz:
            amp = phi[a] * np.conj(phi[b]) * grid.dp
            carrier = np.exp(1j * (p[a] - p[b]) * s / hb)
            profile = np.sinc(((p[a] + p[b]) / 2 - p) * R / hb)
            out += amp * np.outer(carrier, profile)
    return out / (2 * np.pi * hb)


def wigner_from_momentum(phi: MomentumWaveFunction) -> WignerField:
    """W(q,p) = (2 pi hbar)^-1 int du exp(+i q u/hbar) phi(p+u/2) phi*(p-u/2)."""
    grid = phi.grid
    if grid.periodic_q:
        return _finish_real(grid, _ring_momentum_wigner(phi.values, grid))
    corr, us, w = _correlation(phi.values, phi.values, grid.dp)
    _check_alias(corr)
    kernel = np.exp(1j * np.outer(us, grid.q) / grid.hbar) * (w * grid.dp)[:, None]
    vals = (corr @ kernel).T / (2 * np.pi * grid.hbar)
    return _finish_real(grid, vals)


# -- reductions -------------------------------------------------------------


def marginal_position(W):
    return np.real(np.sum(W.values, axis=1) * W.grid.dp)


def marginal_momentum(W):
    return np.real(np.sum(W.values, axis=0) * W.grid.dq)


def expectation(W, symbol):
    """int dq dp A(q,p) W(q,p); ``symbol`` is an array, a callable or a PolySymbol."""
    g = W.grid
    if callable(symbol):
        Q, P = g.mesh()
        symbol = symbol(Q, P)
    val = np.sum(np.asarray(symbol) * W.values) * g.dq * g.dp
    return float(np.real(val)) if isinstance(W, WignerField) else complex(val)


def purity(W):
    """int W^2; equals 1/(2 pi hbar) for a pure state."""
    return float(np.sum(W.values**2) * W.grid.dq * W.grid.dp)


# -- CSV --------------------------------------------------------------------


def write_wigner_csv(W, path):
    """Rows ``q,p,w`` in row-major order (q outer), 17 significant digits."""
    Q, P = W.grid.mesh()
    rows = np.column_stack([Q.ravel(), P.ravel(), np.asarray(W.values).real.ravel()])
    lines = ["q,p,w"] + [",".join(f"{v:.17g}" for v in r) for r in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_wigner_csv(path, grid):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    vals = data[:, 2].reshape(grid.n_q, grid.n_p)
    if not (np.allclose(data[:: grid.n_p, 0], grid.q) and np.allclose(data[: grid.n_p, 1], grid.p)):
        raise GridMismatch("CSV sample points do not match the grid")
    return WignerField(grid, vals)


# -- Weyl oracle in the harmonic-oscillator number basis ----------------------


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Operator in the number basis of oscillator length ``length`` (default sqrt(hbar))."""

    entries: np.ndarray = field(repr=False)
    hbar: float = 1.0
    length: float = 1.0

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("operator matrix must be square")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self):
        return self.entries.shape[0]

    def __matmul__(self, other):
        return OperatorMatrix(self.entries @ other.entries, self.hbar, self.length)

    def __add__(self, other):
        return OperatorMatrix(self.entries + other.entries, self.hbar, self.length)

    def __sub__(self, other):
        return OperatorMatrix(self.entries - other.entries, self.hbar, self.length)

    def __mul__(self, c):
        return OperatorMatrix(self.entries * c, self.hbar, self.length)

    __rmul__ = __mul__

    def is_hermitian(self, tol=1e-12):
        e = self.entries
        return np.max(np.abs(e - e.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(e)))


def annihilation(dim):
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def ladder_qp(dim, hbar=1.0, length=None):
    length = np.sqrt(hbar) if length is None else length
    a = annihilation(dim)
    ad = a.conj().T
    Q = length * (a + ad) / np.sqrt(2)
    P = 1j * (hbar / length) * (ad - a) / np.sqrt(2)
    return Q, P


@lru_cache(maxsize=256)
def _weyl_monomial(i, j, dim, hbar, length):
    """Symmetrized Q^i P^j: the mean over all distinct orderings."""
    pad = dim + i + j
    Q, P = ladder_qp(pad, hbar, length)
    n = i + j
    total = np.zeros((pad, pad), dtype=complex)
    count = 0
    for q_slots in itertools.combinations(range(n), i):
        m = np.eye(pad, dtype=complex)
        slots = set(q_slots)
        for pos in range(n):
            m = m @ (Q if pos in slots else P)
        total += m
        count += 1
    out = total[:dim, :dim] / count
    out.setflags(write=False)
    return out


def _check_commutator(dim, degree, hbar, length):
    Q, P = ladder_qp(dim + 1, hbar, length)
    Q, P = Q[:dim, :dim], P[:dim, :dim]
    # the last row of a truncated [Q, P] is always wrong, so drop at least one
    keep = dim - max(degree, 1)
    if keep < 1:
        raise TruncationTooSevere(f"dimension {dim} leaves no block below degree {degree}")
    comm = (Q @ P - P @ Q)[:keep, :keep] - 1j * hbar * np.eye(keep)
    if np.max(np.abs(comm)) > 1e-8:
        raise TruncationTooSevere("[Q,P] != i hbar on the retained block")


def weyl_to_matrix(symbol: PolySymbol, dim=40, hbar=1.0, length=None) -> OperatorMatrix:
    """Weyl-ordered operator of a polynomial symbol, truncated to ``dim`` levels."""
    length = float(np.sqrt(hbar) if length is None else length)
    if symbol.degree > MAX_DEGREE:
        raise DegreeOverflow(f"degree {symbol.degree} exceeds {MAX_DEGREE}")
    _check_commutator(dim, symbol.degree, hbar, length)
    out = np.zeros((dim, dim), dtype=complex)
    for (i, j), c in symbol.terms.items():
        out += c * _weyl_monomial(i, j, dim, float(hbar), length)
    return OperatorMatrix(out, hbar, length)


def matrix_to_poly(op: OperatorMatrix, degree) -> PolySymbol:
    """Recover the polynomial Weyl symbol of ``op`` up to total ``degree``.

    The upper-left block unaffected by truncation is projected onto the
    symmetrized monomials.
    """
    keep = op.dim - degree
    if keep < degree + 2:
        raise TruncationTooSevere("matrix too small for the requested degree")
    keys = [(i, n - i) for n in range(degree + 1) for i in range(n + 1)]
    cols = []
    for i, j in keys:
        cols.append(_weyl_monomial(i, j, op.dim, float(op.hbar), float(op.length))[:keep, :keep].ravel())
    basis = np.array(cols).T
    scale = np.linalg.norm(basis, axis=0)
    target = op.entries[:keep, :keep].ravel()
    coef, *_ = np.linalg.lstsq(basis / scale, target, rcond=None)
    coef = coef / scale
    resid = np.linalg.norm(basis @ coef - target) / max(np.linalg.norm(target), 1e-300)
    if resid > 1e-8:
        raise TruncationTooSevere(f"operator is not a degree-{degree} Weyl polynomial "
                                  f"(residual {resid:.2e})")
    coef[np.abs(coef) < 1e-13 * max(np.max(np.abs(coef)), 1.0)] = 0
    return PolySymbol(dict(zip(keys, coef)))


def hermite_functions(x, n_max, length=1.0):
    """phi_n(x) for n < n_max, columns; oscillator length ``length``."""
    u = np.asarray(x, dtype=float) / length
    out = np.zeros((u.size, n_max))
    out[:, 0] = np.pi**-0.25 * np.exp(-u**2 / 2)
    if n_max > 1:
        out[:, 1] = np.sqrt(2.0) * u * out[:, 0]
    for n in range(1, n_max - 1):
        out[:, n + 1] = np.sqrt(2.0 / (n + 1)) * u * out[:, n] - np.sqrt(n / (n + 1)) * out[:, n - 1]
    return out / np.sqrt(length)


def _half_lattice(grid, dim, length):
    """Hermite functions on x = q_min + h dq/2 and index maps for q_j +- y_k/2."""
    n = grid.n_q
    k, w = _offsets(n)
    j = np.arange(n)
    hp = 2 * j[:, None] + k[None, :]
    hm = 2 * j[:, None] - k[None, :]
    lo = min(hp.min(), hm.min())
    hi = max(hp.max(), hm.max())
    x = grid.q_min + np.arange(lo, hi + 1) * grid.dq / 2
    phi = hermite_functions(x, dim, length)
    return phi, hp - lo, hm - lo, k * grid.dq, w


def matrix_to_symbol(op: OperatorMatrix, grid: PhaseGrid) -> np.ndarray:
    """A(q,p) = int dy exp(-i p y/hbar) <q+y/2|A|q-y/2>, sampled on ``grid``.

    Meaningful for operators whose number-basis matrix decays (density
    operators, Gaussians); polynomial operators go through :func:`matrix_to_poly`.
    """
    if not np.isclose(op.hbar, grid.hbar):
        raise GridMismatch("operator and grid disagree on hbar")
    phi, hp, hm, ys, w = _half_lattice(grid, op.dim, op.length)
    left = phi @ op.entries
    kernel = np.einsum("jkn,jkn->jk", left[hp], phi[hm])
    ft = np.exp(-1j * np.outer(ys, grid.p) / grid.hbar) * (w * grid.dq)[:, None]
    return kernel @ ft


def symbol_to_matrix(samples, grid: PhaseGrid, dim, length=None) -> OperatorMatrix:
    """<m|A|n> = int dq dp A(q,p) W[phi_n, phi_m](q,p) by grid quadrature."""
    length = float(np.sqrt(grid.hbar) if length is None else length)
    samples = np.asarray(samples, dtype=complex)
    phi, hp, hm, ys, w = _half_lattice(grid, dim, length)
    # A~(q, y) = (2 pi hbar)^-1 int dp A(q,p) exp(-i p y / hbar)
    at = samples @ np.exp(-1j * np.outer(grid.p, ys) / grid.hbar) * grid.dp / (2 * np.pi * grid.hbar)
    at = at * (w * grid.dq * grid.dq)[None, :]
    plus = phi[hp].reshape(-1, dim)
    minus = phi[hm].reshape(-1, dim)
    entries = minus.T @ (at.reshape(-1, 1) * plus)
    return OperatorMatrix(entries, grid.hbar, length)
