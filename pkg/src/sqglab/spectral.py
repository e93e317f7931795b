"""Periodic grid, Fourier transform conventions, and multiplier operators.

All fields live on a square torus [0, L)^2 sampled on an n x n grid. Spectral
coefficients use the *coefficient* normalization

    f(x) = sum_k c_k exp(i k.x),        c_k = FFT(f)[k] / n**2,

so a single mode cos(k.x) carries coefficients 1/2 at +-k, and Parseval reads

    integral |f|^2 dx = L^2 * sum_k |c_k|^2.

Real fields are stored in the half-spectrum (rfft2) layout, which makes the
conjugate symmetry of a real field structural rather than a maintained
invariant. Axis 0 is x1, axis 1 is x2; values are row-major samples
f[i, j] = f(i*dx, j*dx).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SpectralError(ValueError):
    """Invalid input to a spectral operation."""


@dataclass(frozen=True)
class GridSpec:
    """Square periodic grid: n points per axis on a torus of side L."""

    n: int
    L: float

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def spectral_shape(self) -> tuple[int, int]:
        return (self.n, self.n // 2 + 1)

    @property
    def dealias_keep(self) -> int:
        # Largest retained mode index. (n-1)//3 keeps the retained band of a
        # quadratic product alias-free even when 3 | n, and coincides with
        # floor(n/3) otherwise.
        return (self.n - 1) // 3

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Sample coordinates along each axis."""
        x = np.arange(self.n) * self.dx
        return x, x

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        x1, x2 = self.axes()
        return np.meshgrid(x1, x2, indexing="ij")

    def k1(self) -> np.ndarray:
        """Physical wavenumbers along axis 0 (full FFT ordering), shape (n, 1)."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return (2.0 * np.pi / self.L) * m[:, None]

    def k2(self) -> np.ndarray:
        """Physical wavenumbers along axis 1 (rfft ordering), shape (1, n//2+1)."""
        m = np.arange(self.n // 2 + 1)
        return (2.0 * np.pi / self.L) * m[None, :]

    def k_mag(self) -> np.ndarray:
        """|k| on the half-spectrum grid."""
        return np.hypot(*np.broadcast_arrays(self.k1(), self.k2()))

    def mode_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer mode indices (m1, m2) on the half-spectrum grid."""
        m1 = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)[:, None]
        m2 = np.arange(self.n // 2 + 1)[None, :]
        return m1, m2

    def periodic_radius(self, center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
        """Minimum-image distance of every grid point from `center`."""
        X1, X2 = self.meshgrid()
        d1 = (X1 - center[0] + self.L / 2.0) % self.L - self.L / 2.0
        d2 = (X2 - center[1] + self.L / 2.0) % self.L - self.L / 2.0
        return np.hypot(d1, d2)


def make_grid(n: int, L: float) -> GridSpec:
    """Validate and build a GridSpec. n must be even and >= 16, L > 0."""
    if n < 16:
        raise SpectralError(f"grid needs n >= 16, got n={n}")
    if n % 2 != 0:
        raise SpectralError(f"grid needs even n, got n={n}")
    if L <= 0:
        raise SpectralError(f"torus side must be positive, got L={L}")
    return GridSpec(n=n, L=float(L))


@dataclass
class Field:
    """Real scalar samples on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise SpectralError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def check_finite(self) -> "Field":
        if not np.all(np.isfinite(self.values)):
            raise SpectralError("field contains NaN/Inf")
        return self

    def mean(self) -> float:
        return float(self.values.mean())

    def linf(self) -> float:
        return float(np.abs(self.values).max())

    def l2(self) -> float:
        """Grid-quadrature L^2 norm over the torus."""
        return float(np.sqrt(np.sum(self.values**2) * self.grid.dx**2))

    def lp(self, p: float) -> float:
        return float((np.sum(np.abs(self.values) ** p) * self.grid.dx**2) ** (1.0 / p))


@dataclass
class SpectralField:
    """Half-spectrum complex coefficients of a real field."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != self.grid.spectral_shape:
            raise SpectralError(
                f"coefficient shape {self.coeffs.shape} does not match "
                f"grid half-spectrum {self.grid.spectral_shape}"
            )

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def mean(self) -> float:
        return float(self.coeffs[0, 0].real)

    def l2(self) -> float:
        """Spectral L^2 norm; equals the grid value by Parseval."""
        return float(np.sqrt(self.grid.L**2 * _abs2_sum(self.grid, self.coeffs)))


def _rfft_weights(grid: GridSpec) -> np.ndarray:
    # Multiplicity of each stored coefficient when summing |c_k|^2 over the
    # full spectrum: interior columns represent a conjugate pair.
    w = np.full(grid.spectral_shape, 2.0)
    w[:, 0] = 1.0
    if grid.n % 2 == 0:
        w[:, -1] = 1.0
    return w


def _abs2_sum(grid: GridSpec, coeffs: np.ndarray, weight: np.ndarray | None = None) -> float:
    """sum_k w(k) |c_k|^2 over the full spectrum from half-spectrum storage."""
    a2 = (coeffs.real**2 + coeffs.imag**2) * _rfft_weights(grid)
    if weight is not None:
        a2 = a2 * weight
    return float(a2.sum())


def transform(f: Field) -> SpectralField:
    """Forward transform to coefficient normalization; rejects NaN input."""
    f.check_finite()
    return SpectralField(f.grid, np.fft.rfft2(f.values) / f.grid.n**2)


def inverse(F: SpectralField) -> Field:
    """Inverse transform back to grid samples."""
    vals = np.fft.irfft2(F.coeffs, s=F.grid.shape) * F.grid.n**2
    return Field(F.grid, vals)


def field_from_function(grid: GridSpec, fn) -> Field:
    X1, X2 = grid.meshgrid()
    return Field(grid, fn(X1, X2))


def single_mode(grid: GridSpec, m1: int, m2: int, amplitude: float = 1.0,
                kind: str = "cos") -> Field:
    """cos/sin of one Fourier mode (m1, m2), for eigenfunction tests."""
    X1, X2 = grid.meshgrid()
    phase = 2.0 * np.pi * (m1 * X1 + m2 * X2) / grid.L
    vals = np.cos(phase) if kind == "cos" else np.sin(phase)
    return Field(grid, amplitude * vals)


def apply_lambda(F: SpectralField, a: float) -> SpectralField:
    """Fractional Laplacian of order `a`: multiply mode k by |k|^a.

    The zero mode is annihilated for every `a` (the operator acts on the
    mean-free part). Negative orders require mean-zero input.
    """
    kmag = F.grid.k_mag()
    if a < 0:
        scale = max(1.0, float(np.abs(F.coeffs).max()))
        if abs(F.coeffs[0, 0]) > 1e-10 * scale:
            raise SpectralError("inverse fractional Laplacian undefined on means")
        mult = np.zeros_like(kmag)
        nz = kmag > 0
        mult[nz] = kmag[nz] ** a
    else:
        mult = kmag**a
        mult[0, 0] = 0.0
    out = F.coeffs * mult
    out[0, 0] = 0.0
    return SpectralField(F.grid, out)


def gradient(F: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Spectral gradient (ik1, ik2). Nyquist rows of odd symbols are zeroed."""
    d1, d2 = _derivative_symbols(F.grid)
    return (SpectralField(F.grid, d1 * F.coeffs),
            SpectralField(F.grid, d2 * F.coeffs))


def _derivative_symbols(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    k1 = grid.k1().copy()
    k2 = grid.k2().copy()
    # The Nyquist mode of an even-length grid has no signed partner; a real
    # odd multiplier there breaks conjugate symmetry, so it is dropped.
    k1[grid.n // 2, 0] = 0.0
    if grid.n % 2 == 0:
        k2[0, -1] = 0.0
    return 1j * k1, 1j * k2


def divergence(F1: SpectralField, F2: SpectralField) -> SpectralField:
    d1, d2 = _derivative_symbols(F1.grid)
    return SpectralField(F1.grid, d1 * F1.coeffs + d2 * F2.coeffs)


def riesz_velocity(Theta: SpectralField) -> tuple[Field, Field]:
    """Divergence-free velocity (-R2, R1) applied to theta, on the grid.

    u1_hat = (-i k2 / |k|) theta_hat, u2_hat = (i k1 / |k|) theta_hat, with the
    zero mode set to 0.
    """
    u1h, u2h = riesz_velocity_spectral(Theta)
    return inverse(u1h), inverse(u2h)


def riesz_velocity_spectral(Theta: SpectralField) -> tuple[SpectralField, SpectralField]:
    grid = Theta.grid
    kmag = grid.k_mag()
    inv = np.zeros_like(kmag)
    nz = kmag > 0
    inv[nz] = 1.0 / kmag[nz]
    d1, d2 = _derivative_symbols(grid)
    u1 = -(d2 * inv) * Theta.coeffs
    u2 = (d1 * inv) * Theta.coeffs
    return SpectralField(grid, u1), SpectralField(grid, u2)


def dealias_mask(grid: GridSpec) -> np.ndarray:
    m1, m2 = grid.mode_indices()
    keep = grid.dealias_keep
    return (np.abs(m1) <= keep) & (np.abs(m2) <= keep)


def dealias(F: SpectralField) -> SpectralField:
    """2/3-rule truncation: zero every mode with max(|m1|,|m2|) above the cut."""
    return SpectralField(F.grid, F.coeffs * dealias_mask(F.grid))


def convolve(f: Field, g: Field) -> Field:
    """Periodic convolution (f*g)(x) = integral f(y) g(x-y) dy by FFT."""
    if f.grid != g.grid:
        raise SpectralError("convolution requires matching grids")
    Fh = transform(f)
    Gh = transform(g)
    return inverse(SpectralField(f.grid, f.grid.L**2 * Fh.coeffs * Gh.coeffs))


def lattice_correlate(f: Field, profile: Field) -> np.ndarray:
    """integral f(x) profile(x - c) dx for every grid offset c, via FFT.

    Used to evaluate windowed integrals against all lattice translates of a
    window profile at once; exact for the grid quadrature.
    """
    if f.grid != profile.grid:
        raise SpectralError("correlation requires matching grids")
    Fh = np.fft.rfft2(f.values)
    Ph = np.fft.rfft2(profile.values)
    corr = np.fft.irfft2(Fh * np.conj(Ph), s=f.grid.shape)
    return corr * f.grid.dx**2


def fractional_laplacian_quadrature_1d(
    fn, x: float, a: float, t_max: float = 1.0e4, num: int = 200_000
) -> float:
    """Singular-integral evaluation of Lambda^a for fields varying along x1 only.

    Uses the symmetric second-difference kernel reduced to one dimension:

        Lambda^a f(x) = -C_a c1(a) int_0^inf (f(x+t)+f(x-t)-2 f(x)) / t^{1+a} dt,

    with C_a = 2^a Gamma(1+a/2) / (pi |Gamma(-a/2)|) (the normalization whose
    Fourier symbol is |k|^a) and c1(a) = sqrt(pi) Gamma((1+a)/2) / Gamma(1+a/2)
    from collapsing the planar kernel across the constant direction. The far
    tail of the non-oscillating part is added in closed form. Serves as an
    oracle independent of any FFT path.
    """
    from math import gamma, pi, sqrt

    if not (0.0 < a < 2.0):
        raise SpectralError(f"quadrature oracle needs 0 < a < 2, got {a}")
    c_a = 2.0**a * gamma(1.0 + a / 2.0) / (pi * abs(gamma(-a / 2.0)))
    c_1 = sqrt(pi) * gamma((1.0 + a) / 2.0) / gamma(1.0 + a / 2.0)
    # Substitution t = u^4 smooths the t^{1-a} integrand near zero.
    u = np.linspace(0.0, t_max**0.25, num)[1:]
    t = u**4
    w = 4.0 * u**3
    integrand = (fn(x + t) + fn(x - t) - 2.0 * fn(x)) / t ** (1.0 + a) * w
    val = np.trapezoid(integrand, u)
    # Constant part of the neglected tail: -2 f(x) * int_{t_max}^inf t^{-1-a} dt.
    val += -2.0 * fn(x) * t_max ** (-a) / a
    return float(-c_a * c_1 * val)
