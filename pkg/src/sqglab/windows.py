"""Smooth cutoff profiles and lattice window families for uniformly-local norms.

The base profiles are radial smoothed steps built from the classic exp(-1/t)
glue, so they are C-infinity with exact plateau and support radii:

    phi0:  1 on |x| <= 2,    0 on |x| >= 3        (window profile)
    psi0:  1 on |x| <= 3.25, 0 on |x| >= 4        (=1 near supp phi0)
    chi:   1 on |x| <= 1,    0 on |x| >= 2        (truncation template)

A WindowFamily enumerates every translate of the profile over the integer
lattice of the torus. Evaluating a windowed integral against all translates at
once goes through an FFT correlation, which is exact for the grid quadrature,
so suprema over windows are exhaustive rather than sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Field, GridSpec, SpectralError, lattice_correlate


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity monotone step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        h = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return g / (g + h)


def radial_bump(r: np.ndarray, plateau: float, support: float) -> np.ndarray:
    """Radial profile equal to 1 for r <= plateau and 0 for r >= support."""
    if support <= plateau:
        raise SpectralError("bump support radius must exceed plateau radius")
    return _smooth_step((support - np.asarray(r, dtype=float)) / (support - plateau))


PROFILES = {
    "phi0": (2.0, 3.0),
    "psi0": (3.25, 4.0),
    "chi": (1.0, 2.0),
}


def profile_radii(profile: str) -> tuple[float, float]:
    try:
        return PROFILES[profile]
    except KeyError:
        raise SpectralError(f"unknown window profile {profile!r}") from None


def sample_profile(grid: GridSpec, profile: str,
                   center: tuple[float, float] = (0.0, 0.0)) -> Field:
    """Sample a named profile on the grid, centered with periodic wrapping."""
    plateau, support = profile_radii(profile)
    if grid.L < 2.0 * support:
        raise SpectralError(
            f"torus side L={grid.L} too small for profile {profile!r} "
            f"(support diameter {2 * support})"
        )
    r = grid.periodic_radius(center)
    return Field(grid, radial_bump(r, plateau, support))


def grad_linf(field: Field) -> float:
    """Max gradient magnitude, by spectral differentiation."""
    from .spectral import gradient, inverse, transform

    g1, g2 = gradient(transform(field))
    return float(np.hypot(inverse(g1).values, inverse(g2).values).max())


@dataclass
class WindowFamily:
    """All unit-lattice translates of one cutoff profile on the torus."""

    grid: GridSpec
    profile: str
    base: Field           # profile centered at the origin
    centers: np.ndarray   # (num_windows, 2) integer lattice coordinates
    stride: int           # grid points per unit lattice step
    grad_linf: float

    @property
    def num_windows(self) -> int:
        return len(self.centers)

    @property
    def lattice_side(self) -> int:
        return int(round(self.grid.L))

    def window_field(self, index: int) -> Field:
        """Materialize one translate; exact because centers sit on the grid."""
        ci, cj = self.centers[index]
        vals = np.roll(self.base.values, (ci * self.stride, cj * self.stride), axis=(0, 1))
        return Field(self.grid, vals)

    def center_coords(self, index: int) -> tuple[float, float]:
        ci, cj = self.centers[index]
        return float(ci), float(cj)

    def correlate(self, f: Field) -> np.ndarray:
        """integral f(x) phi(x - c) dx for every center c, shape (num_windows,).

        Exhaustive over the lattice; the FFT correlation equals the grid
        quadrature exactly.
        """
        corr = lattice_correlate(f, self.base)
        return corr[:: self.stride, :: self.stride].reshape(-1)


def build_windows(grid: GridSpec, profile: str = "phi0") -> WindowFamily:
    """Window family on the integer lattice of the torus.

    Requires L >= 8 (so the profile support fits), integer L, and n divisible
    by L so lattice points coincide with grid points.
    """
    _, support = profile_radii(profile)
    if grid.L < 8.0:
        raise SpectralError(
            f"torus side L={grid.L} too small for window profile {profile!r}; need L >= 8"
        )
    side = int(round(grid.L))
    if abs(grid.L - side) > 1e-9:
        raise SpectralError(
            f"unit-lattice windows need an integer torus side, got L={grid.L}"
        )
    if grid.n % side != 0:
        raise SpectralError(
            f"unit-lattice windows need n divisible by L, got n={grid.n}, L={side}"
        )
    base = sample_profile(grid, profile)
    ii, jj = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    centers = np.stack([ii.reshape(-1), jj.reshape(-1)], axis=1)
    return WindowFamily(
        grid=grid,
        profile=profile,
        base=base,
        centers=centers,
        stride=grid.n // side,
        grad_linf=grad_linf(base),
    )
