"""Construction of oscillatory initial data and its truncation/regularization.

The scalar is prepared as theta0 = L^s w0 from a rough-but-localizable w0, and
the solver consumes the truncated, mollified family

    theta0(R, eps) = L^s(w0 * chi_R) convolved with rho_eps,

where chi_R is a smooth radial cutoff (1 inside |x| <= R, 0 beyond 2R) and
rho_eps a positive unit-mass mollifier at scale eps. w0(R, eps) is recovered
through L^{-s} on the mean-free part; residual means are reported, never
silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    Field,
    GridSpec,
    SpectralField,
    apply_lambda,
    gradient,
    inverse,
    transform,
)
from .windows import radial_bump


class DataError(ValueError):
    """Invalid initial-data recipe or truncation parameters."""


@dataclass
class DataRecipe:
    """How to synthesize w0.

    generator: "gaussian_spectrum" (power-law random field, optionally
    localized by a Gaussian envelope), "bump_lattice" (dipole pairs of
    compactly supported bumps), or "file" (load a stored field).
    """

    generator: str = "gaussian_spectrum"
    seed: int = 0
    beta: float = 2.5
    amplitude: float = 1.0
    s: float = 0.6
    target_linf: float | None = 1.0
    envelope_sigma: float | None = None
    support_radius: float = 2.0
    path: str | None = None

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise DataError(
                f"oscillation exponent must satisfy 0 < s < 1, got s={self.s}"
            )
        if self.generator not in ("gaussian_spectrum", "bump_lattice", "file"):
            raise DataError(f"unknown generator {self.generator!r}")

    @property
    def exploratory(self) -> bool:
        """Main runs keep s in (1/2, 1); anything else is flagged."""
        return not (0.5 < self.s < 1.0)


@dataclass
class TruncationParams:
    """Truncation radius R (> 1) and mollification width eps (>= dx)."""

    R: float
    eps: float

    def validate(self, grid: GridSpec) -> "TruncationParams":
        if self.R <= 1.0:
            raise DataError(f"truncation radius must satisfy R > 1, got R={self.R}")
        if 2.0 * self.R >= grid.L / 2.0:
            raise DataError(
                f"truncation must fit inside the torus: need 2R < L/2, "
                f"got R={self.R}, L={grid.L}"
            )
        if self.eps < grid.dx:
            raise DataError("mollifier under-resolved")
        return self


def _power_law_field(grid: GridSpec, seed: int, beta: float) -> SpectralField:
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(grid.shape)
    coeffs = np.fft.rfft2(white) / grid.n**2
    kmag = grid.k_mag()
    shape = np.zeros_like(kmag)
    nz = kmag > 0
    shape[nz] = kmag[nz] ** (-beta)
    return SpectralField(grid, coeffs * shape)


def _check_hs_resolved(What: SpectralField, s: float, beta: float) -> None:
    """Reject spectra whose H^s mass sits in the unresolved tail."""
    grid = What.grid
    from .spectral import _abs2_sum

    m1, m2 = grid.mode_indices()
    outer = (np.maximum(np.abs(m1), np.abs(m2)) > grid.n // 4).astype(float)
    weight = (1.0 + grid.k_mag() ** 2) ** s
    total = _abs2_sum(grid, What.coeffs, weight)
    tail = _abs2_sum(grid, What.coeffs, weight * outer)
    if total > 0 and tail / total > 0.3:
        raise DataError(
            f"spectral slope beta={beta} too shallow for H^s with s={s}: "
            f"{tail / total:.0%} of the H^s sum lies in the unresolved tail"
        )


def generate_w0(recipe: DataRecipe, grid: GridSpec) -> Field:
    """Synthesize a mean-zero w0 per the recipe; deterministic given the seed."""
    if recipe.generator == "file":
        from .storage import read_snapshot

        if recipe.path is None:
            raise DataError("file generator needs a path")
        _, loaded = read_snapshot(recipe.path)
        if loaded.grid != grid:
            raise DataError("stored field grid does not match requested grid")
        w0 = loaded
    elif recipe.generator == "gaussian_spectrum":
        What = _power_law_field(grid, recipe.seed, recipe.beta)
        _check_hs_resolved(What, recipe.s, recipe.beta)
        if recipe.envelope_sigma is not None:
            # Localize under a Gaussian envelope, then take d/dx1 so the mean
            # is exactly zero without introducing a delocalizing constant.
            env = np.exp(-grid.periodic_radius() ** 2 / (2.0 * recipe.envelope_sigma**2))
            localized = Field(grid, inverse(What).values * env)
            g1, _ = gradient(transform(localized))
            w0 = inverse(g1)
        else:
            w0 = inverse(What)
    else:  # bump_lattice
        w0 = _dipole_bumps(grid, recipe.seed, recipe.support_radius)

    w0 = Field(grid, recipe.amplitude * w0.values)
    if recipe.target_linf is not None:
        theta = inverse(apply_lambda(transform(w0), recipe.s))
        peak = theta.linf()
        if peak > 0:
            w0 = Field(grid, w0.values * (recipe.target_linf / peak))
    return w0


def _dipole_bumps(grid: GridSpec, seed: int, support_radius: float) -> Field:
    """Opposite-sign bump pairs inside |x| <= support_radius; mean exactly 0."""
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.shape)
    width = max(support_radius / 3.0, 2.0 * grid.dx)
    n_pairs = 3
    for _ in range(n_pairs):
        ang = rng.uniform(0.0, 2.0 * np.pi)
        rad = rng.uniform(0.0, support_radius - 2.0 * width)
        c = (rad * np.cos(ang), rad * np.sin(ang))
        # grid-aligned opposite bump so the discrete masses cancel exactly
        shift = round(width / grid.dx)
        amp = rng.uniform(0.5, 1.0)
        r_pos = grid.periodic_radius(c)
        bump = radial_bump(r_pos, 0.3 * width, width)
        vals += amp * bump
        vals -= amp * np.roll(bump, shift, axis=0)
    return Field(grid, vals)


def build_chi_R(grid: GridSpec, R: float) -> Field:
    """Smooth truncation: 1 on |x| <= R, 0 on |x| >= 2R, centered at origin."""
    if 2.0 * R >= grid.L / 2.0:
        raise DataError(
            f"truncation support overflows the torus: need 2R < L/2, got R={R}, L={grid.L}"
        )
    r = grid.periodic_radius()
    return Field(grid, radial_bump(r, R, 2.0 * R))


def mollifier_kernel(grid: GridSpec, eps: float) -> Field:
    """Positive bump at scale eps, renormalized to discrete mass exactly 1."""
    if eps < grid.dx:
        raise DataError("mollifier under-resolved")
    r = grid.periodic_radius()
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        u = (r / eps) ** 2
        vals = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    mass = vals.sum() * grid.dx**2
    if mass <= 0:
        raise DataError("mollifier under-resolved")
    return Field(grid, vals / mass)


def mollify(f: Field, eps: float) -> Field:
    """Convolve with the unit-mass mollifier (spectral multiplication).

    Positivity plus exact unit mass make this an L-infinity contraction that
    preserves means exactly.
    """
    rho = mollifier_kernel(f.grid, eps)
    rho_hat = np.fft.rfft2(rho.values) * f.grid.dx**2  # rho_hat(0) == 1 exactly
    out = np.fft.irfft2(np.fft.rfft2(f.values) * rho_hat, s=f.grid.shape)
    return Field(f.grid, out)


def build_truncated_data(
    w0: Field, s: float, params: TruncationParams
) -> tuple[Field, Field, float]:
    """theta0(R, eps) and w0(R, eps); returns (theta, w, residual_mean).

    theta = L^s(w0 chi_R) mollified at eps; w recovered via L^{-s} on the
    mean-free part of theta. residual_mean is the (tiny) mean carried by
    theta, reported instead of silently dropped.
    """
    params.validate(w0.grid)
    chi = build_chi_R(w0.grid, params.R)
    truncated = Field(w0.grid, w0.values * chi.values)
    theta = mollify(inverse(apply_lambda(transform(truncated), s)), params.eps)
    theta_hat = transform(theta)
    residual_mean = float(theta_hat.coeffs[0, 0].real)
    centered = theta_hat.copy()
    centered.coeffs[0, 0] = 0.0
    w = inverse(apply_lambda(centered, -s))
    return theta, w, residual_mean


def uniform_bound_sweep(
    w0: Field,
    s: float,
    R_list: list[float],
    eps_list: list[float],
    windows=None,
) -> list[dict]:
    """Table of sup norms of the truncated data across (R, eps).

    Columns: R, eps, linf_theta, hs_uloc_w, flag. The flag marks entries where
    a column grows monotonically beyond twice its value at the smallest R
    (heuristic blow-up detection).
    """
    if any(R <= 1.0 for R in R_list):
        raise DataError("sweep radii must all satisfy R > 1")
    if sorted(R_list) != list(R_list):
        raise DataError("R_list must be increasing")
    from .norms import hs_uloc_norm

    rows = []
    for R in R_list:
        for eps in eps_list:
            theta, w, residual = build_truncated_data(
                w0, s, TruncationParams(R=R, eps=eps)
            )
            if windows is not None:
                hs_val = hs_uloc_norm(w, s, windows, variant="a").sup
            else:
                hs_val = float("nan")
            rows.append(
                {
                    "R": R,
                    "eps": eps,
                    "linf_theta": theta.linf(),
                    "hs_uloc_w": hs_val,
                    "residual_mean": residual,
                    "flag": False,
                }
            )
    _flag_monotone_growth(rows, "linf_theta")
    if windows is not None:
        _flag_monotone_growth(rows, "hs_uloc_w")
    return rows


def _flag_monotone_growth(rows: list[dict], key: str) -> None:
    """Flag a column that increases with R and ends above 2x its first value."""
    by_eps: dict[float, list[dict]] = {}
    for row in rows:
        by_eps.setdefault(row["eps"], []).append(row)
    for series in by_eps.values():
        vals = [r[key] for r in series]
        increasing = all(b >= a for a, b in zip(vals, vals[1:]))
        if len(vals) >= 2 and increasing and vals[-1] > 2.0 * vals[0]:
            for r in series:
                r["flag"] = True


def sweep_table_csv(path, rows: list[dict]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(("R", "eps", "linf_theta", "hs_uloc_w", "flag"))
        for r in rows:
            out.writerow((r["R"], r["eps"], r["linf_theta"], r["hs_uloc_w"], int(r["flag"])))
