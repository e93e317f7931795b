"""Uniformly-local norms, windowed energies, commutators, and norm oracles.

Conventions:

  * L^p_uloc is the sup over unit lattice cells k+[0,1)^2 of the cell integral
    of |f|^p (then the 1/p power); p = inf is the global grid max.
  * The windowed energy A_phi(w) = integral (w^2/2 + |L^s w|^2/2) phi dx, with
    L^s the fractional Laplacian of order s.
  * ||w||^2_{H^s_uloc} is reported in the energy convention sup_phi A_phi(w)
    (variant "a"); variant "b" is sup_phi A(w phi) with the same quadratic
    form and no window weight inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    Field,
    GridSpec,
    SpectralError,
    apply_lambda,
    inverse,
    transform,
)
from .windows import WindowFamily


@dataclass
class NormReport:
    """Per-window values of one norm plus their supremum."""

    norm_id: str
    s: float
    values: np.ndarray
    sup: float
    arg_sup: int

    def csv_rows(self) -> list[tuple]:
        rows = []
        for i, v in enumerate(self.values):
            rows.append((self.norm_id, self.s, i, float(v), int(i == self.arg_sup)))
        return rows

    @staticmethod
    def csv_header() -> tuple:
        return ("norm_id", "s", "window_index", "value", "sup_flag")


def _report(norm_id: str, s: float, values: np.ndarray) -> NormReport:
    values = np.asarray(values, dtype=float)
    arg = int(np.argmax(values))
    return NormReport(norm_id=norm_id, s=s, values=values, sup=float(values[arg]), arg_sup=arg)


def _unit_cells(f: Field) -> np.ndarray:
    """Reshape samples into (cells, cell) blocks over the integer lattice."""
    grid = f.grid
    side = int(round(grid.L))
    if abs(grid.L - side) > 1e-9 or grid.n % side != 0:
        raise SpectralError(
            f"unit-cell tiling needs integer L dividing n, got n={grid.n}, L={grid.L}"
        )
    m = grid.n // side
    return f.values.reshape(side, m, side, m)


def lp_uloc_norm(f: Field, p: float) -> NormReport:
    """sup over unit cells of the local L^p norm; global max for p = inf."""
    f.check_finite()
    if p == np.inf:
        vals = np.array([f.linf()])
        return _report("Linf_uloc", 0.0, vals)
    if p < 1:
        raise SpectralError(f"L^p_uloc needs p >= 1, got {p}")
    blocks = _unit_cells(f)
    cell = (np.abs(blocks) ** p).sum(axis=(1, 3)) * f.grid.dx**2
    return _report(f"L{p:g}_uloc", 0.0, cell.reshape(-1) ** (1.0 / p))


def hs_norm(f: Field, s: float) -> float:
    """Inhomogeneous Sobolev norm: (L^2 sum_k (1+|k|^2)^s |c_k|^2)^{1/2}."""
    from .spectral import _abs2_sum

    F = transform(f)
    weight = (1.0 + F.grid.k_mag() ** 2) ** s
    return float(np.sqrt(F.grid.L**2 * _abs2_sum(F.grid, F.coeffs, weight)))


def hs_dot_norm(f: Field, s: float) -> float:
    """Homogeneous seminorm ||L^s f||_{L^2}."""
    return inverse(apply_lambda(transform(f), s)).l2()


def gagliardo_seminorm(f: Field, s: float, cutoff_fraction: float = 0.25) -> float:
    """Squared difference-quotient seminorm, by quadrature over grid offsets.

        integral integral |f(x)-f(y)|^2 / |x-y|^{2+2s} dx dy

    evaluated as sum_h w(h) D(h) with D(h) = integral |f(x)-f(x-h)|^2 dx from
    the FFT autocorrelation, over min-image offsets with 0 < |h| <= L *
    cutoff_fraction, plus the decorrelated analytic tail 2 pi ||f||^2 r_c^{-2s}
    / s. Independent of the spectral multiplier path; oracle for ||L^s f||^2.
    """
    if not (0.0 < s < 1.0):
        raise SpectralError(f"Gagliardo seminorm needs 0 < s < 1, got s={s}")
    f.check_finite()
    grid = f.grid
    raw = np.fft.rfft2(f.values)
    auto = np.fft.irfft2(raw * np.conj(raw), s=grid.shape) * grid.dx**2
    energy = float(auto[0, 0])
    diff2 = 2.0 * (energy - auto)  # D(h) >= 0 up to round-off
    r = grid.periodic_radius()
    r_c = grid.L * cutoff_fraction
    mask = (r > 0) & (r <= r_c)
    kernel = np.zeros_like(r)
    kernel[mask] = r[mask] ** (-2.0 - 2.0 * s)
    main = float((diff2 * kernel).sum() * grid.dx**2)
    # decorrelated D(h) tends to twice the mean-free energy, not twice the total
    fluct = energy - f.mean() ** 2 * grid.L**2
    tail = 2.0 * math.pi * max(fluct, 0.0) * r_c ** (-2.0 * s) / s
    return main + tail


def fit_gagliardo_constant(grid: GridSpec, s: float, modes=((1, 0), (0, 1), (1, 1), (2, 0), (0, 2))) -> float:
    """Equivalence constant between the difference-quotient seminorm and
    ||L^s f||^2, fitted on single Fourier modes and meant to be frozen."""
    from .spectral import single_mode

    ratios = []
    for m1, m2 in modes:
        f = single_mode(grid, m1, m2)
        spectral_sq = hs_dot_norm(f, s) ** 2
        ratios.append(gagliardo_seminorm(f, s) / spectral_sq)
    return float(np.mean(ratios))


def energy_functional_density(w: Field, s: float) -> Field:
    """Pointwise density (w^2 + |L^s w|^2)/2 entering A_phi."""
    ls = inverse(apply_lambda(transform(w), s))
    return Field(w.grid, 0.5 * (w.values**2 + ls.values**2))


def energy_functional_Aphi(w: Field, s: float, window: Field) -> float:
    """A_phi(w) = integral (w^2/2 + |L^s w|^2/2) phi dx for one window."""
    dens = energy_functional_density(w, s)
    return float((dens.values * window.values).sum() * w.grid.dx**2)


def hs_uloc_norm(f: Field, s: float, windows: WindowFamily, variant: str = "a") -> NormReport:
    """Windowed Sobolev energy, both equivalent forms.

    variant "a": sup_phi A_phi(f)  -- window weights the energy density.
    variant "b": sup_phi A(f phi)  -- energy of the windowed field.

    Values are energies (quadratic in f), matching the sup_phi A_phi
    convention for ||.||^2_{H^s_uloc}.
    """
    if not (0.0 < s < 1.0):
        raise SpectralError(f"H^s_uloc needs 0 < s < 1, got s={s}")
    if variant == "a":
        dens = energy_functional_density(f, s)
        vals = windows.correlate(dens)
        return _report("Hs_uloc_a", s, vals)
    if variant == "b":
        vals = np.empty(windows.num_windows)
        for i in range(windows.num_windows):
            wf = Field(f.grid, f.values * windows.window_field(i).values)
            vals[i] = 0.5 * (wf.l2() ** 2 + hs_dot_norm(wf, s) ** 2)
        return _report("Hs_uloc_b", s, vals)
    raise SpectralError(f"unknown H^s_uloc variant {variant!r}")


def commutator_apply(phi: Field, s: float, w: Field) -> Field:
    """[L^s, phi] w = L^s(phi w) - phi L^s w."""
    if not (0.0 < s < 1.0):
        raise SpectralError(f"commutator needs 0 < s < 1, got s={s}")
    prod = Field(w.grid, phi.values * w.values)
    first = inverse(apply_lambda(transform(prod), s))
    second = inverse(apply_lambda(transform(w), s))
    return Field(w.grid, first.values - phi.values * second.values)


def spacetime_uloc_accumulate(
    snapshots: list[Field], s: float, dt: float, windows: WindowFamily
) -> float:
    """sup_phi integral_0^T integral phi |L^s w|^2 dx dt over snapshots.

    Trapezoidal in time at uniform spacing dt inside each window integral; the
    sup over windows is taken after the time integration.
    """
    if not snapshots:
        raise SpectralError("no snapshots")
    grid = snapshots[0].grid
    per_window = np.zeros(windows.num_windows)
    weights = _trapezoid_weights(len(snapshots), dt)
    for snap, wt in zip(snapshots, weights):
        if snap.grid != grid:
            raise SpectralError("snapshots live on mismatched grids")
        ls = inverse(apply_lambda(transform(snap), s))
        dens = Field(grid, ls.values**2)
        per_window += wt * windows.correlate(dens)
    return float(per_window.max())


def _trapezoid_weights(count: int, dt: float) -> np.ndarray:
    if count == 1:
        return np.array([dt])
    w = np.full(count, dt)
    w[0] = w[-1] = dt / 2.0
    return w


def write_norm_reports_csv(path, reports: list[NormReport]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(NormReport.csv_header())
        for rep in reports:
            out.writerows(rep.csv_rows())
