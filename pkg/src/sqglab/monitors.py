"""Numerical verification of the inequality chain behind the SQG energy method.

Every check produces a Verdict record carrying the measured quantity, the
bound it is compared against, the margin, and the tolerance used, so verdict
files are machine-readable and each failure names its witness. Inequalities
whose constants are not quantified are recorded as fitted empirical constants
with a stability criterion (no vacuous absolute assertions).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .spectral import (
    Field,
    GridSpec,
    SpectralError,
    apply_lambda,
    convolve,
    dealias,
    divergence,
    inverse,
    transform,
)
from .norms import lp_uloc_norm
from .windows import WindowFamily

LEDGER_COLUMNS = (
    "t", "dt", "linf", "l2", "lp4", "lp8",
    "h_half_cum", "Aphi_sup", "cordoba_viol", "divu_max",
)


@dataclass
class LedgerRow:
    t: float
    dt: float
    linf: float
    l2: float
    lp4: float
    lp8: float
    h_half_cum: float
    Aphi_sup: float
    cordoba_viol: float
    divu_max: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in LEDGER_COLUMNS)


@dataclass
class MonitorLedger:
    """Per-snapshot time series of norms and inequality diagnostics."""

    rows: list[LedgerRow] = dc_field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(LEDGER_COLUMNS)
            for row in self.rows:
                out.writerow([repr(v) for v in row.as_tuple()])

    @classmethod
    def read_csv(cls, path) -> "MonitorLedger":
        ledger = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != LEDGER_COLUMNS:
                raise SpectralError(f"unexpected ledger columns: {header}")
            for rec in reader:
                ledger.rows.append(LedgerRow(*[float(v) for v in rec]))
        return ledger


@dataclass
class Verdict:
    check_id: str
    status: str              # pass | fail | inconclusive | slow
    measured: float
    bound: float
    margin: float
    tol: float
    params: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def csv_row(self) -> tuple:
        return (
            self.check_id,
            json.dumps(self.params, sort_keys=True, default=float),
            repr(self.measured),
            repr(self.bound),
            repr(self.margin),
            self.status,
            repr(self.tol),
        )

    @staticmethod
    def csv_header() -> tuple:
        return ("check_id", "params_json", "measured", "bound", "margin", "pass", "tol")

    def summary_line(self) -> str:
        return (f"[{self.status.upper():12s}] {self.check_id}: "
                f"measured={self.measured:.6g} bound={self.bound:.6g} "
                f"margin={self.margin:.3g} tol={self.tol:g}")


def write_verdicts_csv(path, verdicts: list[Verdict], append: bool = False) -> None:
    mode = "a" if append else "w"
    write_header = not append
    with open(path, mode, newline="") as fh:
        out = csv.writer(fh)
        if write_header:
            out.writerow(Verdict.csv_header())
        for v in verdicts:
            out.writerow(v.csv_row())


def write_summary(path, verdicts: list[Verdict]) -> None:
    with open(path, "w") as fh:
        for v in verdicts:
            fh.write(v.summary_line() + "\n")
        n_fail = sum(v.failed for v in verdicts)
        fh.write(f"\n{len(verdicts)} checks, {n_fail} failed\n")


# ---------------------------------------------------------------------------
# pointwise convexity inequality


def cordoba_residual(theta: Field, alpha: float, g: str = "square") -> Field:
    """Pointwise residual g'(theta) L^alpha(theta) - L^alpha(g(theta)).

    Nonnegative for convex g in the continuum; computed spectrally.
    """
    if g == "square":
        g_of = theta.values**2
        gp_of = 2.0 * theta.values
    elif g == "quartic":
        g_of = theta.values**4
        gp_of = 4.0 * theta.values**3
    else:
        raise SpectralError(f"unknown convex profile {g!r}")
    lam_theta = inverse(apply_lambda(transform(theta), alpha))
    lam_g = inverse(apply_lambda(transform(Field(theta.grid, g_of)), alpha))
    return Field(theta.grid, gp_of * lam_theta.values - lam_g.values)


def spectral_tail_ratio(theta: Field) -> float:
    """Relative magnitude of the top-band coefficients (resolution gauge)."""
    F = transform(theta)
    m1, m2 = F.grid.mode_indices()
    band = np.maximum(np.abs(m1), np.abs(m2)) >= int(0.8 * (F.grid.n // 2))
    top = np.abs(F.coeffs[band]).max() if band.any() else 0.0
    overall = np.abs(F.coeffs).max()
    return float(top / overall) if overall > 0 else 0.0


def check_cordoba(theta: Field, alpha: float, g: str = "square",
                  tol: float = 1e-6, tail_threshold: float = 1e-5) -> Verdict:
    """Convexity inequality: residual must stay above -tol * max(1, |theta|_inf^2)."""
    params = {"alpha": alpha, "g": g}
    tail = spectral_tail_ratio(theta)
    scale = max(1.0, theta.linf() ** 2)
    bound = -tol * scale
    if tail > tail_threshold:
        return Verdict("cordoba", "inconclusive", tail, tail_threshold, 0.0, tol,
                       {**params, "reason": "under-resolved spectral tail"})
    res = cordoba_residual(theta, alpha, g)
    measured = float(res.values.min())
    status = "pass" if measured >= bound else "fail"
    if status == "fail":
        import hashlib

        idx = np.unravel_index(np.argmin(res.values), res.values.shape)
        params["witness_xy"] = [float(idx[0] * theta.grid.dx), float(idx[1] * theta.grid.dx)]
        params["field_sha"] = hashlib.sha256(
            np.ascontiguousarray(theta.values).tobytes()
        ).hexdigest()[:16]
    return Verdict("cordoba", status, measured, bound, measured - bound, tol, params)


# ---------------------------------------------------------------------------
# maximum principle and L^p dissipation


def check_max_principle(ledger: MonitorLedger, tol: float = 1e-3) -> Verdict:
    if len(ledger.rows) < 2:
        return Verdict("max_principle", "inconclusive", 0.0, 0.0, 0.0, tol,
                       {"reason": "need at least 2 ledger rows"})
    linf = ledger.column("linf")
    t = ledger.column("t")
    bound = linf[0] * (1.0 + tol)
    worst = int(np.argmax(linf))
    measured = float(linf[worst])
    status = "pass" if measured <= bound else "fail"
    params = {"t_witness": float(t[worst])} if status == "fail" else {}
    return Verdict("max_principle", status, measured, bound, bound - measured, tol, params)


def check_lp_dissipation(traj, p: int, ledger: MonitorLedger | None = None,
                         tol: float = 1e-2, balance_tol: float = 5e-3) -> Verdict:
    """L^p budget: |theta(T)|_p^p + 2 kappa p-dissipation <= |theta0|_p^p.

    p = 2 additionally demands near-equality of the budget; its dissipation
    integral comes from the per-step accumulation in the ledger when present
    (finer than the snapshot trapezoid).
    """
    if p not in (2, 4, 8):
        raise SpectralError(f"L^p dissipation check supports p in (2,4,8), got {p}")
    params = {"p": p, "kappa": traj.kappa, "alpha": traj.alpha}
    if ledger is not None and len(ledger.rows) > 1:
        dts = ledger.column("dt")[1:]
        if traj.cadence > 10.0 * float(np.median(dts)) + 1e-15:
            return Verdict(f"lp_dissipation_p{p}", "inconclusive", 0.0, 0.0, 0.0, tol,
                           {**params, "reason": "snapshot cadence coarser than 10 dt"})
    h = traj.cadence
    times = traj.times
    if p == 2 and ledger is not None:
        dissip = float(ledger.column("h_half_cum")[-1])
    else:
        rates = []
        for i in range(len(times)):
            th = traj.theta(i)
            # p = 2 admits the signed field (and an exact balance); even p/2
            # keeps the general |theta|^{p/2} smooth
            power = th if p == 2 else Field(th.grid, np.abs(th.values) ** (p / 2.0))
            rates.append(inverse(apply_lambda(transform(power), traj.alpha / 2.0)).l2() ** 2)
        weights = np.full(len(times), h)
        weights[0] = weights[-1] = h / 2.0
        dissip = float(np.dot(weights, rates))
    lhs = traj.theta(len(times) - 1).lp(p) ** p + 2.0 * traj.kappa * dissip
    rhs = traj.theta(0).lp(p) ** p
    params["lhs"] = lhs
    params["rhs"] = rhs
    bound = rhs * (1.0 + tol)
    if lhs > bound:
        return Verdict(f"lp_dissipation_p{p}", "fail", lhs, bound, bound - lhs, tol, params)
    if p == 2 and traj.kappa > 0:
        imbalance = abs(lhs - rhs) / max(rhs, 1e-300)
        params["imbalance"] = imbalance
        status = "pass" if imbalance <= balance_tol else "fail"
        return Verdict("lp_dissipation_p2", status, imbalance, balance_tol,
                       balance_tol - imbalance, balance_tol, params)
    return Verdict(f"lp_dissipation_p{p}", "pass", lhs, bound, bound - lhs, tol, params)


# ---------------------------------------------------------------------------
# windowed energy inequality, Gronwall envelope, dissipation budget


def _window_energy_series(traj, s: float, windows: WindowFamily) -> np.ndarray:
    """A_phi(w(t_i)) for every window, shape (num_snapshots, num_windows)."""
    from .norms import energy_functional_density

    rows = []
    for i in range(len(traj.times)):
        dens = energy_functional_density(traj.w(i), s)
        rows.append(windows.correlate(dens))
    return np.asarray(rows)


def _four_terms(traj, i: int, windows: WindowFamily, s: float) -> np.ndarray:
    """The four windowed tendency terms at snapshot i, shape (4, num_windows).

    Products under the divergence are dealiased exactly as in the stepping, so
    the sum tracks the semidiscrete d/dt A_phi up to time-difference error.
    """
    grid = traj.grid
    theta_c = traj.theta_centered_hat(i)
    theta_grid = inverse(traj.snapshots[i])
    u1, u2 = traj.velocity(i)
    w = inverse(apply_lambda(theta_c, -s))
    lam_w = inverse(apply_lambda(theta_c, 1.0 - s))
    lam_theta = inverse(apply_lambda(theta_c, 1.0))
    div_hat = dealias(divergence(
        transform(Field(grid, u1.values * theta_grid.values)),
        transform(Field(grid, u2.values * theta_grid.values)),
    ))
    div_grid = inverse(div_hat)
    q = inverse(apply_lambda(div_hat, -s))
    kappa = traj.kappa
    t1 = -windows.correlate(Field(grid, w.values * q.values))
    t2 = -kappa * windows.correlate(Field(grid, w.values * lam_w.values))
    t3 = -windows.correlate(Field(grid, inverse(theta_c).values * div_grid.values))
    t4 = -kappa * windows.correlate(Field(grid, inverse(theta_c).values * lam_theta.values))
    return np.stack([t1, t2, t3, t4])


def check_energy_inequality(traj, s: float, windows: WindowFamily,
                            stability_factor: float = 2.0,
                            consistency_tol: float = 0.02) -> tuple[Verdict, float]:
    """Windowed energy inequality d/dt A_phi <= C ||w||^2 and its four-term split.

    C_emp is the largest positive ratio of the window-sup tendency to the
    windowed Sobolev energy; pass requires C_emp stable over the run (at most
    stability_factor times the median positive ratio) and the four-term sum to
    reproduce the centered-difference tendency within consistency_tol.
    """
    times = np.asarray(traj.times)
    if len(times) < 3:
        return (Verdict("energy_inequality", "inconclusive", 0.0, 0.0, 0.0,
                        consistency_tol, {"reason": "need >= 3 snapshots"}), 0.0)
    A = _window_energy_series(traj, s, windows)
    h_norm = A.max(axis=1)
    if h_norm.max() <= 0.0:
        return (Verdict("energy_inequality", "pass", 0.0, 0.0, 0.0,
                        consistency_tol, {"note": "zero solution"}), 0.0)
    cadence = traj.cadence
    ratios = []
    max_mismatch = 0.0
    max_rate = 0.0
    for i in range(1, len(times) - 1):
        dAdt = (A[i + 1] - A[i - 1]) / (2.0 * cadence)
        ratios.append(float(dAdt.max() / h_norm[i]))
        terms = _four_terms(traj, i, windows, s)
        mismatch = np.abs(terms.sum(axis=0) - dAdt).max()
        max_mismatch = max(max_mismatch, float(mismatch))
        max_rate = max(max_rate, float(np.abs(dAdt).max()))
    ratios_arr = np.asarray(ratios)
    positive = ratios_arr[ratios_arr > 0]
    if positive.size == 0:
        c_emp = 0.0
        stable = True
    else:
        c_emp = float(positive.max())
        stable = c_emp <= stability_factor * float(np.median(positive)) + 1e-12
    consistency = max_mismatch / max(max_rate, 1e-300)
    params = {
        "C_emp": c_emp,
        "ratio_median_positive": float(np.median(positive)) if positive.size else 0.0,
        "four_term_consistency": consistency,
    }
    ok = stable and consistency <= consistency_tol
    verdict = Verdict("energy_inequality", "pass" if ok else "fail",
                      consistency, consistency_tol, consistency_tol - consistency,
                      consistency_tol, params)
    return verdict, c_emp


def check_gronwall_envelope(traj, s: float, windows: WindowFamily,
                            c_emp: float | None = None,
                            slack: float = 0.05) -> Verdict:
    """Integrated growth rate of ||w||^2_{H^s_uloc} against the exponential
    envelope; consistent runs keep the fitted rate below C_emp (plus slack)."""
    times = np.asarray(traj.times)
    if len(times) < 10:
        return Verdict("gronwall_envelope", "inconclusive", 0.0, 0.0, 0.0, slack,
                       {"reason": "need >= 10 snapshots"})
    A = _window_energy_series(traj, s, windows)
    h_norm = A.max(axis=1)
    if h_norm[0] <= 0.0:
        return Verdict("gronwall_envelope", "inconclusive", 0.0, 0.0, 0.0, slack,
                       {"reason": "w0 = 0, degenerate envelope"})
    with np.errstate(divide="ignore"):
        rates = np.log(h_norm[1:] / h_norm[0]) / times[1:]
    c_hat = float(rates.max())
    params = {"C_hat": c_hat}
    if c_emp is None:
        return Verdict("gronwall_envelope", "pass", c_hat, math.inf, math.inf, slack, params)
    bound = c_emp * (1.0 + slack) if c_emp > 0 else c_emp + 1e-9
    params["C_emp"] = c_emp
    status = "pass" if c_hat <= bound else "fail"
    return Verdict("gronwall_envelope", status, c_hat, bound, bound - c_hat, slack, params)


def check_l2_hhalf_budget(traj, s: float, windows: WindowFamily) -> tuple[Verdict, float]:
    """Spacetime dissipation budget: final windowed energy plus the uloc
    half-derivative spacetime norm against the initial energy plus the time
    integral of the windowed energy; the ratio K is recorded."""
    from .norms import spacetime_uloc_accumulate

    times = np.asarray(traj.times)
    if len(times) < 2:
        return (Verdict("l2_hhalf_budget", "inconclusive", 0.0, 0.0, 0.0, 0.0,
                        {"reason": "need >= 2 snapshots"}), math.nan)
    A = _window_energy_series(traj, s, windows)
    h_norm = A.max(axis=1)
    theta_snaps = [inverse(traj.theta_centered_hat(i)) for i in range(len(times))]
    budget = spacetime_uloc_accumulate(theta_snaps, 0.5, traj.cadence, windows)
    lhs = float(h_norm[-1]) + budget
    weights = np.full(len(times), traj.cadence)
    weights[0] = weights[-1] = traj.cadence / 2.0
    rhs = float(h_norm[0]) + float(np.dot(weights, h_norm))
    if rhs <= 0:
        return (Verdict("l2_hhalf_budget", "inconclusive", lhs, rhs, 0.0, 0.0,
                        {"reason": "degenerate zero data"}), math.nan)
    K = lhs / rhs
    return (Verdict("l2_hhalf_budget", "pass", lhs, rhs, rhs - lhs, 0.0,
                    {"K": K, "spacetime_budget": budget}), K)


# ---------------------------------------------------------------------------
# kernel decay, convolution bound, commutator bound, velocity bound


def check_kernel_decay(profile_field: Field, inner: float = 5.0,
                       slope_range: tuple[float, float] = (-3.3, -2.7)) -> Verdict:
    """Tail decay of the half-Laplacian of a cutoff: fitted log-log slope of
    |L phi| on the annulus inner <= |x| <= L/3 must sit near -3."""
    grid = profile_field.grid
    outer = grid.L / 3.0
    if outer <= inner * 1.5:
        return Verdict("kernel_decay", "inconclusive", 0.0, 0.0, 0.0, 0.0,
                       {"reason": f"torus L={grid.L} too small for a tail annulus"})
    lam = inverse(apply_lambda(transform(profile_field), 1.0))
    peak = float(np.abs(lam.values).max())
    if peak <= 1e-14 * max(1.0, profile_field.linf()):
        return Verdict("kernel_decay", "pass", 0.0, 0.0, 0.0, 0.0,
                       {"note": "operator annihilates the profile"})
    r = grid.periodic_radius()
    mask = (r >= inner) & (r <= outer)
    rr = r[mask]
    vals = np.abs(lam.values[mask])
    # radial binning tames the angular grid anisotropy before the fit
    nbins = 24
    edges = np.geomspace(inner, outer, nbins + 1)
    logr, logv = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (rr >= lo) & (rr < hi)
        if sel.sum() == 0:
            continue
        logr.append(math.log(math.sqrt(lo * hi)))
        logv.append(math.log(vals[sel].mean()))
    slope = float(np.polyfit(logr, logv, 1)[0])
    bounded = float((vals * rr**3).max())
    lo, hi = slope_range
    status = "pass" if lo <= slope <= hi else "fail"
    return Verdict("kernel_decay", status, slope, hi, hi - slope, 0.0,
                   {"slope_range": list(slope_range), "max_r3_weighted": bounded})


def bump_mixture(grid: GridSpec, rng: np.random.Generator, n_bumps: int = 3) -> Field:
    """Positive mixture of mollifier bumps (an L^1 test object)."""
    from .initial_data import mollifier_kernel

    vals = np.zeros(grid.shape)
    for _ in range(n_bumps):
        eps = rng.uniform(2.0, 6.0) * grid.dx
        amp = rng.uniform(0.2, 2.0)
        shift = rng.integers(0, grid.n, size=2)
        vals += amp * np.roll(mollifier_kernel(grid, eps).values,
                              tuple(shift), axis=(0, 1))
    return Field(grid, vals)


def check_young_uloc(grid: GridSpec, seed: int = 0, trials: int = 100,
                     p_list: tuple = (2, 4), tol: float = 1e-10) -> Verdict:
    """Convolution bound |f*g|_{L^p_uloc} <= |f|_{L^1} |g|_{L^p_uloc} on
    randomized bump mixtures against rough fields."""
    from .initial_data import DataRecipe, generate_w0

    rng = np.random.default_rng(seed)
    worst = -math.inf
    witness = {}
    for trial in range(trials):
        f = bump_mixture(grid, rng)
        g = generate_w0(
            DataRecipe(seed=int(rng.integers(0, 2**31)), beta=rng.uniform(1.8, 3.0),
                       s=0.6, target_linf=None, amplitude=1.0),
            grid,
        )
        f_l1 = float(np.abs(f.values).sum() * grid.dx**2)
        conv = convolve(f, g)
        for p in p_list:
            lhs = lp_uloc_norm(conv, p).sup
            rhs = f_l1 * lp_uloc_norm(g, p).sup
            excess = (lhs - rhs) / max(rhs, 1e-300)
            if excess > worst:
                worst = excess
                witness = {"trial": trial, "p": p}
    status = "pass" if worst <= tol else "fail"
    return Verdict("young_uloc", status, worst, tol, tol - worst, tol,
                   {"trials": trials, **witness})


def check_commutator_bound(grid: GridSpec, s: float, seed: int = 0,
                           trials: int = 100,
                           stability_factor: float = 2.0) -> tuple[Verdict, float]:
    """Empirical operator norm of w -> L^s(phi w) - phi L^s w on L^2_uloc.

    Records K_emp = max ratio over random rough fields; pass requires the max
    not to exceed stability_factor times the 90th percentile (no heavy tail).
    """
    from .initial_data import DataRecipe, generate_w0
    from .norms import commutator_apply
    from .windows import sample_profile

    phi = sample_profile(grid, "phi0")
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        beta = rng.uniform(s + 1.1, 3.5)
        w = generate_w0(
            DataRecipe(seed=int(rng.integers(0, 2**31)), beta=beta, s=s,
                       target_linf=None, amplitude=1.0),
            grid,
        )
        comm = commutator_apply(phi, s, w)
        denom = lp_uloc_norm(w, 2).sup
        if denom > 0:
            ratios.append(lp_uloc_norm(comm, 2).sup / denom)
    ratios_arr = np.asarray(ratios)
    k_emp = float(ratios_arr.max())
    p90 = float(np.percentile(ratios_arr, 90))
    status = "pass" if k_emp <= stability_factor * p90 else "fail"
    return (Verdict("commutator_bound", status, k_emp, stability_factor * p90,
                    stability_factor * p90 - k_emp, 0.0,
                    {"s": s, "trials": trials, "K_emp": k_emp, "p90": p90}), k_emp)


def check_riesz_uloc(traj, s: float, windows: WindowFamily) -> tuple[Verdict, float]:
    """Velocity spacetime bound: the uloc L^2-in-time norm of u against the
    time-integrated windowed Sobolev energy of w; the ratio is recorded."""
    times = np.asarray(traj.times)
    if len(times) < 2:
        return (Verdict("riesz_uloc", "inconclusive", 0.0, 0.0, 0.0, 0.0,
                        {"reason": "need >= 2 snapshots"}), math.nan)
    per_window = np.zeros(windows.num_windows)
    weights = np.full(len(times), traj.cadence)
    weights[0] = weights[-1] = traj.cadence / 2.0
    for i, wt in enumerate(weights):
        u1, u2 = traj.velocity(i)
        dens = Field(traj.grid, u1.values**2 + u2.values**2)
        per_window += wt * windows.correlate(dens)
    lhs = float(per_window.max())
    A = _window_energy_series(traj, s, windows)
    rhs = float(np.dot(weights, A.max(axis=1)))
    if rhs <= 0:
        return (Verdict("riesz_uloc", "inconclusive", lhs, rhs, 0.0, 0.0,
                        {"reason": "zero data"}), math.nan)
    K = lhs / rhs
    return (Verdict("riesz_uloc", "pass", lhs, rhs, rhs - lhs, 0.0, {"K": K}), K)


# ---------------------------------------------------------------------------
# weak-form residual


def weak_form_residuals(traj, eta: Field) -> tuple[np.ndarray, float]:
    """Residual of the distributional formulation against a static test
    function, per interior snapshot, plus the self-calibrated budget.

    residual_i = d/dt<theta, eta> - <theta, u . grad eta> + <L^{a/2} eta, L^{a/2} theta>
    with the time derivative by centered differences at the cadence. The
    budget is 3 x (h^2/6) x max |third time difference| (the leading
    truncation error of the centered difference), plus a round-off floor.
    """
    from .spectral import gradient

    grid = traj.grid
    half = traj.alpha / 2.0
    eta_hat = transform(eta)
    g1, g2 = gradient(eta_hat)
    g1v, g2v = inverse(g1).values, inverse(g2).values
    lam_eta = inverse(apply_lambda(eta_hat, half)).values
    inner, transport, dissip = [], [], []
    for i in range(len(traj.times)):
        th = traj.theta(i)
        u1, u2 = traj.velocity(i)
        lam_th = inverse(apply_lambda(traj.theta_centered_hat(i), half)).values
        inner.append(float((th.values * eta.values).sum() * grid.dx**2))
        transport.append(float((th.values * (u1.values * g1v + u2.values * g2v)).sum()
                               * grid.dx**2))
        dissip.append(traj.kappa * float((lam_eta * lam_th).sum() * grid.dx**2))
    inner_arr = np.asarray(inner)
    h = traj.cadence
    res = []
    for i in range(1, len(inner_arr) - 1):
        ddt = (inner_arr[i + 1] - inner_arr[i - 1]) / (2.0 * h)
        res.append(ddt - transport[i] + dissip[i])
    third = np.abs(np.diff(inner_arr, n=3)) / h**3 if len(inner_arr) >= 4 else np.array([0.0])
    budget = 3.0 * (h**2 / 6.0) * float(third.max()) + 1e-10 * max(1.0, np.abs(inner_arr).max())
    return np.asarray(res), budget


def check_weak_form_residual(traj, etas: list[Field]) -> Verdict:
    """All residuals within their self-calibrated centered-difference budget."""
    worst_ratio = 0.0
    worst, worst_budget = 0.0, math.inf
    for eta in etas:
        res, budget = weak_form_residuals(traj, eta)
        if res.size == 0:
            continue
        score = float(np.abs(res).max())
        if score / budget >= worst_ratio:
            worst_ratio = score / budget
            worst, worst_budget = score, budget
    status = "pass" if worst <= worst_budget else "fail"
    return Verdict("weak_form_residual", status, worst, worst_budget,
                   worst_budget - worst, 0.0, {"num_etas": len(etas)})
