"""Sweeps over the truncation/regularization parameters and resolution studies.

The central experiment runs the same data and solver configuration across a
grid of (R, eps) values and measures pairwise solution distances in
L^2-in-time over a fixed comparison ball, demonstrating empirically that the
family is Cauchy as R grows and eps shrinks. A refinement study separates the
discretization error from the truncation effect.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, make_recipe
from .initial_data import DataRecipe, TruncationParams, build_truncated_data, generate_w0
from .monitors import Verdict
from .solver import Trajectory, run_simulation
from .spectral import Field, GridSpec, make_grid


class HarnessError(ValueError):
    """Invalid sweep plan or mismatched member runs."""


@dataclass
class SweepPlan:
    config: RunConfig
    R_list: list[float]
    eps_list: list[float]
    omega_radius: float

    def __post_init__(self):
        if not self.R_list or not self.eps_list:
            raise HarnessError("sweep lists must be nonempty")
        if list(self.R_list) != sorted(self.R_list):
            raise HarnessError("R_list must be increasing")
        if list(self.eps_list) != sorted(self.eps_list, reverse=True):
            raise HarnessError("eps_list must be decreasing")
        for R in self.R_list:
            if R <= 1.0:
                raise HarnessError(f"sweep radius must satisfy R > 1, got {R}")
        if self.omega_radius >= min(self.R_list):
            raise HarnessError("comparison ball must sit inside the smallest R")

    def pairs(self) -> list[TruncationParams]:
        return [TruncationParams(R=R, eps=e) for R in self.R_list for e in self.eps_list]


@dataclass
class CauchyTable:
    labels: list[tuple[float, float]]       # (R, eps) per member run
    distances: np.ndarray                    # symmetric, zero diagonal

    def consecutive(self) -> np.ndarray:
        return np.array([
            self.distances[i, i + 1] for i in range(len(self.labels) - 1)
        ])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            header = ["R_eps"] + [f"({R:g},{e:g})" for R, e in self.labels]
            out.writerow(header)
            for (R, e), row in zip(self.labels, self.distances):
                out.writerow([f"({R:g},{e:g})"] + [repr(float(v)) for v in row])


def omega_mask(grid: GridSpec, radius: float) -> np.ndarray:
    return grid.periodic_radius() <= radius


def trajectory_distance(a: Trajectory, b: Trajectory, mask: np.ndarray) -> float:
    """(L^2 in time, L^2 on the masked ball) distance between two runs."""
    if a.grid != b.grid:
        raise HarnessError("member runs live on different grids")
    if len(a.times) != len(b.times) or any(
        abs(x - y) > 1e-12 for x, y in zip(a.times, b.times)
    ):
        raise HarnessError("member runs have misaligned snapshot times")
    h = a.cadence
    weights = np.full(len(a.times), h)
    weights[0] = weights[-1] = h / 2.0
    acc = 0.0
    dx2 = a.grid.dx**2
    for i, wt in enumerate(weights):
        diff = a.theta(i).values - b.theta(i).values
        acc += wt * float((diff[mask] ** 2).sum()) * dx2
    return math.sqrt(acc)


def run_member(cfg: RunConfig, params: TruncationParams, windows=None) -> Trajectory:
    grid = make_grid(cfg.n, cfg.L)
    w0 = generate_w0(make_recipe(cfg), grid)
    theta0, _, _ = build_truncated_data(w0, cfg.s, params)
    traj, _ = run_simulation(
        theta0,
        alpha=cfg.alpha,
        s=cfg.s,
        T=cfg.T,
        cadence=cfg.snapshot_cadence,
        kappa=cfg.kappa,
        c_cfl=cfg.cfl,
        dt_max=cfg.dt_max,
        params=params,
        windows=windows,
        cordoba_check=False,
    )
    return traj


def run_sweep(plan: SweepPlan, out_dir=None,
              max_workers: int | None = None) -> tuple[list[Trajectory], CauchyTable]:
    """Run every (R, eps) member with identical seed and solver settings.

    Members are independent and run on a thread pool; the table is assembled
    in plan order, so results are deterministic. Any member hitting a
    non-finite state aborts the table; completed members and the partial
    manifest are persisted first when out_dir is given.
    """
    from concurrent.futures import ThreadPoolExecutor

    cfg = plan.config
    grid = make_grid(cfg.n, cfg.L)
    mask = omega_mask(grid, plan.omega_radius)
    members: list[Trajectory] = []
    labels: list[tuple[float, float]] = []
    manifest = {"schema": 1, "plan": {
        "R_list": list(plan.R_list), "eps_list": list(plan.eps_list),
        "omega_radius": plan.omega_radius, "seed": cfg.seed,
        "n": cfg.n, "L": cfg.L, "T": cfg.T,
    }, "runs": []}
    pairs = plan.pairs()
    workers = max_workers or min(4, len(pairs))
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_member, cfg, params) for params in pairs]
            for params, fut in zip(pairs, futures):
                traj = fut.result()
                members.append(traj)
                labels.append((params.R, params.eps))
                manifest["runs"].append({"R": params.R, "eps": params.eps})
    except Exception:
        if out_dir is not None:
            _write_sweep_manifest(out_dir, manifest, partial=True)
        raise
    m = len(members)
    distances = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d = trajectory_distance(members[i], members[j], mask)
            distances[i, j] = distances[j, i] = d
    table = CauchyTable(labels=labels, distances=distances)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        table.write_csv(os.path.join(out_dir, "cauchy_table.csv"))
        from .storage import save_run

        for traj, (R, e) in zip(members, labels):
            run_dir = os.path.join(out_dir, f"member_R{R:g}_eps{e:g}")
            from .monitors import MonitorLedger

            save_run(run_dir, traj, MonitorLedger())
        _write_sweep_manifest(out_dir, manifest, partial=False)
    return members, table


def _write_sweep_manifest(out_dir, manifest: dict, partial: bool) -> None:
    os.makedirs(out_dir, exist_ok=True)
    manifest = dict(manifest)
    manifest["partial"] = partial
    path = os.path.join(out_dir, "sweep_manifest.json")
    table_path = os.path.join(out_dir, "cauchy_table.csv")
    if os.path.exists(table_path):
        from .storage import sha256_file

        manifest["hashes"] = {"cauchy_table.csv": sha256_file(table_path)}
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def cauchy_ratio(table: CauchyTable, threshold: float = 0.7) -> Verdict:
    """Geometric-decay test on consecutive member distances.

    Ratios at or below the threshold pass; slower decay is reported as "slow"
    rather than failed (the sampled sequence cannot refute convergence along a
    subsequence); fewer than three members is inconclusive.
    """
    cons = table.consecutive()
    if len(cons) < 2:
        return Verdict("cauchy_ratio", "inconclusive", 0.0, threshold, 0.0, threshold,
                       {"reason": "need >= 3 consecutive sweep entries"})
    ratios = []
    for a, b in zip(cons[:-1], cons[1:]):
        if a <= 0.0:
            ratios.append(0.0 if b <= 0.0 else math.inf)
        else:
            ratios.append(b / a)
    worst = max(ratios)
    decreasing = all(b < a or (a == b == 0.0) for a, b in zip(cons[:-1], cons[1:]))
    params = {
        "consecutive_distances": [float(c) for c in cons],
        "ratios": [float(r) for r in ratios],
        "monotone_decreasing": decreasing,
    }
    status = "pass" if (worst <= threshold and decreasing) else "slow"
    return Verdict("cauchy_ratio", status, worst, threshold, threshold - worst,
                   threshold, params)


def spectral_prolong(w0_coarse: Field, fine_grid: GridSpec) -> Field:
    """Embed a coarse field into a finer grid by zero-padding its spectrum.

    The coarse Nyquist row and column are ambiguous under prolongation and
    are dropped; the generators leave them spectrally negligible.
    """
    from .spectral import SpectralField, inverse, transform

    coarse = w0_coarse.grid
    if fine_grid.L != coarse.L or fine_grid.n < coarse.n:
        raise HarnessError("prolongation needs same torus and finer resolution")
    src = transform(w0_coarse).coeffs
    dst = np.zeros(fine_grid.spectral_shape, dtype=complex)
    half = coarse.n // 2
    dst[:half, :half] = src[:half, :half]
    dst[fine_grid.n - half + 1:, :half] = src[half + 1:, :half]
    return inverse(SpectralField(fine_grid, dst))


def refinement_study(recipe: DataRecipe, s: float, n_list: list[int], L: float,
                     T: float, cadence: float, dt_max: float,
                     truncation: TruncationParams | None = None,
                     alpha: float = 1.0, kappa: float = 1.0) -> dict:
    """Inter-resolution distances on common modes for a doubling sequence.

    The initial data is synthesized once at the coarsest resolution and
    spectrally prolonged, so every run discretizes the same function and the
    reported decay is pure discretization error.
    """
    if any(b != 2 * a for a, b in zip(n_list[:-1], n_list[1:])):
        raise HarnessError("n_list must be a doubling sequence")
    coarse = make_grid(n_list[0], L)
    w0 = generate_w0(recipe, coarse)
    runs = []
    for n in n_list:
        grid = make_grid(n, L)
        w0_n = w0 if n == n_list[0] else spectral_prolong(w0, grid)
        if truncation is not None:
            theta0, _, _ = build_truncated_data(w0_n, s, truncation)
        else:
            from .spectral import apply_lambda, inverse, transform

            theta0 = inverse(apply_lambda(transform(w0_n), s))
        traj, _ = run_simulation(theta0, alpha=alpha, s=s, T=T, cadence=cadence,
                                 kappa=kappa, dt_max=dt_max, cordoba_check=False)
        runs.append(traj)
    distances = []
    for a, b in zip(runs[:-1], runs[1:]):
        distances.append(_common_mode_distance(a, b))
    orders = [
        math.log2(d0 / d1) if d1 > 0 else math.inf
        for d0, d1 in zip(distances[:-1], distances[1:])
    ]
    return {
        "n_list": list(n_list),
        "distances": distances,
        "orders": orders,
    }


def _common_mode_distance(a: Trajectory, b: Trajectory) -> float:
    """L^2-in-time distance over the Fourier modes both runs resolve."""
    coarse, fine = (a, b) if a.grid.n <= b.grid.n else (b, a)
    nc = coarse.grid.n
    half = nc // 2
    h = coarse.cadence
    weights = np.full(len(coarse.times), h)
    weights[0] = weights[-1] = h / 2.0
    acc = 0.0
    L2 = coarse.grid.L**2
    from .spectral import _rfft_weights

    mult = _rfft_weights(coarse.grid)
    for i, wt in enumerate(weights):
        cc = coarse.snapshots[i].coeffs
        cf = fine.snapshots[i].coeffs
        sub = np.zeros_like(cc)
        sub[:half, : half + 1] = cf[:half, : half + 1]
        sub[half:, : half + 1] = cf[fine.grid.n - half:, : half + 1]
        diff2 = (np.abs(cc - sub) ** 2) * mult
        # the coarse Nyquist band is not faithfully represented on either side
        diff2[half, :] = 0.0
        diff2[:, half] = 0.0
        acc += wt * L2 * float(diff2.sum())
    return math.sqrt(acc)
