"""On-disk formats: snapshots, run directories, and manifests.

A snapshot file is one JSON header line

    {"schema": 1, "n": ..., "L": ..., "t": ..., "alpha": ..., "s": ..., "field": ...}

terminated by a newline, followed by n*n little-endian float64 payload bytes in
row-major order. Every artifact written here can be read back bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .spectral import Field, make_grid

SNAPSHOT_SCHEMA = 1


class StorageError(ValueError):
    """Malformed or mismatched on-disk artifact."""


def write_snapshot(path, field: Field, t: float = 0.0, alpha: float = 1.0,
                   s: float = 0.6, name: str = "theta") -> None:
    header = {
        "schema": SNAPSHOT_SCHEMA,
        "n": field.grid.n,
        "L": field.grid.L,
        "t": t,
        "alpha": alpha,
        "s": s,
        "field": name,
    }
    payload = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload.tobytes())


def read_snapshot(path) -> tuple[dict, Field]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StorageError(f"unreadable snapshot header in {path}: {exc}") from None
    if header.get("schema") != SNAPSHOT_SCHEMA:
        raise StorageError(
            f"snapshot schema {header.get('schema')} unsupported (reader expects "
            f"{SNAPSHOT_SCHEMA})"
        )
    n = int(header["n"])
    expected = n * n * 8
    if len(payload) != expected:
        raise StorageError(
            f"snapshot payload shape mismatch: expected {expected} bytes for "
            f"n={n}, found {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(n, n)
    grid = make_grid(n, float(header["L"]))
    return header, Field(grid, values.copy())


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def save_run(run_dir, traj, ledger, config_text: str | None = None,
             extra: dict | None = None) -> dict:
    """Persist a trajectory: snapshots/, ledger.csv, config echo, manifest."""
    snap_dir = os.path.join(run_dir, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)
    snap_files = []
    for i, t in enumerate(traj.times):
        fname = f"snap_{i:06d}.dat"
        write_snapshot(os.path.join(snap_dir, fname), traj.theta(i),
                       t=t, alpha=traj.alpha, s=traj.s)
        snap_files.append(os.path.join("snapshots", fname))
    ledger_path = os.path.join(run_dir, "ledger.csv")
    ledger.write_csv(ledger_path)
    if config_text is not None:
        with open(os.path.join(run_dir, "config.ini"), "w") as fh:
            fh.write(config_text)
    manifest = {
        "schema": 1,
        "n": traj.grid.n,
        "L": traj.grid.L,
        "alpha": traj.alpha,
        "s": traj.s,
        "kappa": traj.kappa,
        "cadence": traj.cadence,
        "times": traj.times,
        "snapshots": snap_files,
        "ledger": "ledger.csv",
        "hashes": {
            "ledger.csv": sha256_file(ledger_path),
            **{f: sha256_file(os.path.join(run_dir, f)) for f in snap_files},
        },
    }
    if traj.params is not None:
        manifest["R"] = traj.params.R
        manifest["eps"] = traj.params.eps
    if extra:
        manifest.update(extra)
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def load_run(run_dir):
    """Rehydrate a Trajectory and its ledger from a run directory."""
    from .initial_data import TruncationParams
    from .monitors import MonitorLedger
    from .solver import Trajectory
    from .spectral import dealias, transform

    with open(os.path.join(run_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    grid = make_grid(int(manifest["n"]), float(manifest["L"]))
    snapshots = []
    times = []
    for rel in manifest["snapshots"]:
        header, field = read_snapshot(os.path.join(run_dir, rel))
        if field.grid != grid:
            raise StorageError(f"snapshot {rel} grid disagrees with manifest")
        snapshots.append(transform(field))
        times.append(float(header["t"]))
    params = None
    if "R" in manifest:
        params = TruncationParams(R=float(manifest["R"]), eps=float(manifest["eps"]))
    traj = Trajectory(
        grid=grid,
        alpha=float(manifest["alpha"]),
        s=float(manifest["s"]),
        kappa=float(manifest.get("kappa", 1.0)),
        times=times,
        snapshots=snapshots,
        params=params,
    )
    ledger = MonitorLedger.read_csv(os.path.join(run_dir, manifest["ledger"]))
    return traj, ledger, manifest


def update_output_manifest(output_root, run_id: str, kind: str) -> None:
    """Keep an index of every run directory under the output root."""
    path = os.path.join(output_root, "manifest.json")
    index = {"schema": 1, "runs": []}
    if os.path.exists(path):
        with open(path) as fh:
            index = json.load(fh)
    entries = [e for e in index.get("runs", []) if e.get("id") != run_id]
    entries.append({"id": run_id, "kind": kind})
    index["runs"] = sorted(entries, key=lambda e: e["id"])
    with open(path, "w") as fh:
        json.dump(index, fh, indent=2, sort_keys=True)
