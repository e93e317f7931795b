"""Config parsing with line-precise diagnostics; snapshot and run storage."""

import json

import numpy as np
import pytest

from sqglab.config import ConfigError, dump_config, parse_config
from sqglab.spectral import make_grid
from sqglab.storage import (
    StorageError,
    load_run,
    read_snapshot,
    save_run,
    write_snapshot,
)

from conftest import random_field

MINIMAL = """
[grid]
n = 64
L = 32

[data]
seed = 7
"""


class TestParseConfig:
    def test_minimal_fills_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.n == 64
        assert cfg.alpha == 1.0
        assert cfg.eps is None and cfg.eps_value == 2 * cfg.dx

    def test_round_trip(self):
        cfg = parse_config(MINIMAL)
        again = parse_config(dump_config(cfg))
        assert dump_config(again) == dump_config(cfg)

    def test_unknown_key_with_line_number(self):
        text = "[grid]\nn = 64\nL = 32\nm = 3\n"
        with pytest.raises(ConfigError, match="line 4"):
            parse_config(text)

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config("[grit]\nn = 64\n")

    def test_syntax_error_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("[grid]\nn 64\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("[grid]\nn = 64\nn = 128\nL = 32\n")

    def test_s_range_names_admissible_interval(self):
        text = MINIMAL + "\n[physics]\ns = 1.2\n"
        with pytest.raises(ConfigError, match=r"\(1/2, 1\)"):
            parse_config(text)

    def test_under_resolved_mollifier(self):
        text = MINIMAL + "\n[truncation]\neps = 0.1\n"  # dx = 0.5
        with pytest.raises(ConfigError, match="under-resolved"):
            parse_config(text)

    def test_truncation_must_fit_torus(self):
        text = MINIMAL + "\n[truncation]\nR = 9\n"
        with pytest.raises(ConfigError, match="2R < L/2"):
            parse_config(text)

    def test_dx_suffix(self):
        text = MINIMAL + "\n[truncation]\neps = 4dx\n"
        cfg = parse_config(text)
        assert cfg.eps == pytest.approx(4 * cfg.dx)

    def test_sweep_lists(self):
        text = MINIMAL + "\n[sweep]\nR_list = 4, 6\neps_list = 2dx, 1dx\nomega_radius = 2\n"
        cfg = parse_config(text)
        assert cfg.sweep_R_list == [4.0, 6.0]
        assert cfg.sweep_eps_list == pytest.approx([2 * cfg.dx, cfg.dx])

    def test_cadence_must_divide_horizon(self):
        text = MINIMAL + "\n[time]\nT = 1.0\nsnapshot_cadence = 0.3\n"
        with pytest.raises(ConfigError, match="divide"):
            parse_config(text)

    def test_exploratory_flag(self):
        cfg = parse_config(MINIMAL + "\n[physics]\ns = 0.4\n")
        assert cfg.exploratory
        assert not parse_config(MINIMAL).exploratory


class TestSnapshotIO:
    def test_bitwise_round_trip(self, tmp_path):
        grid = make_grid(64, 8.0)
        f = random_field(grid, seed=60)
        path = tmp_path / "snap.dat"
        write_snapshot(path, f, t=0.25, alpha=1.0, s=0.6)
        header, back = read_snapshot(path)
        assert header["t"] == 0.25
        assert np.array_equal(back.values, f.values)

    def test_truncated_payload_rejected(self, tmp_path):
        grid = make_grid(64, 8.0)
        path = tmp_path / "snap.dat"
        write_snapshot(path, random_field(grid, seed=61))
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(StorageError, match="shape mismatch"):
            read_snapshot(path)

    def test_newer_schema_rejected(self, tmp_path):
        grid = make_grid(64, 8.0)
        path = tmp_path / "snap.dat"
        write_snapshot(path, random_field(grid, seed=62))
        raw = path.read_bytes()
        head, _, payload = raw.partition(b"\n")
        header = json.loads(head)
        header["schema"] = 2
        path.write_bytes(json.dumps(header).encode() + b"\n" + payload)
        with pytest.raises(StorageError, match="schema 2"):
            read_snapshot(path)

    def test_garbage_header_rejected(self, tmp_path):
        path = tmp_path / "snap.dat"
        path.write_bytes(b"\x00\x01\x02\nxxxx")
        with pytest.raises(StorageError):
            read_snapshot(path)


class TestRunRoundTrip:
    def test_save_and_load(self, tmp_path):
        from sqglab.solver import run_simulation
        from sqglab.spectral import single_mode

        grid = make_grid(64, 8.0)
        traj, ledger = run_simulation(single_mode(grid, 1, 0), T=0.2, cadence=0.05,
                                      dt_max=0.02, cordoba_check=False)
        run_dir = tmp_path / "run"
        manifest = save_run(str(run_dir), traj, ledger, config_text="[grid]\nn = 64\n")
        assert (run_dir / "manifest.json").exists()
        assert set(manifest["hashes"]) >= {"ledger.csv"}
        back_traj, back_ledger, back_manifest = load_run(str(run_dir))
        assert back_traj.times == pytest.approx(traj.times)
        assert len(back_ledger.rows) == len(ledger.rows)
        for a, b in zip(traj.snapshots, back_traj.snapshots):
            assert np.abs(a.coeffs - b.coeffs).max() < 1e-14
