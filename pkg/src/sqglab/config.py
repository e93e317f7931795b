"""Sectioned plain-text run configuration.

The format is INI-style: `[section]` headers, `key = value` pairs, `#` or `;`
comments, blank lines. Parsing either succeeds completely or fails with a
line-precise diagnostic; unknown sections and keys are rejected. Physical
constraints are validated at parse time so a RunConfig in hand is always
runnable. Mollifier widths may be given in grid units with a `dx` suffix
(e.g. `eps = 2dx`).
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Config syntax or constraint violation, with line info when available."""


@dataclass
class RunConfig:
    # [grid]
    n: int = 128
    L: float = 32.0
    # [physics]
    alpha: float = 1.0
    s: float = 0.6
    kappa: float = 1.0
    # [data]
    generator: str = "gaussian_spectrum"
    seed: int = 0
    beta: float = 3.0
    amplitude: float = 1.0
    target_linf: float | None = 1.0
    envelope_sigma: float | None = None
    support_radius: float = 2.0
    data_path: str | None = None
    # [truncation]
    R: float = 6.0
    eps: float | None = None          # None -> 2*dx
    # [time]
    T: float = 1.0
    cfl: float = 0.4
    dt_max: float = 0.02
    snapshot_cadence: float = 0.1
    # [monitors]
    monitors_enabled: bool = True
    monitor_windows: bool = True
    monitor_cordoba: bool = True
    tol_max_principle: float = 1e-3
    tol_lp: float = 1e-2
    tol_balance: float = 5e-3
    tol_cordoba: float = 1e-6
    tol_consistency: float = 0.02
    # [sweep]
    sweep_R_list: list = field(default_factory=list)
    sweep_eps_list: list = field(default_factory=list)
    omega_radius: float = 2.0
    # [output]
    directory: str = "runs"
    formats: str = "csv"

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def eps_value(self) -> float:
        return 2.0 * self.dx if self.eps is None else self.eps

    @property
    def exploratory(self) -> bool:
        return not (0.5 < self.s < 1.0) or self.kappa != 1.0 or self.alpha != 1.0


_SCHEMA: dict[str, dict[str, tuple[str, str]]] = {
    # section -> key -> (RunConfig attribute, type tag)
    "grid": {"n": ("n", "int"), "L": ("L", "float")},
    "physics": {
        "alpha": ("alpha", "float"),
        "s": ("s", "float"),
        "kappa": ("kappa", "float"),
    },
    "data": {
        "generator": ("generator", "str"),
        "seed": ("seed", "int"),
        "beta": ("beta", "float"),
        "amplitude": ("amplitude", "float"),
        "target_linf": ("target_linf", "optfloat"),
        "envelope_sigma": ("envelope_sigma", "optfloat"),
        "support_radius": ("support_radius", "float"),
        "path": ("data_path", "optstr"),
    },
    "truncation": {"R": ("R", "float"), "eps": ("eps", "dxfloat")},
    "time": {
        "T": ("T", "float"),
        "cfl": ("cfl", "float"),
        "dt_max": ("dt_max", "float"),
        "snapshot_cadence": ("snapshot_cadence", "float"),
    },
    "monitors": {
        "enabled": ("monitors_enabled", "bool"),
        "windows": ("monitor_windows", "bool"),
        "cordoba": ("monitor_cordoba", "bool"),
        "tol_max_principle": ("tol_max_principle", "float"),
        "tol_lp": ("tol_lp", "float"),
        "tol_balance": ("tol_balance", "float"),
        "tol_cordoba": ("tol_cordoba", "float"),
        "tol_consistency": ("tol_consistency", "float"),
    },
    "sweep": {
        "R_list": ("sweep_R_list", "floatlist"),
        "eps_list": ("sweep_eps_list", "dxfloatlist"),
        "omega_radius": ("omega_radius", "float"),
    },
    "output": {
        "directory": ("directory", "str"),
        "formats": ("formats", "str"),
    },
}

_DEFERRED_DX = object()


def _convert(raw: str, kind: str, line_no: int):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "optfloat":
            return None if raw.lower() in ("none", "") else float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "str":
            return raw
        if kind == "optstr":
            return None if raw.lower() in ("none", "") else raw
        if kind == "dxfloat":
            if raw.lower() in ("none", ""):
                return None
            if raw.endswith("dx"):
                return ("dx", float(raw[:-2].strip() or "1"))
            return float(raw)
        if kind == "floatlist":
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        if kind == "dxfloatlist":
            out = []
            for tok in raw.split(","):
                tok = tok.strip()
                if not tok:
                    continue
                if tok.endswith("dx"):
                    out.append(("dx", float(tok[:-2].strip() or "1")))
                else:
                    out.append(float(tok))
            return out
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: bad value for type {kind}: {exc}") from None
    raise ConfigError(f"line {line_no}: unknown value type {kind}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError with a line number on any defect."""
    cfg = RunConfig()
    section = None
    seen: set[tuple[str, str]] = set()
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {line_no}: unterminated section header {raw_line!r}")
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {line_no}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw_line!r}")
        if section is None:
            raise ConfigError(f"line {line_no}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {line_no}: unknown key {key!r} in section [{section}]")
        if (section, key) in seen:
            raise ConfigError(f"line {line_no}: duplicate key {key!r} in section [{section}]")
        seen.add((section, key))
        attr, kind = _SCHEMA[section][key]
        setattr(cfg, attr, _convert(value, kind, line_no))
    _resolve_dx(cfg)
    validate_config(cfg)
    return cfg


def _resolve_dx(cfg: RunConfig) -> None:
    dx = cfg.dx
    if isinstance(cfg.eps, tuple):
        cfg.eps = cfg.eps[1] * dx
    cfg.sweep_eps_list = [
        (v[1] * dx if isinstance(v, tuple) else v) for v in cfg.sweep_eps_list
    ]


def validate_config(cfg: RunConfig) -> None:
    if cfg.n < 16 or cfg.n % 2 != 0:
        raise ConfigError(f"grid.n must be even and >= 16, got {cfg.n}")
    if cfg.L <= 0:
        raise ConfigError(f"grid.L must be positive, got {cfg.L}")
    if not (0.0 < cfg.alpha <= 2.0):
        raise ConfigError(
            f"physics.alpha must lie in (0, 2], got {cfg.alpha}"
        )
    if not (0.0 < cfg.s < 1.0):
        raise ConfigError(
            f"physics.s = {cfg.s} outside (0, 1); main runs need the "
            f"oscillation exponent in (1/2, 1)"
        )
    if cfg.kappa < 0:
        raise ConfigError(f"physics.kappa must be >= 0, got {cfg.kappa}")
    if cfg.generator not in ("gaussian_spectrum", "bump_lattice", "file"):
        raise ConfigError(f"unknown data.generator {cfg.generator!r}")
    if cfg.R <= 1.0:
        raise ConfigError(f"truncation.R must satisfy R > 1, got {cfg.R}")
    if 2.0 * cfg.R >= cfg.L / 2.0:
        raise ConfigError(
            f"R must satisfy 2R < L/2 (truncation support inside the torus); "
            f"got R={cfg.R}, L={cfg.L}"
        )
    if cfg.eps is not None and cfg.eps < cfg.dx:
        raise ConfigError("mollifier under-resolved")
    if cfg.T <= 0 or cfg.snapshot_cadence <= 0:
        raise ConfigError("time.T and time.snapshot_cadence must be positive")
    n_snaps = round(cfg.T / cfg.snapshot_cadence)
    if n_snaps < 1 or abs(n_snaps * cfg.snapshot_cadence - cfg.T) > 1e-9 * max(cfg.T, 1.0):
        raise ConfigError(
            f"snapshot_cadence {cfg.snapshot_cadence} must evenly divide T={cfg.T}"
        )
    if cfg.dt_max <= 0:
        raise ConfigError(f"time.dt_max must be positive, got {cfg.dt_max}")
    if not (0 < cfg.cfl <= 1.0):
        raise ConfigError(f"time.cfl must lie in (0, 1], got {cfg.cfl}")
    for R in cfg.sweep_R_list:
        if R <= 1.0 or 2.0 * R >= cfg.L / 2.0:
            raise ConfigError(
                f"sweep radius R={R} must satisfy R > 1 and 2R < L/2 (L={cfg.L})"
            )
    if list(cfg.sweep_R_list) != sorted(cfg.sweep_R_list):
        raise ConfigError("sweep.R_list must be increasing")
    for eps in cfg.sweep_eps_list:
        if eps < cfg.dx:
            raise ConfigError("mollifier under-resolved")
    if cfg.sweep_eps_list and list(cfg.sweep_eps_list) != sorted(cfg.sweep_eps_list, reverse=True):
        raise ConfigError("sweep.eps_list must be decreasing")
    if cfg.sweep_R_list and cfg.omega_radius >= min(cfg.sweep_R_list):
        raise ConfigError(
            f"comparison window radius {cfg.omega_radius} must be below min sweep R"
        )


def dump_config(cfg: RunConfig) -> str:
    """Serialize so that parse_config(dump_config(cfg)) reproduces cfg."""
    def fmt(v):
        if v is None:
            return "none"
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v)
        if isinstance(v, list):
            return ", ".join(repr(float(x)) for x in v)
        return str(v)

    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (attr, _) in keys.items():
            lines.append(f"{key} = {fmt(getattr(cfg, attr))}")
        lines.append("")
    return "\n".join(lines)


def make_recipe(cfg: RunConfig):
    from .initial_data import DataRecipe

    return DataRecipe(
        generator=cfg.generator,
        seed=cfg.seed,
        beta=cfg.beta,
        amplitude=cfg.amplitude,
        s=cfg.s,
        target_linf=cfg.target_linf,
        envelope_sigma=cfg.envelope_sigma,
        support_radius=cfg.support_radius,
        path=cfg.data_path,
    )
