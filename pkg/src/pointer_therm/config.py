"""Run configuration: flat key=value files, flag overrides, validation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .experiments import CASE_COUPLINGS, initial_state_bloch

NAMED_COUPLINGS = {"sx": CASE_COUPLINGS["I"], "sxsz": CASE_COUPLINGS["II"]}

VALID_KEYS = (
    "omega0", "temperature", "lambda", "gamma_drude",
    "coupling", "coupling.ax", "coupling.ay", "coupling.az",
    "initial_state", "depth", "dt", "t_max", "steady_tol", "output",
)


@dataclass
class RunConfig:
    omega0: float = 1.0
    temperature: float = 1.5
    lam: float = 1.0
    gamma_drude: float = 1.0
    coupling: tuple = (1.0, 0.0, 0.0)
    initial_state: str = "psi1"
    depth: int = 60
    dt: float | None = None            # None: stability-bound default
    t_max: float = 500.0
    steady_tol: float = 1e-6
    output: str = "trajectory.csv"
    explicit: set = field(default_factory=set)   # keys set by file or flags

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    def initial_bloch(self):
        return initial_state_bloch(self.initial_state, self.beta, self.omega0)

    def echo(self) -> str:
        """Fully-resolved configuration, one key=value per line."""
        ax, ay, az = self.coupling
        items = {
            "omega0": self.omega0, "temperature": self.temperature,
            "lambda": self.lam, "gamma_drude": self.gamma_drude,
            "coupling.ax": ax, "coupling.ay": ay, "coupling.az": az,
            "initial_state": self.initial_state, "depth": self.depth,
            "dt": "auto" if self.dt is None else self.dt,
            "t_max": self.t_max, "steady_tol": self.steady_tol,
            "output": self.output,
        }
        return "\n".join(f"{k}={v}" for k, v in sorted(items.items()))


def _positive(key: str, value: float) -> float:
    if value <= 0:
        raise ConfigError(f"{key} must be strictly positive, got {value}")
    return value


def _parse_float(key: str, raw) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {raw!r}") from None


def read_config_file(path: str) -> dict:
    """Flat key=value text with '#' comments and dotted section keys."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def parse_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge a config file with flag overrides (flags win); validate everything."""
    values: dict = {}
    if path is not None:
        values.update(read_config_file(path))
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val

    unknown = [k for k in values if k not in VALID_KEYS]
    if unknown:
        raise ConfigError(
            f"unknown config key(s) {sorted(unknown)}; valid keys: {list(VALID_KEYS)}")

    cfg = RunConfig()
    cfg.explicit = set(values)

    if "omega0" in values:
        cfg.omega0 = _positive("omega0", _parse_float("omega0", values["omega0"]))
    if "temperature" in values:
        cfg.temperature = _positive("temperature",
                                    _parse_float("temperature", values["temperature"]))
    if "lambda" in values:
        cfg.lam = _parse_float("lambda", values["lambda"])
        if cfg.lam < 0:
            raise ConfigError(f"lambda must be non-negative, got {cfg.lam}")
    if "gamma_drude" in values:
        cfg.gamma_drude = _positive("gamma_drude",
                                    _parse_float("gamma_drude", values["gamma_drude"]))

    coupling = list(cfg.coupling)
    if "coupling" in values:
        name = str(values["coupling"])
        if name not in NAMED_COUPLINGS:
            raise ConfigError(f"coupling must be one of {sorted(NAMED_COUPLINGS)} "
                              f"or set via coupling.ax/ay/az, got {name!r}")
        coupling = list(NAMED_COUPLINGS[name])
    for i, comp in enumerate(("coupling.ax", "coupling.ay", "coupling.az")):
        if comp in values:
            coupling[i] = _parse_float(comp, values[comp])
    if coupling == [0.0, 0.0, 0.0]:
        raise ConfigError("coupling must be non-zero (pointer basis undefined)")
    cfg.coupling = tuple(coupling)

    if "initial_state" in values:
        cfg.initial_state = str(values["initial_state"])
    if "depth" in values:
        try:
            cfg.depth = int(values["depth"])
        except (TypeError, ValueError):
            raise ConfigError(f"depth must be an integer, got {values['depth']!r}") from None
        if cfg.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {cfg.depth}")
    if "dt" in values:
        cfg.dt = _positive("dt", _parse_float("dt", values["dt"]))
    if "t_max" in values:
        cfg.t_max = _positive("t_max", _parse_float("t_max", values["t_max"]))
    if "steady_tol" in values:
        cfg.steady_tol = _positive("steady_tol",
                                   _parse_float("steady_tol", values["steady_tol"]))
    if "output" in values:
        cfg.output = str(values["output"])

    try:
        cfg.initial_bloch()
    except Exception as exc:
        raise ConfigError(f"initial_state: {exc}") from exc
    return cfg


def config_fields() -> list:
    return [f.name for f in fields(RunConfig)]
