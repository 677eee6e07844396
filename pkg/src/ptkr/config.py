"""Experiment configuration: flat key-value files plus CLI overrides.

Precedence is CLI --set overrides > config file > built-in defaults. Config
files hold one `key = value` per line; blank lines and #-comments are
ignored. Sweep axes are declared with `sweep_<param> = v1,v2,...` keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ptkr.core import EnsembleConfig, ParameterError, make_params

KINDS = ("classical", "quantum", "otoc", "spectrum", "sweep")

# type coercions for every recognized scalar key
_INT_KEYS = {"n_traj", "seed", "t_max", "dim", "jobs"}
_FLOAT_KEYS = {
    "K",
    "lambda",
    "hbar",
    "p_clamp",
    "theta_i_guard",
    "sigma",
    "tail_guard",
    "lambda_c_low",
    "lambda_c_high",
    "tol_lambda",
}
_STR_KEYS = {"kind", "base", "out", "format", "initial", "backward_mode"}
_SWEEPABLE = {"K", "lambda", "hbar", "sigma", "dim", "t_max"}

_KIND_DEFAULTS = {
    "classical": {"t_max": 30},
    "quantum": {"t_max": 200, "dim": 4096},
    "otoc": {"t_max": 20, "dim": 16384},
    "spectrum": {"dim": 256},
    "sweep": {},
}


class ConfigError(ParameterError):
    """Bad experiment configuration (maps to exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "classical"
    K: float = 5.0
    lam: float = 1e-10
    hbar: float = 1.0
    p_clamp: float = 1.0e152
    theta_i_guard: float = 700.0
    n_traj: int = 10_000
    seed: int = 0
    t_max: int = 30
    dim: int = 4096
    sigma: float = 10.0
    initial: str = "default"  # uniform | gaussian | default (per kind)
    backward_mode: str = "adjoint"
    tail_guard: float = 1e-10
    lambda_c_low: float | None = None
    lambda_c_high: float | None = None
    tol_lambda: float = 1e-3
    out: str = "out"
    format: str = "csv"
    jobs: int = 1
    base: str | None = None
    sweep_axes: dict = field(default_factory=dict)

    def system_params(self):
        return make_params(
            self.K, self.lam, self.hbar, p_clamp=self.p_clamp, theta_i_guard=self.theta_i_guard
        )

    def ensemble_config(self):
        return EnsembleConfig(n_traj=self.n_traj, seed=self.seed, t_max=self.t_max)


def parse_config_file(path: str) -> dict[str, str]:
    """Read a flat key-value file into a string dict."""
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()
    return raw


def parse_set_overrides(pairs: list[str]) -> dict[str, str]:
    """Parse repeated --set key=value arguments."""
    raw: dict[str, str] = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def _coerce(key: str, value: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {value!r}: {exc}") from exc
    if key in _STR_KEYS:
        return value
    raise ConfigError(f"unknown configuration key {key!r}")


def build_config(raw: dict[str, str]) -> ExperimentConfig:
    """Coerce a merged string dict into a validated ExperimentConfig."""
    sweep_axes: dict[str, list[float]] = {}
    fields: dict = {}
    for key, value in raw.items():
        if key.startswith("sweep_"):
            param = key[len("sweep_") :]
            if param not in _SWEEPABLE:
                raise ConfigError(f"cannot sweep over {param!r} (allowed: {sorted(_SWEEPABLE)})")
            try:
                values = [
                    int(v) if param in _INT_KEYS else float(v)
                    for v in value.split(",")
                    if v.strip()
                ]
            except ValueError as exc:
                raise ConfigError(f"key {key!r}: bad value list {value!r}") from exc
            if not values:
                raise ConfigError(f"sweep axis {key!r} has an empty value list")
            sweep_axes[param] = values
            continue
        target = "lam" if key == "lambda" else key
        fields[target] = _coerce(key, value)

    kind = fields.get("kind", "classical")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    # kind-specific defaults apply only where the user did not set a value;
    # a sweep inherits the defaults of its base kind
    defaults_key = fields.get("base") if kind == "sweep" else kind
    for key, value in _KIND_DEFAULTS.get(defaults_key, {}).items():
        fields.setdefault(key, value)

    cfg = ExperimentConfig(sweep_axes=sweep_axes, **fields)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {cfg.jobs}")
    if cfg.initial not in ("default", "uniform", "gaussian"):
        raise ConfigError(f"initial must be uniform or gaussian, got {cfg.initial!r}")
    if cfg.backward_mode not in ("adjoint", "inverse"):
        raise ConfigError(f"backward_mode must be adjoint or inverse, got {cfg.backward_mode!r}")
    if cfg.kind == "sweep":
        if not cfg.sweep_axes:
            raise ConfigError("sweep kind requires at least one sweep_<param> axis")
        if cfg.base not in KINDS[:-1] or cfg.base is None:
            raise ConfigError(
                f"sweep kind requires base = classical|quantum|otoc|spectrum, got {cfg.base!r}"
            )
    else:
        if cfg.sweep_axes:
            raise ConfigError(f"sweep_<param> keys are only valid for kind=sweep (kind={cfg.kind})")
    try:
        cfg.system_params()
        if cfg.kind in ("classical", "sweep"):
            cfg.ensemble_config()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.kind in ("quantum", "otoc", "spectrum") or cfg.base in ("quantum", "otoc", "spectrum"):
        if cfg.dim < 2 or cfg.dim & (cfg.dim - 1) != 0:
            raise ConfigError(f"dim must be a power of two >= 2, got {cfg.dim}")


def resolve_config(
    config_file: str | None,
    set_overrides: list[str],
    kind: str | None = None,
    **cli_fields,
) -> ExperimentConfig:
    """Merge defaults, config file, and CLI settings into one config."""
    raw: dict[str, str] = {}
    if config_file:
        raw.update(parse_config_file(config_file))
    if kind is not None:
        raw["kind"] = kind
    for key, value in cli_fields.items():
        if value is not None:
            raw[key] = str(value)
    raw.update(parse_set_overrides(set_overrides))
    return build_config(raw)


def config_for_point(cfg: ExperimentConfig, point: dict) -> ExperimentConfig:
    """Sweep grid point -> concrete single-run config."""
    fields = {("lam" if k == "lambda" else k): v for k, v in point.items()}
    return replace(cfg, kind=cfg.base, base=None, sweep_axes={}, **fields)
