import os
from typing import Any, Callable, Mapping, Optional, TypedDict

from dotenv import load_dotenv, dotenv_values
from strenum import StrEnum

from .utils import ConfigError, check_increasing, parse_db_grid

DEFAULT_SEED = 1729


class Subcommand(StrEnum):
    CAPACITY_CDF = "capacity-cdf"
    AVG_RATE = "avg-rate"
    CHECK_LDC = "check-ldc"
    PWEP = "pwep"
    LINKSIM = "linksim"

    @property
    def section(self) -> str:
        return self.value.upper().replace("-", "_") + "_"


class Defaults(TypedDict):
    seed: int
    capacity_samples: int
    audit_samples: int
    audit_snr_db: tuple
    criterion1_tol: float
    theorem1_tol: float
    union_budget: float
    orthant_samples: int
    packet_symbols: int
    interleaver_rows: int
    interleaver_cols: int
    min_packet_errors: int
    high_snr_window_db: float
    workers: int


class EnvConfig:
    def __init__(self):
        load_dotenv()

        self.SEED = self.__class__.env_or_default("HARQLAB_SEED", DEFAULT_SEED, int)
        self.WORKERS = self.__class__.env_or_default("HARQLAB_WORKERS", 1, int)
        self.MC_SAMPLES = self.__class__.env_or_default(
            "HARQLAB_MC_SAMPLES", 100_000, int
        )
        self.LOG_LEVEL = self.__class__.env_or_default("HARQLAB_LOG_LEVEL", "INFO", str)
        self.LOGS_DIR = self.__class__.env_or_default("HARQLAB_LOGS_DIR", "", str)

    @staticmethod
    def env_or_default(key: str, default, cast: Callable = str):
        env = os.environ.get(key)
        if env == "" or env is None:
            return default
        try:
            return cast(env)
        except ValueError:
            raise ConfigError(f"{key}={env!r} is not a valid {cast.__name__}")


def make_defaults(env: EnvConfig) -> Defaults:
    return {
        "seed": env.SEED,
        "capacity_samples": env.MC_SAMPLES,
        "audit_samples": 200,
        "audit_snr_db": (0.0, 10.0, 20.0),
        "criterion1_tol": 1e-6,
        "theorem1_tol": 1e-9,
        "union_budget": 1e8,
        "orthant_samples": 100_000,
        "packet_symbols": 100,
        "interleaver_rows": 10,
        "interleaver_cols": 20,
        "min_packet_errors": 100,
        "high_snr_window_db": 6.0,
        "workers": env.WORKERS,
    }


class Config:
    _instance = None

    _env_config: EnvConfig = None
    _defaults: Defaults = None

    def __new__(cls, *args, **kwargs):
        if not cls._instance:
            cls._instance = super(Config, cls).__new__(cls, *args, **kwargs)

            env = EnvConfig()
            cls._env_config = env
            cls._defaults = make_defaults(env)

        return cls._instance

    @property
    def env(self) -> EnvConfig:
        return self._env_config

    @property
    def defaults(self) -> Defaults:
        return self._defaults


class RunConfig(TypedDict, total=False):
    subcommand: str
    seed: int
    snr_db: list
    lt: int
    lr: int
    n_max: int
    samples: int
    trials: int
    code: Optional[str]
    code_file: Optional[str]
    out: Optional[str]
    protocols: list
    h_samples: int
    mc_per_h: int
    modes: list
    method: str
    workers: int
    packet_symbols: int
    min_errors: int
    rate_points: int
    search_partitions: bool
    budget: float


# cast applied to string values coming from a config file
_CASTS: dict = {
    "seed": int,
    "lt": int,
    "lr": int,
    "n_max": int,
    "samples": int,
    "trials": int,
    "h_samples": int,
    "mc_per_h": int,
    "workers": int,
    "packet_symbols": int,
    "min_errors": int,
    "rate_points": int,
    "budget": float,
    "snr_db": parse_db_grid,
    "protocols": lambda v: [p.strip() for p in v.split(",") if p.strip()],
    "modes": lambda v: [m.strip() for m in v.split(",") if m.strip()],
    "search_partitions": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}

_POSITIVE = ("lt", "lr", "n_max", "samples", "trials", "h_samples", "mc_per_h",
             "workers", "packet_symbols", "min_errors", "rate_points", "budget")


def read_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"config file {path} not found")
    return {k: v for k, v in dotenv_values(path).items() if v is not None}


def _cast(key: str, value: Any):
    if not isinstance(value, str):
        return value
    cast = _CASTS.get(key, str)
    try:
        return cast(value)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {value!r} ({e})")


def make_run_config(
    subcommand: Subcommand,
    file_values: Mapping[str, str],
    flags: Mapping[str, Any],
    fallbacks: Mapping[str, Any],
) -> RunConfig:
    """Resolves flag > section key > common key > fallback for every known key."""
    section = subcommand.section
    keys = set(fallbacks) | set(flags)
    config: RunConfig = {"subcommand": str(subcommand)}

    for key in sorted(keys):
        file_key = key.upper()
        value = flags.get(key)
        if value is None and section + file_key in file_values:
            value = file_values[section + file_key]
        if value is None and file_key in file_values:
            value = file_values[file_key]
        if value is None:
            value = fallbacks.get(key)
        config[key] = _cast(key, value)

    for key in _POSITIVE:
        if config.get(key) is not None and config[key] <= 0:
            raise ConfigError(f"{key} must be positive, got {config[key]}")

    if "snr_db" in config:
        check_increasing(config["snr_db"])

    return config
