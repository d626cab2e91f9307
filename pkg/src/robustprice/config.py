"""Pipeline configuration: JSON file plus command-line overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

from .errors import ConfigError

LAMBDA_MODES = ("paper", "maxdim")


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    method: str = "chronological"

    def __post_init__(self):
        if self.method != "chronological":
            raise ConfigError(f"unsupported split method {self.method!r}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


@dataclass(frozen=True)
class RPCAConfig:
    lambda_mode: str | float = "maxdim"
    tolerance: float = 1e-7
    max_iterations: int = 500
    mu_growth: float = 1.1
    # relative to max|M|; the 1e-6 library default flags nearly every cell of noisy data
    delta_factor: float = 0.1
    layout: str = "day_hour"

    def __post_init__(self):
        if isinstance(self.lambda_mode, str) and self.lambda_mode not in LAMBDA_MODES:
            try:
                object.__setattr__(self, "lambda_mode", float(self.lambda_mode))
            except ValueError:
                raise ConfigError(f"lambda_mode must be paper, maxdim or a number; got {self.lambda_mode!r}")
        if not isinstance(self.lambda_mode, str) and not self.lambda_mode > 0:
            raise ConfigError("explicit lambda must be positive")
        if not self.tolerance > 0:
            raise ConfigError("rpca tolerance must be positive")
        if int(self.max_iterations) < 1:
            raise ConfigError("rpca max_iterations must be >= 1")
        if not self.mu_growth > 1:
            raise ConfigError("rpca mu_growth must exceed 1")
        if not self.delta_factor >= 0:
            raise ConfigError("rpca delta_factor must be >= 0")
        if self.layout not in ("day_hour", "doy"):
            raise ConfigError(f"rpca layout must be day_hour or doy, got {self.layout!r}")


@dataclass(frozen=True)
class PCAConfig:
    enabled: bool = True
    k: int = 5

    def __post_init__(self):
        if not 1 <= int(self.k) <= 7:
            raise ConfigError(f"pca k must be in 1..7, got {self.k}")


@dataclass(frozen=True)
class SchemaConfig:
    timestamp: str = "timestamp"
    price: str = "price"
    load: str | None = "load"
    delimiter: str = ","


@dataclass(frozen=True)
class PipelineConfig:
    input: str | None = None
    synth: str | None = None
    schema: SchemaConfig = field(default_factory=SchemaConfig)
    iqr_k: float = 1.5
    iqr_per_hour: bool = False
    rpca: RPCAConfig = field(default_factory=RPCAConfig)
    pca: PCAConfig = field(default_factory=PCAConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    out: str = "out"
    seed: int = 42

    def __post_init__(self):
        if self.input is not None and self.synth is not None:
            raise ConfigError("give either input or synth, not both")
        if not self.iqr_k >= 0:
            raise ConfigError("iqr_k must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> PipelineConfig:
        return _build(cls, d, "")

    @classmethod
    def from_json(cls, text: str) -> PipelineConfig:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)


_NESTED = {"schema": SchemaConfig, "rpca": RPCAConfig, "pca": PCAConfig, "split": SplitConfig}


def _build(cls, d: dict, prefix: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(prefix + u for u in unknown)}")
    kwargs = {}
    for k, v in d.items():
        sub = _NESTED.get(k) if cls is PipelineConfig else None
        if sub is not None:
            if not isinstance(v, dict):
                raise ConfigError(f"{prefix}{k} must be an object")
            v = _build(sub, v, f"{prefix}{k}.")
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def with_overrides(cfg: PipelineConfig, **flat) -> PipelineConfig:
    """Apply non-None command-line overrides (flags win over file values)."""
    top = {}
    nested: dict[str, dict] = {}
    mapping = {
        "lambda_mode": ("rpca", "lambda_mode"),
        "pca_k": ("pca", "k"),
        "train_frac": ("split", "train_fraction"),
    }
    for key, value in flat.items():
        if value is None:
            continue
        if key in mapping:
            group, name = mapping[key]
            nested.setdefault(group, {})[name] = value
        else:
            top[key] = value
    for group, vals in nested.items():
        top[group] = replace(getattr(cfg, group), **vals)
    if "input" in top:
        top.setdefault("synth", None)
    elif "synth" in top:
        top.setdefault("input", None)
    return replace(cfg, **top)
