"""Seeded synthetic hourly price/load series with injected price spikes."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import ConfigError
from .ingest import HOURS, SeriesTable


@dataclass(frozen=True)
class SynthSpec:
    """Generator parameters.

    Clean price is a daily and weekly seasonal profile around ``base_price``
    plus Gaussian noise whose std is ``noise_scale * load / load_base``.
    ``floor(spike_rate * n_days * 24)`` hours then receive a spike of random
    sign and magnitude drawn uniformly from ``[spike_min, spike_max]``.
    """

    n_days: int = 365
    start: str = "2021-01-01"
    base_price: float = 40.0
    daily_amp: float = 0.3
    weekly_amp: float = 0.03
    noise_scale: float = 2.0
    spike_rate: float = 0.05
    spike_min: float = 15.0
    spike_max: float = 120.0
    load_base: float = 25000.0
    load_daily_amp: float = 0.25
    load_weekly_amp: float = 0.04
    seed: int = 42

    def __post_init__(self):
        if int(self.n_days) < 1:
            raise ConfigError("n_days must be >= 1")
        if not 0 <= self.spike_rate < 1:
            raise ConfigError("spike_rate must be in [0, 1)")
        if not 0 <= self.spike_min <= self.spike_max:
            raise ConfigError("need 0 <= spike_min <= spike_max")
        if self.noise_scale < 0:
            raise ConfigError("noise_scale must be >= 0")
        if self.load_base <= 0:
            raise ConfigError("load_base must be positive")
        if not 0 <= self.load_daily_amp + self.load_weekly_amp < 1:
            raise ConfigError("load amplitudes must keep load positive")
        try:
            np.datetime64(self.start, "D")
        except ValueError:
            raise ConfigError(f"start must be YYYY-MM-DD, got {self.start!r}")

    @classmethod
    def parse(cls, text: str, seed: int | None = None) -> SynthSpec:
        """``default``, a path to a JSON file, or ``key=value,...`` overrides."""
        text = text.strip()
        if text in ("", "default"):
            spec = cls()
        elif os.path.exists(text):
            with open(text) as fh:
                spec = cls.from_dict(json.load(fh))
        else:
            kv = {}
            for part in text.split(","):
                if "=" not in part:
                    raise ConfigError(f"synth spec must be 'default', a JSON path or key=value pairs; got {text!r}")
                k, v = part.split("=", 1)
                kv[k.strip()] = v.strip()
            spec = cls.from_dict(kv, coerce=True)
        return replace(spec, seed=seed) if seed is not None else spec

    @classmethod
    def from_dict(cls, d: dict, coerce: bool = False) -> SynthSpec:
        types = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(d) - set(types))
        if unknown:
            raise ConfigError(f"unknown synth key(s): {', '.join(unknown)}")
        kwargs = {}
        for k, v in d.items():
            if coerce:
                conv = {"int": int, "float": float}.get(types[k], str)
                try:
                    v = conv(v)
                except ValueError:
                    raise ConfigError(f"bad value for {k}: {v!r}")
            kwargs[k] = v
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SynthResult:
    observed: SeriesTable
    clean: SeriesTable
    spike_locations: np.ndarray
    spike_values: np.ndarray
    noise: np.ndarray
    signal: np.ndarray

    @property
    def noise_rmse(self) -> float:
        """RMSE of the noise term, the error floor for any predictor of the clean price."""
        return math.sqrt(float(np.mean(self.noise ** 2))) if self.noise.size else 0.0


def _daily_shape(hours: np.ndarray) -> np.ndarray:
    # trough before dawn, peak early evening
    return np.sin(2 * np.pi * (hours - 11) / 24)


def _weekly_shape(dow: np.ndarray) -> np.ndarray:
    # dow 1..7 (Mon..Sun): weekdays up, weekend down
    return np.where(dow >= 6, -1.0, 0.4)


def synth_generate(spec: SynthSpec) -> SynthResult:
    rng = np.random.default_rng(spec.seed)
    n = int(spec.n_days) * HOURS
    start = np.datetime64(spec.start, "m")
    ts = start + np.arange(n).astype("timedelta64[h]")
    hours = np.arange(n) % HOURS
    days = ts.astype("datetime64[D]")
    dow = (days.astype(np.int64) + 3) % 7 + 1

    daily = _daily_shape(hours)
    weekly = _weekly_shape(dow)
    load = spec.load_base * (1 + spec.load_daily_amp * daily + spec.load_weekly_amp * weekly)
    signal = spec.base_price * (1 + spec.daily_amp * daily + spec.weekly_amp * weekly)
    noise = rng.standard_normal(n) * (spec.noise_scale * load / spec.load_base)
    clean = signal + noise

    n_spikes = math.floor(spec.spike_rate * n)
    where = np.sort(rng.choice(n, size=n_spikes, replace=False)) if n_spikes else np.empty(0, np.int64)
    mags = rng.uniform(spec.spike_min, spec.spike_max, size=n_spikes)
    signs = rng.choice([-1.0, 1.0], size=n_spikes)
    spikes = mags * signs
    observed = clean.copy()
    observed[where] += spikes
    return SynthResult(
        SeriesTable(ts, observed, load),
        SeriesTable(ts, clean, load),
        where.astype(np.int64),
        spikes,
        noise,
        signal,
    )


def low_rank_plus_spikes(rows: int = 30, cols: int = 24, rank: int = 2, spike_fraction: float = 0.05,
                         magnitude: float = 10.0, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Ground truth ``(L0, S0)``: Gaussian rank-``rank`` L0 and ``floor(fraction*cells)``
    entries of S0 set to ``±magnitude``."""
    rng = np.random.default_rng(seed)
    L0 = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
    S0 = np.zeros((rows, cols))
    n = math.floor(spike_fraction * rows * cols)
    where = rng.choice(rows * cols, size=n, replace=False)
    S0.flat[where] = magnitude * rng.choice([-1.0, 1.0], size=n)
    return L0, S0
