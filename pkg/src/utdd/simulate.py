"""Synthetic seasonal series: trend + trigonometric seasonal recursions + noise.

Each seasonal component of length ``s`` is a sum of ``p = floor(s/2)``
harmonic pairs advanced by the noisy rotation

    g[j, t+1]  =  g[j, t] cos(l_j) + h[j, t] sin(l_j) + w[j, t]
    h[j, t+1]  = -g[j, t] sin(l_j) + h[j, t] cos(l_j) + w*[j, t]

with ``l_j = 2*pi*j/s`` and ``w, w* ~ N(0, sigma_omega^2)``; the component's
value at step ``t`` is ``sum_j g[j, t]``.  For even ``s`` the top harmonic
``j = p`` has ``l_p = pi`` and is advanced by the same literal recursion (no
half-frequency special case).

Reproducibility contract: all randomness comes from one numpy PCG64 generator
(``numpy.random.default_rng(seed)``) producing standard normals via numpy's
ziggurat, consumed in a fixed slot order -- first any missing initial harmonic
states (per component: gamma then gamma-star), then per step: for each
component in declared order the interleaved pairs ``w_1, w*_1, ..., w_p,
w*_p``, then the observation noise draw.  Draws are made (and scaled) even
when their sigma is zero, so changing a sigma never shifts another slot's
draw.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date, datetime
from typing import Mapping, Optional

import numpy as np

from .errors import InvalidArgumentError
from .series import FeatureSpec, TimeSeries, extract_feature, parse_utc

__all__ = [
    "SeasonalComponentConfig",
    "DriftInjection",
    "TrendConfig",
    "SimConfig",
    "simulate_component",
    "simulate_series",
    "sim_config_from_dict",
    "sim_config_to_dict",
    "load_sim_config",
]


@dataclass(frozen=True)
class SeasonalComponentConfig:
    """One seasonal component: length ``s`` in steps, harmonic noise, initial state.

    ``init_gamma`` / ``init_gamma_star`` must have length ``p = s // 2`` when
    given; missing ones are drawn N(0, 1) from the simulation generator.
    """

    s: int
    sigma_omega: float = 0.0
    init_gamma: Optional[tuple] = None
    init_gamma_star: Optional[tuple] = None

    def __post_init__(self) -> None:
        if self.s < 2:
            raise InvalidArgumentError("seasonal length s must be at least 2")
        if not self.sigma_omega >= 0:
            raise InvalidArgumentError("sigma_omega must be non-negative")
        for name in ("init_gamma", "init_gamma_star"):
            init = getattr(self, name)
            if init is None:
                continue
            init = tuple(float(v) for v in init)
            if len(init) != self.p:
                raise InvalidArgumentError(f"{name} must have length p = {self.p}")
            object.__setattr__(self, name, init)

    @property
    def p(self) -> int:
        return self.s // 2


@dataclass(frozen=True)
class TrendConfig:
    """Deterministic trend ``level + slope * t`` (t in steps)."""

    level: float = 0.0
    slope: float = 0.0


@dataclass(frozen=True)
class DriftInjection:
    """Structural change applied from ``at`` onward (timestamps >= at).

    ``level_shift`` adds to the mean, ``noise_scale`` multiplies the
    observation noise, ``seasonal_scale`` multiplies the (weekend-scaled)
    seasonal sum.  Scaling reuses the same seeded draws, so a drifted and a
    clean run of one seed differ only by these factors.
    """

    at: datetime
    level_shift: float = 0.0
    noise_scale: float = 1.0
    seasonal_scale: float = 1.0


@dataclass(frozen=True)
class SimConfig:
    """Full generator configuration; see the module docstring for the RNG contract."""

    start: datetime
    step: float
    n: int
    trend: TrendConfig = TrendConfig()
    components: tuple = ()
    sigma_eps: float = 0.0
    weekend_scale: float = 1.0
    holiday_offset: float = 0.0
    holidays: frozenset = frozenset()
    seed: int = 0
    drift: Optional[DriftInjection] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidArgumentError("n must be at least 1")
        if not self.sigma_eps >= 0:
            raise InvalidArgumentError("sigma_eps must be non-negative")
        object.__setattr__(self, "components", tuple(self.components))
        holidays = frozenset(
            d.date() if isinstance(d, datetime) else d for d in self.holidays
        )
        object.__setattr__(self, "holidays", holidays)


def simulate_component(
    cfg: SeasonalComponentConfig, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Generate ``n`` values of one seasonal component using ``rng``.

    Consumes draws in the documented order: any missing initial state first,
    then per step the interleaved harmonic noise pairs (drawn even when
    ``sigma_omega`` is zero).
    """
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    p = cfg.p
    j = np.arange(1, p + 1)
    lam = 2.0 * np.pi * j / cfg.s
    cos_l = np.cos(lam)
    sin_l = np.sin(lam)
    g = np.array(cfg.init_gamma if cfg.init_gamma is not None else rng.standard_normal(p))
    h = np.array(
        cfg.init_gamma_star if cfg.init_gamma_star is not None else rng.standard_normal(p)
    )
    out = np.empty(n, dtype=np.float64)
    for t in range(n):
        out[t] = g.sum()
        w = rng.standard_normal(2 * p) * cfg.sigma_omega
        g, h = (
            g * cos_l + h * sin_l + w[0::2],
            -g * sin_l + h * cos_l + w[1::2],
        )
    return out


def simulate_series(cfg: SimConfig) -> TimeSeries:
    """Generate the configured series: trend + scaled seasonal sum + calendar effects + noise.

    ``x_t = trend(t) + weekend_scale(t) * sum_i gamma_i(t) + holiday_offset(t)
    + eps_t`` with the optional drift injection applied from its cut-over
    timestamp onward.  Bit-identical for identical configs and seeds.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    comps = cfg.components

    inits = []
    for comp in comps:
        g = comp.init_gamma if comp.init_gamma is not None else rng.standard_normal(comp.p)
        h = (
            comp.init_gamma_star
            if comp.init_gamma_star is not None
            else rng.standard_normal(comp.p)
        )
        inits.append((np.array(g, dtype=np.float64), np.array(h, dtype=np.float64)))

    # one block per step: [comp 0: w1, w*1, ..., wp, w*p] ... [comp k] [eps]
    per_step = sum(2 * comp.p for comp in comps) + 1
    noise = rng.standard_normal(n * per_step).reshape(n, per_step)

    seasonal = np.zeros(n, dtype=np.float64)
    offset = 0
    for comp, (g, h) in zip(comps, inits):
        p = comp.p
        lam = 2.0 * np.pi * np.arange(1, p + 1) / comp.s
        cos_l = np.cos(lam)
        sin_l = np.sin(lam)
        block = noise[:, offset : offset + 2 * p] * comp.sigma_omega
        offset += 2 * p
        for t in range(n):
            seasonal[t] += g.sum()
            w = block[t]
            g, h = (
                g * cos_l + h * sin_l + w[0::2],
                -g * sin_l + h * cos_l + w[1::2],
            )
    eps = noise[:, -1] * cfg.sigma_eps

    grid = TimeSeries(cfg.start, cfg.step, np.zeros(n))
    weekend = extract_feature(grid, FeatureSpec("is_weekend")).astype(np.float64)
    scale = np.where(weekend > 0, cfg.weekend_scale, 1.0)
    if cfg.holidays:
        holiday = extract_feature(
            grid, FeatureSpec("is_holiday", holiday_dates=cfg.holidays)
        ).astype(np.float64)
    else:
        holiday = np.zeros(n)

    t_idx = np.arange(n, dtype=np.float64)
    level_shift = np.zeros(n)
    seasonal_scale = np.ones(n)
    noise_scale = np.ones(n)
    if cfg.drift is not None:
        cut = np.searchsorted(grid.epoch_us(), _drift_cut_us(cfg.drift.at), side="left")
        level_shift[cut:] = cfg.drift.level_shift
        seasonal_scale[cut:] = cfg.drift.seasonal_scale
        noise_scale[cut:] = cfg.drift.noise_scale

    values = (
        cfg.trend.level
        + cfg.trend.slope * t_idx
        + seasonal_scale * scale * seasonal
        + cfg.holiday_offset * holiday
        + level_shift
        + noise_scale * eps
    )
    return TimeSeries(cfg.start, cfg.step, values)


def _drift_cut_us(at: datetime) -> int:
    from .series import _coerce_utc

    return round(_coerce_utc(at).timestamp() * 1_000_000)


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "start",
    "step_seconds",
    "n",
    "trend",
    "components",
    "sigma_eps",
    "weekend_scale",
    "holiday_offset",
    "holidays",
    "seed",
    "drift",
}


def _reject_unknown(doc: Mapping, allowed: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise InvalidArgumentError(f"unknown {where} key(s): {', '.join(sorted(unknown))}")


def sim_config_from_dict(doc: Mapping) -> SimConfig:
    """Build a :class:`SimConfig` from a parsed JSON document."""
    _reject_unknown(doc, _TOP_KEYS, "config")
    try:
        start = parse_utc(doc["start"])
    except KeyError:
        raise InvalidArgumentError("config requires 'start'") from None
    except ValueError as exc:
        raise InvalidArgumentError(f"bad 'start': {exc}") from None
    for key in ("step_seconds", "n"):
        if key not in doc:
            raise InvalidArgumentError(f"config requires {key!r}")

    trend_doc = doc.get("trend", {})
    _reject_unknown(trend_doc, {"level", "slope"}, "trend")
    trend = TrendConfig(
        level=float(trend_doc.get("level", 0.0)), slope=float(trend_doc.get("slope", 0.0))
    )

    components = []
    for i, comp in enumerate(doc.get("components", [])):
        _reject_unknown(
            comp, {"s", "sigma_omega", "init_gamma", "init_gamma_star"}, f"components[{i}]"
        )
        if "s" not in comp:
            raise InvalidArgumentError(f"components[{i}] requires 's'")
        components.append(
            SeasonalComponentConfig(
                s=int(comp["s"]),
                sigma_omega=float(comp.get("sigma_omega", 0.0)),
                init_gamma=tuple(comp["init_gamma"]) if "init_gamma" in comp else None,
                init_gamma_star=(
                    tuple(comp["init_gamma_star"]) if "init_gamma_star" in comp else None
                ),
            )
        )

    drift_doc = doc.get("drift")
    drift = None
    if drift_doc is not None:
        _reject_unknown(
            drift_doc, {"at", "level_shift", "noise_scale", "seasonal_scale"}, "drift"
        )
        if "at" not in drift_doc:
            raise InvalidArgumentError("drift requires 'at'")
        drift = DriftInjection(
            at=parse_utc(drift_doc["at"]),
            level_shift=float(drift_doc.get("level_shift", 0.0)),
            noise_scale=float(drift_doc.get("noise_scale", 1.0)),
            seasonal_scale=float(drift_doc.get("seasonal_scale", 1.0)),
        )

    try:
        holidays = frozenset(date.fromisoformat(d) for d in doc.get("holidays", []))
    except ValueError as exc:
        raise InvalidArgumentError(f"bad holiday date: {exc}") from None

    return SimConfig(
        start=start,
        step=float(doc["step_seconds"]),
        n=int(doc["n"]),
        trend=trend,
        components=tuple(components),
        sigma_eps=float(doc.get("sigma_eps", 0.0)),
        weekend_scale=float(doc.get("weekend_scale", 1.0)),
        holiday_offset=float(doc.get("holiday_offset", 0.0)),
        holidays=holidays,
        seed=int(doc.get("seed", 0)),
        drift=drift,
    )


def sim_config_to_dict(cfg: SimConfig) -> dict:
    from .series import format_utc

    doc: dict = {
        "start": format_utc(cfg.start),
        "step_seconds": cfg.step,
        "n": cfg.n,
        "trend": {"level": cfg.trend.level, "slope": cfg.trend.slope},
        "components": [
            {
                "s": comp.s,
                "sigma_omega": comp.sigma_omega,
                **({"init_gamma": list(comp.init_gamma)} if comp.init_gamma else {}),
                **(
                    {"init_gamma_star": list(comp.init_gamma_star)}
                    if comp.init_gamma_star
                    else {}
                ),
            }
            for comp in cfg.components
        ],
        "sigma_eps": cfg.sigma_eps,
        "weekend_scale": cfg.weekend_scale,
        "holiday_offset": cfg.holiday_offset,
        "holidays": [d.isoformat() for d in sorted(cfg.holidays)],
        "seed": cfg.seed,
    }
    if cfg.drift is not None:
        doc["drift"] = {
            "at": format_utc(cfg.drift.at),
            "level_shift": cfg.drift.level_shift,
            "noise_scale": cfg.drift.noise_scale,
            "seasonal_scale": cfg.drift.seasonal_scale,
        }
    return doc


def load_sim_config(path) -> SimConfig:
    """Load and validate a simulation config from a JSON file."""
    with open(path, "r") as fh:
        doc = json.load(fh)
    return sim_config_from_dict(doc)
