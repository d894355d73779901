"""Scenario geometry, receive beams and the spatial-lobe model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

# rounded value: 60 GHz -> 5 mm and 30 m/s -> 6000 Hz exactly
SPEED_OF_LIGHT = 3.0e8


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class Scenario:
    """Receiver motion and geometry. Angles in radians, relative to travel direction.

    ``scatter_radius`` or ``distance`` may be ``math.inf`` to switch the
    corresponding pointing error off.
    """

    speed: float = 30.0
    carrier: float = 60e9
    distance: float = 50.0
    scatter_radius: float = 0.5
    pointing: float = 0.0
    los_angle: float | None = None
    rician_k: float = 0.0
    wavelength: float = field(init=False)
    doppler: float = field(init=False)
    d_lambda: float = field(init=False)
    dr_lambda: float = field(init=False)
    # resolved LOS direction; the beam is taken to point along it when los_angle is None
    alpha_los: float = field(init=False)

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if self.carrier <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.distance <= 0 or self.scatter_radius <= 0:
            raise ValueError("distances must be positive")
        if self.rician_k < 0:
            raise ValueError("Rician K must be non-negative")
        object.__setattr__(self, "pointing", wrap_angle(self.pointing))
        los = self.pointing if self.los_angle is None else wrap_angle(self.los_angle)
        object.__setattr__(self, "alpha_los", los)
        lam = SPEED_OF_LIGHT / self.carrier
        object.__setattr__(self, "wavelength", lam)
        object.__setattr__(self, "doppler", self.speed / lam)
        object.__setattr__(self, "d_lambda", self.distance / lam)
        object.__setattr__(self, "dr_lambda", self.scatter_radius / lam)

    @classmethod
    def normalized(
        cls,
        doppler: float,
        dr_lambda: float = math.inf,
        d_lambda: float = math.inf,
        pointing: float = 0.0,
        los_angle: float | None = None,
        rician_k: float = 0.0,
        carrier: float = 60e9,
    ) -> "Scenario":
        """Build from the wavelength-normalized quantities the formulas use."""
        lam = SPEED_OF_LIGHT / carrier
        return cls(
            speed=doppler * lam,
            carrier=carrier,
            distance=d_lambda * lam,
            scatter_radius=dr_lambda * lam,
            pointing=pointing,
            los_angle=los_angle,
            rician_k=rician_k,
        )

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class Beam:
    """Receive beam; von Mises concentration k_r = 1 / theta^2."""

    beamwidth: float

    def __post_init__(self):
        if not 0 < self.beamwidth < math.pi:
            raise ValueError("beamwidth must lie in (0, pi) radians")

    @property
    def concentration(self) -> float:
        return 1.0 / self.beamwidth**2

    @classmethod
    def from_degrees(cls, deg: float) -> "Beam":
        return cls(math.radians(deg))

    @classmethod
    def from_concentration(cls, kr: float) -> "Beam":
        if kr <= 0:
            raise ValueError("concentration must be positive")
        return cls(1.0 / math.sqrt(kr))


@dataclass(frozen=True)
class SpatialLobeModel:
    """Gaussian lobe width beta ~ N(mean, std^2), truncated below at ``min_width``."""

    mean: float = math.radians(34.8)
    std: float = math.radians(25.7)
    min_width: float = math.radians(1.0)

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("std must be non-negative")
        if self.min_width <= 0:
            raise ValueError("min_width must be positive")
        if self.std == 0 and self.mean < self.min_width:
            raise ValueError("degenerate lobe width below the truncation floor")

    def truncated_mean(self) -> float:
        if self.std == 0:
            return self.mean
        a = (self.min_width - self.mean) / self.std
        return float(stats.truncnorm.mean(a, np.inf, loc=self.mean, scale=self.std))

    def truncated_std(self) -> float:
        if self.std == 0:
            return 0.0
        a = (self.min_width - self.mean) / self.std
        return float(stats.truncnorm.std(a, np.inf, loc=self.mean, scale=self.std))


def pointing_error_nlos(sc: Scenario, tau):
    """Beam-centre rotation after ``tau`` seconds for the one-ring scatterer geometry."""
    return sc.doppler * np.asarray(tau, dtype=float) * math.sin(sc.pointing) / sc.dr_lambda


def pointing_error_los(sc: Scenario, tau):
    return sc.doppler * np.asarray(tau, dtype=float) * math.sin(sc.alpha_los) / sc.d_lambda


def sample_lobe_width(model: SpatialLobeModel, rng: np.random.Generator, size=None):
    """Draw lobe widths by rejection: Gaussian draws below the floor are redrawn."""
    if model.std == 0:
        return model.mean if size is None else np.full(size, model.mean)
    n = 1 if size is None else int(np.prod(size))
    out = np.empty(n)
    filled = 0
    while filled < n:
        draw = rng.normal(model.mean, model.std, size=max(2 * (n - filled), 16))
        draw = draw[draw >= model.min_width][: n - filled]
        out[filled : filled + draw.size] = draw
        filled += draw.size
    if size is None:
        return float(out[0])
    return out.reshape(size)


def _nonneg(x):
    return x >= 0


def _pos(x):
    return x > 0


def _any(x):
    return math.isfinite(x)


# key -> (parser, validity check)
CONFIG_KEYS = {
    "speed_mps": (float, _nonneg),
    "carrier_ghz": (float, _pos),
    "distance_m": (float, _pos),
    "scatter_radius_m": (float, _pos),
    "pointing_deg": (float, _any),
    "los_deg": (float, _any),
    "rician_k": (float, _nonneg),
    "lobe_mean_deg": (float, _any),
    "lobe_std_deg": (float, _nonneg),
    "lobe_min_deg": (float, _pos),
}


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_config(text: str, extra_keys: dict | None = None) -> dict:
    """Parse ``key = value`` lines. ``#`` starts a comment; blank lines are ignored."""
    known = dict(CONFIG_KEYS)
    if extra_keys:
        known.update(extra_keys)
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        parse, ok = known[key]
        try:
            val = parse(value)
        except ValueError:
            raise ConfigError(key, f"cannot parse {value!r}") from None
        if not ok(val):
            raise ConfigError(key, f"value {value!r} out of range")
        out[key] = val
    return out


def scenario_from_config(cfg: dict, base: Scenario | None = None) -> Scenario:
    base = base or Scenario()
    fields = {}
    if "speed_mps" in cfg:
        fields["speed"] = cfg["speed_mps"]
    if "carrier_ghz" in cfg:
        fields["carrier"] = cfg["carrier_ghz"] * 1e9
    if "distance_m" in cfg:
        fields["distance"] = cfg["distance_m"]
    if "scatter_radius_m" in cfg:
        fields["scatter_radius"] = cfg["scatter_radius_m"]
    if "pointing_deg" in cfg:
        fields["pointing"] = math.radians(cfg["pointing_deg"])
    if "los_deg" in cfg:
        fields["los_angle"] = math.radians(cfg["los_deg"])
    if "rician_k" in cfg:
        fields["rician_k"] = cfg["rician_k"]
    return base.with_(**fields)


def lobes_from_config(cfg: dict, base: SpatialLobeModel | None = None) -> SpatialLobeModel:
    base = base or SpatialLobeModel()
    fields = {}
    for key, attr in (("lobe_mean_deg", "mean"), ("lobe_std_deg", "std"), ("lobe_min_deg", "min_width")):
        if key in cfg:
            fields[attr] = math.radians(cfg[key])
    try:
        return replace(base, **fields)
    except ValueError as exc:
        raise ConfigError("lobe", str(exc)) from None
