"""Experiment configuration, large-scale fading statistics and power-delay profiles.

Everything downstream (channel draws, link simulation, probability and
error-rate analysis) is parameterized by a single :class:`ScenarioConfig`.
Configs can be built in code or loaded from a JSON file whose keys match the
dataclass fields exactly; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

# Validity window of the urban-micro NLOS path loss model.
UMI_FC_RANGE_GHZ = (2.0, 6.0)
UMI_DISTANCE_RANGE_M = (10.0, 2000.0)


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants.

    ``violations`` carries every violation found, not just the first.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Geometry:
    """Scalar link geometry: distances in meters, carrier frequency in GHz."""

    d_tx_ris: float
    d_ris_rx: float
    d_tx_rx: float
    h_tx: float
    h_ris: float
    h_rx: float
    f_c: float

    def violations(self) -> list[str]:
        out = []
        for name in ("d_tx_ris", "d_ris_rx", "d_tx_rx", "h_tx", "h_ris", "h_rx", "f_c"):
            if not getattr(self, name) > 0:
                out.append(f"geometry.{name} must be > 0")
        if out:
            return out
        lo_f, hi_f = UMI_FC_RANGE_GHZ
        if not lo_f <= self.f_c <= hi_f:
            out.append(f"geometry.f_c = {self.f_c} GHz outside urban-micro model range [{lo_f}, {hi_f}]")
        lo_d, hi_d = UMI_DISTANCE_RANGE_M
        for name in ("d_tx_ris", "d_ris_rx"):
            d = getattr(self, name)
            if not lo_d <= d <= hi_d:
                out.append(f"geometry.{name} = {d} m outside urban-micro model range [{lo_d}, {hi_d}]")
        return out


#: Outdoor desk-scale defaults used throughout the bundled experiments.
DEFAULT_GEOMETRY = Geometry(
    d_tx_ris=35.51, d_ris_rx=20.22, d_tx_rx=55.73,
    h_tx=10.0, h_ris=4.0, h_rx=1.0, f_c=5.0,
)


@dataclass(frozen=True)
class Pdp:
    """Power-delay profile: how total tap power is spread over the delay taps.

    ``uniform`` gives every tap the same variance (worst case for ISI);
    ``exponential`` front-loads power on the earliest tap with decay
    constant ``decay`` (in taps).
    """

    kind: str
    decay: float | None = None

    @classmethod
    def uniform(cls) -> "Pdp":
        return cls(kind="uniform")

    @classmethod
    def exponential(cls, decay: float = 1.0) -> "Pdp":
        return cls(kind="exponential", decay=decay)

    def violations(self) -> list[str]:
        if self.kind == "uniform":
            return [] if self.decay is None else ["pdp.decay must be absent for uniform profile"]
        if self.kind == "exponential":
            if self.decay is None or not self.decay > 0:
                return ["pdp.decay must be > 0 for exponential profile"]
            return []
        return [f"pdp.kind must be 'uniform' or 'exponential', got {self.kind!r}"]


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one simulated link.

    Exactly one of ``sigma_override`` (per-link fading amplitudes sigma_b,
    sigma_g) or ``geometry`` (distances feeding the path loss model) must be
    given.  Scenario "S1" models a frequency-flat RIS-to-receiver hop and
    forces ``N_g == 1``; "S2" is selective on both hops.
    """

    M: int
    N_b: int
    N_g: int = 1
    scenario: str = "S1"
    sigma_override: tuple[float, float] | None = None
    geometry: Geometry | None = None
    pdp: Pdp = Pdp.uniform()
    P_t_dbm: float = 30.0
    W_0_dbm: float = -130.0
    phase_resolution: int | None = None
    seed: int = 0

    def violations(self) -> list[str]:
        out = []
        if not (isinstance(self.M, int) and self.M >= 1):
            out.append("M >= 1 violated")
        if not (isinstance(self.N_b, int) and self.N_b >= 1):
            out.append("N_b >= 1 violated")
        if not (isinstance(self.N_g, int) and self.N_g >= 1):
            out.append("N_g >= 1 violated")
        if self.scenario not in ("S1", "S2"):
            out.append(f"scenario must be 'S1' or 'S2', got {self.scenario!r}")
        elif self.scenario == "S1" and self.N_g != 1:
            out.append("scenario S1 requires N_g = 1")
        if (self.sigma_override is None) == (self.geometry is None):
            out.append("exactly one of sigma_override / geometry must be present")
        if self.sigma_override is not None:
            if len(self.sigma_override) != 2 or not all(s > 0 for s in self.sigma_override):
                out.append("sigma_override must be two positive amplitudes (sigma_b, sigma_g)")
        if self.geometry is not None:
            out.extend(self.geometry.violations())
        out.extend(self.pdp.violations())
        if not math.isfinite(self.P_t_dbm):
            out.append("P_t_dbm must be finite")
        if not math.isfinite(self.W_0_dbm):
            out.append("W_0_dbm must be finite")
        if self.phase_resolution is not None and not (
            isinstance(self.phase_resolution, int) and self.phase_resolution >= 1
        ):
            out.append("phase_resolution must be an integer >= 1")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            out.append("seed must be an unsigned 64-bit integer")
        return out

    def validated(self) -> "ScenarioConfig":
        bad = self.violations()
        if bad:
            raise ConfigError(bad)
        return self

    @property
    def es_linear(self) -> float:
        """Transmit symbol energy in linear units (P_t is in dBm)."""
        return 10.0 ** ((self.P_t_dbm - 30.0) / 10.0)

    @property
    def w0_linear(self) -> float:
        """Noise power in linear units."""
        return 10.0 ** ((self.W_0_dbm - 30.0) / 10.0)

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def path_loss_db(d: float, f_c: float) -> float:
    """Urban-micro NLOS path loss in dB for distance ``d`` (m) at ``f_c`` (GHz).

    36.7 log10(d) + 22.7 + 26 log10(f_c).
    """
    if not d > 0 or not f_c > 0:
        raise ValueError(f"path_loss_db requires d > 0 and f_c > 0, got d={d}, f_c={f_c}")
    return 36.7 * math.log10(d) + 22.7 + 26.0 * math.log10(f_c)


def link_variance(config: ScenarioConfig) -> tuple[float, float]:
    """Per-tap complex fading variances (sigma_b^2, sigma_g^2) for the two hops.

    With ``sigma_override`` present these are just the squared amplitudes;
    otherwise each hop's variance absorbs its full link path loss.
    """
    config.validated()
    if config.sigma_override is not None:
        sb, sg = config.sigma_override
        return sb * sb, sg * sg
    geo = config.geometry
    sb_sq = 10.0 ** (-path_loss_db(geo.d_tx_ris, geo.f_c) / 10.0)
    sg_sq = 10.0 ** (-path_loss_db(geo.d_ris_rx, geo.f_c) / 10.0)
    return sb_sq, sg_sq


def pdp_profile(pdp: Pdp, n_taps: int, sigma_sq: float) -> np.ndarray:
    """Per-tap variance vector of length ``n_taps`` summing to ``n_taps * sigma_sq``.

    The exponential profile keeps the same total power as the uniform one so
    the two are comparable at equal transmit power; tap l (0-indexed) gets
    weight exp(-l / decay) before normalization.
    """
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    bad = pdp.violations()
    if bad:
        raise ConfigError(bad)
    if pdp.kind == "uniform":
        return np.full(n_taps, sigma_sq, dtype=float)
    weights = np.exp(-np.arange(n_taps) / pdp.decay)
    return weights * (n_taps * sigma_sq / weights.sum())


# --- config file handling ----------------------------------------------------

_GEOMETRY_KEYS = ("d_tx_ris", "d_ris_rx", "d_tx_rx", "h_tx", "h_ris", "h_rx", "f_c")
_CONFIG_KEYS = (
    "M", "N_b", "N_g", "scenario", "sigma_override", "geometry", "pdp",
    "P_t_dbm", "W_0_dbm", "phase_resolution", "seed",
)


def _parse_pdp(raw: Any, errors: list[str]) -> Pdp:
    if isinstance(raw, str):
        if raw == "uniform":
            return Pdp.uniform()
        if raw == "exponential":
            return Pdp.exponential()
        errors.append(f"pdp string must be 'uniform' or 'exponential', got {raw!r}")
        return Pdp.uniform()
    if isinstance(raw, dict):
        unknown = set(raw) - {"kind", "decay"}
        if unknown:
            errors.append(f"unknown pdp keys: {sorted(unknown)}")
        return Pdp(kind=raw.get("kind", ""), decay=raw.get("decay"))
    errors.append(f"pdp must be a string or an object, got {type(raw).__name__}")
    return Pdp.uniform()


def config_from_dict(raw: dict[str, Any]) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from plain JSON-style data.

    Collects every problem (unknown keys, bad types, invariant violations)
    into a single :class:`ConfigError` instead of failing on the first one.
    """
    errors: list[str] = []
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        errors.append(f"unknown config keys: {sorted(unknown)}")

    def take(key: str, default: Any = None) -> Any:
        return raw.get(key, default)

    geometry = None
    if take("geometry") is not None:
        g = take("geometry")
        if not isinstance(g, dict):
            errors.append("geometry must be an object")
        else:
            g_unknown = set(g) - set(_GEOMETRY_KEYS)
            if g_unknown:
                errors.append(f"unknown geometry keys: {sorted(g_unknown)}")
            missing = [k for k in _GEOMETRY_KEYS if k not in g]
            if missing:
                errors.append(f"geometry missing keys: {missing}")
            else:
                geometry = Geometry(**{k: float(g[k]) for k in _GEOMETRY_KEYS})

    sigma_override = None
    if take("sigma_override") is not None:
        so = take("sigma_override")
        if not (isinstance(so, (list, tuple)) and len(so) == 2):
            errors.append("sigma_override must be a two-element list [sigma_b, sigma_g]")
        else:
            sigma_override = (float(so[0]), float(so[1]))

    pdp = _parse_pdp(take("pdp", "uniform"), errors)

    def as_int(key: str, default: Any = None) -> Any:
        v = take(key, default)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, int):
            errors.append(f"{key} must be an integer, got {v!r}")
            return default if isinstance(default, int) else 1
        return v

    cfg = ScenarioConfig(
        M=as_int("M", 1),
        N_b=as_int("N_b", 1),
        N_g=as_int("N_g", 1),
        scenario=take("scenario", "S1"),
        sigma_override=sigma_override,
        geometry=geometry,
        pdp=pdp,
        P_t_dbm=float(take("P_t_dbm", 30.0)),
        W_0_dbm=float(take("W_0_dbm", -130.0)),
        phase_resolution=as_int("phase_resolution"),
        seed=as_int("seed", 0),
    )
    errors.extend(cfg.violations())
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str) -> ScenarioConfig:
    """Load a JSON config file; raises ConfigError listing every violation."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config file is not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config file must contain a JSON object"])
    return config_from_dict(raw)
