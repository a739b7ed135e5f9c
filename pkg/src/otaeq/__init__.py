"""RIS-aided over-the-air equalization: simulation and analysis toolkit."""

from .scenario import (
    ConfigError,
    DEFAULT_GEOMETRY,
    Geometry,
    Pdp,
    ScenarioConfig,
    link_variance,
    load_config,
    path_loss_db,
    pdp_profile,
)
from .channel import (
    ChannelRealization,
    EffectiveChannel,
    draw_channel,
    effective_taps,
    tap_aggregates,
)
from .ris import PhaseConfig, blind_phases, ideal_phases, quantize_phases
from .linksim import (
    LinkMetrics,
    SymbolFrame,
    ber_monte_carlo,
    detect,
    mean_sinr_monte_carlo,
    modulate,
    sinr,
    transmit,
)
from .isiprob import (
    MarginStatistics,
    QuadratureError,
    isi_elimination_mc,
    isi_elimination_probability,
    margin_cdf,
    margin_cf,
    margin_statistics,
)
from .septheory import GammaFit, fit_gamma, mgf, sample_sinr, sep_bpsk, sep_psk

__all__ = [
    "ChannelRealization",
    "ConfigError",
    "DEFAULT_GEOMETRY",
    "EffectiveChannel",
    "GammaFit",
    "Geometry",
    "LinkMetrics",
    "MarginStatistics",
    "Pdp",
    "PhaseConfig",
    "QuadratureError",
    "ScenarioConfig",
    "SymbolFrame",
    "ber_monte_carlo",
    "blind_phases",
    "detect",
    "draw_channel",
    "effective_taps",
    "fit_gamma",
    "ideal_phases",
    "isi_elimination_mc",
    "isi_elimination_probability",
    "link_variance",
    "load_config",
    "margin_cdf",
    "margin_cf",
    "margin_statistics",
    "mean_sinr_monte_carlo",
    "mgf",
    "modulate",
    "path_loss_db",
    "pdp_profile",
    "quantize_phases",
    "sample_sinr",
    "sep_bpsk",
    "sep_psk",
    "sinr",
    "tap_aggregates",
    "transmit",
]
