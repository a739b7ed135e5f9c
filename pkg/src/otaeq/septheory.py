"""Semi-analytical error probability via a gamma fit of the aligned SINR.

The aligned first-tap power is (noncentral) chi-square-like, so when the
residual ISI is negligible the post-alignment SINR is well described by a
gamma distribution.  No exact closed form for the ratio exists; instead
SINR samples are drawn, a gamma law is fitted by maximum likelihood, and
symbol error probabilities follow from its moment generating function
through the standard single-integral PSK bound.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import digamma, gammaln, polygamma

from .channel import _draw_taps_batch, aligned_aggregates_batch
from .scenario import ScenarioConfig, link_variance, pdp_profile
from .seeding import Seed, as_seed_sequence, chunk_sizes

TRIALS_PER_CHUNK = 4096

#: Shape cap for (near-)degenerate samples whose log-moment gap underflows.
KAPPA_CAP = 1e9


@dataclass(frozen=True)
class GammaFit:
    kappa: float          # shape
    rho: float            # scale
    n_samples: int
    log_likelihood: float


def sample_sinr(
    config: ScenarioConfig,
    n_trials: int,
    seed: Seed = None,
) -> np.ndarray:
    """Draw aligned-SINR samples: es * A^2 / (es * ISI power + noise).

    Only defined for the singly selective scenario, where the ISI set of
    the statistics and of the physical link coincide.
    """
    config.validated()
    if config.scenario != "S1":
        raise ValueError("SINR sampling for the gamma fit is defined for scenario S1 only")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if seed is None:
        seed = config.seed
    sb_sq, sg_sq = link_variance(config)
    var_b = pdp_profile(config.pdp, config.N_b, sb_sq)
    var_g = pdp_profile(config.pdp, config.N_g, sg_sq)
    es, w0 = config.es_linear, config.w0_linear

    sizes = chunk_sizes(n_trials, TRIALS_PER_CHUNK)
    seeds = as_seed_sequence(seed).spawn(len(sizes))

    out = np.empty(n_trials)
    pos = 0
    for i, size in enumerate(sizes):
        rng = np.random.default_rng(seeds[i])
        b, g = _draw_taps_batch(config.M, var_b, var_g, size, rng)
        first, isi = aligned_aggregates_batch(b, g, isi_set="all")
        isi_power = np.sum(np.abs(isi) ** 2, axis=1)
        out[pos : pos + size] = es * first**2 / (es * isi_power + w0)
        pos += size
    return out


def fit_gamma(samples: np.ndarray) -> GammaFit:
    """Maximum-likelihood gamma fit (shape kappa, scale rho).

    Solves ln(kappa) - psi(kappa) = ln(mean) - mean(ln) by Newton iteration
    from the moment-matched shape.  Near-constant samples drive the shape
    to infinity; it is capped with a warning rather than overflowing.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise ValueError(f"gamma fit needs at least 100 samples, got {x.size}")
    if np.any(x <= 0):
        raise ValueError("gamma fit requires strictly positive samples")

    mean = float(np.mean(x))
    mean_log = float(np.mean(np.log(x)))
    s = np.log(mean) - mean_log  # >= 0 by Jensen; 0 only for constant data
    var = float(np.var(x))

    if s <= 0 or var == 0.0:
        warnings.warn("samples are (numerically) constant; capping gamma shape", RuntimeWarning)
        return _finish_fit(KAPPA_CAP, mean, x, mean_log)

    kappa = mean**2 / var if var > 0 else KAPPA_CAP
    kappa = min(max(kappa, 1e-8), KAPPA_CAP)
    for _ in range(100):
        f = np.log(kappa) - digamma(kappa) - s
        fprime = 1.0 / kappa - polygamma(1, kappa)
        step = f / fprime
        new = kappa - step
        if new <= 0:
            new = kappa / 2.0
        if new >= KAPPA_CAP:
            warnings.warn("gamma shape exceeds cap; samples nearly constant", RuntimeWarning)
            return _finish_fit(KAPPA_CAP, mean, x, mean_log)
        if abs(new - kappa) <= 1e-12 * kappa:
            return _finish_fit(new, mean, x, mean_log)
        kappa = new
    raise RuntimeError("gamma fit Newton iteration did not converge in 100 steps")


def _finish_fit(kappa: float, mean: float, x: np.ndarray, mean_log: float) -> GammaFit:
    rho = mean / kappa
    n = x.size
    loglik = n * (
        (kappa - 1.0) * mean_log - mean / rho - kappa * np.log(rho) - gammaln(kappa)
    )
    return GammaFit(kappa=float(kappa), rho=float(rho), n_samples=int(n), log_likelihood=float(loglik))


def mgf(fit: GammaFit, s: float) -> float:
    """Moment generating function (1 - rho s)^(-kappa), defined for s < 1/rho."""
    if s >= 1.0 / fit.rho:
        raise ValueError(f"MGF undefined for s >= 1/rho = {1.0 / fit.rho:.6g}, got s = {s}")
    return float(np.exp(-fit.kappa * np.log1p(-fit.rho * s)))


def sep_psk(fit: GammaFit, q: int) -> float:
    """Average Q-PSK symbol error probability from the fitted MGF.

    (1/pi) * integral_0^{(Q-1)pi/Q} M(-sin^2(pi/Q) / sin^2(eta)) d(eta),
    evaluated by adaptive quadrature to 1e-10 absolute tolerance.
    """
    if q < 2:
        raise ValueError(f"PSK order must be >= 2, got {q}")
    sin_sq = np.sin(np.pi / q) ** 2

    def integrand(eta: float) -> float:
        return float(np.exp(-fit.kappa * np.log1p(fit.rho * sin_sq / np.sin(eta) ** 2)))

    upper = (q - 1) * np.pi / q
    val, _ = quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-12, limit=400)
    return val / np.pi


def sep_bpsk(fit: GammaFit) -> float:
    """Binary PSK special case: (1/pi) * integral_0^{pi/2} (1 + rho/sin^2)^(-kappa)."""

    def integrand(eta: float) -> float:
        return float(np.exp(-fit.kappa * np.log1p(fit.rho / np.sin(eta) ** 2)))

    val, _ = quad(integrand, 0.0, np.pi / 2.0, epsabs=1e-12, epsrel=1e-12, limit=400)
    return val / np.pi


def fit_csv_row(fit: GammaFit, n_b: int, p_t_dbm: float) -> tuple:
    """Flat record for CSV export."""
    return (n_b, p_t_dbm, fit.kappa, fit.rho, fit.n_samples)
