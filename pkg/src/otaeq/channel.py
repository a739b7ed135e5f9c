"""Rayleigh multipath draws and the effective post-RIS discrete channel.

The two hops are tapped delay lines with integer symbol delays 0, 1, ...
per path.  Reflecting off M phase-shifting elements, a transmit-side path
l1 and a receive-side path l2 combine into one effective tap at delay
tau[l1] + xi[l2]; colliding delay sums accumulate coherently in one bin.

Two ISI index conventions exist for the doubly selective scenario:

* ``"all"``     - every delayed pair except the aligned first pair (1, 1);
                  this is the physical set used by the link simulator.
* ``"strict"``  - only pairs with both path indices >= 2, which is the set
                  whose closed-form statistics the probability analysis uses.

They coincide when either hop is frequency-flat.  Do not mix them silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig, link_variance, pdp_profile

ISI_SETS = ("all", "strict")


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of both hops: complex taps per RIS element and path delays."""

    b: np.ndarray    # (M, N_b) complex, Tx-to-RIS taps
    g: np.ndarray    # (M, N_g) complex, RIS-to-Rx taps
    tau: np.ndarray  # (N_b,) int, Tx-side delays in symbols
    xi: np.ndarray   # (N_g,) int, Rx-side delays in symbols

    @property
    def n_elements(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class EffectiveChannel:
    """Post-RIS discrete channel: map from relative delay bin to coefficient.

    Bin 0 holds the aligned first-path coefficient; all delays are relative
    to it (frame-synchronized).
    """

    taps: dict[int, complex]

    @property
    def span(self) -> int:
        """Largest occupied delay bin."""
        return max(self.taps)

    def as_array(self) -> np.ndarray:
        h = np.zeros(self.span + 1, dtype=complex)
        for d, c in self.taps.items():
            h[d] = c
        return h


def draw_channel(config: ScenarioConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one i.i.d. circular complex Gaussian realization of both hops.

    Tap variances follow the configured power-delay profile; delays are the
    consecutive integers 0 .. N-1 on each hop.
    """
    config.validated()
    sb_sq, sg_sq = link_variance(config)
    var_b = pdp_profile(config.pdp, config.N_b, sb_sq)
    var_g = pdp_profile(config.pdp, config.N_g, sg_sq)
    b, g = _draw_taps_batch(config.M, var_b, var_g, 1, rng)
    return ChannelRealization(
        b=b[0],
        g=g[0],
        tau=np.arange(config.N_b),
        xi=np.arange(config.N_g),
    )


def _draw_taps_batch(
    m: int,
    var_b: np.ndarray,
    var_g: np.ndarray,
    n: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` realizations at once: arrays (n, M, N_b) and (n, M, N_g)."""
    scale_b = np.sqrt(var_b / 2.0)
    scale_g = np.sqrt(var_g / 2.0)
    b = (rng.standard_normal((n, m, var_b.size)) + 1j * rng.standard_normal((n, m, var_b.size))) * scale_b
    g = (rng.standard_normal((n, m, var_g.size)) + 1j * rng.standard_normal((n, m, var_g.size))) * scale_g
    return b, g


def effective_taps(ch: ChannelRealization, phases) -> EffectiveChannel:
    """Collapse per-element, per-path-pair contributions into delay bins.

    h[d] = sum over pairs (l1, l2) with tau[l1] + xi[l2] - (tau[0] + xi[0]) = d
    of sum_m b[m, l1] g[m, l2] e^{j theta_m}.
    """
    theta = np.asarray(phases.theta, dtype=float)
    if theta.shape != (ch.n_elements,):
        raise ValueError(f"phase vector has shape {theta.shape}, expected ({ch.n_elements},)")
    rot = np.exp(1j * theta)
    # pair_gain[l1, l2] = sum_m b[m, l1] g[m, l2] e^{j theta_m}
    pair_gain = np.einsum("mi,mj,m->ij", ch.b, ch.g, rot)
    delays = ch.tau[:, None] + ch.xi[None, :] - (ch.tau[0] + ch.xi[0])
    taps: dict[int, complex] = {}
    for l1 in range(ch.b.shape[1]):
        for l2 in range(ch.g.shape[1]):
            d = int(delays[l1, l2])
            taps[d] = taps.get(d, 0.0 + 0.0j) + complex(pair_gain[l1, l2])
    return EffectiveChannel(taps=taps)


def isi_pair_indices(n_b: int, n_g: int, isi_set: str) -> list[tuple[int, int]]:
    """0-based (l1, l2) pairs counted as ISI under the given convention."""
    if isi_set not in ISI_SETS:
        raise ValueError(f"isi_set must be one of {ISI_SETS}, got {isi_set!r}")
    if isi_set == "all":
        return [(l1, l2) for l1 in range(n_b) for l2 in range(n_g) if (l1, l2) != (0, 0)]
    return [(l1, l2) for l1 in range(1, n_b) for l2 in range(1, n_g)]


def tap_aggregates(
    ch: ChannelRealization, phases, isi_set: str = "all"
) -> tuple[complex, np.ndarray]:
    """First-path combined gain and the per-pair ISI gains.

    Returns ``(first, isi)`` where ``first = sum_m b[m,0] g[m,0] e^{j theta_m}``
    and ``isi`` holds one combined complex gain per ISI index pair.
    """
    theta = np.asarray(phases.theta, dtype=float)
    if theta.shape != (ch.n_elements,):
        raise ValueError(f"phase vector has shape {theta.shape}, expected ({ch.n_elements},)")
    rot = np.exp(1j * theta)
    pair_gain = np.einsum("mi,mj,m->ij", ch.b, ch.g, rot)
    pairs = isi_pair_indices(ch.b.shape[1], ch.g.shape[1], isi_set)
    first = complex(pair_gain[0, 0])
    isi = np.array([pair_gain[l1, l2] for l1, l2 in pairs], dtype=complex)
    return first, isi


def aligned_aggregates_batch(
    b: np.ndarray, g: np.ndarray, isi_set: str = "all"
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized aggregates under first-tap phase alignment.

    ``b``: (n, M, N_b), ``g``: (n, M, N_g).  Returns ``(first, isi)`` with
    shapes (n,) real and (n, n_pairs) complex.  Alignment makes the first
    aggregate real by construction, so it is returned as its real part.
    """
    rot = np.exp(-1j * np.angle(b[:, :, 0] * g[:, :, 0]))
    pair_gain = np.einsum("nmi,nmj,nm->nij", b, g, rot)
    n_b, n_g = b.shape[2], g.shape[2]
    pairs = isi_pair_indices(n_b, n_g, isi_set)
    first = pair_gain[:, 0, 0].real
    if pairs:
        idx1 = [p[0] for p in pairs]
        idx2 = [p[1] for p in pairs]
        isi = pair_gain[:, idx1, idx2]
    else:
        isi = np.zeros((b.shape[0], 0), dtype=complex)
    return first, isi


def serialize_realization(ch: ChannelRealization) -> str:
    """Flat text dump for debugging: row-major taps, one entry per line.

    Order: header, then b row-major (m outer, l1 inner), then g row-major,
    then tau, then xi.
    """
    lines = [f"M={ch.n_elements} N_b={ch.b.shape[1]} N_g={ch.g.shape[1]}"]
    for name, arr in (("b", ch.b), ("g", ch.g)):
        for m in range(arr.shape[0]):
            for l in range(arr.shape[1]):
                v = arr[m, l]
                lines.append(f"{name}[{m}][{l}] {v.real!r} {v.imag!r}")
    lines.append("tau " + " ".join(str(int(t)) for t in ch.tau))
    lines.append("xi " + " ".join(str(int(x)) for x in ch.xi))
    return "\n".join(lines) + "\n"
