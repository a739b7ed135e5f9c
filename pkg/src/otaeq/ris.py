"""RIS phase controllers: ideal first-tap alignment, quantized, and blind."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhaseConfig:
    theta: np.ndarray  # (M,) angles in [0, 2*pi)
    mode: str          # "ideal" | "quantized" | "blind"
    resolution: int | None = None  # bits, quantized mode only


def alignment_angles(first_pair_products: np.ndarray) -> np.ndarray:
    """Per-element angles cancelling the phase of the given products.

    A zero product gets angle 0 (a probability-zero event for continuous
    fading).
    """
    return (-np.angle(first_pair_products)) % TWO_PI


def ideal_phases(ch: ChannelRealization) -> PhaseConfig:
    """Align every element to the first combined path, making its sum real."""
    return PhaseConfig(theta=alignment_angles(ch.b[:, 0] * ch.g[:, 0]), mode="ideal")


def snap_to_grid(theta: np.ndarray, r: int) -> np.ndarray:
    """Snap angles to the nearest of the 2**r uniform levels {2*pi*k / 2**r}.

    Exact midpoints snap to the lower adjacent level (the smaller index).
    """
    if r < 1:
        raise ValueError(f"phase resolution must be >= 1 bit, got {r}")
    levels = 1 << r
    step = TWO_PI / levels
    x = np.asarray(theta, dtype=float) % TWO_PI
    k = np.floor(x / step)
    frac = x - k * step
    k = np.where(frac > step / 2.0, k + 1, k) % levels
    return k * step


def quantize_phases(ideal: PhaseConfig, r: int) -> PhaseConfig:
    return PhaseConfig(theta=snap_to_grid(ideal.theta, r), mode="quantized", resolution=r)


def blind_phases(m: int) -> PhaseConfig:
    """Plain lossless reflection: no phase adjustment at all."""
    if m < 1:
        raise ValueError(f"element count must be >= 1, got {m}")
    return PhaseConfig(theta=np.zeros(m), mode="blind")
