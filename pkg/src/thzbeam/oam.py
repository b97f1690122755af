"""Orbital-angular-momentum multiplexing, crosstalk and link capacity.

Mode multiplexing superposes spiral overlays ``exp(1j*l*phi)`` on a shared
base profile; the receiver is the matched conjugate-helix overlap integral
over a centred disc.  The capacity calculator converts a target rate into
the bandwidth required with M modes and Q-ary QAM under ideal Nyquist
signalling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aperture import ApertureField
from .errors import GeometryError
from .propagation import FieldSlice, PropagationPlan, propagate_asm

__all__ = [
    "OamModeSet",
    "CrosstalkMatrix",
    "LinkBudgetSpec",
    "multiplex",
    "demultiplex",
    "crosstalk_matrix",
    "required_bandwidth",
]


@dataclass(frozen=True)
class OamModeSet:
    """Distinct OAM mode indices with per-mode complex symbol amplitudes."""

    modes: tuple[int, ...]
    amplitudes: tuple[complex, ...] | None = None

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes)
        if not modes:
            raise ValueError("mode set must contain at least one mode")
        if len(set(modes)) != len(modes):
            raise ValueError(f"duplicate OAM modes in {modes}")
        amps = self.amplitudes
        if amps is None:
            amps = tuple(1.0 + 0.0j for _ in modes)
        else:
            amps = tuple(complex(a) for a in amps)
            if len(amps) != len(modes):
                raise ValueError("one amplitude per mode required")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "amplitudes", amps)


def multiplex(base: ApertureField, mode_set: OamModeSet) -> ApertureField:
    """Superpose spiral overlays on a base profile: sum_l a_l*base*e^{j*l*phi}."""
    X, Y = base.grid.meshgrid()
    phi = np.arctan2(Y, X)
    weights = np.zeros_like(base.weights)
    for l, a in zip(mode_set.modes, mode_set.amplitudes):
        weights = weights + a * base.weights * np.exp(1j * l * phi)
    return ApertureField(base.grid, weights)


def demultiplex(slice_: FieldSlice, mode_l: int, rx_radius: float) -> complex:
    """Matched-filter coefficient: disc integral of E * exp(-1j*l*phi)."""
    if rx_radius <= 0:
        raise ValueError(f"rx_radius must be positive, got {rx_radius}")
    if rx_radius > slice_.extent / 2.0:
        raise GeometryError(
            f"receiver radius {rx_radius:g} m exceeds the slice half-extent "
            f"{slice_.extent / 2.0:g} m"
        )
    X, Y = slice_.meshgrid()
    rho2 = X * X + Y * Y
    sel = rho2 <= rx_radius * rx_radius
    phi = np.arctan2(Y[sel], X[sel])
    return complex(np.sum(slice_.samples[sel] * np.exp(-1j * mode_l * phi)) * slice_.sample_pitch**2)


@dataclass(frozen=True)
class CrosstalkMatrix:
    """Power coupling between transmitted and received OAM modes.

    ``power_coupling_db[i][j]`` is the power received by the mode-j matched
    filter when mode i is transmitted, relative to the matched (i, i)
    power; the diagonal is 0 dB by construction.
    """

    modes: tuple[int, ...]
    power_coupling_db: np.ndarray

    def off_diagonal_max_db(self) -> float:
        m = self.power_coupling_db
        mask = ~np.eye(m.shape[0], dtype=bool)
        return float(m[mask].max())


def crosstalk_matrix(
    base: ApertureField,
    modes: Sequence[int],
    z: float,
    steer_angle: float = 0.0,
    rx_radius: float | None = None,
    plan: PropagationPlan | None = None,
) -> CrosstalkMatrix:
    """Propagate each single-mode beam and demultiplex about the fixed axis.

    Steering is an additive planar ramp at the transmitter while the
    receiver stays on the nominal axis, which reproduces the misalignment
    spillover of steered OAM beams.
    """
    mode_list = tuple(int(m) for m in modes)
    if len(set(mode_list)) != len(mode_list):
        raise ValueError(f"duplicate modes in {mode_list}")
    if z <= 0:
        raise ValueError(f"z must be positive, got {z}")
    grid = base.grid
    if rx_radius is None:
        rx_radius = grid.half_side
    X, Y = grid.meshgrid()
    phi = np.arctan2(Y, X)
    ramp = np.exp(-1j * grid.wavenumber * math.sin(steer_angle) * X)

    coupling = np.zeros((len(mode_list), len(mode_list)))
    for i, l_tx in enumerate(mode_list):
        tx = ApertureField(grid, base.weights * np.exp(1j * l_tx * phi) * ramp)
        received = propagate_asm(tx, z, plan)
        amps = np.array([demultiplex(received, l_rx, rx_radius) for l_rx in mode_list])
        powers = np.abs(amps) ** 2
        if powers[i] == 0.0:
            raise ValueError(f"matched power for mode {l_tx} vanished; geometry unusable")
        with np.errstate(divide="ignore"):
            coupling[i, :] = 10.0 * np.log10(powers / powers[i])
    return CrosstalkMatrix(mode_list, coupling)


@dataclass(frozen=True)
class LinkBudgetSpec:
    """Target rate with M OAM modes and Q-ary QAM; B = rate/(M*log2(Q))."""

    target_rate: float
    n_modes: int
    qam_order: int

    def __post_init__(self):
        if self.target_rate <= 0:
            raise ValueError(f"target_rate must be positive, got {self.target_rate}")
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be at least 1, got {self.n_modes}")
        q = self.qam_order
        if q < 2 or (q & (q - 1)) != 0:
            raise ValueError(f"qam_order must be a power of two >= 2, got {q}")

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.qam_order))


def required_bandwidth(spec: LinkBudgetSpec) -> float:
    """Bandwidth for the target rate under ideal Nyquist signalling."""
    return spec.target_rate / (spec.n_modes * spec.bits_per_symbol)
