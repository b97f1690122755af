"""Scalar figures of merit: radiation gain, range limits, beam statistics.

The normalized radiation gain is the coherence factor

    G = |sum w_n exp(-1j*k*r_n)/r_n|^2 / (sum |w_n|/r_n)^2

which is 1 exactly when every element contribution arrives co-phased (a
focusing profile at its own focus) and degrades towards 0 as the arrival
phases spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aperture import AmplitudeMask, ApertureGrid, WavefrontSpec, compose_aperture, synthesize_phase
from .errors import NoBeamError
from .propagation import FieldSlice

__all__ = [
    "GainCurve",
    "BeamStats",
    "normalized_gain",
    "gain_curve",
    "fraunhofer_distance",
    "aperture_gain_dbi",
    "numeric_aperture",
    "abbe_spot",
    "beam_profile_stats",
    "self_healing_correlation",
]

GAIN_CURVE_ORDER = ("beamforming", "beamfocusing", "bessel")


def normalized_gain(field, point: Sequence[float]) -> float:
    """Coherence factor of the element contributions at a point, in [0, 1]."""
    px, py, pz = (float(v) for v in point)
    if pz <= 0:
        raise ValueError(f"evaluation point must have z > 0, got {pz}")
    X, Y = field.grid.meshgrid()
    r = np.sqrt((X - px) ** 2 + (Y - py) ** 2 + pz * pz)
    if np.any(r == 0.0):
        raise ValueError(f"evaluation point {(px, py, pz)} coincides with an element")
    w = field.weights
    amp = np.abs(w)
    num = np.abs(np.sum(w * np.exp(-1j * field.grid.wavenumber * r) / r)) ** 2
    den = np.sum(amp / r) ** 2
    if den == 0.0:
        raise ValueError("aperture field carries no power")
    return float(num / den)


@dataclass(frozen=True)
class GainCurve:
    """Per-wavefront normalized gain along the axis.

    ``gain`` holds the curves as plotted: each wavefront is referred to its
    attainable coherence maximum, so the beamfocusing and beamforming
    curves are the raw coherence factor (their maximum, 1, is attained at
    the focus and in the far field respectively) while the Bessel curve is
    scaled by its peak over the sweep.  ``raw_gain`` keeps the unscaled
    coherence factors.
    """

    distances: np.ndarray
    gain: dict[str, np.ndarray]
    raw_gain: dict[str, np.ndarray]
    focal_length: float | None = None
    bessel_peak_distance: float | None = None

    def __post_init__(self):
        for label, values in self.gain.items():
            if np.any(values < 0) or np.any(values > 1 + 1e-9):
                raise ValueError(f"{label} gain leaves [0, 1]: range "
                                 f"[{values.min():g}, {values.max():g}]")


def gain_curve(
    grid: ApertureGrid,
    wavefronts: Sequence[WavefrontSpec],
    distances: Sequence[float],
    taper: AmplitudeMask | None = None,
) -> GainCurve:
    """Axial normalized-gain curves for a set of broadside wavefronts.

    A ``beamfocusing`` spec with ``focal_length=None`` is focused at the
    distance where the Bessel curve peaks, which makes the two curves meet
    there.  ``taper`` (e.g. the inscribed-disc mask) applies to every
    wavefront alike.
    """
    zs = np.asarray(distances, dtype=float)
    if zs.size == 0:
        raise ValueError("distances must not be empty")
    if np.any(zs <= 0) or np.any(np.diff(zs) <= 0):
        raise ValueError("distances must be positive and strictly increasing")

    specs = {s.kind: s for s in wavefronts}
    if len(specs) != len(wavefronts):
        raise ValueError("duplicate wavefront kinds in gain curve request")

    def curve_for(spec: WavefrontSpec) -> np.ndarray:
        fld = compose_aperture(grid, [synthesize_phase(grid, spec)], taper)
        return np.array([normalized_gain(fld, (0.0, 0.0, z)) for z in zs])

    raw: dict[str, np.ndarray] = {}
    bessel_peak_z = None
    if "bessel" in specs:
        raw["bessel"] = curve_for(specs["bessel"])
        bessel_peak_z = float(zs[int(np.argmax(raw["bessel"]))])

    focal = None
    if "beamfocusing" in specs:
        spec = specs["beamfocusing"]
        focal = spec.focal_length
        if focal is None:
            if bessel_peak_z is None:
                raise ValueError(
                    "beamfocusing focal_length=None requires a bessel wavefront to peak against"
                )
            focal = bessel_peak_z
        raw["beamfocusing"] = curve_for(
            WavefrontSpec(kind="beamfocusing", focal_length=focal, steer_angle=spec.steer_angle)
        )
    if "beamforming" in specs:
        raw["beamforming"] = curve_for(specs["beamforming"])

    gain: dict[str, np.ndarray] = {}
    for label, values in raw.items():
        if label == "bessel":
            peak = values.max()
            gain[label] = values / peak if peak > 0 else values
        else:
            # attainable maximum is 1 (at the focus / in the far field)
            gain[label] = values.copy()

    return GainCurve(zs, gain, raw, focal, bessel_peak_z)


def fraunhofer_distance(aperture_extent: float, wavelength: float) -> float:
    """Conventional near/far-field boundary 2*D^2/lambda."""
    if aperture_extent <= 0 or wavelength <= 0:
        raise ValueError("aperture extent and wavelength must be positive")
    return 2.0 * aperture_extent**2 / wavelength


def aperture_gain_dbi(area: float, wavelength: float) -> float:
    """Nominal aperture gain 10*log10(4*pi*A/lambda^2)."""
    if area <= 0 or wavelength <= 0:
        raise ValueError("area and wavelength must be positive")
    return 10.0 * math.log10(4.0 * math.pi * area / wavelength**2)


def numeric_aperture(half_aperture: float, focal_length: float) -> float:
    """NA = sin(atan(R/F)) of a focusing aperture."""
    if half_aperture <= 0 or focal_length <= 0:
        raise ValueError("half_aperture and focal_length must be positive")
    return math.sin(math.atan2(half_aperture, focal_length))


def abbe_spot(numeric_aperture_value: float, wavelength: float) -> float:
    """Diffraction-limited spot diameter lambda / (2*NA)."""
    if not 0 < numeric_aperture_value <= 1:
        raise ValueError(f"numeric aperture must be in (0, 1], got {numeric_aperture_value}")
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    return wavelength / (2.0 * numeric_aperture_value)


@dataclass(frozen=True)
class BeamStats:
    """Peak position/intensity, FWHM and ring count of a transverse slice."""

    peak_position: tuple[float, float]
    peak_intensity: float
    fwhm: float
    ring_count: int
    on_axis_intensity: float


def _cut_fwhm(coords: np.ndarray, intensity: np.ndarray, peak_idx: int) -> float | None:
    """Half-max width around a peak along one cut, by linear interpolation."""
    half = intensity[peak_idx] / 2.0
    left = None
    for i in range(peak_idx, 0, -1):
        if intensity[i - 1] <= half <= intensity[i]:
            frac = (intensity[i] - half) / (intensity[i] - intensity[i - 1])
            left = coords[i] - frac * (coords[i] - coords[i - 1])
            break
    right = None
    for i in range(peak_idx, intensity.size - 1):
        if intensity[i + 1] <= half <= intensity[i]:
            frac = (intensity[i] - half) / (intensity[i] - intensity[i + 1])
            right = coords[i] + frac * (coords[i + 1] - coords[i])
            break
    if left is None or right is None:
        return None
    return float(right - left)


def beam_profile_stats(slice_: FieldSlice, ring_floor_db: float = -20.0) -> BeamStats:
    """Peak, interpolated FWHM and ring count of a slice.

    The FWHM averages the two principal cuts through the peak.  Rings are
    local maxima along the +x cut from the peak, above ``ring_floor_db``
    relative to the peak (the floor keeps numerical ripple out).
    """
    intensity = slice_.intensity()
    if intensity.size == 0 or intensity.max() <= 0.0:
        raise NoBeamError("slice carries no power")
    iy, ix = np.unravel_index(int(np.argmax(intensity)), intensity.shape)
    coords = slice_.axis_coordinates()
    peak_val = float(intensity[iy, ix])

    widths = []
    for cut, idx in ((intensity[iy, :], ix), (intensity[:, ix], iy)):
        w = _cut_fwhm(coords, cut, idx)
        if w is not None:
            widths.append(w)
    if not widths:
        raise NoBeamError("no half-maximum crossing found; slice has no isolated peak")

    floor = peak_val * 10.0 ** (ring_floor_db / 10.0)
    cut = intensity[iy, ix:]
    rings = 0
    for i in range(1, cut.size - 1):
        if cut[i] > cut[i - 1] and cut[i] > cut[i + 1] and cut[i] >= floor:
            rings += 1

    n = intensity.shape[0]
    center = (n - 1) // 2
    on_axis = float(intensity[center, center]) if n % 2 else float(
        intensity[center : center + 2, center : center + 2].mean()
    )
    return BeamStats(
        peak_position=(float(coords[ix]), float(coords[iy])),
        peak_intensity=peak_val,
        fwhm=float(np.mean(widths)),
        ring_count=rings,
        on_axis_intensity=on_axis,
    )


def self_healing_correlation(blocked: FieldSlice, reference: FieldSlice) -> float:
    """Normalized cross-correlation of two intensity patterns, in [0, 1]."""
    if blocked.samples.shape != reference.samples.shape:
        raise ValueError(
            f"slice shapes differ: {blocked.samples.shape} vs {reference.samples.shape}"
        )
    if abs(blocked.z - reference.z) > 1e-9 * max(1.0, abs(reference.z)):
        raise ValueError(f"slices lie at different planes: {blocked.z} vs {reference.z}")
    ib = blocked.intensity().ravel()
    ir = reference.intensity().ravel()
    denom = np.linalg.norm(ib) * np.linalg.norm(ir)
    if denom == 0.0:
        raise NoBeamError("cannot correlate empty intensity patterns")
    return float(np.dot(ib, ir) / denom)
