"""Scalar near-field propagation of aperture fields.

Two engines share one convention (outgoing waves ``exp(-1j*k*r)/r``):

* ``propagate_direct`` — brute-force Huygens summation over every element,
  exact by construction; it is the oracle every other path is tested
  against.
* ``propagate_asm`` — spectral propagation on a zero-padded grid.  From an
  ``ApertureField`` (discrete point sources) the transfer function is the
  FFT of the sampled spherical-wave kernel, which reproduces the direct
  summation on the padded plane; from a ``FieldSlice`` (sampled continuum
  field) the analytic angular-spectrum transfer function
  ``exp(-1j*z*sqrt(k^2-kx^2-ky^2))`` is used, band-limited against
  wrap-around and with evanescent components zeroed or attenuated.

Everything here is single-threaded and order-stable: identical inputs give
bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .aperture import (
    ApertureField,
    ApertureGrid,
    ObstacleSpec,
    make_obstacle_mask,
    synthesize_delay_phase,
)
from .errors import GeometryError, SamplingError

__all__ = [
    "FieldSlice",
    "PropagationPlan",
    "FrequencySweep",
    "propagate_asm",
    "propagate_slice",
    "propagate_direct",
    "propagate_with_obstacles",
    "axial_scan",
    "multi_frequency_scan",
]


@dataclass(frozen=True)
class FieldSlice:
    """Complex field samples on a transverse plane at distance z."""

    z: float
    samples: np.ndarray
    sample_pitch: float
    origin_offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.sample_pitch <= 0:
            raise ValueError(f"sample_pitch must be positive, got {self.sample_pitch}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))

    @property
    def power(self) -> float:
        """sum(|s|^2) * pitch^2."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.sample_pitch**2)

    @property
    def extent(self) -> float:
        return self.samples.shape[0] * self.sample_pitch

    def axis_coordinates(self) -> np.ndarray:
        n = self.samples.shape[0]
        return (np.arange(n) - (n - 1) / 2.0) * self.sample_pitch

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.axis_coordinates()
        return np.meshgrid(x + self.origin_offset[0], x + self.origin_offset[1], indexing="xy")

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def center_crop(self, n: int) -> "FieldSlice":
        """Central n-by-n window (n must match the grid parity)."""
        m = self.samples.shape[0]
        if n > m:
            raise ValueError(f"crop size {n} exceeds slice size {m}")
        if (m - n) % 2:
            raise ValueError(f"cannot centre a {n} crop in a {m} slice")
        lo = (m - n) // 2
        return FieldSlice(self.z, self.samples[lo : lo + n, lo : lo + n], self.sample_pitch, self.origin_offset)


@dataclass(frozen=True)
class PropagationPlan:
    """Knobs for spectral propagation."""

    method: str = "angular_spectrum"
    pad_factor: float = 2.0
    evanescent_cutoff: bool = True
    band_limit: bool = True

    def __post_init__(self):
        if self.method not in ("angular_spectrum", "direct_sum"):
            raise ValueError(f"unknown propagation method {self.method!r}")
        if not 1.0 <= self.pad_factor <= 8.0:
            raise ValueError(f"pad_factor must be in [1, 8], got {self.pad_factor}")


DEFAULT_PLAN = PropagationPlan()
ORACLE_PLAN = PropagationPlan(pad_factor=4.0)


def _padded_size(n: int, pad_factor: float) -> int:
    """FFT-friendly padded size with the same parity as n.

    Matching parity keeps the aperture exactly centred on the padded grid,
    which preserves the inversion symmetry that centred masks and OAM
    receivers rely on.
    """
    m = sfft.next_fast_len(int(math.ceil(n * pad_factor)))
    while (m - n) % 2:
        m = sfft.next_fast_len(m + 1)
    return m


def _embed(weights: np.ndarray, npad: int) -> np.ndarray:
    n = weights.shape[0]
    out = np.zeros((npad, npad), dtype=complex)
    lo = (npad - n) // 2
    out[lo : lo + n, lo : lo + n] = weights
    return out


def _kernel_spectrum(npad: int, pitch: float, k: float, z: float) -> np.ndarray:
    """FFT of the sampled spherical-wave kernel exp(-1j*k*r)/r at hop z."""
    d = np.arange(npad)
    d = np.where(d <= npad // 2, d, d - npad) * pitch
    DX, DY = np.meshgrid(d, d, indexing="xy")
    r = np.sqrt(DX * DX + DY * DY + z * z)
    return sfft.fft2(np.exp(-1j * k * r) / r)


def _check_window_supports_distance(npad: int, pitch: float, lam: float, z: float) -> None:
    """Reject hops whose band-limited bandwidth collapses on this window."""
    extent = npad * pitch
    f_limit = 1.0 / (lam * math.sqrt((2.0 * z / extent) ** 2 + 1.0))
    if f_limit < 1.0 / extent:
        grow = math.ceil(4.0 * math.sqrt(2.0 * z * lam) / extent)
        raise SamplingError(
            f"padded window {extent:g} m cannot carry the field to z = {z:g} m "
            f"(band limit {f_limit:g} cycles/m below one bin {1.0 / extent:g})",
            required_pad_factor=max(2, grow),
        )


def _analytic_transfer(npad: int, pitch: float, k: float, dz: float, plan: PropagationPlan) -> np.ndarray:
    """Band-limited angular-spectrum transfer function for a field hop."""
    kx = 2.0 * np.pi * sfft.fftfreq(npad, d=pitch)
    KX, KY = np.meshgrid(kx, kx, indexing="xy")
    kz_sq = k * k - KX * KX - KY * KY
    prop = kz_sq > 0.0
    kz = np.sqrt(np.where(prop, kz_sq, 0.0))
    H = np.where(prop, np.exp(-1j * dz * kz), 0.0 + 0.0j)
    if not plan.evanescent_cutoff:
        decay = np.sqrt(np.where(prop, 0.0, -kz_sq))
        H = np.where(prop, H, np.exp(-decay * dz))
    if plan.band_limit:
        lam = 2.0 * np.pi / k
        extent = npad * pitch
        f_limit = 1.0 / (lam * math.sqrt((2.0 * dz / extent) ** 2 + 1.0))
        k_limit = 2.0 * np.pi * f_limit
        _check_window_supports_distance(npad, pitch, lam, dz)
        H = H * ((np.abs(KX) <= k_limit) & (np.abs(KY) <= k_limit))
    return H


def propagate_slice(field: FieldSlice, dz: float, plan: PropagationPlan | None = None,
                    wavelength: float | None = None) -> FieldSlice:
    """Propagate a sampled continuum field by dz with the analytic transfer.

    ``wavelength`` must be supplied (slices do not carry the carrier).
    """
    plan = plan or DEFAULT_PLAN
    if wavelength is None or wavelength <= 0:
        raise ValueError("propagate_slice needs the positive carrier wavelength")
    if dz < 0:
        raise ValueError(f"propagation step must be non-negative, got {dz}")
    n = field.samples.shape[0]
    npad = _padded_size(n, plan.pad_factor)
    k = 2.0 * np.pi / wavelength
    spec = sfft.fft2(_embed(field.samples, npad))
    out = sfft.ifft2(spec * _analytic_transfer(npad, field.sample_pitch, k, dz, plan))
    return FieldSlice(field.z + dz, out, field.sample_pitch, field.origin_offset)


def propagate_asm(field: ApertureField, z: float, plan: PropagationPlan | None = None) -> FieldSlice:
    """Propagate an aperture of point sources to the plane at distance z.

    The returned slice covers the padded plane (pad_factor times the
    aperture) in the oracle's physical units: a single unit element yields
    ``exp(-1j*k*r)/r`` samples.
    """
    plan = plan or DEFAULT_PLAN
    if plan.method != "angular_spectrum":
        raise ValueError(f"propagate_asm requires an angular_spectrum plan, got {plan.method!r}")
    if z <= 0:
        raise ValueError(f"propagation distance must be positive, got {z}")
    n = field.grid.elements_per_side
    pitch = field.grid.element_pitch
    npad = _padded_size(n, plan.pad_factor)
    if plan.band_limit:
        _check_window_supports_distance(npad, pitch, field.grid.wavelength, z)
    spec = sfft.fft2(_embed(field.weights, npad))
    out = sfft.ifft2(spec * _kernel_spectrum(npad, pitch, field.grid.wavenumber, z))
    return FieldSlice(z, out, pitch)


def propagate_direct(field: ApertureField, points: Sequence[Sequence[float]]) -> np.ndarray:
    """Exact spherical-wave sum at arbitrary points: E = sum w*exp(-1j*k*r)/r.

    Serves as the oracle for every other propagator.
    """
    X, Y = field.grid.meshgrid()
    k = field.grid.wavenumber
    w = field.weights
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 3:
        raise ValueError(f"points must be (x, y, z) triples, got shape {pts.shape}")
    if np.any(pts[:, 2] <= 0):
        raise ValueError("all evaluation points must have z > 0")
    out = np.empty(pts.shape[0], dtype=complex)
    for i, (px, py, pz) in enumerate(pts):
        r = np.sqrt((X - px) ** 2 + (Y - py) ** 2 + pz * pz)
        if np.any(r == 0.0):
            raise ValueError(f"evaluation point {(px, py, pz)} coincides with an element")
        out[i] = np.sum(w * np.exp(-1j * k * r) / r)
    return out


def _is_identity_mask(values: np.ndarray) -> bool:
    return bool(np.all(values == 1.0))


def propagate_with_obstacles(
    field: ApertureField,
    obstacles: Sequence[ObstacleSpec],
    z_target: float,
    plan: PropagationPlan | None = None,
) -> FieldSlice:
    """Hop the field through opaque obstacle planes to z_target.

    The aperture hop uses the point-source kernel; hops between obstacle
    planes propagate the masked continuum field with the analytic transfer
    function.  Obstacles whose mask is the identity are skipped.
    """
    plan = plan or DEFAULT_PLAN
    if z_target <= 0:
        raise ValueError(f"z_target must be positive, got {z_target}")
    obs = list(obstacles)
    zs = [o.plane_z for o in obs]
    if any(b <= a for a, b in zip(zs, zs[1:])):
        raise ValueError(f"obstacle planes must be strictly increasing, got {zs}")
    if any(z >= z_target for z in zs):
        raise ValueError(f"obstacle planes {zs} must lie before z_target {z_target}")

    lam = field.grid.wavelength
    # the aperture hop pads once; later hops stay on that grid
    hop_plan = PropagationPlan(
        method=plan.method,
        pad_factor=1.0,
        evanescent_cutoff=plan.evanescent_cutoff,
        band_limit=plan.band_limit,
    )
    current: FieldSlice | None = None
    for ob in obs:
        if current is None:
            candidate = propagate_asm(field, ob.plane_z, plan)
        else:
            candidate = propagate_slice(current, ob.plane_z - current.z, hop_plan, wavelength=lam)
        mask = make_obstacle_mask(candidate, ob)
        if ob.shape != "half_plane" and not _is_identity_mask(mask.values):
            # footprint must fit the propagated plane, not just the aperture
            half = candidate.extent / 2.0
            cx, cy = ob.center_offset
            if abs(cx) + ob.size / 2.0 > half or abs(cy) + ob.size / 2.0 > half:
                raise GeometryError(
                    f"obstacle footprint exceeds the propagated plane extent +-{half:g} m"
                )
        if _is_identity_mask(mask.values):
            continue
        current = FieldSlice(candidate.z, candidate.samples * mask.values, candidate.sample_pitch)
    if current is None:
        return propagate_asm(field, z_target, plan)
    return propagate_slice(current, z_target - current.z, hop_plan, wavelength=lam)


def axial_scan(field: ApertureField, z_values: Sequence[float]) -> np.ndarray:
    """On-axis complex amplitude at each distance, via the exact summation."""
    zv = np.asarray(z_values, dtype=float)
    if zv.size == 0:
        raise ValueError("z_values must not be empty")
    if np.any(zv <= 0):
        raise ValueError("z_values must be positive")
    if np.any(np.diff(zv) < 0):
        raise ValueError("z_values must be sorted ascending")
    return propagate_direct(field, [(0.0, 0.0, z) for z in zv])


# ---------------------------------------------------------------------------
# wideband behaviour


@dataclass(frozen=True)
class FrequencySweep:
    """Offsets around a centre frequency and the phase-reuse model.

    ``delay_model`` is ``fixed_phase`` (phase shifters: the centre-frequency
    phase map is reused verbatim) or ``true_time_delay`` (delay lines: the
    phase scales proportionally to f/f_c).
    """

    center_frequency: float
    offsets: tuple[float, ...]
    delay_model: str = "fixed_phase"

    def __post_init__(self):
        if self.center_frequency <= 0:
            raise ValueError(f"center_frequency must be positive, got {self.center_frequency}")
        if self.delay_model not in ("fixed_phase", "true_time_delay"):
            raise ValueError(f"unknown delay_model {self.delay_model!r}")
        object.__setattr__(self, "offsets", tuple(float(o) for o in self.offsets))
        for off in self.offsets:
            f = self.center_frequency + off
            if f <= 0:
                raise ValueError(f"offset {off:g} Hz makes the frequency non-positive")
            if abs(off) > 0.2 * self.center_frequency:
                raise ValueError(f"offset {off:g} Hz exceeds 20% of the centre frequency")

    def frequencies(self) -> tuple[float, ...]:
        return tuple(self.center_frequency + o for o in self.offsets)


def multi_frequency_scan(
    grid: ApertureGrid,
    wavefront,
    sweep: FrequencySweep,
    point: Sequence[float] | None = None,
    plane_z: float | None = None,
    plan: PropagationPlan | None = None,
):
    """Evaluate a centre-frequency wavefront design across a frequency sweep.

    ``wavefront`` is the profile recipe (a ``WavefrontSpec``) designed at
    the sweep's centre frequency, which must match the grid carrier.  In
    ``fixed_phase`` mode the centre-frequency phase profile is reused at
    every frequency; in ``true_time_delay`` mode the unwrapped delay
    profile is rescaled by f/f_c, which is exact retiming.  Exactly one
    observable is evaluated per frequency: a point (complex amplitude via
    the exact summation) or a transverse plane (``FieldSlice``).  Returns
    a list of (frequency, result) pairs.
    """
    if abs(grid.frequency - sweep.center_frequency) > 1e-6 * sweep.center_frequency:
        raise ValueError(
            f"grid carrier {grid.frequency:g} Hz differs from sweep centre "
            f"{sweep.center_frequency:g} Hz"
        )
    if (point is None) == (plane_z is None):
        raise ValueError("pass exactly one of point= or plane_z=")
    delay_phase = synthesize_delay_phase(grid, wavefront)
    results = []
    for f in sweep.frequencies():
        if sweep.delay_model == "true_time_delay":
            values = delay_phase * (f / sweep.center_frequency)
        else:
            values = delay_phase
        shifted = ApertureField(grid.with_frequency(f), np.exp(1j * values))
        if point is not None:
            results.append((f, complex(propagate_direct(shifted, [point])[0])))
        else:
            results.append((f, propagate_asm(shifted, plane_z, plan)))
    return results
