"""Ground-truth generators: complex-baseband TWDP sampling and synthetic
plane-wave fields on spatial grids.

Randomness comes from the counter-based Philox generator keyed by the user
seed, so streams are reproducible across platforms and runs. Gaussian draws
use the Box-Muller transform on open-interval uniforms (1 - U in (0, 1]
avoids log(0)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fading import FadingParams, specular_amplitudes
from .measurement import SPEED_OF_LIGHT, SpatialGrid

__all__ = [
    "ComplexSampleSet",
    "PlaneWave",
    "PlaneWaveScene",
    "sample_twdp",
    "synth_field",
]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _gaussian_pairs(rng: np.random.Generator, n: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Two independent N(0, sigma^2) arrays via Box-Muller."""
    u1 = 1.0 - rng.random(n)          # (0, 1]
    u2 = rng.random(n)
    radius = sigma * np.sqrt(-2.0 * np.log(u1))
    return radius * np.cos(2.0 * np.pi * u2), radius * np.sin(2.0 * np.pi * u2)


@dataclass
class ComplexSampleSet:
    """Independent complex-baseband fading realizations."""

    samples: np.ndarray
    seed: int
    params: FadingParams

    @property
    def envelopes(self) -> np.ndarray:
        return np.abs(self.samples)


def sample_twdp(params: FadingParams, n: int, seed: int) -> ComplexSampleSet:
    """Draw n independent realizations of the two-wave-plus-diffuse sum.

    Per sample, the two specular phases are independent and uniform on
    (0, 2pi) and the diffuse part is circular Gaussian with per-component
    variance sigma^2 = omega / (2 (1 + k)). Identical seeds give
    bit-identical sample sets.
    """
    if n < 1:
        raise DomainError("need at least one sample")
    rng = _rng(seed)
    v1, v2 = specular_amplitudes(params.k, params.delta, params.omega)
    sigma = np.sqrt(params.sigma2)
    phi1 = 2.0 * np.pi * rng.random(n)
    phi2 = 2.0 * np.pi * rng.random(n)
    x, y = _gaussian_pairs(rng, n, sigma)
    samples = v1 * np.exp(1j * phi1) + v2 * np.exp(1j * phi2) + x + 1j * y
    return ComplexSampleSet(samples, seed, params)


@dataclass
class PlaneWave:
    """One deterministic plane wave: amplitude, unit propagation direction,
    phase offset (rad) and an optional propagation delay (s) that rotates
    the phase across the frequency axis."""

    amplitude: float
    direction: tuple[float, float, float]
    phase: float = 0.0
    delay: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError("amplitude must be nonnegative")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise DomainError("direction must be a 3-D unit vector (tol 1e-12)")


@dataclass
class PlaneWaveScene:
    """Superposition scene evaluated on a spatial lattice.

    ``wavelength`` (metres) sets the lattice scale; ``spacing`` is in
    wavelengths. When ``freq_axis`` is omitted the single sounding
    frequency c/wavelength is used. ``diffuse_sigma2`` adds an i.i.d.
    circular Gaussian field (per-component variance) per lattice point and
    frequency. ``position_jitter`` perturbs each lattice coordinate by a
    uniform offset within +-jitter wavelengths (repeat-accuracy emulation,
    off by default).
    """

    waves: list[PlaneWave]
    wavelength: float
    shape: tuple[int, int, int] = (9, 9, 9)
    spacing: float = 0.35
    freq_axis: np.ndarray | None = None
    diffuse_sigma2: float = 0.0
    position_jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.wavelength <= 0:
            raise DomainError("wavelength must be positive")
        if self.spacing <= 0:
            raise DomainError("spacing must be positive")
        if self.diffuse_sigma2 < 0 or self.position_jitter < 0:
            raise DomainError("diffuse_sigma2 and position_jitter must be >= 0")
        if min(self.shape) < 1:
            raise DomainError("grid dimensions must be >= 1")


def synth_field(scene: PlaneWaveScene) -> SpatialGrid:
    """Evaluate the plane-wave superposition at every lattice point.

    H(p, f) = sum_w A_w exp(j (2 pi f / c) d_w . p + j phi_w - j 2 pi f tau_w)
    with p the point coordinates in metres, plus the optional diffuse field.
    """
    if len(scene.waves) == 0:
        raise DomainError("scene needs at least one wave")
    nx, ny, nz = scene.shape
    freqs = (np.asarray(scene.freq_axis, dtype=float)
             if scene.freq_axis is not None
             else np.array([SPEED_OF_LIGHT / scene.wavelength]))
    if np.any(freqs <= 0):
        raise DomainError("frequencies must be positive")
    rng = _rng(scene.seed)

    step = scene.spacing * scene.wavelength
    axes = [np.arange(n) * step for n in (nx, ny, nz)]
    px, py, pz = np.meshgrid(*axes, indexing="ij")
    pos = np.stack([px, py, pz], axis=-1)                       # (nx, ny, nz, 3)
    if scene.position_jitter > 0:
        jit = scene.position_jitter * scene.wavelength
        pos = pos + rng.uniform(-jit, jit, size=pos.shape)

    nf = len(freqs)
    h = np.zeros((nx, ny, nz, nf), dtype=complex)
    for wave in scene.waves:
        proj = pos @ np.asarray(wave.direction, dtype=float)    # (nx, ny, nz)
        for jf, f in enumerate(freqs):
            k_f = 2.0 * np.pi * f / SPEED_OF_LIGHT
            phase = k_f * proj + wave.phase - 2.0 * np.pi * f * wave.delay
            h[:, :, :, jf] += wave.amplitude * np.exp(1j * phase)
    if scene.diffuse_sigma2 > 0:
        sigma = np.sqrt(scene.diffuse_sigma2)
        size = nx * ny * nz * nf
        gx, gy = _gaussian_pairs(rng, size, sigma)
        h += (gx + 1j * gy).reshape(h.shape)
    return SpatialGrid(h, spacing=scene.spacing, freq_axis=freqs)
