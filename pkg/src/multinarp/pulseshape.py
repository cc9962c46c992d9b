"""Frequency-domain construction of chirped-and-notched pulses.

A transform-limited Gaussian pulse is built directly in the frequency
domain, masks multiply the complex spectral amplitude pointwise, and an
FFT synthesizes the rotating-frame Rabi envelope Omega(t).

Conventions
-----------
* The frequency grid stores photon energies in meV.  The grid center is
  the carrier; envelopes live in the frame rotating at the carrier, so
  only offsets w = (E - E_center) / hbar (rad/ps) enter the synthesis.
* Synthesis kernel: Omega(t) = (1/2pi) Int S(w) exp(-i w t) dw.  With
  this sign choice a positive quadratic spectral phase phi2 * w^2 / 2
  produces the envelope phase exp(-i alpha t^2), i.e. an instantaneous
  frequency that sweeps upward through the emitters in time.
* tau0 is always the intensity FWHM of the transform-limited pulse.
* The nominal pulse area Theta labels the unmasked transform-limited
  pulse: Int |Omega_TL(t)| dt = Theta.  Masks act on a fixed incident
  spectrum, so notches remove energy without relabeling Theta.  This
  mirrors how pulse areas are calibrated in shaped-pulse experiments
  (laser power measured without the notch filter).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .constants import HBAR_MEV_PS

__all__ = [
    "GridError",
    "SynthesisError",
    "FrequencyGrid",
    "SpectralPulse",
    "NotchSpec",
    "ChirpSpec",
    "TemporalPulse",
    "default_grid",
    "make_gaussian_spectrum",
    "apply_phase_mask",
    "apply_notch_mask",
    "notch_transmission",
    "chirp_rate",
    "synthesize",
    "pulse_area",
    "fit_chirp_rate",
    "gaussian_sigma_t",
    "spectral_intensity_fwhm_mev",
]

_LN2 = float(np.log(2.0))

#: Minimum number of grid points (resolution floor for notch masks).
MIN_GRID_POINTS = 2 ** 12

#: Envelope magnitude relative to peak that must be reached at the ends
#: of every synthesized time window.
EDGE_DECAY = 1e-6

#: Relative tolerance for the spectral/temporal energy balance check.
PARSEVAL_RTOL = 1e-10


class GridError(ValueError):
    """Frequency grid cannot represent the requested pulse."""


class SynthesisError(ValueError):
    """Time-domain synthesis failed a validity check."""


def gaussian_sigma_t(tau0_ps: float) -> float:
    """Field-envelope sigma (ps) of a Gaussian with intensity FWHM tau0."""
    return tau0_ps / (2.0 * np.sqrt(_LN2))


def spectral_intensity_fwhm_mev(tau0_ps: float) -> float:
    """Intensity FWHM (meV) of the transform-limited spectrum.

    For a Gaussian pulse with intensity FWHM tau0 this is
    hbar * 4 ln2 / tau0 (time-bandwidth product 2 ln2 / pi = 0.441
    in ordinary-frequency units).
    """
    return HBAR_MEV_PS * 4.0 * _LN2 / tau0_ps


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform energy grid centered on the pulse carrier.

    center_mev : carrier photon energy (meV); detunings are relative to it
    span_mev   : full width covered by the grid (meV)
    n_points   : number of samples, a power of two, at least 2**12
    """

    center_mev: float
    span_mev: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.center_mev) or not np.isfinite(self.span_mev):
            raise GridError("grid center and span must be finite")
        if self.span_mev <= 0:
            raise GridError("grid span must be positive")
        n = self.n_points
        if n < MIN_GRID_POINTS or (n & (n - 1)) != 0:
            raise GridError(
                f"n_points must be a power of two >= {MIN_GRID_POINTS}, got {n}"
            )

    @property
    def de_mev(self) -> float:
        return self.span_mev / self.n_points

    @property
    def dw_radps(self) -> float:
        return self.de_mev / HBAR_MEV_PS

    @property
    def energies_mev(self) -> np.ndarray:
        k = np.arange(self.n_points) - self.n_points // 2
        return self.center_mev + k * self.de_mev

    @property
    def offsets_radps(self) -> np.ndarray:
        """Angular-frequency offsets from the carrier (rad/ps)."""
        return (self.energies_mev - self.center_mev) / HBAR_MEV_PS

    @property
    def dt_ps(self) -> float:
        """Time step of the synthesized envelope."""
        return 2.0 * np.pi / (self.n_points * self.dw_radps)

    @property
    def t_total_ps(self) -> float:
        """Full time span reachable by synthesis on this grid."""
        return self.n_points * self.dt_ps


def default_grid(
    tau0_ps: float,
    center_mev: float = 0.0,
    n_points: int = 2 ** 14,
    span_factor: float = 16.0,
) -> FrequencyGrid:
    """Grid sized for a transform-limited pulse of duration tau0.

    The default span of 16x the spectral intensity FWHM keeps synthesis
    and energy-balance errors below the library test tolerances for
    chirps up to 1 ps^2.
    """
    if tau0_ps <= 0:
        raise GridError("tau0 must be positive")
    span = span_factor * spectral_intensity_fwhm_mev(tau0_ps)
    return FrequencyGrid(center_mev=center_mev, span_mev=span, n_points=n_points)


@dataclass(frozen=True)
class NotchSpec:
    """Gaussian spectral holes: centers (meV, ascending) and common width."""

    centers_mev: tuple
    width_mev: float

    def __post_init__(self):
        centers = tuple(float(c) for c in self.centers_mev)
        object.__setattr__(self, "centers_mev", centers)
        if len(centers) < 1:
            raise ValueError("at least one notch center required")
        if any(not np.isfinite(c) for c in centers):
            raise ValueError("notch centers must be finite")
        if list(centers) != sorted(centers):
            raise ValueError("notch centers must be sorted ascending")
        if not (self.width_mev > 0):
            raise ValueError("notch width must be positive")


@dataclass(frozen=True)
class ChirpSpec:
    """Quadratic spectral phase phi2 * (w - w0)^2 / 2, phi2 in ps^2, signed."""

    phi2_ps2: float

    def __post_init__(self):
        if not np.isfinite(self.phi2_ps2):
            raise ValueError("chirp phi2 must be finite")


@dataclass(frozen=True)
class SpectralPulse:
    """Complex spectral amplitude on a FrequencyGrid.

    The amplitude is normalized so that the unmasked pulse synthesizes
    to the nominal area; masks accumulate in ``chirp_ps2`` / ``notches``
    for provenance.  Treat arrays as immutable once constructed.
    """

    grid: FrequencyGrid
    amplitude: np.ndarray
    theta_nominal_rad: float
    tau0_ps: float
    chirp_ps2: float = 0.0
    notches: tuple = ()

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=complex)
        object.__setattr__(self, "amplitude", amp)
        if amp.shape != (self.grid.n_points,):
            raise ValueError("amplitude shape must match the grid")
        if not np.all(np.isfinite(amp.view(float))):
            raise ValueError("spectral amplitude must be finite everywhere")

    @property
    def spectral_energy(self) -> float:
        """(1/2pi) Int |S(w)|^2 dw, the temporal energy after synthesis."""
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.dw_radps / (2 * np.pi))


def make_gaussian_spectrum(
    tau0_ps: float,
    center_mev: float,
    theta_rad: float,
    grid: FrequencyGrid | None = None,
) -> SpectralPulse:
    """Transform-limited Gaussian spectrum with nominal pulse area theta.

    The synthesized (unmasked) envelope is a temporal Gaussian with
    intensity FWHM tau0 and Int |Omega(t)| dt = theta.

    Raises GridError when the grid is too narrow or too coarse for the
    requested pulse.
    """
    if tau0_ps <= 0:
        raise GridError("tau0 must be positive")
    if theta_rad < 0:
        raise GridError("nominal area must be non-negative")
    if grid is None:
        grid = default_grid(tau0_ps, center_mev=center_mev)
    if abs(center_mev - grid.center_mev) > 1e-9 * max(1.0, abs(center_mev)):
        raise GridError(
            "pulse center must coincide with the grid center "
            f"(got {center_mev}, grid {grid.center_mev})"
        )
    fwhm = spectral_intensity_fwhm_mev(tau0_ps)
    if grid.span_mev < 8.0 * fwhm:
        raise GridError(
            f"grid span {grid.span_mev:.3g} meV too narrow: need >= 8x the "
            f"spectral FWHM ({8 * fwhm:.3g} meV) to keep synthesis errors "
            "below tolerance"
        )
    if grid.de_mev > fwhm / 32.0:
        raise GridError(
            f"grid spacing {grid.de_mev:.3g} meV too coarse: need <= "
            f"FWHM/32 = {fwhm / 32:.3g} meV"
        )
    sigma_t = gaussian_sigma_t(tau0_ps)
    w = grid.offsets_radps
    amplitude = theta_rad * np.exp(-0.5 * (sigma_t * w) ** 2)
    return SpectralPulse(
        grid=grid,
        amplitude=amplitude.astype(complex),
        theta_nominal_rad=float(theta_rad),
        tau0_ps=float(tau0_ps),
    )


def apply_phase_mask(pulse: SpectralPulse, chirp: ChirpSpec) -> SpectralPulse:
    """Multiply by exp(i phi2 (w - w0)^2 / 2); |amplitude| is unchanged."""
    w = pulse.grid.offsets_radps
    mask = np.exp(0.5j * chirp.phi2_ps2 * w ** 2)
    return replace(
        pulse,
        amplitude=pulse.amplitude * mask,
        chirp_ps2=pulse.chirp_ps2 + chirp.phi2_ps2,
    )


def notch_transmission(energies_mev: np.ndarray, notch: NotchSpec) -> np.ndarray:
    """Amplitude transmission prod_i [1 - exp(-((E - E_i)/delta)^2)].

    Evaluated analytically at every grid point; notch centers are never
    snapped to the grid.
    """
    e = np.asarray(energies_mev, dtype=float)
    trans = np.ones_like(e)
    for c in notch.centers_mev:
        trans *= 1.0 - np.exp(-(((e - c) / notch.width_mev) ** 2))
    return trans


def apply_notch_mask(pulse: SpectralPulse, notch: NotchSpec) -> SpectralPulse:
    """Multiply the amplitude by the notch transmission; phase unchanged."""
    trans = notch_transmission(pulse.grid.energies_mev, notch)
    return replace(
        pulse,
        amplitude=pulse.amplitude * trans,
        notches=pulse.notches + (notch,),
    )


def chirp_rate(chirp: ChirpSpec | float, tau0_ps: float) -> float:
    """Temporal frequency-sweep rate alpha (ps^-2) of a chirped Gaussian.

    alpha = 2 phi2 / [tau0^4 / (2 ln2)^2 + (2 phi2)^2], with tau0 the
    intensity FWHM of the transform-limited pulse.  alpha carries the
    sign of phi2.  The envelope synthesized from a pure quadratic phase
    mask carries the temporal phase exp(-i alpha t^2); the independent
    check against the fitted phase of the FFT output lives in
    ``fit_chirp_rate``.
    """
    if tau0_ps <= 0:
        raise ValueError("tau0 must be positive")
    phi2 = chirp.phi2_ps2 if isinstance(chirp, ChirpSpec) else float(chirp)
    denom = tau0_ps ** 4 / (2.0 * _LN2) ** 2 + (2.0 * phi2) ** 2
    return 2.0 * phi2 / denom


@dataclass(frozen=True)
class TemporalPulse:
    """Rotating-frame Rabi envelope Omega(t) on a uniform time grid.

    times_ps    : uniform grid centered on the pulse arrival (ps)
    envelope    : complex Rabi frequency (rad/ps)
    alpha_ps2   : frequency sweep rate derived from the applied chirp
    spectral_energy : energy of the source spectrum, used for the
        Parseval check (None for directly constructed pulses)
    spectrum    : source SpectralPulse when synthesized, else None
    envelope_fn : optional callable t -> Omega used to refine the
        integration grid for analytic pulses
    """

    times_ps: np.ndarray
    envelope: np.ndarray
    alpha_ps2: float
    theta_nominal_rad: float
    tau0_ps: float
    spectral_energy: float | None = None
    spectrum: SpectralPulse | None = None
    envelope_fn: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times_ps, dtype=float)
        env = np.asarray(self.envelope, dtype=complex)
        object.__setattr__(self, "times_ps", t)
        object.__setattr__(self, "envelope", env)
        if t.ndim != 1 or t.shape != env.shape or t.size < 2:
            raise ValueError("times and envelope must be matching 1-d arrays")
        steps = np.diff(t)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("time grid must be uniform")

    @property
    def dt_ps(self) -> float:
        return float(self.times_ps[1] - self.times_ps[0])

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.envelope)))

    @property
    def temporal_energy(self) -> float:
        return float(np.sum(np.abs(self.envelope) ** 2) * self.dt_ps)

    def intensity_fwhm_ps(self) -> float:
        """Numerical intensity FWHM, refined by local log-quadratic fits."""
        return _intensity_fwhm(self.times_ps, np.abs(self.envelope) ** 2)


def _intensity_fwhm(t: np.ndarray, intensity: np.ndarray) -> float:
    peak = float(np.max(intensity))
    if peak <= 0:
        return 0.0
    half = 0.5 * peak
    above = intensity >= half
    idx = np.nonzero(above)[0]
    i0, i1 = idx[0], idx[-1]

    def cross(ic, inward):
        # quadratic interpolation of log-intensity: exact for Gaussians
        if ic == 0 or ic == t.size - 1:
            return t[ic]
        ts = t[ic - 1:ic + 2]
        ys = np.log(np.maximum(intensity[ic - 1:ic + 2], 1e-300))
        c = np.polynomial.polynomial.polyfit(ts - t[ic], ys, 2)
        lh = np.log(half) - c[0]
        disc = c[1] ** 2 + 4.0 * c[2] * lh
        if disc < 0 or c[2] == 0:
            # fall back to log-linear using the outward neighbor
            ia = ic - inward
            denom = ys[1 + 0] - np.log(max(intensity[ia], 1e-300))
            if denom == 0:
                return t[ic]
            frac = (np.log(half) - np.log(max(intensity[ia], 1e-300))) / denom
            return t[ia] + (t[ic] - t[ia]) * frac
        r1 = (-c[1] + np.sqrt(disc)) / (2.0 * c[2])
        r2 = (-c[1] - np.sqrt(disc)) / (2.0 * c[2])
        dt = t[1] - t[0]
        cands = [r for r in (r1, r2) if abs(r) <= 1.5 * abs(dt)]
        r = min(cands, key=abs) if cands else 0.0
        return t[ic] + r

    left = cross(i0, inward=-1)
    right = cross(i1, inward=1)
    return float(right - left)


def _synthesize_raw(pulse: SpectralPulse, oversample: int = 1):
    """Full-span FFT synthesis at dt / oversample resolution.

    Zero-padding in the frequency domain performs exact trigonometric
    interpolation, so oversampled samples coincide with the base samples
    at shared times.  Returns (times, envelope).
    """
    grid = pulse.grid
    n = grid.n_points
    m = n * int(oversample)
    wrapped = np.fft.ifftshift(pulse.amplitude)
    if m != n:
        padded = np.concatenate(
            [wrapped[: n // 2], np.zeros(m - n, dtype=complex), wrapped[n // 2:]]
        )
    else:
        padded = wrapped
    env = np.fft.fft(padded) * (grid.dw_radps / (2.0 * np.pi))
    env = np.fft.fftshift(env)
    dt = grid.dt_ps / oversample
    times = (np.arange(m) - m // 2) * dt
    return times, env


def _auto_window(times: np.ndarray, env: np.ndarray, fwhm_floor_ps: float):
    """Symmetric crop window covering the envelope support."""
    mag = np.abs(env)
    peak = mag.max()
    if peak == 0.0:
        half = max(5.0 * fwhm_floor_ps, 1.0)
        return half
    idx = np.nonzero(mag >= 1e-8 * peak)[0]
    support = max(abs(times[idx[0]]), abs(times[idx[-1]]))
    fwhm = _intensity_fwhm(times, mag ** 2)
    return max(1.3 * support, 6.0 * fwhm, 5.0 * fwhm_floor_ps)


def synthesize(pulse: SpectralPulse, t_span_ps: float | None = None) -> TemporalPulse:
    """Fourier-synthesize the masked spectrum into the Rabi envelope.

    The output grid is the FFT-native grid cropped to ``t_span_ps``
    (auto-sized from the synthesized envelope when None).  Raises
    SynthesisError if the envelope has not decayed below 1e-6 of its
    peak at the window edges, or if energy balance between the spectral
    and temporal representations fails.
    """
    times, env = _synthesize_raw(pulse, oversample=1)
    grid = pulse.grid

    if t_span_ps is None:
        half_span = _auto_window(times, env, pulse.tau0_ps)
    else:
        if t_span_ps <= 0:
            raise SynthesisError("t_span must be positive")
        half_span = 0.5 * t_span_ps
    if 2 * half_span > grid.t_total_ps:
        raise SynthesisError(
            f"requested span {2 * half_span:.3g} ps exceeds the {grid.t_total_ps:.3g} ps "
            "reachable on this grid; decrease the grid spacing (more points or "
            "smaller span per point)"
        )
    keep = np.abs(times) <= half_span + 0.5 * grid.dt_ps
    times = times[keep]
    env = env[keep]

    peak = float(np.max(np.abs(env)))
    if peak > 0.0:
        edge = max(abs(env[0]), abs(env[-1]))
        if edge > EDGE_DECAY * peak:
            mag = np.abs(env)
            idx = np.nonzero(mag >= EDGE_DECAY * mag.max())[0]
            need = 2.2 * max(abs(times[idx[0]]), abs(times[idx[-1]]))
            raise SynthesisError(
                f"envelope not decayed at the window edges (|edge|/peak = "
                f"{edge / peak:.2e}); use t_span >= {need:.1f} ps"
            )

    spectral_energy = pulse.spectral_energy
    temporal_energy = float(np.sum(np.abs(env) ** 2) * grid.dt_ps)
    if spectral_energy > 0:
        rel = abs(temporal_energy - spectral_energy) / spectral_energy
        if rel > PARSEVAL_RTOL:
            raise SynthesisError(
                f"energy balance violated: relative mismatch {rel:.2e} "
                f"(window too tight or grid too coarse)"
            )

    return TemporalPulse(
        times_ps=times,
        envelope=env,
        alpha_ps2=chirp_rate(pulse.chirp_ps2, pulse.tau0_ps),
        theta_nominal_rad=pulse.theta_nominal_rad,
        tau0_ps=pulse.tau0_ps,
        spectral_energy=spectral_energy,
        spectrum=pulse,
    )


def pulse_area(pulse: TemporalPulse) -> float:
    """Theta = Int |Omega(t)| dt over the stored window (rad)."""
    return float(np.sum(np.abs(pulse.envelope)) * pulse.dt_ps)


def fit_chirp_rate(pulse: TemporalPulse, amp_floor: float = 0.05) -> float:
    """Sweep rate from the synthesized envelope, independent of chirp_rate().

    Fits a quadratic to the unwrapped temporal phase where the envelope
    magnitude exceeds ``amp_floor`` of its peak, weighting by intensity,
    and returns minus the quadratic coefficient (the envelope carries
    exp(-i alpha t^2)).
    """
    mag = np.abs(pulse.envelope)
    peak = mag.max()
    if peak == 0:
        raise ValueError("cannot fit the phase of a zero envelope")
    sel = mag >= amp_floor * peak
    t = pulse.times_ps[sel]
    phase = np.unwrap(np.angle(pulse.envelope[sel]))
    weights = (mag[sel] / peak) ** 2
    coeffs = np.polynomial.polynomial.polyfit(t, phase, 2, w=weights)
    return -float(coeffs[2])
