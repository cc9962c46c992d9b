"""Shaped-pulse driving of multiple two-level emitters.

Builds chirped, spectrally notched femtosecond pulses, integrates the
optical Bloch equations for spectrally distinct emitters with optional
acoustic-phonon dephasing, and sweeps occupation maps over pulse area
and notch spacing or width.
"""

from .constants import HBAR_MEV_PS, KB_MEV_PER_K
from .dynamics import (
    BlochState,
    EmitterParams,
    IntegrationError,
    Trajectory,
    adiabaticity_margin,
    dressed_energies,
    integrate,
)
from .phonon import PhononEnvironment, bose_occupation, dressed_rates, spectral_density
from .pulseshape import (
    ChirpSpec,
    FrequencyGrid,
    GridError,
    NotchSpec,
    SpectralPulse,
    SynthesisError,
    TemporalPulse,
    apply_notch_mask,
    apply_phase_mask,
    chirp_rate,
    default_grid,
    fit_chirp_rate,
    make_gaussian_spectrum,
    notch_transmission,
    pulse_area,
    synthesize,
)
from .sweep import (
    OccupationMap,
    SweepCellError,
    SweepSpec,
    flip_chirp,
    layout_offsets_mev,
    plateau_occupation,
    preset,
    preset_names,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "HBAR_MEV_PS",
    "KB_MEV_PER_K",
    "FrequencyGrid",
    "SpectralPulse",
    "NotchSpec",
    "ChirpSpec",
    "TemporalPulse",
    "GridError",
    "SynthesisError",
    "default_grid",
    "make_gaussian_spectrum",
    "apply_phase_mask",
    "apply_notch_mask",
    "notch_transmission",
    "chirp_rate",
    "fit_chirp_rate",
    "synthesize",
    "pulse_area",
    "EmitterParams",
    "BlochState",
    "Trajectory",
    "IntegrationError",
    "integrate",
    "dressed_energies",
    "adiabaticity_margin",
    "PhononEnvironment",
    "spectral_density",
    "bose_occupation",
    "dressed_rates",
    "SweepSpec",
    "OccupationMap",
    "SweepCellError",
    "run_sweep",
    "preset",
    "preset_names",
    "flip_chirp",
    "layout_offsets_mev",
    "plateau_occupation",
    "__version__",
]
