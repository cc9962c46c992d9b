"""Occupation maps over (pulse area x notch spacing/width) for N emitters.

Each column of the map (one spacing or width value) shares a single
synthesized unit-area envelope; the pulse-area axis is realized through
the exact linearity of the spectral construction, scaling the drive per
cell.  Cells are integrated in elementwise-vectorized batches, which
keeps every cell bitwise independent of batch shape, worker count and
scheduling; the output array is indexed by cell so assembly order never
matters.

Emitter i (1-based) sits on notch i; notch centers are placed at
carrier + (i - (N+1)/2) * spacing, symmetric about the carrier.  When
all dipole scales are equal and phonons are off, the final occupation
depends on the detuning magnitude only, so symmetric partners are
computed once and mirrored (disable with ``exploit_symmetry=False`` to
measure the symmetry instead of imposing it).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import HBAR_MEV_PS
from .dynamics import IntegrationError, _integrate_batch
from .phonon import PhononEnvironment
from .pulseshape import (
    ChirpSpec,
    FrequencyGrid,
    NotchSpec,
    apply_notch_mask,
    apply_phase_mask,
    default_grid,
    make_gaussian_spectrum,
    synthesize,
)

__all__ = [
    "SweepSpec",
    "OccupationMap",
    "SweepCellError",
    "run_sweep",
    "preset",
    "preset_names",
    "flip_chirp",
    "layout_offsets_mev",
    "plateau_occupation",
    "PLATEAU_LO_RAD",
    "PLATEAU_HI_RAD",
]

#: Pulse-area window over which "plateau occupation" is evaluated
#: (minimum occupation for theta in [8 pi, 16 pi]).
PLATEAU_LO_RAD = 8.0 * np.pi
PLATEAU_HI_RAD = 16.0 * np.pi

WORKERS_ENV_VAR = "MULTINARP_WORKERS"


class SweepCellError(RuntimeError):
    """Integration failed for one sweep cell; message carries coordinates."""

    def __reduce__(self):  # keep picklable across process boundaries
        return (self.__class__, (str(self),))


def layout_offsets_mev(n_emitters: int, spacing_mev: float) -> np.ndarray:
    """Detunings/notch offsets (i - (N+1)/2) * s for i = 1..N, in meV."""
    i = np.arange(1, n_emitters + 1, dtype=float)
    return (i - 0.5 * (n_emitters + 1)) * spacing_mev


@dataclass(frozen=True)
class SweepSpec:
    """Full parameterization of one occupation-map run.

    Exactly one of ``spacing_grid_mev`` / ``width_grid_mev`` must be
    given; the other quantity is fixed by ``notch_width_mev`` /
    ``spacing_mev`` respectively.
    """

    theta_grid_rad: tuple
    n_emitters: int
    tau0_ps: float = 0.120
    chirp_ps2: float = 0.5
    notch_width_mev: float | None = 1.0
    spacing_grid_mev: tuple | None = None
    width_grid_mev: tuple | None = None
    spacing_mev: float | None = None
    carrier_mev: float = 0.0
    phonons: PhononEnvironment | None = None
    dipole_scales: tuple | None = None
    grid: FrequencyGrid | None = None
    refine: int | None = None
    exploit_symmetry: bool = True

    def __post_init__(self):
        thetas = tuple(float(v) for v in self.theta_grid_rad)
        object.__setattr__(self, "theta_grid_rad", thetas)
        if len(thetas) == 0 or any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise ValueError("theta grid must be non-empty and strictly increasing")
        if any(v < 0 for v in thetas):
            raise ValueError("pulse areas must be >= 0")
        if self.n_emitters < 1:
            raise ValueError("need at least one emitter")
        if self.tau0_ps <= 0:
            raise ValueError("tau0 must be positive")
        if (self.spacing_grid_mev is None) == (self.width_grid_mev is None):
            raise ValueError("give exactly one of spacing_grid_mev / width_grid_mev")
        if self.spacing_grid_mev is not None:
            vals = tuple(float(v) for v in self.spacing_grid_mev)
            object.__setattr__(self, "spacing_grid_mev", vals)
            if self.notch_width_mev is None or self.notch_width_mev <= 0:
                raise ValueError("spacing sweep needs a positive notch_width_mev")
        else:
            vals = tuple(float(v) for v in self.width_grid_mev)
            object.__setattr__(self, "width_grid_mev", vals)
            if self.spacing_mev is None or self.spacing_mev <= 0:
                raise ValueError("width sweep needs a positive spacing_mev")
        if len(vals) == 0 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("axis grid must be non-empty and strictly increasing")
        if any(v <= 0 for v in vals):
            raise ValueError("spacings/widths must be positive")
        if self.dipole_scales is not None:
            d = tuple(float(v) for v in self.dipole_scales)
            object.__setattr__(self, "dipole_scales", d)
            if len(d) != self.n_emitters:
                raise ValueError("need one dipole scale per emitter")
            if any(v <= 0 for v in d):
                raise ValueError("dipole scales must be positive")

    @property
    def axis_name(self) -> str:
        return "spacing_mev" if self.spacing_grid_mev is not None else "width_mev"

    @property
    def axis_values(self) -> tuple:
        return (self.spacing_grid_mev if self.spacing_grid_mev is not None
                else self.width_grid_mev)

    def dipoles(self) -> np.ndarray:
        if self.dipole_scales is None:
            return np.ones(self.n_emitters)
        return np.asarray(self.dipole_scales, dtype=float)

    def resolve_grid(self) -> FrequencyGrid:
        return self.grid if self.grid is not None else default_grid(
            self.tau0_ps, center_mev=self.carrier_mev)


@dataclass(frozen=True)
class OccupationMap:
    """Final exciton occupations on (theta, axis value, emitter)."""

    theta_rad: np.ndarray
    axis_name: str
    axis_values_mev: np.ndarray
    occupations: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        theta = np.asarray(self.theta_rad, dtype=float)
        axis = np.asarray(self.axis_values_mev, dtype=float)
        occ = np.asarray(self.occupations, dtype=float)
        expected = (theta.size, axis.size, occ.shape[2] if occ.ndim == 3 else -1)
        if occ.ndim != 3 or occ.shape[:2] != expected[:2]:
            raise ValueError("occupations must have shape (n_theta, n_axis, n_emitters)")
        # integration keeps occupations physical to ~norm-drift accuracy
        if occ.size and (occ.min() < -1e-6 or occ.max() > 1.0 + 1e-6):
            raise ValueError("occupations must lie in [0, 1]")
        occ = np.clip(occ, 0.0, 1.0)
        object.__setattr__(self, "theta_rad", theta)
        object.__setattr__(self, "axis_values_mev", axis)
        object.__setattr__(self, "occupations", occ)

    @property
    def n_emitters(self) -> int:
        return self.occupations.shape[2]


def plateau_occupation(map_: OccupationMap, emitter: int | None = None) -> np.ndarray:
    """Minimum occupation over theta in [8 pi, 16 pi] per axis value.

    Returns shape (n_axis,) for one emitter or (n_axis, N) for all.
    """
    sel = (map_.theta_rad >= PLATEAU_LO_RAD - 1e-9) & (
        map_.theta_rad <= PLATEAU_HI_RAD + 1e-9)
    if not np.any(sel):
        raise ValueError("theta grid does not cover the plateau window")
    occ = map_.occupations[sel]
    result = occ.min(axis=0)
    return result[:, emitter] if emitter is not None else result


def _shaped_pulse(spec: SweepSpec, spacing: float, width: float):
    grid = spec.resolve_grid()
    offsets = layout_offsets_mev(spec.n_emitters, spacing)
    spectrum = make_gaussian_spectrum(spec.tau0_ps, spec.carrier_mev, 1.0, grid)
    spectrum = apply_notch_mask(
        spectrum, NotchSpec(tuple(spec.carrier_mev + offsets), width))
    spectrum = apply_phase_mask(spectrum, ChirpSpec(spec.chirp_ps2))
    return synthesize(spectrum), offsets


def _compute_column(spec: SweepSpec, col: int):
    """Occupations (n_theta, N) for one axis value, plus the refine used."""
    val = spec.axis_values[col]
    spacing = val if spec.axis_name == "spacing_mev" else spec.spacing_mev
    width = spec.notch_width_mev if spec.axis_name == "spacing_mev" else val
    pulse, offsets = _shaped_pulse(spec, spacing, width)

    thetas = np.asarray(spec.theta_grid_rad)
    dip = spec.dipoles()
    n = spec.n_emitters
    mirror = (
        spec.exploit_symmetry
        and (spec.phonons is None or not spec.phonons.enabled)
        and spec.dipole_scales is None
    )
    unique = [i for i in range(n) if i <= n - 1 - i] if mirror else list(range(n))
    deltas_u = offsets[unique] / HBAR_MEV_PS
    dip_u = dip[unique]

    nu = len(unique)
    deltas = np.tile(deltas_u, thetas.size)
    scales = np.repeat(thetas, nu) * np.tile(dip_u, thetas.size)
    try:
        res = _integrate_batch(pulse, deltas, scales, env=spec.phonons,
                               refine=spec.refine)
    except IntegrationError as exc:
        it, iu = divmod(exc.cell_index, nu)
        raise SweepCellError(
            f"cell theta_index={it} (theta={thetas[it]:.6g} rad) "
            f"column={col} ({spec.axis_name}={val:.6g}) "
            f"emitter_index={unique[iu] + 1}: {exc}"
        ) from exc
    occ_u = res["final_occupation"].reshape(thetas.size, nu)
    if not mirror:
        return occ_u, res["refine"]
    occ = np.empty((thetas.size, n))
    for iu, i in enumerate(unique):
        occ[:, i] = occ_u[:, iu]
        occ[:, n - 1 - i] = occ_u[:, iu]
    return occ, res["refine"]


def _resolve_workers(workers):
    if workers is None:
        env = os.environ.get(WORKERS_ENV_VAR, "")
        workers = int(env) if env.strip() else 1
    return max(1, int(workers))


def run_sweep(spec: SweepSpec, progress=None, workers: int | None = None) -> OccupationMap:
    """Run the full 2-D sweep and assemble the occupation map.

    ``progress(done_cells, total_cells)`` is invoked after each finished
    column.  ``workers`` > 1 distributes columns over processes; the
    result is bitwise identical for any worker count (override default
    via the MULTINARP_WORKERS environment variable).  Any cell failure
    aborts the sweep with the cell coordinates.
    """
    workers = _resolve_workers(workers)
    axis = spec.axis_values
    n_cols = len(axis)
    n_theta = len(spec.theta_grid_rad)
    cells_per_col = n_theta * spec.n_emitters
    total = n_cols * cells_per_col

    occ = np.empty((n_theta, n_cols, spec.n_emitters))
    refines = [0] * n_cols
    done = 0
    if workers == 1 or n_cols == 1:
        for j in range(n_cols):
            occ[:, j, :], refines[j] = _compute_column(spec, j)
            done += cells_per_col
            if progress is not None:
                progress(done, total)
    else:
        with ProcessPoolExecutor(max_workers=min(workers, n_cols)) as pool:
            futures = {pool.submit(_compute_column, spec, j): j for j in range(n_cols)}
            for fut in as_completed(futures):
                j = futures[fut]
                occ[:, j, :], refines[j] = fut.result()
                done += cells_per_col
                if progress is not None:
                    progress(done, total)

    from . import __version__

    metadata = {
        "tool": "multinarp",
        "version": __version__,
        "n_emitters": spec.n_emitters,
        "tau0_ps": spec.tau0_ps,
        "chirp_ps2": spec.chirp_ps2,
        "axis": spec.axis_name,
        "notch_width_mev": spec.notch_width_mev,
        "spacing_mev": spec.spacing_mev,
        "carrier_mev": spec.carrier_mev,
        "theta_points": n_theta,
        "theta_min_rad": spec.theta_grid_rad[0],
        "theta_max_rad": spec.theta_grid_rad[-1],
        "phonons_enabled": bool(spec.phonons is not None and spec.phonons.enabled),
        "phonon_temperature_k": (spec.phonons.temperature_K
                                 if spec.phonons is not None else None),
        "phonon_coupling_ps2": (spec.phonons.coupling_ps2
                                if spec.phonons is not None else None),
        "phonon_cutoff_mev": (spec.phonons.cutoff_mev
                              if spec.phonons is not None else None),
        "dipole_scales": (spec.dipole_scales if spec.dipole_scales is not None
                          else "equal"),
        "exploit_symmetry": spec.exploit_symmetry,
        "refine_per_column": tuple(refines),
    }
    return OccupationMap(
        theta_rad=np.asarray(spec.theta_grid_rad),
        axis_name=spec.axis_name,
        axis_values_mev=np.asarray(axis),
        occupations=occ,
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# presets reproducing the published occupation maps


def _theta_default():
    return tuple(np.linspace(0.0, 20.0 * np.pi, 81))


def _presets() -> dict:
    return {
        # 5 emitters, 1 meV notches, 0.5 ps^2 chirp, 120 fs pulse;
        # area x spacing map
        "fig2": SweepSpec(
            theta_grid_rad=_theta_default(),
            n_emitters=5,
            tau0_ps=0.120,
            chirp_ps2=0.5,
            notch_width_mev=1.0,
            spacing_grid_mev=tuple(np.linspace(1.0, 6.0, 51)),
        ),
        # same system at the optimal 3.4 meV spacing with phonons on;
        # run once per chirp sign for the asymmetry comparison
        "fig2e": SweepSpec(
            theta_grid_rad=_theta_default(),
            n_emitters=5,
            tau0_ps=0.120,
            chirp_ps2=0.5,
            notch_width_mev=1.0,
            spacing_grid_mev=(3.4,),
            phonons=PhononEnvironment(),
        ),
        # two emitters 7 meV apart, 0.3 ps^2 chirp (experimental config)
        "fig3c": SweepSpec(
            theta_grid_rad=_theta_default(),
            n_emitters=2,
            tau0_ps=0.120,
            chirp_ps2=0.3,
            notch_width_mev=1.0,
            spacing_grid_mev=(7.0,),
        ),
        # two-emitter area x spacing maps at three notch widths
        "fig4a": _fig4(1.0),
        "fig4b": _fig4(1.5),
        "fig4c": _fig4(2.0),
        # ten emitters, otherwise like fig2; spacings kept inside the
        # 120 fs bandwidth
        "figS3_10qd": SweepSpec(
            theta_grid_rad=_theta_default(),
            n_emitters=10,
            tau0_ps=0.120,
            chirp_ps2=0.5,
            notch_width_mev=1.0,
            spacing_grid_mev=tuple(np.linspace(1.6, 3.2, 9)),
        ),
    }


def _fig4(width: float) -> SweepSpec:
    return SweepSpec(
        theta_grid_rad=_theta_default(),
        n_emitters=2,
        tau0_ps=0.120,
        chirp_ps2=0.5,
        notch_width_mev=width,
        spacing_grid_mev=tuple(np.linspace(0.25, 8.0, 32)),
    )


def preset_names() -> tuple:
    return tuple(_presets().keys())


def preset(name: str) -> SweepSpec:
    """Named sweep parameterizations for the reference occupation maps."""
    table = _presets()
    if name not in table:
        raise ValueError(
            f"unknown preset {name!r}; known presets: {', '.join(table)}")
    return table[name]


def flip_chirp(spec: SweepSpec) -> SweepSpec:
    """Same sweep with the chirp sign reversed (for +/- comparisons)."""
    return replace(spec, chirp_ps2=-spec.chirp_ps2)
