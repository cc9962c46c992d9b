"""Two-level Bloch dynamics driven by shaped Rabi envelopes.

Hamiltonian convention, in the frame rotating at the pulse carrier:

    H(t)/hbar = 0.5 * [[-Delta, conj(W)], [W, +Delta]],   W = d_i * Omega(t)

with Delta = (emitter transition energy - carrier)/hbar in rad/ps and
d_i the dimensionless dipole scale.  Basis index 0 is the ground state,
1 the exciton; rho11 is the exciton occupation.  All observable results
(occupations) are independent of the sign bookkeeping; the choices here
match the synthesis convention of :mod:`multinarp.pulseshape`, where a
positive quadratic spectral phase sweeps the instantaneous frequency
upward so the system follows the lower dressed branch.

Without a phonon environment the state is a pure two-component
amplitude and the propagation is the Schroedinger equation.  With
phonons enabled the density matrix (rho11, rho01) is propagated with a
time-local dissipator built from the instantaneous dressed states, see
:mod:`multinarp.phonon`; the trace is conserved by construction.

Integration is fixed-step RK4 on the pulse time grid with a power-of-
two refinement.  The refinement is chosen deterministically from the
pulse and emitter parameters (never adaptively during a run), so
results are reproducible and cells of a parameter sweep can run in any
order or batch shape with bitwise-identical output: the stepper uses
elementwise arithmetic only.  Refined stage values of the envelope come
from zero-padded resynthesis of the source spectrum, which interpolates
exactly through the stored samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR_MEV_PS, KB_MEV_PER_K
from .phonon import PhononEnvironment
from .pulseshape import TemporalPulse, _intensity_fwhm, _synthesize_raw

__all__ = [
    "EmitterParams",
    "BlochState",
    "Trajectory",
    "IntegrationError",
    "integrate",
    "dressed_energies",
    "adiabaticity_margin",
]

#: Target phase advance per RK4 step; calibrated so the analytic-oracle
#: suites pass with two orders of magnitude of margin.
PHASE_PER_STEP = 0.35

#: Relative envelope magnitude below which the drive is treated as off.
WINDOW_FLOOR = 1e-9

#: Hard failure threshold on norm drift (pure-state runs) and positivity
#: violation (phonon runs).  Healthy runs stay below 1e-6.
FAIL_TOL = 1e-4

MAX_REFINE = 512


class IntegrationError(RuntimeError):
    """Propagation failed a validity check; carries the batch index."""

    def __init__(self, message: str, cell_index: int = 0):
        super().__init__(message)
        self.cell_index = cell_index


@dataclass(frozen=True)
class EmitterParams:
    """One two-level emitter: detuning from the carrier and dipole scale."""

    detuning_mev: float
    dipole_scale: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.detuning_mev):
            raise ValueError("detuning must be finite")
        if not (self.dipole_scale > 0):
            raise ValueError("dipole scale must be positive")

    @property
    def detuning_radps(self) -> float:
        return self.detuning_mev / HBAR_MEV_PS


@dataclass(frozen=True)
class BlochState:
    """Snapshot of the reduced density matrix: rho11 and rho01."""

    occupation: float
    coherence: complex

    def __post_init__(self):
        occ = float(self.occupation)
        if not (-1e-7 <= occ <= 1.0 + 1e-7):
            raise ValueError(f"occupation {occ} outside [0, 1]")
        object.__setattr__(self, "occupation", min(max(occ, 0.0), 1.0))
        coh2 = abs(self.coherence) ** 2
        if coh2 > occ * (1.0 - occ) + 1e-9:
            raise ValueError("coherence exceeds the physical bound")


@dataclass(frozen=True)
class Trajectory:
    """Decimated history of one driven emitter plus its final state."""

    times_ps: np.ndarray
    occupation: np.ndarray
    coherence: np.ndarray
    final_occupation: float
    norm_drift: float
    store_stride: int
    refine: int

    def final_state(self) -> BlochState:
        return BlochState(
            occupation=min(max(self.final_occupation, 0.0), 1.0),
            coherence=complex(self.coherence[-1]),
        )


def dressed_energies(omega_inst_radps, delta_inst_radps):
    """Instantaneous dressed-state energies (lam_plus, lam_minus), rad/ps.

    lam_pm = +- 0.5 * sqrt(delta^2 + omega^2); the splitting is even in
    both arguments and closes only at omega = delta = 0.
    """
    half = 0.5 * np.hypot(np.asarray(delta_inst_radps, dtype=float),
                          np.asarray(omega_inst_radps, dtype=float))
    if half.ndim == 0:
        return float(half), float(-half)
    return half, -half


def adiabaticity_margin(pulse: TemporalPulse, emitter: EmitterParams) -> float:
    """max_t |d(theta)/dt| / splitting using the ideal-chirp detuning.

    theta = 0.5 atan2(|W|, Delta_inst) with Delta_inst = Delta - 2 alpha t.
    Values well below one indicate adiabatic evolution.  A pulse that
    never couples (|W| = 0 everywhere) returns 0.
    """
    absw = emitter.dipole_scale * np.abs(pulse.envelope)
    if absw.max() == 0.0:
        return 0.0
    t = pulse.times_ps
    dinst = emitter.detuning_radps - 2.0 * pulse.alpha_ps2 * t
    theta = 0.5 * np.arctan2(absw, dinst)
    theta_dot = np.gradient(theta, pulse.dt_ps)
    splitting = np.hypot(dinst, absw)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(theta_dot == 0.0, 0.0, np.abs(theta_dot) / splitting)
    return float(np.max(ratio))


# ---------------------------------------------------------------------------
# stage-grid preparation


def _choose_refine(pulse, max_delta_radps, max_scale):
    dt = pulse.dt_ps
    mag = np.abs(pulse.envelope)
    peak = mag.max() * max_scale
    if peak == 0.0:
        return 1
    # times where the envelope still matters at the 1e-4 level set how far
    # the chirp phase 2*alpha*t must be resolved
    idx = np.nonzero(mag >= 1e-4 * mag.max())[0]
    t_sup = max(abs(pulse.times_ps[idx[0]]), abs(pulse.times_ps[idx[-1]]))
    fwhm = _intensity_fwhm(pulse.times_ps, mag ** 2)
    rate = (
        0.5 * max_delta_radps
        + peak
        + 2.0 * abs(pulse.alpha_ps2) * t_sup
        + 8.0 / max(fwhm, 4.0 * dt)
    )
    r = dt * rate / PHASE_PER_STEP
    if r <= 1.0:
        return 1
    return int(min(MAX_REFINE, 2 ** int(np.ceil(np.log2(r)))))


def _window_indices(pulse):
    """Native-grid index range [j0, j1] outside which the drive is off."""
    mag = np.abs(pulse.envelope)
    peak = mag.max()
    n = mag.size
    if peak == 0.0:
        return 0, 0
    idx = np.nonzero(mag >= WINDOW_FLOOR * peak)[0]
    fwhm = _intensity_fwhm(pulse.times_ps, mag ** 2)
    pad = int(np.ceil(max(2.0 * fwhm, 1.0) / pulse.dt_ps))
    j0 = max(0, idx[0] - pad)
    j1 = min(n - 1, idx[-1] + pad)
    return int(j0), int(j1)


def _stage_envelope(pulse, refine, j0, j1):
    """Envelope samples at half-step resolution over the window.

    Returns (t_half, env_half) with spacing dt/(2*refine); index 2*k is
    integration step k.  Spectrum-backed pulses are resynthesized with
    zero padding (exact through the stored samples); pulses carrying an
    analytic ``envelope_fn`` are evaluated directly; otherwise stage
    midpoints fall back to second-order interpolation.
    """
    dt = pulse.dt_ps
    h2 = dt / (2 * refine)
    n_half = (j1 - j0) * 2 * refine + 1
    t_half = pulse.times_ps[j0] + h2 * np.arange(n_half)
    if pulse.spectrum is not None and refine >= 1:
        times_f, env_f = _synthesize_raw(pulse.spectrum, oversample=2 * refine)
        # locate j0 on the oversampled grid: shared origin at index m/2
        start = np.searchsorted(times_f, pulse.times_ps[j0] - 0.25 * h2)
        env_half = env_f[start:start + n_half]
        if env_half.size != n_half:
            raise IntegrationError("stage grid fell outside the synthesis span")
    elif pulse.envelope_fn is not None:
        env_half = np.asarray(pulse.envelope_fn(t_half), dtype=complex)
    else:
        env_half = np.empty(n_half, dtype=complex)
        env_half[0::2] = pulse.envelope[j0:j1 + 1]
        mids = 0.5 * (env_half[0:-1:2] + env_half[2::2])
        env_half[1::2] = mids
    return t_half, env_half


# ---------------------------------------------------------------------------
# pure-state kernel


def _run_schroedinger(env_half, h, deltas, scales, t0, frame, record_every=None):
    """RK4 on i dpsi/dt = H psi for a batch of cells.

    Elementwise arithmetic only, so per-cell results do not depend on
    the batch shape.  When ``record_every`` is given, the state is
    recorded every that many steps (index 0 included); otherwise only
    the final state is returned.
    """
    k = deltas.size
    c0 = np.ones(k, dtype=complex)
    c1 = np.zeros(k, dtype=complex)
    g_all = -0.5j * env_half
    emitter_frame = frame == "emitter"
    if not emitter_frame:
        b = -0.5j * deltas  # dc1 += b*c1 ; dc0 += conj(b)*c0
        bbar = np.conj(b)

        def rhs(x0, x1, g):
            sg = scales * g
            return bbar * x0 - np.conj(sg) * x1, sg * x0 + b * x1

    else:  # detuning folded into the envelope phase
        n_half = env_half.size
        t_half = t0 + (h / 2.0) * np.arange(n_half)
        phases = np.exp(1j * np.outer(t_half, deltas))  # (n_half, K)

        def rhs_e(x0, x1, g, ph):
            sg = scales * g * ph
            return -np.conj(sg) * x1, sg * x0

    n_steps = (env_half.size - 1) // 2
    sixth = h / 6.0
    half_h = 0.5 * h
    rec0, rec1 = [], []
    if record_every:
        rec0.append(c0)
        rec1.append(c1)
    for j in range(n_steps):
        g1 = g_all[2 * j]
        g2 = g_all[2 * j + 1]
        g3 = g_all[2 * j + 2]
        if not emitter_frame:
            a0, a1 = rhs(c0, c1, g1)
            b0, b1 = rhs(c0 + half_h * a0, c1 + half_h * a1, g2)
            d0, d1 = rhs(c0 + half_h * b0, c1 + half_h * b1, g2)
            e0, e1 = rhs(c0 + h * d0, c1 + h * d1, g3)
        else:
            p1, p2, p3 = phases[2 * j], phases[2 * j + 1], phases[2 * j + 2]
            a0, a1 = rhs_e(c0, c1, g1, p1)
            b0, b1 = rhs_e(c0 + half_h * a0, c1 + half_h * a1, g2, p2)
            d0, d1 = rhs_e(c0 + half_h * b0, c1 + half_h * b1, g2, p2)
            e0, e1 = rhs_e(c0 + h * d0, c1 + h * d1, g3, p3)
        c0 = c0 + sixth * (a0 + 2.0 * (b0 + d0) + e0)
        c1 = c1 + sixth * (a1 + 2.0 * (b1 + d1) + e1)
        if record_every and (j + 1) % record_every == 0:
            rec0.append(c0)
            rec1.append(c1)
    if record_every:
        return np.stack(rec0), np.stack(rec1)
    return c0, c1


# ---------------------------------------------------------------------------
# density-matrix kernel with dressed-state relaxation


def _run_lindblad(env_half, t_half, h, deltas, scales, alpha, env,
                  record_every=None):
    """RK4 on the Bloch equations with time-local dressed-state rates.

    State is (p, q) = (rho11, rho01); rho00 = 1 - p keeps the trace
    exact.  The dissipator uses jump operators between the instantaneous
    dressed states of the ideal-chirp Hamiltonian (detuning
    Delta - 2 alpha t, drive magnitude |W|), rotated back to the carrier
    frame with the ideal-chirp phase.  Rates carry the sin^2(2 theta)
    projection factor; see :mod:`multinarp.phonon`.
    """
    k = deltas.size
    p = np.zeros(k, dtype=float)
    q = np.zeros(k, dtype=complex)
    g_all = -0.5j * env_half
    abs_all = np.abs(env_half)
    zc_all = np.exp(-1j * alpha * t_half ** 2)  # e^{-i alpha t^2}

    ap = env.coupling_ps2
    wc2 = env.cutoff_radps ** 2
    kt = env.kt_mev
    pref = 0.5 * np.pi

    def rhs(pp, qq, g, absw_raw, zc, dinst):
        # Hamiltonian part: dp = Im(W q); dq = i d q - i conj(W)/2 (2p-1)
        sg = scales * g                     # -i W / 2
        dp = 2.0 * np.real(sg * qq)         # Im(W q) = 2 Re(-i W q / 2)
        dq = (1j * deltas) * qq - np.conj(sg) * (2.0 * pp - 1.0)
        if ap == 0.0:
            return dp, dq
        absw = scales * absw_raw
        lam = np.hypot(dinst, absw)
        ok = lam > 0.0
        lam_safe = np.where(ok, lam, 1.0)
        c2 = np.where(ok, dinst / lam_safe, 1.0)   # cos 2theta
        s2 = np.where(ok, absw / lam_safe, 0.0)    # sin 2theta
        with np.errstate(over="ignore"):
            j_rate = ap * lam * lam * lam * np.exp(-(lam * lam) / wc2)
        if kt > 0.0:
            x = np.minimum(lam * (HBAR_MEV_PS / kt), 700.0)
            with np.errstate(divide="ignore", over="ignore"):
                nb = np.where(ok, 1.0 / np.expm1(np.where(ok, x, 1.0)), 0.0)
        else:
            nb = 0.0
        gam = pref * (s2 * s2) * j_rate
        g_dn = gam * (nb + 1.0)
        g_up = gam * nb
        # dressed-frame components of rho (coherence rotated by zc)
        q_ic = qq * zc
        re_qic = np.real(q_ic)
        cth2 = 0.5 * (1.0 + c2)   # cos^2 theta
        sth2 = 0.5 * (1.0 - c2)   # sin^2 theta
        p_up = sth2 * (1.0 - pp) + s2 * re_qic + cth2 * pp
        p_dn = cth2 * (1.0 - pp) - s2 * re_qic + sth2 * pp
        chi = 0.5 * s2 * (1.0 - 2.0 * pp) + cth2 * q_ic - sth2 * np.conj(q_ic)
        a = g_dn * p_up - g_up * p_dn
        gtot = 0.5 * (g_dn + g_up)
        d11 = -a * c2 + gtot * s2 * np.real(chi)
        d01 = -a * s2 - gtot * (cth2 * chi - sth2 * np.conj(chi))
        return dp + d11, dq + d01 * np.conj(zc)

    n_steps = (env_half.size - 1) // 2
    sixth = h / 6.0
    half_h = 0.5 * h
    rec_p, rec_q = [], []
    if record_every:
        rec_p.append(p)
        rec_q.append(q)
    for j in range(n_steps):
        i0, i1, i2 = 2 * j, 2 * j + 1, 2 * j + 2
        din0 = deltas - 2.0 * alpha * t_half[i0]
        din1 = deltas - 2.0 * alpha * t_half[i1]
        din2 = deltas - 2.0 * alpha * t_half[i2]
        a_p, a_q = rhs(p, q, g_all[i0], abs_all[i0], zc_all[i0], din0)
        b_p, b_q = rhs(p + half_h * a_p, q + half_h * a_q,
                       g_all[i1], abs_all[i1], zc_all[i1], din1)
        c_p, c_q = rhs(p + half_h * b_p, q + half_h * b_q,
                       g_all[i1], abs_all[i1], zc_all[i1], din1)
        d_p, d_q = rhs(p + h * c_p, q + h * c_q,
                       g_all[i2], abs_all[i2], zc_all[i2], din2)
        p = p + sixth * (a_p + 2.0 * (b_p + c_p) + d_p)
        q = q + sixth * (a_q + 2.0 * (b_q + c_q) + d_q)
        if record_every and (j + 1) % record_every == 0:
            rec_p.append(p)
            rec_q.append(q)
    if record_every:
        return np.stack(rec_p), np.stack(rec_q)
    return p, q


# ---------------------------------------------------------------------------
# batch driver


def _integrate_batch(
    pulse: TemporalPulse,
    deltas_radps: np.ndarray,
    scales: np.ndarray,
    env: PhononEnvironment | None = None,
    frame: str = "carrier",
    refine: int | None = None,
    keep_states: bool = False,
):
    """Propagate a batch of cells through the pulse; returns a dict.

    Cells are (detuning, scale) pairs sharing one envelope.  The scale
    multiplies the envelope, which the pulse-area convention makes exact
    for realizing different nominal areas from a unit-area synthesis.
    """
    if frame not in ("carrier", "emitter"):
        raise ValueError("frame must be 'carrier' or 'emitter'")
    if env is not None and env.enabled and frame != "carrier":
        raise ValueError("phonon runs support the carrier frame only")
    deltas = np.atleast_1d(np.asarray(deltas_radps, dtype=float))
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    if deltas.shape != scales.shape:
        raise ValueError("deltas and scales must have matching shapes")

    use_phonons = env is not None and env.enabled and env.coupling_ps2 > 0
    j0, j1 = _window_indices(pulse)
    max_scale = float(scales.max()) if scales.size else 1.0
    if refine is None:
        refine = _choose_refine(pulse, float(np.max(np.abs(deltas), initial=0.0)),
                                max_scale)
    refine = int(refine)
    if refine < 1:
        raise ValueError("refine must be >= 1")

    k = deltas.size
    if j1 <= j0:  # zero drive: nothing evolves
        finals = np.zeros(k)
        out = {
            "final_occupation": finals,
            "final_coherence": np.zeros(k, dtype=complex),
            "norm_drift": np.zeros(k),
            "refine": refine,
            "window": (j0, j1),
        }
        if keep_states:
            out["occ_window"] = np.zeros((1, k))
            out["coh_window"] = np.zeros((1, k), dtype=complex)
        return out

    t_half, env_half = _stage_envelope(pulse, refine, j0, j1)
    h = pulse.dt_ps / refine
    record_every = refine if keep_states else None

    occ = coh = None
    if use_phonons:
        res = _run_lindblad(env_half, t_half, h, deltas, scales,
                            pulse.alpha_ps2, env, record_every=record_every)
        if keep_states:
            occ, coh = res
            p_end, q_end = occ[-1], coh[-1]
        else:
            p_end, q_end = res
        viol = np.maximum(np.abs(q_end) ** 2 - p_end * (1.0 - p_end), 0.0)
        drift = np.maximum(viol, np.maximum(p_end - 1.0, -p_end))
        finals = p_end
        coh_end = q_end
    else:
        res = _run_schroedinger(env_half, h, deltas, scales,
                                pulse.times_ps[j0], frame,
                                record_every=record_every)
        if keep_states:
            c0, c1 = res
            occ = np.abs(c1) ** 2
            coh = c0 * np.conj(c1)
            c0_end, c1_end = c0[-1], c1[-1]
        else:
            c0_end, c1_end = res
        finals = np.abs(c1_end) ** 2
        coh_end = c0_end * np.conj(c1_end)
        norm = np.abs(c0_end) ** 2 + finals
        drift = np.abs(norm - 1.0)

    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(finals) | (drift > FAIL_TOL) | ~np.isfinite(drift)
    if np.any(bad):
        worst = int(np.argmax(np.where(np.isfinite(drift), drift, np.inf)))
        raise IntegrationError(
            f"propagation failed validity checks (worst drift "
            f"{drift[worst]:.3e} at batch cell {worst}; refine={refine}); "
            "increase refine",
            cell_index=worst,
        )

    out = {
        "final_occupation": finals,
        "final_coherence": coh_end,
        "norm_drift": drift,
        "refine": refine,
        "window": (j0, j1),
    }
    if keep_states:
        out["occ_window"] = occ
        out["coh_window"] = coh
    return out


def integrate(
    pulse: TemporalPulse,
    emitter: EmitterParams,
    env: PhononEnvironment | None = None,
    frame: str = "carrier",
    refine: int | None = None,
    store_stride: int | None = None,
) -> Trajectory:
    """Propagate one emitter from the ground state through the pulse.

    The trajectory is stored on the pulse time grid decimated by
    ``store_stride`` (auto-chosen to keep at most ~2048 samples).
    Outside the integration window the occupation is constant and the
    coherence advances analytically, so stored samples there are filled
    without stepping.
    """
    res = _integrate_batch(
        pulse,
        np.array([emitter.detuning_radps]),
        np.array([emitter.dipole_scale]),
        env=env,
        frame=frame,
        refine=refine,
        keep_states=True,
    )
    n = pulse.times_ps.size
    if store_stride is None:
        store_stride = max(1, n // 2048)
    store_stride = int(store_stride)

    occ_full = np.zeros(n)
    coh_full = np.zeros(n, dtype=complex)
    j0, j1 = res["window"]
    occ_w = res["occ_window"][:, 0]
    coh_w = res["coh_window"][:, 0]
    occ_full[j0:j1 + 1] = occ_w
    coh_full[j0:j1 + 1] = coh_w
    # after the window the populations are frozen; the coherence rotates
    if j1 < n - 1:
        dt_tail = pulse.times_ps[j1 + 1:] - pulse.times_ps[j1]
        if frame == "carrier":
            rot = np.exp(1j * emitter.detuning_radps * dt_tail)
        else:
            rot = np.ones_like(dt_tail, dtype=complex)
        occ_full[j1 + 1:] = occ_w[-1]
        coh_full[j1 + 1:] = coh_w[-1] * rot

    sel = slice(0, n, store_stride)
    return Trajectory(
        times_ps=pulse.times_ps[sel],
        occupation=occ_full[sel],
        coherence=coh_full[sel],
        final_occupation=float(res["final_occupation"][0]),
        norm_drift=float(res["norm_drift"][0]),
        store_stride=store_stride,
        refine=res["refine"],
    )
