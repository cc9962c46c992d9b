"""Acceptance gate: every criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.  The expensive occupation maps are computed once in
module-scoped fixtures and shared between criteria.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from multinarp.constants import HBAR_MEV_PS, KB_MEV_PER_K
from multinarp.dynamics import _integrate_batch, integrate, EmitterParams
from multinarp.phonon import PhononEnvironment, dressed_rates
from multinarp.pulseshape import (
    ChirpSpec,
    NotchSpec,
    TemporalPulse,
    apply_notch_mask,
    apply_phase_mask,
    chirp_rate,
    fit_chirp_rate,
    make_gaussian_spectrum,
    synthesize,
)
from multinarp.sweep import (
    SweepSpec,
    flip_chirp,
    plateau_occupation,
    preset,
    run_sweep,
)

TAU0 = 0.120
PI = np.pi


def report(num, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")
    return ok


# ---------------------------------------------------------------------------
# shared expensive computations


@pytest.fixture(scope="module")
def fig2_line():
    """fig2 preset narrowed to the optimal 3.4 meV spacing (one column)."""
    spec = replace(preset("fig2"), spacing_grid_mev=(3.4,))
    start = time.time()
    map_ = run_sweep(spec)
    return map_, time.time() - start


@pytest.fixture(scope="module")
def fig2e_pair():
    """fig2e preset run with both chirp signs (phonons on)."""
    spec = preset("fig2e")
    pos = run_sweep(spec)
    neg = run_sweep(flip_chirp(spec))
    return pos, neg


class TestCriterion1Rabi:
    def test_rabi_oracle(self):
        thetas = np.linspace(0, 6 * PI, 25)
        pulse = synthesize(make_gaussian_spectrum(TAU0, 0.0, 1.0))
        start = time.time()
        occ = _integrate_batch(pulse, np.zeros(25), thetas)["final_occupation"]
        elapsed = time.time() - start
        err = np.max(np.abs(occ - np.sin(thetas / 2) ** 2))
        ok = report(1, err < 1e-4 and elapsed < 5.0,
                    f"Rabi sin^2 oracle max err {err:.2e} (tol 1e-4), "
                    f"runtime {elapsed:.2f} s (limit 5 s)")
        assert ok


class TestCriterion2ChirpRate:
    def test_formula_vs_fft_phase_fit(self):
        pulse_base = make_gaussian_spectrum(TAU0, 0.0, 1.0)
        rels = {}
        for phi2 in (0.5, 0.3):
            pulse = synthesize(apply_phase_mask(pulse_base, ChirpSpec(phi2)))
            fitted = fit_chirp_rate(pulse)
            formula = chirp_rate(phi2, TAU0)
            rels[phi2] = abs(fitted - formula) / abs(formula)
        ok = report(2, max(rels.values()) < 1e-3,
                    "sweep-rate formula vs quadratic-phase fit: "
                    + ", ".join(f"phi2={k}: {v:.2e}" for k, v in rels.items())
                    + " (tol 1e-3)")
        assert ok


class TestCriterion3LandauZener:
    def test_flat_top_transition_probability(self):
        alpha = 1.0
        t_flat, sig_e = 30.0, 1.5

        def flattop(om):
            def fn(t):
                t = np.asarray(t, dtype=float)
                a = np.ones_like(t)
                m = np.abs(t) > t_flat
                a[m] = np.exp(-((np.abs(t[m]) - t_flat) ** 2)
                              / (2 * sig_e ** 2))
                return om * a * np.exp(-1j * alpha * t ** 2)

            tt = np.arange(-45.0, 45.0 + 0.002, 0.004)
            return TemporalPulse(times_ps=tt, envelope=fn(tt),
                                 alpha_ps2=alpha, theta_nominal_rad=0.0,
                                 tau0_ps=TAU0, envelope_fn=fn)

        omegas = [0.35, 0.6, np.sqrt(4 * alpha * np.log(2) / np.pi), 1.3, 1.8]
        worst = 0.0
        for om in omegas:
            traj = integrate(flattop(om), EmitterParams(0.0), refine=4)
            p_lz = 1 - np.exp(-PI * om ** 2 / (2 * abs(2 * alpha)))
            worst = max(worst, abs(traj.final_occupation - p_lz))
        ok = report(3, worst < 0.02,
                    f"Landau-Zener formula across {len(omegas)} drive "
                    f"strengths, worst |P_num - P_LZ| = {worst:.4f} (tol 0.02)")
        assert ok


class TestCriterion4Fig2LineCut:
    def test_plateau_above_0p9_with_rise(self, fig2_line):
        map_, elapsed = fig2_line
        sel = (map_.theta_rad >= 8 * PI - 1e-9) & \
              (map_.theta_rad <= 16 * PI + 1e-9)
        plateau_min = map_.occupations[sel, 0, :].min()
        ok_plateau = plateau_min > 0.9
        # rise-then-plateau: low at 2 pi, higher at 6 pi, flat after 8 pi
        i2 = np.argmin(np.abs(map_.theta_rad - 2 * PI))
        i6 = np.argmin(np.abs(map_.theta_rad - 6 * PI))
        rise = np.all(map_.occupations[i6, 0, :]
                      > map_.occupations[i2, 0, :])
        low_start = np.all(map_.occupations[0, 0, :] < 0.1)
        ok = report(4, ok_plateau and rise and low_start and elapsed < 300,
                    f"5-emitter line cut at 3.4 meV: plateau min "
                    f"{plateau_min:.3f} (>0.9), rise {rise}, runtime "
                    f"{elapsed:.0f} s (limit 300 s)")
        assert ok


class TestCriterion5PhononAsymmetry:
    def test_chirp_sign_orderings(self, fig2_line, fig2e_pair):
        free, _ = fig2_line
        pos, neg = fig2e_pair
        thetas = pos.theta_rad
        occ_free = free.occupations[:, 0, :]
        occ_pos = pos.occupations[:, 0, :]
        occ_neg = neg.occupations[:, 0, :]

        m55 = thetas >= 5.5 * PI - 1e-9
        dev = np.max(np.abs(occ_pos[m55] - occ_free[m55]))
        ok_a = dev < 0.01

        win = (thetas >= 5 * PI - 1e-9) & (thetas <= 12 * PI + 1e-9)
        gap_max = np.max(occ_pos[win] - occ_neg[win])
        ok_b = gap_max > 0.03

        i16 = np.argmin(np.abs(thetas - 16 * PI))
        gap16 = np.max(np.abs(occ_pos[i16] - occ_neg[i16]))
        ok_c = gap16 < 0.02

        ok = report(5, ok_a and ok_b and ok_c,
                    f"phonon asymmetry: (a) |pos-free| = {dev:.4f} for "
                    f"theta >= 5.5pi (tol 0.01), (b) max pos-neg gap in "
                    f"[5pi,12pi] = {gap_max:.4f} (> 0.03), (c) gap at 16pi "
                    f"= {gap16:.4f} (< 0.02)")
        assert ok


class TestCriterion6ThreeRegimes:
    def test_notch_width_regimes(self):
        # evaluated on a documented spacing subset of the fig4 presets:
        # two points in the merged-notch regime (s <= 0.5 delta), three
        # around the degraded regime (s ~ delta), two in the separable
        # regime (s >= 3 delta)
        details = []
        all_ok = True
        for name, width in (("fig4a", 1.0), ("fig4b", 1.5), ("fig4c", 2.0)):
            spec = preset(name)
            s_vals = [0.25 * width, 0.5 * width,
                      0.9 * width, 1.1 * width, 1.4 * width,
                      3.0 * width, 3.5 * width]
            spec = replace(spec, spacing_grid_mev=tuple(s_vals))
            map_ = run_sweep(spec, workers=2)
            plats = plateau_occupation(map_).min(axis=1)
            merged_ok = np.all(plats[:2] > 0.9)
            dip_ok = np.any(plats[2:5] < 0.8)
            separable_ok = np.all(plats[5:] > 0.9)
            all_ok &= merged_ok and dip_ok and separable_ok
            details.append(
                f"delta={width}: merged {plats[:2].min():.3f} (>0.9), "
                f"dip {plats[2:5].min():.3f} (<0.8), "
                f"separable {plats[5:].min():.3f} (>0.9)")
        ok = report(6, all_ok, "three-regime structure; " + "; ".join(details))
        assert ok


class TestCriterion7TenEmitters:
    def test_some_spacing_inverts_all_ten(self):
        spec = preset("figS3_10qd")
        best = (None, 0.0)
        # search the preset's spacing grid from the middle outward and
        # stop at the first spacing that inverts all ten emitters
        order = sorted(spec.spacing_grid_mev,
                       key=lambda s: abs(s - 2.4))
        for s in order:
            map_ = run_sweep(replace(spec, spacing_grid_mev=(s,)))
            worst = plateau_occupation(map_).min()
            if worst > best[1]:
                best = (s, worst)
            if worst > 0.9:
                break
        ok = report(7, best[1] > 0.9,
                    f"10-emitter inversion: spacing {best[0]} meV gives "
                    f"min plateau occupation {best[1]:.3f} (> 0.9)")
        assert ok


class TestCriterion8Invariants:
    def test_invariant_suite(self):
        rng = np.random.default_rng(2024)
        checks = {}

        # Parseval 1e-10 across randomized masks
        base = make_gaussian_spectrum(TAU0, 0.0, 1.0)
        worst = 0.0
        for _ in range(6):
            spec = apply_notch_mask(base, NotchSpec(
                tuple(np.sort(rng.uniform(-7, 7, rng.integers(1, 6)))),
                rng.uniform(0.4, 1.8)))
            spec = apply_phase_mask(spec, ChirpSpec(rng.uniform(-0.8, 0.8)))
            pulse = synthesize(spec)
            worst = max(worst, abs(pulse.temporal_energy
                                   - pulse.spectral_energy)
                        / pulse.spectral_energy)
        checks["parseval"] = (worst, 1e-10)

        # norm conservation 1e-6
        offs = (np.arange(1, 6) - 3.0) * 3.4
        shaped = apply_phase_mask(
            apply_notch_mask(base, NotchSpec(tuple(offs), 1.0)),
            ChirpSpec(0.5))
        pulse = synthesize(shaped)
        res = _integrate_batch(pulse, offs / HBAR_MEV_PS,
                               np.full(5, 12 * PI))
        checks["norm"] = (float(res["norm_drift"].max()), 1e-6)

        # frame invariance 1e-6
        worst = 0.0
        for _ in range(3):
            d = rng.uniform(-7, 7) / HBAR_MEV_PS
            th = rng.uniform(2, 12) * PI
            a = _integrate_batch(pulse, np.array([d]), np.array([th]),
                                 frame="carrier")["final_occupation"][0]
            b = _integrate_batch(pulse, np.array([d]), np.array([th]),
                                 frame="emitter")["final_occupation"][0]
            worst = max(worst, abs(a - b))
        checks["frame"] = (worst, 1e-6)

        # detuning symmetry 1e-6
        worst = 0.0
        for _ in range(3):
            d = rng.uniform(0.5, 7) / HBAR_MEV_PS
            th = rng.uniform(2, 14) * PI
            occ = _integrate_batch(pulse, np.array([d, -d]),
                                   np.array([th, th]))["final_occupation"]
            worst = max(worst, abs(occ[0] - occ[1]))
        checks["detuning-symmetry"] = (worst, 1e-6)

        # phonon-free +/- chirp invariance 1e-6
        neg = synthesize(apply_phase_mask(
            apply_notch_mask(base, NotchSpec(tuple(offs), 1.0)),
            ChirpSpec(-0.5)))
        ths = np.full(5, 8 * PI)
        a = _integrate_batch(pulse, offs / HBAR_MEV_PS, ths)["final_occupation"]
        b = _integrate_batch(neg, offs / HBAR_MEV_PS, ths)["final_occupation"]
        checks["chirp-sign"] = (float(np.max(np.abs(a - b))), 1e-6)

        # detailed balance, exact ratio formula
        env = PhononEnvironment(temperature_K=10.0)
        lam = np.linspace(0.05, 5.0, 25)
        emit, absorb = dressed_rates(lam, env)
        ratio_err = np.max(np.abs(
            emit / absorb / np.exp(lam / (KB_MEV_PER_K * 10.0)) - 1.0))
        checks["detailed-balance"] = (float(ratio_err), 1e-12)

        # sweep determinism across worker counts, bitwise
        spec = SweepSpec(
            theta_grid_rad=tuple(np.linspace(PI, 10 * PI, 4)),
            n_emitters=3, notch_width_mev=1.0,
            spacing_grid_mev=(2.0, 3.0, 3.4))
        m1 = run_sweep(spec, workers=1)
        m2 = run_sweep(spec, workers=2)
        m3 = run_sweep(spec, workers=3)
        bitwise = (np.array_equal(m1.occupations, m2.occupations)
                   and np.array_equal(m1.occupations, m3.occupations))
        checks["determinism"] = (0.0 if bitwise else 1.0, 0.5)

        all_ok = all(v < tol for v, tol in checks.values())
        ok = report(8, all_ok, "invariants: " + ", ".join(
            f"{k} {v:.2e} (tol {tol:g})" for k, (v, tol) in checks.items()))
        assert ok
