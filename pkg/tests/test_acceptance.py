"""Release acceptance suite.

One test per acceptance criterion; each prints a single
``criterion NN <label>: PASS|FAIL`` line (run with ``pytest -s`` to see
the lines as they stream) and then asserts, so the suite doubles as a
human-readable checklist and a hard gate.
"""

import math
import time

import numpy as np
import pytest

from nvcavity import circuit
from nvcavity import coupling as cp
from nvcavity import fieldmap as fm
from nvcavity import nvspin
from nvcavity import spectroscopy as sp
from nvcavity.constants import MU_0


def _verdict(num: int, label: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    extra = f" ({detail})" if detail else ""
    print(f"criterion {num:02d} {label}: {status}{extra}")
    return ok


REFERENCE_SYSTEM = sp.CoupledSystem(omega_c=3.121e9, kappa=1.91e6,
                                    omega_s=3.121e9, gamma_star=3.0e6,
                                    Omega=12.46e6)


def test_criterion_01_on_resonance_identity():
    rng = np.random.default_rng(20240819)
    n_cases = 10_000
    rates = 10.0 ** rng.uniform(2.0, 8.0, size=(n_cases, 3))
    omega = 3.121e9

    t0 = time.perf_counter()
    worst = 0.0
    for big_omega, kappa, gamma_star in rates:
        sys_ = sp.CoupledSystem(omega_c=omega, kappa=kappa, omega_s=omega,
                                gamma_star=gamma_star, Omega=big_omega)
        got = sp.s21_squared(sys_, omega)
        want = (1.0 + big_omega**2 / (kappa * gamma_star)) ** -2
        worst = max(worst, abs(got - want) / want)
    elapsed = time.perf_counter() - t0

    ok = worst <= 1e-12 and elapsed < 1.0
    assert _verdict(1, "on-resonance transmission identity", ok,
                    f"worst rel err {worst:.2e}, {elapsed:.2f} s")


def test_criterion_02_reference_operating_point():
    spec = sp.spectrum(REFERENCE_SYSTEM, 3.121e9 - 30e6, 3.121e9 + 30e6, 4001)
    splitting = sp.peak_splitting(spec)
    split_err = abs(splitting - 2 * REFERENCE_SYSTEM.Omega) / (2 * REFERENCE_SYSTEM.Omega)
    coop = REFERENCE_SYSTEM.cooperativity

    ok = split_err <= 0.03 and abs(coop - 27.1) <= 0.2
    assert _verdict(2, "reference operating point", ok,
                    f"splitting off by {split_err:.2%}, C = {coop:.3f}")


def test_criterion_03_fit_recovery_under_noise():
    clean = sp.spectrum(REFERENCE_SYSTEM, 3.121e9 - 30e6, 3.121e9 + 30e6, 1201)
    guess = sp.CoupledSystem(omega_c=3.1207e9, kappa=1.4e6, omega_s=3.1214e9,
                             gamma_star=2.2e6, Omega=9e6)

    t0 = time.perf_counter()
    recovered = {"Omega": [], "kappa": [], "gamma_star": []}
    for seed in range(100):
        noisy = sp.with_multiplicative_noise(clean, 0.01, seed)
        result = sp.fit_spectrum(noisy, guess)
        recovered["Omega"].append(result.system.Omega)
        recovered["kappa"].append(result.system.kappa)
        recovered["gamma_star"].append(result.system.gamma_star)
    elapsed = time.perf_counter() - t0

    med_omega = float(np.median(recovered["Omega"]))
    med_kappa = float(np.median(recovered["kappa"]))
    med_gamma = float(np.median(recovered["gamma_star"]))
    ok = (abs(med_omega - 12.46e6) / 12.46e6 <= 0.02
          and abs(med_kappa - 1.91e6) / 1.91e6 <= 0.05
          and abs(med_gamma - 3.0e6) / 3.0e6 <= 0.05
          and elapsed < 30.0)
    assert _verdict(3, "fit recovery from 100 noisy spectra", ok,
                    f"median Omega {med_omega / 1e6:.4f} MHz, "
                    f"kappa {med_kappa / 1e6:.4f} MHz, "
                    f"gamma* {med_gamma / 1e6:.4f} MHz, {elapsed:.1f} s")


def test_criterion_04_zero_field_and_tetrahedral_symmetry():
    species = nvspin.SpinSpecies()
    no_field = np.zeros(3)
    zero_ok = all(
        nvspin.transition_frequencies(species, axis, no_field).f_lower == 2.87e9
        and nvspin.transition_frequencies(species, axis, no_field).f_upper == 2.87e9
        for axis in nvspin.NV_AXES)

    b0 = 0.010 * np.array([0.0, 1.0, 0.0])
    levels = [nvspin.transition_frequencies(species, axis, b0)
              for axis in nvspin.NV_AXES]
    spread = 0.0
    for branch in ("f_lower", "f_upper"):
        values = [getattr(lv, branch) for lv in levels]
        spread = max(spread, (max(values) - min(values)) / min(values))
    ok = zero_ok and spread <= 1e-12

    assert _verdict(4, "zero-field transitions and four-axis symmetry", ok,
                    f"pairwise spread {spread:.2e}")


def test_criterion_05_zeeman_tuning_roundtrip():
    species = nvspin.SpinSpecies()
    direction = np.array([0.0, 1.0, 0.0])

    b_star = nvspin.zeeman_tune(species, nvspin.NV_AXES, direction, 3.121e9)
    forward = nvspin.transition_frequencies(species, nvspin.NV_AXES[0],
                                            b_star * direction).f_upper
    worst = abs(forward - 3.121e9)

    rng = np.random.default_rng(20240820)
    for target in rng.uniform(2.88e9, 3.3e9, size=100):
        b = nvspin.zeeman_tune(species, nvspin.NV_AXES, direction, target)
        back = nvspin.transition_frequencies(species, nvspin.NV_AXES[0],
                                             b * direction).f_upper
        worst = max(worst, abs(back - target))

    ok = worst <= 1.0
    assert _verdict(5, "Zeeman tuning roundtrip", ok,
                    f"worst mismatch {worst:.2e} Hz")


def test_criterion_06_ensemble_size():
    ens = cp.EnsembleSpec(density_ppm=40.0,
                          region=fm.SampleRegion(center=(0.0, 0.0, 0.0),
                                                 extents=(4.2e-3, 3.4e-3,
                                                          0.92e-3)))
    n_spins = cp.spin_count(ens)
    ok = 9.0e16 <= n_spins <= 9.5e16
    assert _verdict(6, "ensemble spin count", ok, f"N = {n_spins:.4e}")


def test_criterion_07_vacuum_coupling_order_of_magnitude():
    b_vac = 0.070 / cp.single_spin_coupling(1.0)
    g0 = cp.single_spin_coupling(b_vac)
    ens = cp.EnsembleSpec(density_ppm=40.0,
                          region=fm.SampleRegion(center=(0.0, 0.0, 0.0),
                                                 extents=(4.2e-3, 3.4e-3,
                                                          0.92e-3)))
    omega = cp.collective_coupling(g0, cp.spin_count(ens))

    # The forward arithmetic lands near 21 MHz, the same order as the
    # measured 12.46 MHz; an exact match is explicitly not expected.
    ok = (abs(g0 - 0.070) / 0.070 <= 1e-12
          and 1.9e7 <= omega <= 2.3e7
          and 0.1 <= omega / 12.46e6 <= 10.0)
    assert _verdict(7, "vacuum-field coupling order of magnitude", ok,
                    f"B_vac = {b_vac:.3e} T, g0*sqrt(N) = {omega / 1e6:.2f} MHz")


def test_criterion_08_field_solver_oracle():
    # size/gap ratio 20; grid spans the mid-gap volume
    k_current = 1.0
    sheets = fm.bowtie_sheet_pair(length=20e-3, width=20e-3, gap=1e-3,
                                  surface_current=k_current)
    extents = (6e-3, 6e-3, 0.5e-3)
    t0 = time.perf_counter()
    fmap = fm.biot_savart_map(sheets, fm.GridSpec.centered(extents,
                                                           (41, 41, 41)),
                              rtol=1e-8)
    elapsed = time.perf_counter() - t0

    center = fmap.b[20, 20, 20]
    center_err = abs(np.linalg.norm(center) - MU_0 * k_current) / (MU_0 * k_current)

    third = fm.SampleRegion(center=(0.0, 0.0, 0.0),
                            extents=tuple(e / 3.0 for e in extents))
    rms = fm.homogeneity(fmap, third).rms_deviation

    b = fmap.b
    scale = float(np.max(np.abs(b)))
    x_mirror = float(np.max(np.abs(b - b[::-1, :, :]))) / scale
    y_mirrored = b[:, ::-1, :].copy()
    y_mirrored[..., 2] *= -1.0
    y_mirror = float(np.max(np.abs(b - y_mirrored))) / scale

    small = fm.GridSpec.centered((4e-3, 4e-3, 0.4e-3), (9, 9, 5))
    b_1 = fm.biot_savart_map(sheets, small, rtol=1e-8).b
    doubled = fm.bowtie_sheet_pair(length=20e-3, width=20e-3, gap=1e-3,
                                   surface_current=2.0 * k_current)
    b_2 = fm.biot_savart_map(doubled, small, rtol=1e-8).b
    linearity = float(np.max(np.abs(2.0 * b_1 - b_2))) / float(np.max(np.abs(b_2)))

    ok = (center_err <= 0.05 and rms <= 0.02
          and x_mirror <= 1e-8 and y_mirror <= 1e-8 and linearity <= 1e-8
          and elapsed < 60.0)
    assert _verdict(8, "field-solver center value and homogeneity", ok,
                    f"center off by {center_err:.2%}, central-1/3 rms "
                    f"{rms:.3%}, mirror {max(x_mirror, y_mirror):.1e}, "
                    f"{elapsed:.1f} s")


def test_criterion_09_homogeneity_metric():
    # two x-layers of cells with |B| = 1 and 3: mean 2, deviations 0.5
    b = np.zeros((3, 2, 2, 3))
    b[0, :, :, 2] = 1.0
    b[1, :, :, 2] = 1.0
    b[2, :, :, 2] = 5.0
    spacing = np.array([1e-3, 1e-3, 1e-3])
    two_value = fm.FieldMap(origin=-spacing * np.array([1.0, 0.5, 0.5]),
                            spacing=spacing, b=b, energy_j=1e-20)
    region = fm.SampleRegion(center=(0.0, 0.0, 0.0),
                             extents=(2e-3, 1e-3, 1e-3))
    report = fm.homogeneity(two_value, region)

    uniform = fm.FieldMap(origin=-spacing, spacing=spacing,
                          b=np.broadcast_to([0.0, 2e-3, 0.0],
                                            (3, 3, 3, 3)).copy(),
                          energy_j=1e-20)
    flat = fm.homogeneity(uniform, fm.SampleRegion(center=(0.0, 0.0, 0.0),
                                                   extents=(2e-3, 2e-3, 2e-3)))

    ok = (report.mean_field_t == 2.0
          and report.rms_deviation == 0.5
          and report.max_deviation == 0.5
          and flat.rms_deviation == 0.0
          and flat.max_deviation == 0.0)
    assert _verdict(9, "homogeneity statistics on handcrafted maps", ok,
                    f"mean {report.mean_field_t}, rms {report.rms_deviation}, "
                    f"max {report.max_deviation}")


def test_criterion_10_circuit_gap_roundtrip():
    rng = np.random.default_rng(20240821)
    worst = 0.0
    for _ in range(1000):
        area = 10.0 ** rng.uniform(-6.0, -3.0)
        length = rng.uniform(5e-3, 5e-2)
        width = length * rng.uniform(0.05, 0.8)
        k_l = rng.uniform(0.5, 2.0)
        eps_r = rng.uniform(1.0, 12.0)
        f_target = 10.0 ** rng.uniform(8.5, 10.0)
        probe = circuit.CavityGeometry(plate_area=area, gap=1e-3,
                                       path_length=length, path_width=width)
        gap = circuit.gap_for_frequency(probe, f_target, inductance_scale=k_l,
                                        relative_permittivity=eps_r)
        geom = circuit.CavityGeometry(plate_area=area, gap=gap,
                                      path_length=length, path_width=width)
        f_back = circuit.eigenfrequency(geom, inductance_scale=k_l,
                                        relative_permittivity=eps_r).f_c
        worst = max(worst, abs(f_back - f_target) / f_target)

    gaps = np.linspace(0.1e-3, 2e-3, 51)
    freqs = [circuit.eigenfrequency(
        circuit.CavityGeometry(plate_area=1e-4, gap=float(d),
                               path_length=1e-2, path_width=2e-3)).f_c
        for d in gaps]
    gap_monotone = bool(np.all(np.diff(freqs) > 0))

    areas = np.linspace(0.2e-4, 4e-4, 51)
    freqs_a = [circuit.eigenfrequency(
        circuit.CavityGeometry(plate_area=float(a), gap=0.5e-3,
                               path_length=1e-2, path_width=2e-3)).f_c
        for a in areas]
    area_monotone = bool(np.all(np.diff(freqs_a) < 0))

    ok = worst <= 1e-12 and gap_monotone and area_monotone
    assert _verdict(10, "gap solving roundtrip and monotonicity", ok,
                    f"worst rel err {worst:.2e}")


def test_criterion_11_linewidth_conventions():
    kappa_paper_conv = sp.q_to_kappa(3.121e9, 1637.0, convention="paper")
    kappa_standard = sp.q_to_kappa(3.121e9, 1637.0, convention="standard")

    ok = (abs(kappa_paper_conv - 1.91e6) / 1.91e6 <= 0.005
          and kappa_standard == kappa_paper_conv / 2.0)
    assert _verdict(11, "Q-to-linewidth conventions", ok,
                    f"f/Q = {kappa_paper_conv / 1e6:.4f} MHz, "
                    f"f/2Q = {kappa_standard / 1e6:.4f} MHz")
