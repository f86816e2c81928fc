"""Floquet layer: monodromy, bands, quasimomentum, solution bundle."""

import math
import warnings

import numpy as np
import pytest

import wvnlab as w
from wvnlab.floquet import ResolutionWarning

FREE = w.free_potential()
MATHIEU = w.mathieu_potential(2.0)


# ---------------------------------------------------------------- monodromy

def test_free_discriminant_special_points():
    assert abs(w.discriminant(FREE, (math.pi / 2) ** 2)) < 1e-8
    assert abs(w.discriminant(FREE, math.pi ** 2) + 2.0) < 1e-8


def test_free_discriminant_identity_grid():
    for e in np.linspace(0.1, 50.0, 60):
        d = w.discriminant(FREE, e)
        assert abs(d - 2.0 * math.cos(math.sqrt(e))) < 1e-8


def test_monodromy_determinant():
    for v0 in (FREE, MATHIEU):
        for e in (0.3, 1.7, 9.5, 23.0):
            m = w.integrate_cell(v0, e)
            assert m.det_error < 1e-8


def kp_transfer_oracle(height, width, E):
    """Closed-form two-segment transfer product, independent of the ODE."""
    def segment(v, L):
        w2 = E - v
        if w2 > 0:
            om = math.sqrt(w2)
            return np.array([[math.cos(om * L), math.sin(om * L) / om],
                             [-om * math.sin(om * L), math.cos(om * L)]])
        if w2 < 0:
            ka = math.sqrt(-w2)
            return np.array([[math.cosh(ka * L), math.sinh(ka * L) / ka],
                             [ka * math.sinh(ka * L), math.cosh(ka * L)]])
        return np.array([[1.0, L], [0.0, 1.0]])

    return segment(0.0, 1.0 - width) @ segment(height, width)


def test_kronig_penney_matches_closed_form():
    kp = w.kronig_penney_potential(5.0)
    for e in (0.7, 3.1, 6.9, 14.2):
        m = w.integrate_cell(kp, e)
        oracle = kp_transfer_oracle(5.0, 0.5, e)
        assert np.max(np.abs(m.entries - oracle)) < 1e-9
        assert abs(m.discriminant - np.trace(oracle)) < 1e-9


def test_integrator_failure_reports_position():
    bad = w.PeriodicPotential.from_callable(
        lambda x: np.zeros_like(np.asarray(x, dtype=float)), name="bad")
    object.__setattr__(bad, "evaluator",
                       lambda x: float("nan") if np.any(np.asarray(x) > 0.5) else 0.0)
    with pytest.raises(w.IntegrationError):
        w.integrate_cell(bad, 1.0)


# ------------------------------------------------------------------- bands

def test_free_background_single_band():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        bs = w.band_structure(FREE, 0.0, 42.0, 0.25)
    assert len(bs.bands) == 1
    band = bs.bands[0]
    assert band.lo == 0.0 and band.hi == 42.0
    assert band.lo_truncated and band.hi_truncated


def test_empty_range_gives_empty_bands():
    bs = w.band_structure(FREE, 5.0, 5.0, 0.1)
    assert bs.bands == ()


def test_mathieu_gaps_open():
    bs = w.band_structure(MATHIEU, -2.0, 45.0, 0.05)
    assert len(bs.bands) >= 3
    gaps = [(a.hi, b.lo) for a, b in zip(bs.bands[:-1], bs.bands[1:])]
    # first gap near pi^2, second near (2 pi)^2; widths strictly positive
    assert abs(0.5 * (gaps[0][0] + gaps[0][1]) - math.pi ** 2) < 2.0
    assert abs(0.5 * (gaps[1][0] + gaps[1][1]) - 4 * math.pi ** 2) < 2.5
    for hi, lo in gaps[:2]:
        assert lo - hi > 1e-4
        mid = 0.5 * (hi + lo)
        assert abs(w.discriminant(MATHIEU, mid)) > 2.0  # oracle: inside gap


def test_band_branches_alternate():
    bs = w.band_structure(MATHIEU, -2.0, 45.0, 0.05)
    branches = [b.branch for b in bs.bands[:3]]
    assert branches == [1, -1, 1]


# ----------------------------------------------------------- quasimomentum

def test_free_quasimomentum_is_sqrt_E():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        bs = w.band_structure(FREE, 0.0, 9.5, 0.25)
    for e in np.linspace(0.2, 9.0, 15):
        assert abs(w.quasimomentum(FREE, e, bs) - math.sqrt(e)) < 1e-9


def test_free_resonant_energy_has_unit_quasimomentum():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        bs = w.band_structure(FREE, 0.0, 9.5, 0.25)
    assert abs(w.quasimomentum(FREE, 1.0, bs) - 1.0) < 1e-9


def test_quasimomentum_monotone_on_band():
    bs = w.band_structure(MATHIEU, -2.0, 12.0, 0.05)
    band = bs.bands[0]
    es = np.linspace(band.lo + 0.05 * band.width, band.hi - 0.05 * band.width, 12)
    ks = [w.quasimomentum(MATHIEU, e, bs) for e in es]
    diffs = np.diff(ks)
    assert np.all(band.branch * diffs > 0)


def test_quasimomentum_outside_band_raises():
    bs = w.band_structure(MATHIEU, -2.0, 12.0, 0.05)
    gap_e = bs.bands[0].hi + 0.3
    with pytest.raises(w.BandDomainError) as err:
        w.quasimomentum(MATHIEU, gap_e, bs)
    assert err.value.nearest_band is not None


# --------------------------------------------------------- solution bundle

def test_free_floquet_bundle_values():
    for k in (0.6, 1.0, 2.2):
        F = w.floquet_solution(FREE, k * k)
        assert abs(F.k - k) < 1e-9
        assert np.max(np.abs(F.p_samples - 1.0)) < 1e-8
        assert np.max(np.abs(F.varpi_samples)) < 1e-8
        assert abs(F.omega - 2 * k) < 1e-8
        assert np.max(np.abs(F.phi0_samples - 1.0 / (2 * k))) < 1e-8


def test_floquet_residual_and_periodicity_mathieu():
    F = w.floquet_solution(MATHIEU, 2.0)
    assert F.residual_sup < 1e-8
    # p(x+1) = p(x): series representation is periodic by construction;
    # check the sampled factor wraps around consistently
    assert abs(F.p_series.evaluate(1.0) - F.p_series.evaluate(0.0)) < 1e-12
    assert abs(F.p_samples[0] - F.p_series.evaluate(1.0)) < 1e-8
    assert F.omega > 0
    assert np.all(F.phi0_samples > 0)


def test_floquet_scaling_invariants():
    # phi0 and the dressed profile p^2/omega are invariant under the
    # normalization freedom phi -> c phi; spot-check via two grid sizes
    F1 = w.floquet_solution(MATHIEU, 2.0, grid=2048)
    F2 = w.floquet_solution(MATHIEU, 2.0, grid=4096)
    xs = np.linspace(0, 1, 33)
    assert np.allclose(F1.phi0_series.evaluate(xs), F2.phi0_series.evaluate(xs),
                       atol=1e-8)


def test_omega_constancy_sampled():
    F = w.floquet_solution(MATHIEU, 2.0)
    xs = np.linspace(0.0, 0.9, 10)
    p = F.p_series.evaluate(xs)
    dp = F.dp_series.evaluate(xs)
    om = 2.0 * (F.k_eff * np.abs(p) ** 2 + np.imag(np.conj(p) * dp))
    assert np.max(np.abs(om - F.omega)) < 1e-8


def test_band_edge_rejected():
    with pytest.raises(w.DegenerateFloquetError):
        w.floquet_solution(FREE, math.pi ** 2)
    with pytest.raises(w.DegenerateFloquetError):
        w.floquet_solution(MATHIEU, 10.0)  # inside the first gap


def test_second_band_winding_and_pairing():
    E = 2.5 * math.pi ** 2
    F = w.floquet_solution(FREE, E)
    assert abs(F.k - (2 * math.pi - math.sqrt(E))) < 1e-8
    assert abs(F.k_eff - math.sqrt(E)) < 1e-8
    assert F.branch == -1
    assert F.omega > 0
    assert abs(F.omega - 2 * math.sqrt(E)) < 1e-7


# ------------------------------------------------------------- fourier_of_p

def test_fourier_of_p_free_single_coefficient():
    F = w.floquet_solution(FREE, 1.0)
    out = w.fourier_of_p(F, 4)
    assert abs(out.series.coefficient(0) - 1.0) < 1e-8
    others = [abs(out.series.coefficient(n)) for n in (-3, -1, 1, 2)]
    assert max(others) < 1e-9
    assert out.reconstruction_error < 1e-8


def test_fourier_of_p_tail_decreases_with_order():
    F = w.floquet_solution(MATHIEU, 2.0)
    t4 = w.fourier_of_p(F, 4).tail_mass
    t8 = w.fourier_of_p(F, 8).tail_mass
    t16 = w.fourier_of_p(F, 16).tail_mass
    assert t8 < t4 and t16 < t8


def test_fourier_of_p_warns_below_decay_floor():
    F = w.floquet_solution(MATHIEU, 2.0)
    with pytest.warns(w.floquet.TruncationWarning):
        w.fourier_of_p(F, 1)


# ------------------------------------------------------------- potentials IO

def test_potential_requires_periodicity():
    with pytest.raises(w.ConfigError):
        w.PeriodicPotential.from_callable(lambda x: np.asarray(x, dtype=float),
                                          name="linear")


def test_potential_from_spec_and_csv(tmp_path):
    p = w.potential_from_spec({"preset": "mathieu", "amplitude": 0.5})
    assert p.params["amplitude"] == 0.5
    xs = np.arange(256) / 256
    csv = tmp_path / "pot.csv"
    csv.write_text("\n".join(f"{x},{0.5 * np.cos(2 * np.pi * x)}" for x in xs))
    q = w.load_potential_file(str(csv))
    probe = np.linspace(0, 0.99, 21)
    assert np.max(np.abs(q.evaluator(probe) - p.evaluator(probe))) < 1e-3


def test_unknown_preset_rejected():
    with pytest.raises(w.ConfigError):
        w.potential_from_spec({"preset": "nope"})
