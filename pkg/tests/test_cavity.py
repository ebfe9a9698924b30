import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import atomarray as aa
from atomarray.cavity import (CavityMapping, adiabatic_cavity_coefficients,
                              friction_from_coefficients, map_parameters, multimode_coupling,
                              optical_diffusion, optical_friction, usb_error_bound)
from atomarray.mechanics import friction_coefficient
from atomarray.squeezing import squeezing_model


def random_mapping(rng, kappa_over_nu=(20, 200), kappa_over_g=(20, 200)):
    """Bad-cavity parameter set; returns the mapping and the trap it came from."""
    nu = rng.uniform(0.01, 0.1)
    kappa = nu * rng.uniform(*kappa_over_nu)
    recoil = rng.uniform(5e-4, 5e-3)
    trap = aa.trap_from_frequency(nu, recoil)
    g = kappa / rng.uniform(*kappa_over_g)
    det = -kappa * rng.uniform(0.05, 2.0)
    m = CavityMapping(g, det, kappa, nu, trap.eta, g_sites=np.array([g]))
    return m, trap


class TestMapping:
    def test_dark_drive_decouples(self, fig5_build):
        b = fig5_build
        m = map_parameters(b.trap, aa.uniform_profile(b.geometry, 0.0, -0.1), b.coop)
        assert m.g_bar == 0
        assert optical_friction(m) == (0.0, 0.0)
        assert m.bad_cavity_ratio == float("inf")

    def test_fields(self, fig5_build):
        b = fig5_build
        m = map_parameters(b.trap, b.drive, b.coop)
        assert m.g_bar == pytest.approx(b.trap.eta * 0.1, rel=1e-14)
        assert m.delta_c == pytest.approx(b.drive.detuning * b.coop.linewidth, rel=1e-14)
        assert m.kappa == b.coop.linewidth
        assert m.dropped_phase == -1j

    def test_nonlinearity_matches_squeezing(self, fig5_build, oracles):
        b = fig5_build
        m = map_parameters(b.trap, b.drive, b.coop)
        assert abs(m.g_bar) ** 2 / (m.kappa * m.nu) == pytest.approx(oracles["fig5"]["B"] / 16, rel=1e-12)
        assert m.nonlinearity == pytest.approx(squeezing_model(b.trap, b.drive, b.coop).B, rel=1e-12)

    def test_bad_cavity_ratio(self, fig5_build, oracles):
        b = fig5_build
        m = map_parameters(b.trap, b.drive, b.coop)
        assert m.bad_cavity_ratio == pytest.approx(oracles["fig5"]["kappa_over_g"], rel=1e-10)
        assert m.bad_cavity_ratio == pytest.approx(98, rel=0.02)

    def test_round_trip(self, fig2):
        m = map_parameters(fig2.trap, fig2.drive, fig2.coop)
        back = m.to_array()
        np.testing.assert_array_equal(back["omega_n"] * m.eta, m.g_sites)
        np.testing.assert_allclose(back["omega_n"], np.abs(fig2.drive.omega_n), rtol=1e-15)
        assert back["detuning"] == m.delta_c and back["linewidth"] == m.kappa
        assert back["nu"] == m.nu and back["eta"] == m.eta
        again = map_parameters(fig2.trap, aa.DriveProfile(back["omega_n"], back["detuning"] / back["linewidth"]),
                               fig2.coop)
        np.testing.assert_allclose(again.g_sites, m.g_sites, rtol=1e-15)
        assert again.delta_c == pytest.approx(m.delta_c, rel=1e-15)

    def test_g_sites_read_only(self, fig2):
        m = map_parameters(fig2.trap, fig2.drive, fig2.coop)
        with pytest.raises(ValueError):
            m.g_sites[0] = 1.0


class TestFriction:
    def test_zero_at_resonance(self):
        m = CavityMapping(0.01, 0.0, 1.0, 0.05, 0.1)
        exact, usb = optical_friction(m)
        assert exact == pytest.approx(0.0, abs=1e-18) and usb == 0.0

    def test_needs_positive_linewidth(self):
        with pytest.raises(ValueError):
            optical_friction(CavityMapping(0.01, -0.1, 0.0, 0.05, 0.1))

    @settings(max_examples=50)
    @given(st.floats(-3, 3).filter(lambda d: d != 0), st.floats(0.2, 3), st.floats(1e-3, 0.1))
    def test_usb_sign_follows_detuning(self, det, kappa, nu):
        usb = optical_friction(CavityMapping(0.02, det, kappa, nu, 0.1))[1]
        assert (usb > 0) == (det < 0)

    def test_usb_is_array_friction(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m, trap = random_mapping(rng)
            rabi = m.g_bar / trap.eta
            want = friction_coefficient(rabi**2, m.delta_c, m.kappa, trap.recoil_over_gamma)
            assert optical_friction(m)[1] == pytest.approx(float(want), rel=1e-12)

    def test_equivalence_literal(self):
        """30 bad-cavity sets: usb matches alpha_n to 1e-12, exact within 5 (nu/kappa)^2."""
        rng = np.random.default_rng(12)
        worst = 0.0
        for _ in range(30):
            m, trap = random_mapping(rng)
            alpha = float(friction_coefficient((m.g_bar / trap.eta) ** 2, m.delta_c, m.kappa,
                                               trap.recoil_over_gamma))
            exact, usb = optical_friction(m)
            assert abs(usb - alpha) / alpha < 1e-12
            worst = max(worst, abs(exact - alpha) / alpha / (m.nu / m.kappa) ** 2)
        assert worst < 5.0, f"max |exact - alpha|/alpha in units of (nu/kappa)^2: {worst:.3f}"

    def test_equivalence_within_remainder_bound(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            m, trap = random_mapping(rng)
            exact, usb = optical_friction(m)
            assert abs(exact - usb) / abs(usb) <= usb_error_bound(m.nu, m.kappa)

    @pytest.mark.parametrize("kappa_over_nu", [10, 20, 50, 200])
    def test_remainder_bound_over_detuning_scan(self, kappa_over_nu):
        nu, kappa = 0.05, 0.05 * kappa_over_nu
        bound = usb_error_bound(nu, kappa)
        rel = []
        for d in -kappa * np.geomspace(1e-4, 20, 400):
            exact, usb = optical_friction(CavityMapping(0.01, d, kappa, nu, 0.1))
            rel.append(abs(exact - usb) / abs(usb))
        rel = np.array(rel)
        assert rel.max() <= bound
        # bound is tight to leading order (the maximum sits at small detuning)
        assert rel.max() >= 0.9 * 8 * (nu / kappa) ** 2

    def test_remainder_quadratic_in_nu(self):
        d, kappa = -0.3, 1.0
        rel = []
        for nu in (0.01, 0.02):
            exact, usb = optical_friction(CavityMapping(0.01, d, kappa, nu, 0.1))
            rel.append(abs(exact - usb) / abs(usb))
        assert rel[1] / rel[0] == pytest.approx(4.0, rel=0.01)


class TestAdiabaticElimination:
    def test_degenerate_sidebands(self):
        m = CavityMapping(0.01, -0.2, 1.0, 0.05, 0.1)
        b, bd, _ = adiabatic_cavity_coefficients(m, nu=0.0)
        assert b == bd

    def test_stokes_asymmetry_literal(self):
        """Stated form: |coeff_b| < |coeff_bdag| for red detuning."""
        m = CavityMapping(0.01, -0.5, 1.0, 0.05, 0.1)
        b, bd, _ = adiabatic_cavity_coefficients(m)
        assert abs(b) < abs(bd)

    @settings(max_examples=40)
    @given(st.floats(-2, -1e-3), st.floats(1e-3, 0.09))
    def test_anti_stokes_dominates_when_red(self, det, nu):
        # |det + nu| < |det - nu|: the b (anti-Stokes) denominator is closer to resonance
        m = CavityMapping(0.01, det, 1.0, nu, 0.1)
        b, bd, _ = adiabatic_cavity_coefficients(m)
        assert abs(b) > abs(bd)
        assert optical_friction(m)[0] > 0

    def test_noise_weight(self):
        m = CavityMapping(0.01, -0.2, 1.0, 0.05, 0.1)
        assert adiabatic_cavity_coefficients(m)[2] == pytest.approx(-1 / (-0.2 + 0.5j))

    def test_friction_reconstruction(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            m, _ = random_mapping(rng)
            with warnings.catch_warnings():
                warnings.simplefilter("error")
                b, bd, _ = adiabatic_cavity_coefficients(m)
            assert friction_from_coefficients(m, b, bd) == pytest.approx(optical_friction(m)[0],
                                                                         rel=1e-12)

    def test_warns_outside_weak_coupling(self):
        m = CavityMapping(0.3, -0.2, 1.0, 0.05, 0.1)
        with pytest.warns(aa.ValidityWarning):
            adiabatic_cavity_coefficients(m)
        with pytest.warns(aa.ValidityWarning):
            adiabatic_cavity_coefficients(CavityMapping(0.01, -0.2, 1.0, 0.5, 0.1))


@pytest.fixture(scope="module")
def gauss(fig2):
    return map_parameters(fig2.trap, fig2.drive, fig2.coop)


class TestMultimodeCoupling:
    def test_symmetric_zero_diagonal(self, gauss):
        k = multimode_coupling(gauss)
        np.testing.assert_array_equal(k, k.T)
        np.testing.assert_array_equal(np.diag(k), 0)

    def test_rank_one_structure(self, gauss, rng):
        k = multimode_coupling(gauss)
        n = len(k)
        for _ in range(200):
            a, b, c, d = rng.choice(n, 4, replace=False)
            lhs, rhs = k[a, b] * k[c, d], k[a, d] * k[c, b]
            assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_sign_follows_detuning(self, fig2):
        for det in (-0.3, 0.3):
            m = map_parameters(fig2.trap, fig2.drive.with_detuning(det), fig2.coop)
            off = multimode_coupling(m)[~np.eye(fig2.geom.n_sites, dtype=bool)]
            assert np.all(np.sign(off) == np.sign(m.delta_c))

    def test_closed_form(self, gauss, fig2):
        om = np.abs(fig2.drive.omega_n)
        d, k = gauss.delta_c, gauss.kappa
        want = 2 * aa.Q**2 * d * np.outer(om, om) / (d**2 + (k / 2) ** 2)
        np.fill_diagonal(want, 0)
        np.testing.assert_allclose(multimode_coupling(gauss), want, rtol=1e-12)

    def test_uniform_drive_constant(self, fig5_build):
        b = fig5_build
        k = multimode_coupling(map_parameters(b.trap, b.drive, b.coop))
        off = k[~np.eye(len(k), dtype=bool)]
        np.testing.assert_allclose(off, off[0], rtol=1e-14)

    def test_dark(self, fig5_build):
        b = fig5_build
        m = map_parameters(b.trap, aa.uniform_profile(b.geometry, 0.0, -0.1), b.coop)
        np.testing.assert_array_equal(multimode_coupling(m), 0)

    def test_complex_couplings_rejected(self):
        m = CavityMapping(0.01, -0.1, 1.0, 0.05, 0.1, g_sites=np.array([0.01, 0.01j]))
        with pytest.raises(ValueError):
            multimode_coupling(m)

    def test_only_array_coupling_has_spatial_structure(self, fig2, gauss):
        om = np.abs(fig2.drive.omega_n)
        norm = np.outer(om, om)
        off = ~np.eye(len(om), dtype=bool)
        k_arr = (np.asarray(fig2.fc.coupling) / norm)[off]
        k_cav = (multimode_coupling(gauss) / norm)[off]
        assert np.std(k_arr) > 0.1 * np.abs(k_arr).mean()
        np.testing.assert_allclose(k_cav, k_cav[0], rtol=1e-12)


def test_optical_diffusion_is_site_diffusion(fig5_build):
    b = fig5_build
    fc = aa.force_coefficients(b.geometry, b.drive, b.coop, b.trap)
    for site in (0, 7):
        m = map_parameters(b.trap, b.drive, b.coop, site)
        assert optical_diffusion(m) == pytest.approx(fc.diffusion[site, site], rel=1e-12)
