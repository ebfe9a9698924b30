import dataclasses
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import atomarray as aa
from atomarray.spectra import (default_omega_grid, drive_fourier, intensity_spectrum,
                               overlap_matrix, render_delta_peak, sideband_weights)
from conftest import small_chain


def spectrum(m, k=(0.0, 0.0), grid=None, **kw):
    if grid is None:
        grid = default_omega_grid(m.trap.nu, m.modes.frequencies, m.modes.mode_friction,
                                  span=1.5, num=3001, refine=10, refine_num=101)
    return intensity_spectrum(m.geom, m.modes, m.fc, m.drive, m.coop, m.trap, k, grid, **kw)


def overlap_by_loops(m, k):
    """M_jj' written out as explicit sums over sites."""
    geom, modes, om = m.geom, m.modes, np.asarray(m.drive.omega_n)
    kk = aa.Q * np.asarray(k)
    n = geom.n_sites
    u = modes.transform
    gam = m.coop.decay_kernel
    out = np.zeros((n, n), dtype=complex)
    ph = [np.exp(-1j * kk @ geom.positions[i]) for i in range(n)]
    beta = [sum(ph[i] * u[j, i] * om[i] for i in range(n)) / n for j in range(n)]
    beta_t = [sum(np.conj(ph[i]) * u[j, i] * np.conj(om[i]) for i in range(n)) / n for j in range(n)]
    b0 = np.mean(om)
    for j in range(n):
        for jp in range(n):
            s = sum(u[j, a] * u[jp, b] * gam[a, b] * np.conj(om[a]) * om[b]
                    for a in range(n) for b in range(n)) / abs(om[0]) ** 2
            w = m.trap.nu**4 / (modes.frequencies[j] ** 2 * modes.frequencies[jp] ** 2)
            out[j, jp] = beta_t[j] * beta[jp] / abs(b0) ** 2 * w * s
    return out


class TestOverlap:
    def test_single_atom(self):
        m = small_chain(n=1, omega=0.05, det=-0.3)
        for k in [(0.0, 0.0), (0.3, -0.1)]:
            mm = overlap_matrix(m.geom, m.modes, m.drive, m.coop, m.trap, k)
            assert mm.shape == (1, 1)
            bk = drive_fourier(m.geom, m.drive.omega_n, k)
            b0 = drive_fourier(m.geom, m.drive.omega_n, (0, 0))
            assert mm[0, 0] == pytest.approx(abs(bk) ** 2 / abs(b0) ** 2, rel=1e-14)

    def test_hermitian_at_normal_incidence(self, fig2):
        mm = overlap_matrix(fig2.geom, fig2.modes, fig2.drive, fig2.coop, fig2.trap, (0, 0))
        assert np.abs(mm - mm.conj().T).max() < 1e-12

    @pytest.mark.parametrize("k", [(0.0, 0.0), (0.1, 0.25)])
    def test_explicit_double_sum(self, k):
        geom = aa.build_lattice(3, 2, 0.3)
        coop = aa.cooperative_response(geom, "uniform_mode")
        from conftest import Mechanics
        drive = aa.uniform_profile(geom, 0.05, -0.25)
        trap = aa.trap_from_frequency(5e-3, 0.01)
        fc = aa.force_coefficients(geom, drive, coop, trap)
        m = Mechanics(geom, trap, drive, coop, fc, aa.normal_modes(fc))
        np.testing.assert_allclose(overlap_matrix(geom, m.modes, drive, coop, trap, k),
                                   overlap_by_loops(m, k), rtol=1e-10, atol=1e-14)

    def test_uniform_drive_weights_follow_mode_average(self):
        m = small_chain(n=5, a=0.3)
        mm = overlap_matrix(m.geom, m.modes, m.drive, m.coop, m.trap, (0, 0))
        mean = m.modes.transform.sum(axis=1)
        silent = np.abs(mean) < 1e-12
        assert silent.any()
        np.testing.assert_allclose(np.diag(mm)[silent], 0.0, atol=1e-20)
        assert np.all(np.abs(np.diag(mm)[~silent]) > 0)

    def test_dark_center_rejected(self):
        m = small_chain(n=3)
        om = np.array(m.drive.omega_n)
        om[0] = 0.0
        with pytest.raises(ValueError):
            overlap_matrix(m.geom, m.modes, aa.DriveProfile(om, -0.25), m.coop, m.trap, (0, 0))


class TestIntensity:
    def test_symmetric_at_normal_incidence(self, fig4):
        grid, spectra = fig4
        s = spectra[(0.0, 0.0)].nonlinear
        np.testing.assert_allclose(grid, -grid[::-1], rtol=0, atol=1e-15)
        np.testing.assert_allclose(s, s[::-1], rtol=1e-10, atol=0)

    def test_real_and_non_negative(self, fig4):
        for spec in fig4[1].values():
            assert spec.nonlinear.dtype.kind == "f"
            assert spec.nonlinear.min() >= -1e-12 * spec.nonlinear.max()

    def test_decay_far_from_band(self, fig2):
        nu = fig2.trap.nu
        w = np.linspace(3 * nu, 6 * nu, 301)
        s = spectrum(fig2, grid=w).nonlinear
        peak = spectrum(fig2, grid=np.linspace(nu, 1.5 * nu, 2001)).nonlinear.max()
        assert np.all(np.diff(s) < 0)
        assert s[0] < 1e-3 * peak

    def test_linear_weight(self, fig4, fig2):
        spec0 = fig4[1][(0.0, 0.0)]
        r2 = abs(aa.reflection_coefficient(fig2.fc.detuning, fig2.fc.linewidth)) ** 2
        assert spec0.linear_weight == pytest.approx(r2, rel=1e-14)
        assert r2 == pytest.approx(0.8, rel=1e-12)
        off = fig4[1][(0.2, 0.2)].linear_weight
        bk = drive_fourier(fig2.geom, fig2.drive.omega_n, (0.2, 0.2))
        b0 = drive_fourier(fig2.geom, fig2.drive.omega_n, (0, 0))
        assert off == pytest.approx(r2 * abs(bk / b0) ** 2, rel=1e-12)
        assert off < spec0.linear_weight

    def test_sidebands_at_mode_frequencies(self, fig4, fig2):
        grid, spectra = fig4
        s = spectra[(0.0, 0.0)].nonlinear
        f, a = fig2.modes.frequencies, fig2.modes.mode_friction
        pos = grid > 0
        peak = grid[pos][np.argmax(s[pos])]
        assert f.min() - a.max() <= peak <= f.max() + a.max()
        inside = pos & (grid >= f.min() - 10 * a.max()) & (grid <= f.max() + 10 * a.max())
        frac = np.trapezoid(s[inside], grid[inside]) / np.trapezoid(s[pos], grid[pos])
        # Lorentzian wings beyond 10 alpha hold roughly 1/(10 pi) of a line's weight
        assert frac > 0.95

    def test_detection_angle_enhances_upper_sideband(self, fig4, fig2):
        lo0, hi0 = sideband_weights(fig4[1][(0.0, 0.0)], fig2.trap.nu)
        lo1, hi1 = sideband_weights(fig4[1][(0.2, 0.2)], fig2.trap.nu)
        assert hi1 / lo1 > hi0 / lo0

    def test_dark_array_rejected(self):
        m = small_chain(n=3, omega=0.0)
        with pytest.raises(ValueError):
            spectrum(m)

    def test_scales_with_temperature(self):
        m = small_chain(n=4, a=0.3)
        base = spectrum(m).nonlinear
        hot = dataclasses.replace(m, fc=dataclasses.replace(m.fc, t_eff=2.0 * m.fc.t_eff))
        np.testing.assert_allclose(spectrum(hot).nonlinear, 2.0 * base, rtol=1e-12)

    def test_scales_as_eta_to_fourth_over_recoil(self):
        m = small_chain(n=4, a=0.3)
        base = spectrum(m).nonlinear
        other = aa.trap_from_frequency(m.trap.nu, 4.0 * m.trap.recoil_over_gamma)
        scaled = spectrum(dataclasses.replace(m, trap=other)).nonlinear
        want = (other.eta / m.trap.eta) ** 4 * (m.trap.recoil_over_gamma / other.recoil_over_gamma)
        np.testing.assert_allclose(scaled / base, want, rtol=1e-12)

    @given(st.floats(0, 2 * np.pi))
    def test_global_phase_invariance(self, phi):
        m = small_chain(n=4, a=0.3, w0=0.6)
        rotated = m.drive.scaled(np.exp(1j * phi))
        fc = aa.force_coefficients(m.geom, rotated, m.coop, m.trap)
        spun = dataclasses.replace(m, drive=rotated, fc=fc, modes=aa.normal_modes(fc))
        grid = np.linspace(-1.5 * m.trap.nu, 1.5 * m.trap.nu, 3001)
        a, b = spectrum(m, grid=grid).nonlinear, spectrum(spun, grid=grid).nonlinear
        np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-12 * a.max())

    def test_warns_outside_slow_band(self):
        m = small_chain(n=2, a=0.3)
        with pytest.warns(aa.ValidityWarning):
            spectrum(m, grid=np.linspace(-0.2 * m.coop.linewidth, 0.2 * m.coop.linewidth, 11))

    def test_rendered_contains_peak(self, fig4, fig2):
        spec = fig4[1][(0.0, 0.0)]
        assert spec.delta_render_width == pytest.approx(fig2.fc.friction[0] / 3)
        extra = spec.rendered() - spec.nonlinear
        assert np.argmax(extra) == np.argmin(np.abs(spec.omega_grid))
        assert spec.mode_hash == fig2.modes.digest()


class TestRendering:
    def test_unit_area(self):
        width = 0.01
        w = np.linspace(-6 * width, 6 * width, 2001)
        assert np.trapezoid(render_delta_peak(0.7, width, w), w) == pytest.approx(0.7, rel=1e-3)

    def test_peak_value(self):
        assert render_delta_peak(2.0, 0.5, [0.0])[0] == pytest.approx(2.0 / (0.5 * np.sqrt(2 * np.pi)))

    def test_narrow_limit(self):
        w = np.linspace(-1, 1, 2001)
        spike = render_delta_peak(1.0, 1e-6, w)
        assert np.count_nonzero(spike > 1e-12 * spike.max()) == 1

    def test_bad_width(self):
        with pytest.raises(ValueError):
            render_delta_peak(1.0, 0.0, [0.0])


def test_default_grid_refinement():
    g = default_omega_grid(1.0, [1.0, 1.1], [0.01, 0.02], span=2, num=11, refine=5, refine_num=11)
    assert np.all(np.diff(g) > 0)
    assert np.isclose(g, 1.05).any() and np.isclose(g, -1.1 - 0.1).any()
    assert len(default_omega_grid(1.0)) == 4001
