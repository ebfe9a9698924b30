"""Intensity spectrum of the reflected light: coherent peak plus motional sidebands."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dipole import CooperativeResponse, reflection_coefficient
from .mechanics import ForceCoefficients, ModeBasis, susceptibility
from .errors import ValidityWarning
from .params import Q, ArrayGeometry, DriveProfile, TrapParams

SLOW_BAND_FRACTION = 0.1
OMEGA_CHUNK = 8192


@dataclass(frozen=True)
class IntensitySpectrum:
    k_perp: np.ndarray            # units of q
    omega_grid: np.ndarray = field(repr=False)
    linear_weight: float
    nonlinear: np.ndarray = field(repr=False)
    delta_render_width: float
    mode_hash: str = ""

    def rendered(self) -> np.ndarray:
        """Nonlinear part plus the 2*pi*delta(omega) peak drawn as a Gaussian."""
        return self.nonlinear + render_delta_peak(2.0 * np.pi * self.linear_weight,
                                                  self.delta_render_width, self.omega_grid)


def default_omega_grid(nu: float, mode_freqs=None, mode_friction=None,
                       span: float = 2.0, num: int = 4001, refine: float = 0.0,
                       refine_num: int = 201) -> np.ndarray:
    """Uniform grid on [-span*nu, span*nu], optionally densified within
    ``refine * alpha_j`` of every +-nu_j."""
    grid = np.linspace(-span * nu, span * nu, num)
    if refine > 0 and mode_freqs is not None:
        extra = [s * nj + np.linspace(-refine * aj, refine * aj, refine_num)
                 for nj, aj in zip(mode_freqs, mode_friction) for s in (-1.0, 1.0)]
        grid = np.unique(np.concatenate([grid, *extra]))
    return grid


def drive_fourier(geom: ArrayGeometry, amplitudes, k_perp) -> complex:
    """(1/N) sum_n exp(-i k.r_n) x_n with ``k_perp`` in units of q."""
    k = Q * np.asarray(k_perp, dtype=float)
    return complex(np.mean(np.exp(-1j * geom.positions @ k) * np.asarray(amplitudes)))


def overlap_matrix(geom: ArrayGeometry, modes: ModeBasis, drive: DriveProfile,
                   coop: CooperativeResponse, trap: TrapParams, k_perp) -> np.ndarray:
    """Sideband overlap factors M_jj' for detection at ``k_perp`` (units of q).

    The drive amplitudes stand in for beta_n; the common -i/g0 factor cancels
    in every ratio.
    """
    om = np.asarray(drive.omega_n, dtype=complex)
    if abs(om[0]) == 0:
        raise ValueError("central-site Rabi frequency is zero; M_jj' normalization undefined")
    k = Q * np.asarray(k_perp, dtype=float)
    phase = np.exp(-1j * geom.positions @ k)
    u = modes.transform
    n = geom.n_sites
    beta_j = (u * (phase * om)[None, :]).sum(axis=1) / n
    beta_tilde_j = (u * (np.conj(phase) * np.conj(om))[None, :]).sum(axis=1) / n
    beta_0 = om.mean()
    weight = (trap.nu**2 / modes.frequencies**2)
    kernel = coop.decay_kernel * (np.conj(om)[:, None] * om[None, :]) / abs(om[0]) ** 2
    s = u @ kernel @ u.T
    pref = np.outer(beta_tilde_j * weight, beta_j * weight) / abs(beta_0) ** 2
    return pref * s


def intensity_spectrum(geom: ArrayGeometry, modes: ModeBasis, fc: ForceCoefficients,
                       drive: DriveProfile, coop: CooperativeResponse, trap: TrapParams,
                       k_perp, omega_grid, render_width=None) -> IntensitySpectrum:
    omega_grid = np.asarray(omega_grid, dtype=float)
    alpha_0 = float(fc.friction[0])
    if not alpha_0 > 0:
        raise ValueError("friction at the array center must be positive")
    if np.max(np.abs(omega_grid)) > SLOW_BAND_FRACTION * coop.linewidth:
        warnings.warn("frequency grid leaves the slow-dynamics band |omega| << gamma + Gamma",
                      ValidityWarning, stacklevel=2)
    r2 = abs(reflection_coefficient(fc.detuning, fc.linewidth)) ** 2
    beta_k = drive_fourier(geom, drive.omega_n, k_perp)
    beta_0 = drive_fourier(geom, drive.omega_n, (0.0, 0.0))
    linear_weight = r2 * abs(beta_k) ** 2 / abs(beta_0) ** 2

    m = overlap_matrix(geom, modes, drive, coop, trap, k_perp)
    quad = np.empty(len(omega_grid), dtype=complex)
    for start in range(0, len(omega_grid), OMEGA_CHUNK):
        w = omega_grid[start:start + OMEGA_CHUNK, None]
        chi = susceptibility(modes.frequencies[None, :], modes.mode_friction[None, :], w)
        quad[start:start + OMEGA_CHUNK] = np.sum(chi.conj() * (chi @ m.T), axis=1)
    eta4 = trap.eta**4
    pref = r2 * 32.0 * eta4 * (fc.t_eff / trap.recoil_over_gamma) * alpha_0 / trap.nu**2
    scale = np.abs(quad).max(initial=0.0)
    if scale > 0 and np.max(np.abs(quad.imag)) > 1e-10 * scale:
        raise ValueError("sideband quadratic form is not real; M_jj' is not Hermitian")
    width = alpha_0 / 3.0 if render_width is None else float(render_width)
    return IntensitySpectrum(np.asarray(k_perp, dtype=float), omega_grid, float(linear_weight),
                             pref * quad.real, width, modes.digest())


def render_delta_peak(weight: float, width: float, omega_grid) -> np.ndarray:
    """``weight`` times a unit-area Gaussian of standard deviation ``width``."""
    if not width > 0:
        raise ValueError("render width must be positive")
    w = np.asarray(omega_grid, dtype=float)
    return weight * np.exp(-0.5 * (w / width) ** 2) / (width * np.sqrt(2.0 * np.pi))


def sideband_weights(spec: IntensitySpectrum, nu: float):
    """Integrated nonlinear weight on (0, nu) and (nu, inf) of the positive sideband."""
    w, s = spec.omega_grid, spec.nonlinear
    lo = (w > 0) & (w <= nu)
    hi = w > nu
    return float(np.trapezoid(s[lo], w[lo])), float(np.trapezoid(s[hi], w[hi]))
