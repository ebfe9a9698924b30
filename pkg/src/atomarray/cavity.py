"""Correspondence between the array mechanics and linearized cavity optomechanics.

Under the mapping the effective cavity coupling is ``g = eta * Omega_n`` (a
global phase ``-i`` is dropped and kept as metadata), the cavity detuning is
``delta_c = delta_L - Delta`` and the cavity linewidth is ``kappa = gamma + Gamma``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dipole import CooperativeResponse
from .errors import ValidityWarning
from .params import DriveProfile, TrapParams

WEAK_COUPLING_RATIO = 10.0


@dataclass(frozen=True)
class CavityMapping:
    g_bar: complex
    delta_c: float
    kappa: float
    nu: float
    eta: float
    site: int = 0
    dropped_phase: complex = -1j
    g_sites: np.ndarray = field(default=None, repr=False)

    @property
    def x0(self) -> float:
        return self.eta / (2.0 * np.pi)

    @property
    def bad_cavity_ratio(self) -> float:
        """kappa / |g|; large in the weak-coupling regime."""
        return self.kappa / abs(self.g_bar) if self.g_bar != 0 else float("inf")

    @property
    def nonlinearity(self) -> float:
        """16 |g|^2 / (kappa nu), the cavity-side expression for B."""
        return 16.0 * abs(self.g_bar) ** 2 / (self.kappa * self.nu)

    def to_array(self) -> dict:
        """Invert the mapping: Rabi amplitudes, cooperative detuning and linewidth."""
        g = self.g_sites if self.g_sites is not None else np.array([self.g_bar])
        return {"omega_n": np.asarray(g) / self.eta, "detuning": self.delta_c,
                "linewidth": self.kappa, "nu": self.nu, "eta": self.eta}


def map_parameters(trap: TrapParams, drive: DriveProfile, coop: CooperativeResponse,
                   site: int = 0) -> CavityMapping:
    kappa = coop.linewidth
    g_sites = trap.eta * np.abs(np.asarray(drive.omega_n))
    g_sites.setflags(write=False)
    return CavityMapping(complex(g_sites[site]), drive.detuning * kappa, kappa, trap.nu,
                         trap.eta, site, -1j, g_sites)


def _lorentz(x, kappa):
    return kappa / (x**2 + (0.5 * kappa) ** 2)


def optical_friction(mapping: CavityMapping, nu: float | None = None):
    """Exact two-sideband friction and its unresolved-sideband limit ``(exact, usb)``.

    The exact form is the anti-Stokes minus Stokes Lorentzian difference.
    """
    nu = mapping.nu if nu is None else float(nu)
    if not mapping.kappa > 0:
        raise ValueError("cavity linewidth must be positive")
    g2 = abs(mapping.g_bar) ** 2
    d, k = mapping.delta_c, mapping.kappa
    exact = g2 * (_lorentz(d + nu, k) - _lorentz(d - nu, k))
    usb = -g2 * 2.0 * nu * 2.0 * d * k / (d**2 + (0.5 * k) ** 2) ** 2
    return float(exact), float(usb)


def usb_error_bound(nu: float, kappa: float) -> float:
    """Upper bound on |exact - usb| / |usb| valid for every detuning."""
    x = nu / kappa
    return 8.0 * x**2 + 16.0 * x**4


def multimode_coupling(mapping: CavityMapping) -> np.ndarray:
    """K'_nm = (hbar/x0^2) 2 Re[g_n^* g_m / (delta_c - i kappa/2)] with zero diagonal."""
    g = np.asarray(mapping.g_sites, dtype=complex)
    if np.any(np.abs(g.imag) > 1e-14 * max(1.0, np.abs(g).max(initial=0.0))):
        raise ValueError("multimode coupling is defined for real couplings g_n")
    z = 1.0 / (mapping.delta_c - 0.5j * mapping.kappa)
    k = 2.0 * np.real(np.conj(g)[:, None] * g[None, :] * z) / mapping.x0**2
    np.fill_diagonal(k, 0.0)
    return k


def adiabatic_cavity_coefficients(mapping: CavityMapping, nu: float | None = None):
    """Coefficients of b, b^dagger and the input noise in the adiabatically eliminated field."""
    nu = mapping.nu if nu is None else float(nu)
    g, d, k = mapping.g_bar, mapping.delta_c, mapping.kappa
    if k < WEAK_COUPLING_RATIO * max(abs(g), nu):
        warnings.warn(f"kappa = {k:.3g} is not large compared with |g| = {abs(g):.3g} and "
                      f"nu = {nu:.3g}; adiabatic elimination is not justified",
                      ValidityWarning, stacklevel=2)
    coeff_b = g / (d + nu + 0.5j * k)
    coeff_bdag = g / (d - nu + 0.5j * k)
    noise = -1.0 / (d + 0.5j * k)
    return complex(coeff_b), complex(coeff_bdag), complex(noise)


def friction_from_coefficients(mapping: CavityMapping, coeff_b: complex,
                               coeff_bdag: complex) -> float:
    """Rebuild the exact friction from the imaginary parts of the eliminated-field coefficients."""
    g = mapping.g_bar
    return float(-2.0 * np.imag(np.conj(g) * coeff_b) + 2.0 * np.imag(np.conj(g) * coeff_bdag))


def optical_diffusion(mapping: CavityMapping, single_site_width: float = 1.0) -> float:
    """Momentum diffusion |g|^2 gamma_nn / (x0^2 [delta_c^2 + (kappa/2)^2]) of one site."""
    d, k = mapping.delta_c, mapping.kappa
    return float(abs(mapping.g_bar) ** 2 * single_site_width
                 / (mapping.x0**2 * (d**2 + (0.5 * k) ** 2)))
