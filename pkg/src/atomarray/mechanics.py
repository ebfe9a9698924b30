"""Collective Brownian motion of the array atoms.

Coefficients of

    dp_n/dt = -m nu^2 z_n + fbar_n - alpha_n p_n + f_n(t) + sum_m K_nm (z_n - z_m)

for single-sided illumination, its normal modes, mechanical susceptibilities
and the lattice-Fourier (Bloch) modes of a uniformly driven array.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dipole import CooperativeResponse, pair_force
from .errors import (MechanicalInstabilityError, NegativeTemperatureError,
                     SaturationWarning)
from .params import Q, ArrayGeometry, DriveProfile, TrapParams

SATURATION_RATIO = 0.3


@dataclass(frozen=True)
class ForceCoefficients:
    mean_force: np.ndarray = field(repr=False)
    friction: np.ndarray = field(repr=False)
    coupling: np.ndarray = field(repr=False)
    diffusion: np.ndarray = field(repr=False)
    t_eff: float
    detuning: float      # delta_L - Delta, units gamma
    linewidth: float     # gamma + Gamma
    trap: TrapParams

    @property
    def n_sites(self) -> int:
        return len(self.mean_force)

    @property
    def denominator(self) -> float:
        return lorentz_denominator(self.detuning, self.linewidth)


def lorentz_denominator(detuning: float, linewidth: float) -> float:
    return detuning**2 + (0.5 * linewidth) ** 2


def effective_temperature(detuning: float, linewidth: float) -> float:
    """T_e = (hbar gamma / 2) [(delta_L-Delta)^2 + (k/2)^2] / ((Delta-delta_L) k)."""
    if detuning >= 0:
        raise NegativeTemperatureError(
            f"delta_L - Delta = {detuning:g} >= 0 gives non-positive effective "
            "temperature; atoms are not trapped (red cooperative detuning required)")
    return 0.5 * lorentz_denominator(detuning, linewidth) / (-detuning * linewidth)


def friction_coefficient(omega_abs2, detuning: float, linewidth: float, recoil: float):
    """alpha_n = (E_R/hbar) |Omega_n|^2 (-2 delta k) / D^2."""
    den = lorentz_denominator(detuning, linewidth)
    return recoil * np.asarray(omega_abs2) * (-2.0 * detuning * linewidth) / den**2


def force_coefficients(geom: ArrayGeometry, drive: DriveProfile,
                       coop: CooperativeResponse, trap: TrapParams) -> ForceCoefficients:
    if drive.sides != "left":
        raise ValueError("force coefficients are defined for single-sided illumination")
    kappa = coop.linewidth
    delta = drive.detuning * kappa
    om = np.asarray(drive.omega_n, dtype=complex)
    if np.abs(om).max(initial=0.0) > SATURATION_RATIO * kappa:
        warnings.warn(f"max |Omega_n| = {np.abs(om).max():.3g} is not small compared with "
                      f"gamma + Gamma = {kappa:.3g}; linear response is questionable",
                      SaturationWarning, stacklevel=2)
    t_eff = effective_temperature(delta, kappa)
    den = lorentz_denominator(delta, kappa)
    abs2 = np.abs(om) ** 2

    mean_force = Q * abs2 * kappa / den
    friction = friction_coefficient(abs2, delta, kappa, trap.recoil_over_gamma)
    cross = np.conj(om)[:, None] * om[None, :]
    coupling = 1.5 * Q**2 * np.real(pair_force(geom) * cross) / den
    # Normalized so that D^nn / (m alpha_n) equals t_eff (see effective_temperature).
    diffusion = Q**2 * coop.decay_kernel * cross / den
    if drive.is_real:
        diffusion = diffusion.real

    for arr in (mean_force, friction, coupling, diffusion):
        arr.setflags(write=False)
    return ForceCoefficients(mean_force, friction, coupling, diffusion, t_eff,
                             delta, kappa, trap)


def dynamical_matrix(fc: ForceCoefficients) -> np.ndarray:
    """D with d^2 z/dt^2 = -D z for the conservative part of the motion."""
    m = fc.trap.mass
    k = np.array(fc.coupling, dtype=float)
    np.fill_diagonal(k, 0.0)
    dyn = k / m
    dyn[np.diag_indices_from(dyn)] = fc.trap.nu**2 - k.sum(axis=1) / m
    return dyn


@dataclass(frozen=True)
class ModeBasis:
    """Rows of ``transform`` are the mode profiles U_jn, ordered by ascending nu_j."""

    transform: np.ndarray = field(repr=False)
    frequencies: np.ndarray
    mode_friction: np.ndarray
    static_shift: np.ndarray
    mode_force: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    def to_modes(self, x):
        """Project site-space data (last axis n) onto modes: X_j = sum_n U_jn X_n."""
        return np.asarray(x) @ self.transform.T

    def to_sites(self, xj):
        return np.asarray(xj) @ self.transform

    def digest(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.frequencies).tobytes())
        h.update(np.ascontiguousarray(self.mode_friction).tobytes())
        return h.hexdigest()[:16]


def normal_modes(fc: ForceCoefficients) -> ModeBasis:
    dyn = dynamical_matrix(fc)
    if not np.allclose(dyn, dyn.T, rtol=0, atol=1e-14 * max(1.0, np.abs(dyn).max())):
        raise ValueError("coupling matrix is not symmetric")
    evals, evecs = np.linalg.eigh(0.5 * (dyn + dyn.T))
    if np.any(evals <= 0):
        raise MechanicalInstabilityError(
            f"dynamical matrix has {int(np.sum(evals <= 0))} non-positive eigenvalue(s), "
            f"min {evals.min():.3e}; light-induced coupling overwhelms the trap")
    u = evecs.T.copy()
    # Fix the sign so each profile's largest component is positive.
    lead = np.argmax(np.abs(u), axis=1)
    u *= np.sign(u[np.arange(len(u)), lead])[:, None]
    nu_j = np.sqrt(evals)
    alpha_j = (u**2) @ fc.friction
    f_j = u @ fc.mean_force
    zbar_j = f_j / (fc.trap.mass * nu_j**2)
    return ModeBasis(u, nu_j, alpha_j, zbar_j, f_j)


def off_diagonal_friction(fc: ForceCoefficients, modes: ModeBasis) -> float:
    """max_{j != j'} |alpha_jj'| / alpha_j, the size of the dropped friction terms."""
    u = modes.transform
    a = (u * fc.friction[None, :]) @ u.T
    diag = np.diag(a).copy()
    np.fill_diagonal(a, 0.0)
    if not np.any(diag > 0):
        return 0.0
    return float(np.max(np.abs(a) / diag[:, None]))


def mode_diffusion(fc: ForceCoefficients, modes: ModeBasis) -> np.ndarray:
    """D_p^{jj} = sum_nm U_jn U_jm D_p^{nm}."""
    u = modes.transform
    return np.real(np.einsum("jn,nm,jm->j", u, fc.diffusion, u))


def mode_temperature(fc: ForceCoefficients, modes: ModeBasis) -> np.ndarray:
    """D_p^{jj} / (m alpha_j); equals t_eff when the site noises are uncorrelated.

    NaN for frictionless modes (dark array).
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        return mode_diffusion(fc, modes) / (fc.trap.mass * modes.mode_friction)


def susceptibility(nu_j, alpha_j, omega):
    """chi_j(omega) = -nu_j^2 / (omega^2 - nu_j^2 + i alpha_j omega)."""
    nu_j = np.asarray(nu_j, dtype=float)
    omega = np.asarray(omega, dtype=float)
    return -nu_j**2 / (omega**2 - nu_j**2 + 1j * np.asarray(alpha_j) * omega)


def bloch_modes(geom: ArrayGeometry, fc: ForceCoefficients, kgrid):
    """Lattice-Fourier frequencies nu_k for a uniformly driven array.

    ``kgrid`` is an (M, 2) array of transverse wavevectors in units of lambda^-1
    (multiply k/q by ``Q``). Returns ``(nu_k, alpha)``.
    """
    kgrid = np.atleast_2d(np.asarray(kgrid, dtype=float))
    if not np.allclose(fc.mean_force, fc.mean_force[0], rtol=1e-12):
        raise ValueError("Bloch modes require uniform illumination")
    kmax = np.pi / geom.a
    if np.any(np.abs(kgrid) > kmax * (1 + 1e-12)):
        raise ValueError("wavevectors must lie inside the first Brillouin zone")
    k_row = np.array(fc.coupling[0], dtype=float)
    k_row[0] = 0.0
    phases = np.exp(-1j * kgrid @ geom.positions.T)
    k_k = phases @ k_row
    if np.max(np.abs(k_k.imag), initial=0.0) > 1e-10 * max(1.0, np.abs(k_row).sum()):
        raise ValueError("lattice sum is not inversion symmetric about site 0")
    k_0 = k_row.sum()
    nu2 = fc.trap.nu**2 + (k_k.real - k_0) / fc.trap.mass
    if np.any(nu2 <= 0):
        raise MechanicalInstabilityError("Bloch mode with nu_k^2 <= 0")
    return np.sqrt(nu2), float(fc.friction[0])
