"""Free-space dipole-dipole response of the array.

Green's tensor in units of 1/lambda, with ``u = q (r - r')`` dimensionless.
All pair quantities are projected on the circular dipole orientation
``E_D = (x + i y)/sqrt(2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularSeparationError
from .params import Q, ArrayGeometry

E_D = np.array([1.0, 1.0j, 0.0]) / np.sqrt(2.0)

# Im G_ii(u -> 0) = q / (6 pi); fixes decay_kernel diagonal = gamma.
GREEN_COINCIDENCE_IM = Q / (6.0 * np.pi)

LINEWIDTH_MODELS = ("uniform_mode", "central", "infinite")


def _norm_checked(u):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != 3:
        raise ValueError("displacement vectors must have 3 components")
    r = np.asarray(np.linalg.norm(u, axis=-1))
    if np.any(r == 0):
        raise SingularSeparationError("pair tensor is singular at zero separation")
    return u, r


def dyadic_green(u) -> np.ndarray:
    """Free-space dyadic Green's tensor G(u), shape ``u.shape[:-1] + (3, 3)``."""
    u, r = _norm_checked(u)
    uhat = u / r[..., None]
    outer = uhat[..., :, None] * uhat[..., None, :]
    pref = Q * np.exp(1j * r) / (4.0 * np.pi * r)
    a = 1.0 + 1j / r - 1.0 / r**2
    b = -1.0 - 3j / r + 3.0 / r**2
    return pref[..., None, None] * (a[..., None, None] * np.eye(3) + b[..., None, None] * outer)


def force_tensor(u) -> np.ndarray:
    """Dimensionless tensor F(u) of the light-induced pair force, shape ``(..., 3, 3)``."""
    u, r = _norm_checked(u)
    outer = u[..., :, None] * u[..., None, :] / r[..., None, None] ** 2
    diag, aniso = _force_brackets(r)
    return diag[..., None, None] * np.eye(3) + aniso[..., None, None] * outer


def _force_brackets(r):
    e = np.exp(1j * r) / r**2
    diag = e * ((1j - 1.0 / r) * (1.0 + (1j * r - 1.0) / r**2)
                + (1j / r**2 - 2.0 * (1j * r - 1.0) / r**3))
    aniso = e * ((1j - 3.0 / r) * (-1.0 + (3.0 - 3j * r) / r**2)
                 + 3.0 * (-1j / r**2 - 2.0 * (1.0 - 1j * r) / r**3))
    return diag, aniso


def circular_projection(tensor) -> np.ndarray:
    """e_d^dagger . T . e_d over the last two axes."""
    return np.einsum("i,...ij,j->...", E_D.conj(), tensor, E_D)


def green_inplane(dist) -> np.ndarray:
    """e_d^dagger G e_d for in-plane separations of length ``dist`` (units lambda)."""
    r = Q * np.asarray(dist, dtype=float)
    a = 1.0 + 1j / r - 1.0 / r**2
    b = -1.0 - 3j / r + 3.0 / r**2
    return Q * np.exp(1j * r) / (4.0 * np.pi * r) * (a + 0.5 * b)


def force_inplane(dist) -> np.ndarray:
    """F_nm = e_d^dagger F e_d for in-plane separations of length ``dist``."""
    diag, aniso = _force_brackets(Q * np.asarray(dist, dtype=float))
    return diag + 0.5 * aniso


def _offdiag(geom: ArrayGeometry, func) -> np.ndarray:
    d = geom.distances()
    out = np.zeros(d.shape, dtype=complex)
    mask = ~np.eye(geom.n_sites, dtype=bool)
    out[mask] = func(d[mask])
    return out


def pair_green(geom: ArrayGeometry) -> np.ndarray:
    """N x N matrix of e_d^dagger G(r_n, r_m) e_d with zero diagonal."""
    return _offdiag(geom, green_inplane)


def pair_force(geom: ArrayGeometry) -> np.ndarray:
    """N x N matrix F_nm with zero diagonal."""
    return _offdiag(geom, force_inplane)


def decay_kernel(geom: ArrayGeometry) -> np.ndarray:
    """Gamma_nm = 3 Im[e_d^dagger G e_d] off-diagonal, gamma on the diagonal."""
    kernel = 3.0 * pair_green(geom).imag
    np.fill_diagonal(kernel, 3.0 * GREEN_COINCIDENCE_IM)
    return kernel


def infinite_array_linewidth(a: float) -> float:
    """gamma + Gamma of an infinite square array, (3/4 pi)(lambda/a)^2."""
    return 3.0 / (4.0 * np.pi * a**2)


def cooperative_shift_width(geom: ArrayGeometry, method: str = "uniform_mode"):
    """Cooperative shift and width ``(Delta, Gamma)`` of a finite array.

    ``method="central"`` is the plain lattice sum around site 0,
    Delta - i Gamma/2 = -(3/2) sum_{n != 0} e_d^dagger G(r_0, r_n) e_d.
    ``method="uniform_mode"`` averages the same sum over every site, which is
    the complex frequency shift of the in-phase (k_perp = 0) dipole mode of the
    finite array; it converges far more smoothly with N than the sharply
    truncated central sum.
    """
    if geom.n_sites == 1:
        return 0.0, 0.0
    if method == "central":
        d = geom.distances()[0, 1:]
        s = green_inplane(d).sum()
    elif method == "uniform_mode":
        s = pair_green(geom).sum() / geom.n_sites
    else:
        raise ValueError(f"unknown lattice-sum method {method!r}")
    z = -1.5 * s
    return float(z.real), float(-2.0 * z.imag)


@dataclass(frozen=True)
class CooperativeResponse:
    delta: float
    gamma_coop: float
    decay_kernel: np.ndarray = field(repr=False)
    model: str = "uniform_mode"
    polarization: np.ndarray = field(default_factory=lambda: E_D.copy(), repr=False)

    @property
    def linewidth(self) -> float:
        return 1.0 + self.gamma_coop


def cooperative_response(geom: ArrayGeometry, linewidth: str = "infinite",
                         shift_method: str = "uniform_mode") -> CooperativeResponse:
    """Bundle Delta, Gamma and Gamma_nm for one geometry.

    ``linewidth="infinite"`` takes gamma + Gamma from the infinite-array
    formula (the mechanics is formulated for an effectively infinite array);
    the other choices use the finite lattice sum of that name.
    Delta is always the finite lattice sum with ``shift_method``.
    """
    if linewidth not in LINEWIDTH_MODELS:
        raise ValueError(f"linewidth model must be one of {LINEWIDTH_MODELS}, got {linewidth!r}")
    delta, gamma_sum = cooperative_shift_width(geom, shift_method)
    if linewidth == "infinite":
        gamma_coop = infinite_array_linewidth(geom.a) - 1.0
    elif linewidth == shift_method:
        gamma_coop = gamma_sum
    else:
        gamma_coop = cooperative_shift_width(geom, linewidth)[1]
    if not 1.0 + gamma_coop > 0:
        raise ValueError(f"non-positive total linewidth {1.0 + gamma_coop}")
    kernel = decay_kernel(geom)
    kernel.setflags(write=False)
    return CooperativeResponse(delta, gamma_coop, kernel, linewidth)


def reflection_coefficient(detuning, linewidth):
    """r = -i(k/2) / (i(k/2) + detuning), detuning = delta_L - Delta, k = gamma + Gamma."""
    if np.any(np.asarray(linewidth) <= 0):
        raise ValueError("linewidth must be positive")
    half = 0.5j * np.asarray(linewidth)
    r = -half / (half + np.asarray(detuning))
    return complex(r) if np.ndim(r) == 0 else r


def transmission_coefficient(detuning, linewidth):
    return 1.0 + reflection_coefficient(detuning, linewidth)
