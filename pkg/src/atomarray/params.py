"""Units, lattice geometry, trap parameters and drive profiles.

Internal units: gamma = lambda = hbar = 1, so the laser wavenumber is
``Q = 2*pi`` and energies are in units of hbar*gamma.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import LambDickeError

Q = 2.0 * np.pi

LAMB_DICKE_MAX = 0.3


@dataclass(frozen=True)
class UnitSystem:
    gamma: float = 1.0
    wavelength: float = 1.0
    hbar: float = 1.0

    @property
    def q(self) -> float:
        return 2.0 * np.pi / self.wavelength

    def tags(self) -> dict:
        return {"rate": "gamma", "length": "lambda", "energy": "hbar*gamma",
                "wavevector": "q=2*pi/lambda"}


UNITS = UnitSystem()


@dataclass(frozen=True)
class ArrayGeometry:
    """Square lattice of ``nx*ny`` sites; row 0 of ``positions`` is the center site."""

    nx: int
    ny: int
    a: float
    positions: np.ndarray = field(repr=False)

    @property
    def n_sites(self) -> int:
        return self.nx * self.ny

    def separations(self) -> np.ndarray:
        """(N, N, 2) array of r_n - r_m."""
        return self.positions[:, None, :] - self.positions[None, :, :]

    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.separations(), axis=-1)


def build_lattice(nx: int, ny: int, a: float) -> ArrayGeometry:
    """Square ``nx x ny`` lattice with spacing ``a``.

    Coordinates are ``(i - (nx-1)//2) * a`` so that, for even sizes, the
    center is the lower-left of the four middle sites (smallest x, then y).
    That site sits at the origin and is stored first.
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError(f"lattice dimensions must be positive integers, got {nx}x{ny}")
    if not a > 0:
        raise ValueError(f"lattice spacing must be positive, got {a}")
    nx, ny = int(nx), int(ny)
    ix = np.arange(nx) - (nx - 1) // 2
    iy = np.arange(ny) - (ny - 1) // 2
    gx, gy = np.meshgrid(ix, iy, indexing="ij")
    idx = np.stack([gx.ravel(), gy.ravel()], axis=1)
    center = np.flatnonzero((idx[:, 0] == 0) & (idx[:, 1] == 0))[0]
    order = np.concatenate([[center], np.delete(np.arange(len(idx)), center)])
    positions = idx[order].astype(float) * a
    positions.setflags(write=False)
    return ArrayGeometry(nx=nx, ny=ny, a=float(a), positions=positions)


@dataclass(frozen=True)
class TrapParams:
    """Longitudinal harmonic trap.

    ``nu`` is the trap frequency and ``recoil_over_gamma`` is E_R/(hbar*gamma)
    with E_R = hbar^2 q^2 / m.
    """

    nu: float
    recoil_over_gamma: float
    depth_over_recoil: Optional[float] = None
    trap_length: Optional[float] = None

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"trap frequency must be positive, got {self.nu}")
        if not self.recoil_over_gamma > 0:
            raise ValueError(f"recoil energy must be positive, got {self.recoil_over_gamma}")

    @property
    def mass(self) -> float:
        return Q**2 / self.recoil_over_gamma

    @property
    def x0(self) -> float:
        return np.sqrt(1.0 / (2.0 * self.mass * self.nu))

    @property
    def eta(self) -> float:
        return Q * self.x0


def trap_from_frequency(nu: float, recoil_over_gamma: float) -> TrapParams:
    return TrapParams(nu=float(nu), recoil_over_gamma=float(recoil_over_gamma))


def trap_from_depth(depth_over_recoil: float, trap_length: float,
                    recoil_over_gamma: float) -> TrapParams:
    """Harmonic expansion of ``V sin^2(pi z / l)`` around its minimum.

    m nu^2 = 2 V (pi/l)^2, with V = depth * E_R.
    """
    if not (depth_over_recoil > 0 and trap_length > 0 and recoil_over_gamma > 0):
        raise ValueError("depth, trap length and recoil energy must all be positive")
    mass = Q**2 / recoil_over_gamma
    depth = depth_over_recoil * recoil_over_gamma
    nu = (np.pi / trap_length) * np.sqrt(2.0 * depth / mass)
    trap = TrapParams(nu=float(nu), recoil_over_gamma=float(recoil_over_gamma),
                      depth_over_recoil=float(depth_over_recoil),
                      trap_length=float(trap_length))
    if trap.eta > LAMB_DICKE_MAX:
        raise LambDickeError(
            f"Lamb-Dicke parameter {trap.eta:.3f} exceeds {LAMB_DICKE_MAX}; "
            "the small-displacement expansion does not apply")
    return trap


@dataclass(frozen=True)
class DriveProfile:
    """Per-site Rabi amplitudes and the cooperative detuning.

    ``detuning`` is (delta_L - Delta) / (gamma + Gamma).
    """

    omega_n: np.ndarray = field(repr=False)
    detuning: float
    sides: str = "left"
    phase_diff: float = 0.0
    beam: dict = field(default_factory=lambda: {"kind": "uniform"})

    def __post_init__(self):
        if self.sides not in ("left", "two-sided"):
            raise ValueError(f"sides must be 'left' or 'two-sided', got {self.sides!r}")

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.omega_n, self.omega_n[0], rtol=1e-12, atol=0.0))

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(np.imag(self.omega_n)) <= 1e-14 * (np.abs(self.omega_n).max() + 1e-300)))

    @property
    def center(self) -> complex:
        return complex(self.omega_n[0])

    def scaled(self, factor: complex) -> "DriveProfile":
        return DriveProfile(self.omega_n * factor, self.detuning, self.sides,
                            self.phase_diff, dict(self.beam))

    def with_detuning(self, detuning: float) -> "DriveProfile":
        return DriveProfile(self.omega_n, float(detuning), self.sides,
                            self.phase_diff, dict(self.beam))


def _frozen(arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=complex).copy()
    arr.setflags(write=False)
    return arr


def uniform_profile(geom: ArrayGeometry, omega: complex, detuning: float = 0.0,
                    sides: str = "left", phase_diff: float = 0.0) -> DriveProfile:
    return DriveProfile(_frozen(np.full(geom.n_sites, omega)), float(detuning), sides,
                        float(phase_diff), {"kind": "uniform", "omega": complex(omega)})


def gaussian_profile(geom: ArrayGeometry, w0: float, omega_peak: float,
                     detuning: float = 0.0) -> DriveProfile:
    """Gaussian beam centered on site 0: Omega_n = Omega exp(-|r_n|^2 / w0^2)."""
    if not w0 > 0:
        raise ValueError(f"beam waist must be positive, got {w0}")
    if omega_peak < 0:
        raise ValueError(f"peak Rabi frequency must be non-negative, got {omega_peak}")
    r2 = np.sum(geom.positions**2, axis=1)
    omega_n = omega_peak * np.exp(-r2 / w0**2)
    return DriveProfile(_frozen(omega_n), float(detuning), "left", 0.0,
                        {"kind": "gaussian", "waist": float(w0), "omega": float(omega_peak)})


def detuning_from_bare(delta_l: float, delta: float, linewidth: float) -> float:
    """Convert a bare laser-atom detuning into (delta_L - Delta)/(gamma + Gamma)."""
    return (delta_l - delta) / linewidth
