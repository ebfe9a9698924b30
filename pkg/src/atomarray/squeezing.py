"""Bogoliubov coefficients of the reflected field and its squeezing spectrum.

Three detection schemes are supported:

* ``near_perfect``: single-sided drive, single output port, |r| ~ 1;
* ``general``: single-sided drive, both vacuum input ports (``+`` and ``-``);
* ``balanced``: two-sided drive in antiphase, two output ports superposed.

Frequencies ``omega`` are measured from the laser frequency; ``nu_k`` is the
Bloch-mode frequency at the detected transverse wavevector.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dipole import CooperativeResponse, reflection_coefficient
from .errors import ValidityWarning
from .mechanics import bloch_modes, force_coefficients, friction_coefficient
from .params import Q, ArrayGeometry, DriveProfile, TrapParams

SCHEMES = ("near_perfect", "general", "balanced")
MASK_WIDTH = 3.0              # in units of the mechanical friction alpha
COMMUTATOR_TOLERANCE = 0.1
NEAR_PERFECT_DETUNING = 0.25  # |delta_L - Delta| / (gamma + Gamma) above which |r| ~ 1 fails


@dataclass(frozen=True)
class BogoliubovPair:
    """Output fluctuation ``u a + v a^dagger`` for one input port.

    ``port`` is ``None`` for single-port schemes and ``"+"``/``"-"`` for the
    two vacuum inputs of the general one-sided scheme.
    """

    u: np.ndarray
    v: np.ndarray
    scheme: str
    port: str | None = None
    nu_k: float = float("nan")
    omega: np.ndarray = field(default=None, repr=False)

    @property
    def commutator(self) -> np.ndarray:
        """|u|^2 - |v|^2; unity wherever the adiabatic output field is consistent."""
        return np.abs(self.u) ** 2 - np.abs(self.v) ** 2

    @property
    def commutator_flag(self) -> np.ndarray:
        return np.abs(self.commutator - 1.0) > COMMUTATOR_TOLERANCE


@dataclass(frozen=True)
class SqueezingModel:
    """Scalars shared by every (k, omega) point of one build."""

    scheme: str
    nu: float
    eta: float
    recoil: float
    rabi: float          # |Omega|
    detuning: float      # delta_L - Delta in units of gamma
    linewidth: float     # gamma + Gamma
    alpha: float
    phase: float = 0.0   # drive phase phi entering the general scheme

    @property
    def r(self) -> complex:
        return reflection_coefficient(self.detuning, self.linewidth)

    @property
    def B(self) -> float:
        return nonlinearity_parameter(self.eta, self.rabi, self.linewidth, self.nu)

    def v_base(self, nu_k, omega):
        """v_k(omega) of the near-perfect scheme."""
        return base_v(self.B, self.nu, nu_k, self.alpha, omega)

    def pairs(self, nu_k, omega) -> tuple[BogoliubovPair, ...]:
        omega = np.asarray(omega, dtype=float)
        v = self.v_base(nu_k, omega)
        if self.scheme == "near_perfect":
            return (BogoliubovPair(-1.0 + v, v, "near_perfect", None, float(nu_k), omega),)
        if self.scheme == "general":
            return tuple(_general_pair(v, self.r, self.phase, s, float(nu_k), omega)
                         for s in ("+", "-"))
        r = self.r
        vb = abs(r) ** 2 * v
        return (BogoliubovPair(1.0 + 2.0 * r + (r / np.conj(r)) * vb, vb, "balanced",
                               None, float(nu_k), omega),)


def nonlinearity_parameter(eta: float, rabi: float, linewidth: float, nu: float) -> float:
    """B = 16 |eta Omega|^2 / ((gamma + Gamma) nu)."""
    return 16.0 * (eta * abs(rabi)) ** 2 / (linewidth * nu)


def base_v(B: float, nu: float, nu_k, alpha, omega):
    """i B (nu/nu_k)^2 chi_k(omega), the same as i 8 eta^4 (4|Omega|^2/k^2)(k/E_R)(nu/nu_k)^2 chi_k."""
    omega = np.asarray(omega, dtype=float)
    nu_k = np.asarray(nu_k, dtype=float)
    if B == 0:
        return np.zeros(np.broadcast(omega, nu_k).shape, dtype=complex)
    # (nu/nu_k)^2 chi_k = -nu^2 / (omega^2 - nu_k^2 + i alpha omega)
    return 1j * B * (-nu**2) / (omega**2 - nu_k**2 + 1j * alpha * omega)


def _general_pair(v, r, phi, port, nu_k, omega) -> BogoliubovPair:
    mu = -1j * r * v
    rp, rpp = r.real, r.imag
    rot = np.exp(2j * phi)
    if port == "+":
        return BogoliubovPair(r + 1j * rp * mu, 1j * rp * rot * mu, "general", "+", nu_k, omega)
    return BogoliubovPair(1.0 + r - 1j * rpp * mu, rpp * rot * mu, "general", "-", nu_k, omega)


def _uniform_rabi(drive: DriveProfile) -> float:
    if not drive.is_uniform:
        raise ValueError("squeezing spectra are defined for uniform illumination")
    return float(abs(drive.center))


def squeezing_model(trap: TrapParams, drive: DriveProfile, coop: CooperativeResponse,
                    scheme: str = "near_perfect") -> SqueezingModel:
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    rabi = _uniform_rabi(drive)
    kappa = coop.linewidth
    delta = drive.detuning * kappa
    if scheme == "near_perfect" and abs(drive.detuning) > NEAR_PERFECT_DETUNING:
        warnings.warn(f"|delta_L - Delta|/(gamma+Gamma) = {abs(drive.detuning):.3g} is not small; "
                      "the near-perfect-reflection coefficients ignore the transmitted vacuum",
                      ValidityWarning, stacklevel=2)
    if scheme == "balanced" and drive.sides != "two-sided":
        raise ValueError("balanced scheme needs a two-sided drive")
    if scheme == "balanced" and not np.isclose(np.cos(drive.phase_diff), -1.0):
        raise ValueError("balanced scheme is formulated for a drive phase difference of pi")
    alpha = float(friction_coefficient(rabi**2, delta, kappa, trap.recoil_over_gamma))
    phase = float(np.angle(drive.center)) if rabi > 0 else 0.0
    return SqueezingModel(scheme, trap.nu, trap.eta, trap.recoil_over_gamma, rabi,
                          delta, kappa, alpha, phase)


def bogoliubov_near_perfect(trap, drive, coop, nu_k, omega) -> BogoliubovPair:
    return squeezing_model(trap, drive, coop, "near_perfect").pairs(nu_k, omega)[0]


def bogoliubov_general(trap, drive, coop, nu_k, omega, side: str) -> BogoliubovPair:
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    pairs = squeezing_model(trap, drive, coop, "general").pairs(nu_k, omega)
    return pairs[0] if side == "+" else pairs[1]


def bogoliubov_balanced(trap, drive, coop, nu_k, omega) -> BogoliubovPair:
    return squeezing_model(trap, drive, coop, "balanced").pairs(nu_k, omega)[0]


def _as_ports(p):
    return (p,) if isinstance(p, BogoliubovPair) else tuple(p)


def _check_ports(conj, direct):
    conj, direct = _as_ports(conj), _as_ports(direct)
    schemes = {p.scheme for p in conj + direct}
    if len(schemes) != 1 or len(conj) != len(direct):
        raise ValueError("quadrature noise needs pairs from a single detection scheme")
    if [p.port for p in conj] != [p.port for p in direct]:
        raise ValueError("input ports of the two pair sets do not match")
    return conj, direct


def quadrature_noise(conj, direct, theta):
    """S^theta = sum_ports |u'|^2 + |v|^2 + 2 Re[e^{-2i theta} u' v].

    ``conj`` holds the pair(s) at (-k, -omega), ``direct`` those at (k, omega).
    """
    conj, direct = _check_ports(conj, direct)
    theta = np.asarray(theta, dtype=float)
    total = 0.0
    for c, d in zip(conj, direct):
        total = total + (np.abs(c.u) ** 2 + np.abs(d.v) ** 2
                         + 2.0 * np.real(np.exp(-2j * theta) * c.u * d.v))
    return total


def minimal_noise(conj, direct):
    """Minimum of S^theta over the local-oscillator phase."""
    conj, direct = _check_ports(conj, direct)
    power = sum(np.abs(c.u) ** 2 + np.abs(d.v) ** 2 for c, d in zip(conj, direct))
    cross = sum(c.u * d.v for c, d in zip(conj, direct))
    return np.maximum(power - 2.0 * np.abs(cross), 0.0)


def optimal_phase(conj, direct):
    """Local-oscillator phase at which e^{-2i theta} sum u'v is real and negative."""
    conj, direct = _check_ports(conj, direct)
    cross = sum(c.u * d.v for c, d in zip(conj, direct))
    return 0.5 * (np.angle(cross) - np.pi)


def resonance_approximation(model: SqueezingModel, nu_k, omega):
    """Quadratic approximation of S near +-nu_k. Returns ``(S_approx, B, W)``."""
    omega = np.asarray(omega, dtype=float)
    nu_k = float(nu_k)
    w = (model.nu / nu_k) ** 2 * model.B
    if model.scheme == "balanced":
        w *= abs(model.r) ** 2
    num = (omega / nu_k - np.sign(omega)) ** 2 + (model.alpha / (2.0 * nu_k)) ** 2
    with np.errstate(divide="ignore"):
        s = num / w**2 if w > 0 else np.full_like(num, np.inf)
    return s, model.B, w


@dataclass(frozen=True)
class SqueezingSpectrum:
    kgrid: np.ndarray          # (M, 2), units of q
    omega_grid: np.ndarray
    nu_k: np.ndarray           # (M,)
    S: np.ndarray              # (M, W)
    S_approx: np.ndarray
    v: np.ndarray              # base v_k(omega), (M, W)
    theta_opt: np.ndarray
    validity_mask: np.ndarray  # True where the point is trusted
    commutator_flag: np.ndarray
    B: float
    W: np.ndarray
    alpha: float
    scheme: str

    def theta_noise(self, model: SqueezingModel, theta: float) -> np.ndarray:
        """S^theta on the full grid at a fixed local-oscillator phase."""
        out = np.empty_like(self.S)
        for i, nk in enumerate(self.nu_k):
            conj = model.pairs(nk, -self.omega_grid)
            out[i] = quadrature_noise(conj, model.pairs(nk, self.omega_grid), theta)
        return out


def bloch_frequencies(geom: ArrayGeometry, trap: TrapParams, drive: DriveProfile,
                      coop: CooperativeResponse, kgrid) -> np.ndarray:
    """nu_k for wavevectors in units of q, from the single-sided light-induced coupling."""
    if drive.sides != "left":
        drive = DriveProfile(drive.omega_n, drive.detuning, "left", 0.0, dict(drive.beam))
    if geom.nx % 2 == 0 or geom.ny % 2 == 0:
        raise ValueError("Bloch sums need odd lattice dimensions (inversion symmetry about site 0)")
    fc = force_coefficients(geom, drive, coop, trap)
    nu_k, _ = bloch_modes(geom, fc, Q * np.atleast_2d(np.asarray(kgrid, dtype=float)))
    return nu_k


def squeezing_spectrum(model: SqueezingModel, kgrid, nu_k, omega_grid) -> SqueezingSpectrum:
    """Minimal quadrature noise on a (k, omega) grid.

    The conjugate point (-k, -omega) reuses ``nu_k`` since nu_{-k} = nu_k.
    """
    kgrid = np.atleast_2d(np.asarray(kgrid, dtype=float))
    nu_k = np.atleast_1d(np.asarray(nu_k, dtype=float))
    omega = np.asarray(omega_grid, dtype=float)
    if len(kgrid) != len(nu_k):
        raise ValueError("kgrid and nu_k lengths differ")
    shape = (len(nu_k), len(omega))
    s, s_app, th = (np.empty(shape) for _ in range(3))
    v = np.empty(shape, dtype=complex)
    flag = np.empty(shape, dtype=bool)
    w_k = np.empty(len(nu_k))
    for i, nk in enumerate(nu_k):
        direct = model.pairs(nk, omega)
        conj = model.pairs(nk, -omega)
        s[i] = minimal_noise(conj, direct)
        th[i] = optimal_phase(conj, direct)
        s_app[i], _, w_k[i] = resonance_approximation(model, nk, omega)
        v[i] = model.v_base(nk, omega)
        flag[i] = np.any([p.commutator_flag for p in direct], axis=0)
    dist = np.abs(np.abs(omega)[None, :] - nu_k[:, None])
    valid = dist >= MASK_WIDTH * model.alpha
    return SqueezingSpectrum(kgrid, omega, nu_k, s, s_app, v, th, valid, flag,
                             model.B, w_k, model.alpha, model.scheme)


def dip_roots(model: SqueezingModel, nu_k: float, window: float = 50.0):
    """Frequencies near +nu_k where 1 + 2 Re v = 0 (S vanishes to leading order).

    Searched on either side of resonance within ``window * alpha``.
    """
    def g(w):
        return 1.0 + 2.0 * np.real(model.v_base(nu_k, w))

    roots = []
    a = model.alpha
    for lo, hi in ((nu_k - window * a, nu_k - 1e-9 * a), (nu_k + 1e-9 * a, nu_k + window * a)):
        grid = np.linspace(lo, hi, 2001)
        vals = g(grid)
        idx = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
        roots += [brentq(g, grid[i], grid[i + 1], xtol=1e-16 * nu_k, rtol=1e-15) for i in idx]
    return np.array(sorted(roots))


def squeezing_bandwidth(omega, S, center: float, half_window: float, level: float = 0.5) -> float:
    """Total width of {|omega - center| < half_window : S < level}, with linear edge interpolation."""
    omega = np.asarray(omega, dtype=float)
    S = np.asarray(S, dtype=float)
    sel = np.abs(omega - center) < half_window
    w, s = omega[sel], S[sel] - level
    if len(w) < 2:
        raise ValueError("window holds fewer than two grid points")
    width = 0.0
    for i in range(len(w) - 1):
        a, b = s[i], s[i + 1]
        dw = w[i + 1] - w[i]
        if a < 0 and b < 0:
            width += dw
        elif a < 0 <= b:
            width += dw * a / (a - b)
        elif b < 0 <= a:
            width += dw * b / (b - a)
    return width
