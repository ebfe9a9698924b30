"""Time-domain stochastic integration of the collective Brownian motion.

The quantum Langevin force is replaced by a classical Gaussian white noise
with the same second moments, <f_n(t) f_m(t')> = 2 D_p^{nm} delta(t - t').
Stepping is symplectic Euler (kick, then drift) on the whole ensemble at once;
each ensemble member draws from its own RNG substream.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import ConfigError, IntegrationError, NoiseFactorizationError
from .mechanics import (ForceCoefficients, ModeBasis, dynamical_matrix, mode_diffusion,
                        susceptibility)

FACTORIZATIONS = ("eigen", "cholesky")
CLIP_TOLERANCE = 1e-10
DRAW_BLOCK = 4096          # normal deviates drawn per member per block (times N)
MAX_DT_OSC = 0.05          # dt * max(nu_j)
MAX_DT_FRICTION = 0.1      # dt * max(alpha_n)
MIN_BURN_IN = 5.0          # burn_in * dt * min(alpha_j)


@dataclass(frozen=True)
class LangevinConfig:
    dt: float
    n_steps: int
    n_ensemble: int
    seed: int
    burn_in: int
    noise_factorization: str = "eigen"
    record_every: int = 1
    noise_refinement: int = 1
    store_momentum: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        for name in ("n_steps", "n_ensemble", "record_every", "noise_refinement"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.noise_factorization not in FACTORIZATIONS:
            raise ConfigError(f"noise_factorization must be one of {FACTORIZATIONS}")
        if self.n_steps % self.record_every or self.burn_in % self.record_every:
            raise ConfigError("n_steps and burn_in must be multiples of record_every")

    @property
    def n_records(self) -> int:
        return self.n_steps // self.record_every

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def check_config(cfg: LangevinConfig, fc: ForceCoefficients, modes: ModeBasis) -> None:
    """Raise ConfigError unless dt resolves the motion and burn-in covers relaxation."""
    problems = []
    slack = 1.0 + 1e-12   # auto_config sits exactly on the limits
    if cfg.dt * modes.frequencies.max() > MAX_DT_OSC * slack:
        problems.append(f"dt*max(nu_j) = {cfg.dt * modes.frequencies.max():.3g} > {MAX_DT_OSC}")
    if cfg.dt * np.max(fc.friction) > MAX_DT_FRICTION * slack:
        problems.append(f"dt*max(alpha_n) = {cfg.dt * np.max(fc.friction):.3g} > {MAX_DT_FRICTION}")
    if cfg.burn_in * cfg.dt * modes.mode_friction.min() * slack < MIN_BURN_IN:
        problems.append(f"burn-in time {cfg.burn_in * cfg.dt:.3g} shorter than "
                        f"{MIN_BURN_IN}/min(alpha_j) = {MIN_BURN_IN / modes.mode_friction.min():.3g}")
    if problems:
        raise ConfigError("; ".join(problems))


def auto_config(fc: ForceCoefficients, modes: ModeBasis, seed: int = 0,
                n_ensemble: int = 64, relaxation_times: float = 2000.0,
                record_every: int = 10, **overrides) -> LangevinConfig:
    """Largest admissible dt and enough steps for ``relaxation_times / min(alpha_j)``."""
    dt = min(MAX_DT_OSC / modes.frequencies.max(), MAX_DT_FRICTION / np.max(fc.friction))
    a_min = modes.mode_friction.min()
    burn = int(np.ceil(MIN_BURN_IN / (a_min * dt) / record_every)) * record_every
    total = relaxation_times / (a_min * dt)
    n_steps = int(np.ceil(total / n_ensemble / record_every)) * record_every
    kw = dict(dt=dt, n_steps=n_steps, n_ensemble=n_ensemble, seed=seed, burn_in=burn,
              record_every=record_every)
    kw.update(overrides)
    return LangevinConfig(**kw)


def noise_factor(diffusion, method: str = "eigen") -> np.ndarray:
    """Matrix L with L L^T = D_p, tolerating round-off negative eigenvalues."""
    d = np.asarray(diffusion)
    if np.iscomplexobj(d):
        if np.abs(d.imag).max(initial=0.0) > 1e-14 * max(1.0, np.abs(d).max()):
            raise NoiseFactorizationError("diffusion matrix is complex; drive must be real")
        d = d.real
    if not np.allclose(d, d.T, rtol=0, atol=1e-14 * max(1.0, np.abs(d).max())):
        raise NoiseFactorizationError("diffusion matrix is not symmetric")
    d = 0.5 * (d + d.T)
    scale = max(np.abs(d).max(), np.finfo(float).tiny)
    if method == "eigen":
        w, v = np.linalg.eigh(d)
        if w.min() < -CLIP_TOLERANCE * scale:
            raise NoiseFactorizationError(
                f"diffusion matrix has eigenvalue {w.min():.3e} (scale {scale:.3e}); not PSD")
        return v * np.sqrt(np.clip(w, 0.0, None))[None, :]
    if method == "cholesky":
        n = len(d)
        for jitter in (0.0, *(scale * 10.0**e for e in range(-14, -9))):
            try:
                return np.linalg.cholesky(d + jitter * np.eye(n))
            except np.linalg.LinAlgError:
                continue
        raise NoiseFactorizationError("Cholesky failed even with jitter 1e-10 * scale")
    raise ValueError(f"unknown factorization {method!r}")


@dataclass(frozen=True)
class TrajectoryEnsemble:
    z: np.ndarray = field(repr=False)          # (ensemble, records, N)
    p: np.ndarray | None = field(repr=False)
    dt_record: float
    metadata: dict

    @property
    def times(self) -> np.ndarray:
        return self.dt_record * np.arange(1, self.z.shape[1] + 1)


def member_streams(seed: int, n_ensemble: int):
    """Independent generators, one per ensemble member, from a single seed."""
    children = np.random.SeedSequence(int(seed)).spawn(int(n_ensemble))
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def simulate(fc: ForceCoefficients, cfg: LangevinConfig, z0=None, p0=None,
             check: bool = True, modes: ModeBasis | None = None) -> TrajectoryEnsemble:
    """Integrate the Langevin equation; burn-in steps are run but not stored.

    Starts from the static displacement with zero momentum unless ``z0``/``p0``
    are given (either per-site or per-member arrays).
    """
    if check:
        check_config(cfg, fc, modes if modes is not None else _modes_of(fc))
    n = fc.n_sites
    m = fc.trap.mass
    dyn = dynamical_matrix(fc)
    fbar = np.asarray(fc.mean_force, dtype=float)
    if np.iscomplexobj(fc.diffusion) and np.abs(np.imag(fc.diffusion)).max() > 0:
        raise NoiseFactorizationError("classical surrogate needs real diffusion (real drive)")
    alpha = np.asarray(fc.friction, dtype=float)
    lfac = noise_factor(fc.diffusion, cfg.noise_factorization)
    ne, dt, ref = cfg.n_ensemble, cfg.dt, cfg.noise_refinement
    kick = np.sqrt(2.0 * dt / ref) * lfac.T

    z = np.empty((ne, n))
    z[:] = np.linalg.solve(dyn, fbar / m) if z0 is None else z0
    p = np.zeros((ne, n)) if p0 is None else np.broadcast_to(p0, (ne, n)).astype(float)
    rngs = member_streams(cfg.seed, ne)

    total = cfg.burn_in + cfg.n_steps
    zs = np.empty((ne, cfg.n_records, n))
    ps = np.empty((ne, cfg.n_records, n)) if cfg.store_momentum else None
    block = max(1, DRAW_BLOCK // ref)
    dyn_t = dyn.T
    step = 0
    # divergence is reported as IntegrationError, not as float warnings
    with np.errstate(over="ignore", invalid="ignore"):
        while step < total:
            nb = min(block, total - step)
            xi = np.stack([g.standard_normal((nb * ref, n)) for g in rngs], axis=1)
            if ref > 1:
                xi = xi.reshape(nb, ref, ne, n).sum(axis=1)
            dw = xi @ kick
            for k in range(nb):
                p += dt * (fbar - m * (z @ dyn_t) - alpha * p) + dw[k]
                z += (dt / m) * p
                s = step + k + 1 - cfg.burn_in
                if s > 0 and s % cfg.record_every == 0:
                    r = s // cfg.record_every - 1
                    zs[:, r] = z
                    if ps is not None:
                        ps[:, r] = p
            step += nb
            if not (np.all(np.isfinite(z)) and np.all(np.isfinite(p))):
                raise IntegrationError(f"non-finite state after {step} steps")
    meta = {"config": cfg.as_dict(), "bit_generator": "PCG64",
            "streams": "SeedSequence(seed).spawn(n_ensemble)", "n_sites": n}
    return TrajectoryEnsemble(zs, ps, dt * cfg.record_every, meta)


def _modes_of(fc):
    from .mechanics import normal_modes
    return normal_modes(fc)


def zero_noise(fc: ForceCoefficients, keep_mean_force: bool = False) -> ForceCoefficients:
    """Copy of ``fc`` with D_p (and optionally the mean force) set to zero."""
    zero = np.zeros_like(np.asarray(fc.diffusion, dtype=float))
    mean = fc.mean_force if keep_mean_force else np.zeros_like(fc.mean_force)
    return dataclasses.replace(fc, diffusion=zero, mean_force=mean)


def psd_estimate(traj: TrajectoryEnsemble, modes: ModeBasis, nperseg: int | None = None):
    """Welch estimate of the mode-coordinate spectra.

    Returns ``(omega, S)`` with ``S[j]`` the two-sided density in angular
    frequency (so that <z_j^2> = int S d omega / 2 pi over all omega),
    evaluated on omega >= 0 and averaged over the ensemble.
    """
    n_rec = traj.z.shape[1]
    if nperseg is None:
        nperseg = min(n_rec, 4096)
    if nperseg > n_rec:
        raise ValueError(f"segment of {nperseg} records exceeds trajectory length {n_rec}")
    zj = modes.to_modes(traj.z)                       # (ensemble, records, modes)
    f, s1 = signal.welch(zj, fs=1.0 / traj.dt_record, nperseg=nperseg, axis=1,
                         detrend="constant")
    return 2.0 * np.pi * f, 0.5 * s1.mean(axis=0).T


def analytic_psd(fc: ForceCoefficients, modes: ModeBasis, omega) -> np.ndarray:
    """2 D_p^{jj} |chi_j(omega)|^2 / (m^2 nu_j^4), shape (modes, len(omega))."""
    omega = np.asarray(omega, dtype=float)
    dj = mode_diffusion(fc, modes)
    m = fc.trap.mass
    chi = susceptibility(modes.frequencies[:, None], modes.mode_friction[:, None], omega[None, :])
    return (2.0 * dj / (m**2 * modes.frequencies**4))[:, None] * np.abs(chi) ** 2


def band_average(omega, values, center: float, half_width: float) -> float:
    sel = np.abs(np.asarray(omega) - center) <= half_width
    if sel.sum() < 2:
        raise ValueError("band holds fewer than two frequency points")
    return float(np.mean(np.asarray(values)[sel]))


def mode_variances(traj: TrajectoryEnsemble, modes: ModeBasis):
    """Mean of z_j^2 about the static shift, and its standard error over members."""
    zj = modes.to_modes(traj.z) - modes.static_shift[None, None, :]
    per_member = np.mean(zj**2, axis=1)
    return per_member.mean(axis=0), per_member.std(axis=0, ddof=1) / np.sqrt(len(per_member))


def site_means(traj: TrajectoryEnsemble):
    per_member = traj.z.mean(axis=1)
    return per_member.mean(axis=0), per_member.std(axis=0, ddof=1) / np.sqrt(len(per_member))
