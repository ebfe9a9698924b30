"""Compute reference values by routes independent of the package formulas and
freeze them into ``tests/data/oracles.json``.

Routes used here:
* closed-form trap and friction values in 50-digit mpmath arithmetic;
* lattice sums over distinct displacement vectors weighted by their
  multiplicity, with the Green's tensor projected by explicit cmath loops;
* the force tensor from a sympy transcription of its bracket formula, plus a
  second sympy expression obtained by differentiating the Green's scalars;
* squeezing coefficients and dip roots with mpmath.findroot;
* stationary covariance of the Langevin chain from scipy's Lyapunov solver.

Run from the repository root: ``python3 scripts/derive_oracles.py``.
The Lyapunov block needs the package (for the coefficient matrices only).
"""
from __future__ import annotations

import cmath
import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np
import sympy as sp

mp.mp.dps = 50
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"
TWO_PI = 2 * mp.pi


def trap(depth, length, recoil):
    mass = TWO_PI**2 / recoil
    nu = (mp.pi / length) * mp.sqrt(2 * depth * recoil / mass)
    eta = mp.sqrt(recoil / (2 * nu))
    return nu, eta


def friction(omega2, detuning, kappa, recoil):
    den = detuning**2 + kappa**2 / 4
    return recoil * omega2 * (-2 * detuning * kappa) / den**2


# ---------------------------------------------------------------- lattice sums
E_D = (1 / math.sqrt(2), 1j / math.sqrt(2), 0.0)


def green_projected(dx, dy):
    """e_d^dagger G e_d for an in-plane displacement (units lambda), loop form."""
    q = 2 * math.pi
    r = math.hypot(dx, dy)
    u = q * r
    hat = (dx / r, dy / r, 0.0)
    a = 1 + 1j / u - 1 / u**2
    b = -1 - 3j / u + 3 / u**2
    pref = q * cmath.exp(1j * u) / (4 * math.pi * u)
    total = 0j
    for i in range(3):
        for j in range(3):
            gij = pref * (a * (i == j) + b * hat[i] * hat[j])
            total += E_D[i].conjugate() * gij * E_D[j]
    return total


def width_uniform_mode(n, a):
    acc = 0j
    for dx in range(-(n - 1), n):
        for dy in range(-(n - 1), n):
            if dx == 0 and dy == 0:
                continue
            acc += (n - abs(dx)) * (n - abs(dy)) * green_projected(dx * a, dy * a)
    z = -1.5 * acc / (n * n)
    return z.real, -2 * z.imag


def width_central(n, a):
    c = (n - 1) // 2
    acc = 0j
    for i in range(n):
        for j in range(n):
            if i == c and j == c:
                continue
            acc += green_projected((i - c) * a, (j - c) * a)
    z = -1.5 * acc
    return z.real, -2 * z.imag


# -------------------------------------------------------------- force tensor
def force_tensor_oracles(n_points=20, seed=11):
    u = sp.symbols("u", positive=True)
    I = sp.I
    iso = sp.exp(I * u) / u**2 * ((I - 1 / u) * (1 + (I * u - 1) / u**2)
                                  + (I / u**2 - 2 * (I * u - 1) / u**3))
    aniso = sp.exp(I * u) / u**2 * ((I - 3 / u) * (-1 + (3 - 3 * I * u) / u**2)
                                    + 3 * (-I / u**2 - 2 * (1 - I * u) / u**3))
    # second route: derivatives of the Green's scalar functions
    ga = sp.exp(I * u) / u * (1 + I / u - 1 / u**2)
    gb = sp.exp(I * u) / u * (-1 - 3 * I / u + 3 / u**2)
    iso_d = sp.diff(ga, u) / u
    aniso_d = sp.diff(gb, u) / u - 2 * gb / u**2
    assert sp.simplify(iso - iso_d) == 0 and sp.simplify(aniso - aniso_d) == 0
    f_iso = sp.lambdify(u, iso, "mpmath")
    f_an = sp.lambdify(u, aniso, "mpmath")
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(n_points):
        vec = rng.uniform(-6, 6, size=3)
        vec[rng.integers(3)] *= rng.choice([1e-2, 1.0, 10.0])
        r = mp.sqrt(sum(mp.mpf(float(x))**2 for x in vec))
        di, an = f_iso(r), f_an(r)
        tens = [[complex(di * (i == j) + an * mp.mpf(float(vec[i])) * mp.mpf(float(vec[j])) / r**2)
                 for j in range(3)] for i in range(3)]
        pts.append({"u": vec.tolist(),
                    "re": [[t.real for t in row] for row in tens],
                    "im": [[t.imag for t in row] for row in tens]})
    return pts


# ------------------------------------------------------------------ squeezing
def squeezing_fig5():
    recoil = mp.mpf(1) / 810
    nu, eta = trap(mp.mpf(1500), mp.mpf(400) / 780, recoil)
    kappa = 3 / mp.pi
    omega = mp.mpf("0.1")
    delta = mp.mpf("-0.1") * kappa
    alpha = friction(omega**2, delta, kappa, recoil)

    def v(w, nu_k=nu):
        chi = -nu_k**2 / (w**2 - nu_k**2 + 1j * alpha * w)
        return 1j * 8 * eta**4 * (4 * omega**2 / kappa**2) * (kappa / recoil) * (nu**2 / nu_k**2) * chi

    def s_full(w):
        vv = v(w)
        return (mp.sqrt(abs(vv)**2 + 1 + 2 * vv.real) - abs(vv))**2

    w14 = nu - 14 * alpha
    roots = []
    for lo, hi in ((nu - 8 * alpha, nu - 2 * alpha), (nu + 2 * alpha, nu + 8 * alpha)):
        roots.append(mp.findroot(lambda w: 1 + 2 * v(w).real, (lo, hi), solver="illinois"))
    B = 16 * (eta * omega)**2 / (kappa * nu)
    g = eta * omega
    return {
        "nu": float(nu), "eta": float(eta), "kappa": float(kappa), "alpha": float(alpha),
        "B": float(B), "abs_v_at_minus14": float(abs(v(w14))), "S_at_minus14": float(s_full(w14)),
        "re_v_at_minus14": float(v(w14).real), "im_v_at_minus14": float(v(w14).imag),
        "dip_root_offsets_over_alpha": [float((rt - nu) / alpha) for rt in roots],
        "kappa_over_g": float(kappa / g), "g_bar": float(g),
    }


def fig2_values():
    recoil = mp.mpf(1) / 810
    nu, eta = trap(mp.mpf(1000), mp.mpf(450) / 780, recoil)
    kappa = 3 / (4 * mp.pi * mp.mpf("0.2")**2)
    delta = -kappa / 4
    den = delta**2 + kappa**2 / 4
    return {"nu": float(nu), "eta": float(eta), "kappa": float(kappa),
            "alpha_0": float(friction(mp.mpf(1), delta, kappa, recoil)),
            "t_eff": float(den / (2 * (-delta) * kappa)),
            "corner_amplitude": float(mp.exp(-2 * (13 * mp.mpf("0.2") / 2)**2 / mp.mpf("1.5")**2)),
            "corner_amplitude_stored_lattice": float(
                mp.exp(-((7 * mp.mpf("0.2"))**2 + (7 * mp.mpf("0.2"))**2) / mp.mpf("1.5")**2))}


# ------------------------------------------------------------------ Lyapunov
def lyapunov_chain():
    from scipy.linalg import solve_continuous_lyapunov

    import atomarray as aa
    from atomarray.mechanics import dynamical_matrix

    geom = aa.build_lattice(4, 1, 1.01)
    coop = aa.cooperative_response(geom, "uniform_mode")
    drive = aa.gaussian_profile(geom, 2.02, 0.025, -0.05)
    trp = aa.trap_from_frequency(5e-4, 0.01)
    fc = aa.force_coefficients(geom, drive, coop, trp)
    n, m = geom.n_sites, trp.mass
    drift = np.zeros((2 * n, 2 * n))
    drift[:n, n:] = np.eye(n) / m
    drift[n:, :n] = -m * dynamical_matrix(fc)
    drift[n:, n:] = -np.diag(fc.friction)
    noise = np.zeros((2 * n, 2 * n))
    noise[n:, n:] = 2 * np.real(fc.diffusion)
    cov = solve_continuous_lyapunov(drift, -noise)[:n, :n]
    modes = aa.normal_modes(fc)
    u = modes.transform
    return {"site_covariance": cov.tolist(),
            "mode_variance": np.diag(u @ cov @ u.T).tolist(),
            "t_eff_prediction": (fc.t_eff / (m * modes.frequencies**2)).tolist()}


def main():
    sizes = [10, 14, 20, 30, 40]
    um = {str(n): width_uniform_mode(n, 0.2) for n in sizes}
    ce = {str(n): width_central(n, 0.2) for n in sizes}
    data = {
        "trap_fig2": dict(zip(("nu", "eta"), map(float, trap(mp.mpf(1000), mp.mpf(450) / 780, mp.mpf(1) / 810)))),
        "trap_fig5": dict(zip(("nu", "eta"), map(float, trap(mp.mpf(1500), mp.mpf(400) / 780, mp.mpf(1) / 810)))),
        "lattice_a02": {"uniform_mode": {k: {"delta": v[0], "gamma": v[1]} for k, v in um.items()},
                        "central": {k: {"delta": v[0], "gamma": v[1]} for k, v in ce.items()},
                        "infinite_linewidth": float(75 / (4 * mp.pi))},
        "lattice_a05_20": dict(zip(("delta", "gamma"), width_uniform_mode(20, 0.5))),
        "force_tensor": force_tensor_oracles(),
        "fig2": fig2_values(),
        "fig5": squeezing_fig5(),
        "lyapunov_chain": lyapunov_chain(),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
