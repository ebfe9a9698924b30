"""Command-line entry point: ``atomarray <command> --config PATH [--out DIR]``.

Exit codes: 0 success, 2 configuration error, 3 physics-domain error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import langevin as lg
from .cavity import map_parameters, multimode_coupling, optical_friction, usb_error_bound
from .config import Build, build, config_hash, load_config, set_path, validate
from .dipole import reflection_coefficient
from .errors import ConfigError, NumericalError, PhysicsDomainError
from .mechanics import (force_coefficients, friction_coefficient, mode_temperature,
                        normal_modes, off_diagonal_friction)
from .params import UNITS
from .records import flat_scalars, load_manifest, write_csv, write_json
from .spectra import default_omega_grid, intensity_spectrum, sideband_weights
from .squeezing import (bloch_frequencies, dip_roots, nonlinearity_parameter,
                        squeezing_bandwidth, squeezing_model, squeezing_spectrum)

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERIC = 0, 2, 3, 4
COMMANDS = ("modes", "intensity", "squeezing", "cavity-map", "langevin")


def _base_scalars(b: Build) -> dict:
    kappa = b.coop.linewidth
    delta = b.drive.detuning * kappa
    r = reflection_coefficient(delta, kappa)
    return {
        "cooperative_shift": b.coop.delta,
        "cooperative_width": b.coop.gamma_coop,
        "linewidth": kappa,
        "linewidth_model": b.coop.model,
        "detuning": delta,
        "eta": b.trap.eta,
        "nu": b.trap.nu,
        "recoil": b.trap.recoil_over_gamma,
        "r": r,
        "r_abs2": abs(r) ** 2,
        "t_abs2": abs(1.0 + r) ** 2,
        "n_sites": b.geometry.n_sites,
    }


def _finish(out: Path, cfg: dict, command: str, scalars: dict, files: list, extra=None):
    manifest = {"command": command, "config_hash": config_hash(cfg), "config": cfg,
                "units": UNITS.tags(), "scalars": scalars, "files": sorted(files)}
    if extra:
        manifest.update(extra)
    write_json(out / "manifest.json", manifest)
    return manifest


def _mechanics(b: Build):
    fc = force_coefficients(b.geometry, b.drive, b.coop, b.trap)
    return fc, normal_modes(fc)


def run_modes(cfg: dict, out: Path) -> dict:
    b = build(cfg)
    fc, modes = _mechanics(b)
    h = config_hash(cfg)
    n = modes.n_modes
    write_csv(out / "modes.csv", {
        "j": np.arange(1, n + 1), "nu_over_gamma": modes.frequencies,
        "alpha_over_gamma": modes.mode_friction, "zbar_over_lambda": modes.static_shift,
        "temperature_over_hbar_gamma": mode_temperature(fc, modes)}, h)
    jj, nn = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    pos = b.geometry.positions
    write_csv(out / "mode_profiles.csv", {
        "j": jj + 1, "n": nn, "x_over_lambda": pos[nn.ravel(), 0], "y_over_lambda": pos[nn.ravel(), 1],
        "U": modes.transform}, h)
    s = _base_scalars(b)
    s.update({"t_eff": fc.t_eff, "alpha_0": float(fc.friction[0]),
              "nu_min_over_nu": float(modes.frequencies.min() / b.trap.nu),
              "nu_max_over_nu": float(modes.frequencies.max() / b.trap.nu),
              "off_diagonal_friction": off_diagonal_friction(fc, modes)})
    return _finish(out, cfg, "modes", s, ["modes.csv", "mode_profiles.csv"],
                   {"mode_hash": modes.digest()})


def run_intensity(cfg: dict, out: Path) -> dict:
    b = build(cfg)
    fc, modes = _mechanics(b)
    det = cfg.get("detection", {})
    ks = det.get("k_perp", [[0.0, 0.0]])
    g = det.get("omega", {})
    grid = default_omega_grid(b.trap.nu, modes.frequencies, modes.mode_friction,
                              g.get("span_over_nu", 2.0), g.get("num", 4001),
                              g.get("refine_over_alpha", 0.0), g.get("refine_num", 201))
    cols = {k: [] for k in ("kx_over_q", "ky_over_q", "omega_over_gamma", "I_nonlinear",
                            "I_total_rendered")}
    per_k = []
    for k in ks:
        spec = intensity_spectrum(b.geometry, modes, fc, b.drive, b.coop, b.trap, k, grid)
        lo, hi = sideband_weights(spec, b.trap.nu)
        per_k.append({"k_perp": list(k), "linear_weight": spec.linear_weight,
                      "sideband_low": lo, "sideband_high": hi,
                      "sideband_ratio": hi / lo if lo > 0 else float("nan")})
        cols["kx_over_q"].append(np.full(len(grid), k[0]))
        cols["ky_over_q"].append(np.full(len(grid), k[1]))
        cols["omega_over_gamma"].append(grid)
        cols["I_nonlinear"].append(spec.nonlinear)
        cols["I_total_rendered"].append(spec.rendered())
    write_csv(out / "intensity.csv", {k: np.concatenate(v) for k, v in cols.items()},
              config_hash(cfg))
    s = _base_scalars(b)
    s.update({"t_eff": fc.t_eff, "alpha_0": float(fc.friction[0])})
    return _finish(out, cfg, "intensity", s, ["intensity.csv"],
                   {"per_k": per_k, "mode_hash": modes.digest()})


def _squeezing_rows(spec):
    m, w = spec.S.shape
    kx = np.repeat(spec.kgrid[:, 0], w)
    ky = np.repeat(spec.kgrid[:, 1], w)
    om = np.tile(spec.omega_grid, m)
    return {"kx_over_q": kx, "ky_over_q": ky, "omega_over_gamma": om,
            "S": spec.S, "S_approx": spec.S_approx, "valid_flag": spec.validity_mask,
            "re_v": spec.v.real, "im_v": spec.v.imag}


def run_squeezing(cfg: dict, out: Path) -> dict:
    b = build(cfg)
    det = cfg.get("detection", {})
    sq = det.get("squeezing", {})
    model = squeezing_model(b.trap, b.drive, b.coop, sq.get("scheme", "near_perfect"))
    nu, alpha = b.trap.nu, model.alpha
    ks = np.atleast_2d(np.asarray(det.get("k_perp", [[0.0, 0.0]]), dtype=float))
    nu_k = (np.full(len(ks), nu) if not np.any(ks)
            else bloch_frequencies(b.geometry, b.trap, b.drive, b.coop, ks))
    h = config_hash(cfg)

    half = sq.get("half_width_over_alpha", 60.0) * alpha
    num = sq.get("num", 4001)
    rows = []
    for k, nk in zip(ks, nu_k):
        window = np.linspace(-half, half, num)
        grid = np.concatenate([-nk + window, nk + window])
        rows.append(_squeezing_rows(squeezing_spectrum(model, [k], [nk], grid)))
    write_csv(out / "squeezing.csv",
              {c: np.concatenate([np.ravel(r[c]) for r in rows]) for c in rows[0]}, h)

    # k = 0 diagnostics: dip depth and location, bandwidth of the S < 1/2 region
    fine = nu + np.linspace(-half, half, num)
    s0 = squeezing_spectrum(model, [(0.0, 0.0)], [nu], fine)
    valid = s0.validity_mask[0]
    i_min = int(np.argmin(np.where(valid, s0.S[0], np.inf)))
    bw_half = sq.get("bandwidth_window_over_nu", 0.2) * nu
    bw_grid = nu + np.linspace(-bw_half, bw_half, sq.get("bandwidth_num", 20001))
    bw_s = squeezing_spectrum(model, [(0.0, 0.0)], [nu], bw_grid).S[0]
    bandwidth = squeezing_bandwidth(bw_grid, bw_s, nu, bw_half)
    files = ["squeezing.csv"]

    scan = det.get("k_scan")
    if scan is not None:
        edge = scan.get("edge_fraction", 0.99) / (2.0 * b.geometry.a)
        kx = np.linspace(-edge, edge, scan.get("num", 41))
        kgrid = np.column_stack([kx, np.zeros_like(kx)])
        nks = bloch_frequencies(b.geometry, b.trap, b.drive, b.coop, kgrid)
        w0 = nu + scan.get("omega_offset_over_alpha", -14.0) * alpha
        spec = squeezing_spectrum(model, kgrid, nks, [w0])
        write_csv(out / "squeezing_kscan.csv", _squeezing_rows(spec), h)
        files.append("squeezing_kscan.csv")

    mapping = map_parameters(b.trap, b.drive, b.coop)
    s = _base_scalars(b)
    s.update({"B": model.B, "W_k0": float(s0.W[0]), "alpha": alpha,
              "B_cavity": mapping.nonlinearity, "bandwidth": bandwidth,
              "S_min": float(s0.S[0, i_min]),
              "S_min_offset_over_alpha": float((fine[i_min] - nu) / alpha),
              "omega_dual_grid_points": 2 * num})
    roots = (dip_roots(model, nu) - nu) / alpha
    return _finish(out, cfg, "squeezing", s, files,
                   {"dip_roots_offset_over_alpha": roots.tolist(), "scheme": model.scheme})


def run_cavity_map(cfg: dict, out: Path) -> dict:
    b = build(cfg)
    mp = map_parameters(b.trap, b.drive, b.coop)
    exact, usb = optical_friction(mp)
    alpha_n = float(friction_coefficient(abs(b.drive.center) ** 2, mp.delta_c, mp.kappa,
                                         b.trap.recoil_over_gamma))
    kp = multimode_coupling(mp)
    report = {
        "g_bar": abs(mp.g_bar), "g_phase_dropped": "-i", "delta_c": mp.delta_c,
        "kappa": mp.kappa, "nu": mp.nu, "kappa_over_nu": mp.kappa / mp.nu,
        "kappa_over_g": mp.bad_cavity_ratio,
        "B_squeezing": nonlinearity_parameter(b.trap.eta, abs(b.drive.center), mp.kappa, mp.nu),
        "B_cavity": mp.nonlinearity,
        "friction_exact": exact, "friction_usb": usb, "alpha_n": alpha_n,
        "usb_vs_alpha_rel": abs(usb - alpha_n) / abs(alpha_n) if alpha_n else 0.0,
        "exact_vs_usb_rel": abs(exact - usb) / abs(usb) if usb else 0.0,
        "exact_vs_usb_bound": usb_error_bound(mp.nu, mp.kappa),
        "k_prime_max_abs": float(np.abs(kp).max(initial=0.0)),
    }
    write_json(out / "cavity_map.json", report)
    s = _base_scalars(b)
    s.update(report)
    print(json.dumps({k: v for k, v in report.items()}, indent=2, sort_keys=True, default=str))
    return _finish(out, cfg, "cavity-map", s, ["cavity_map.json"])


def run_langevin(cfg: dict, out: Path) -> dict:
    b = build(cfg)
    if not b.drive.is_real:
        raise ConfigError("drive: the stochastic oracle needs a real drive profile")
    fc, modes = _mechanics(b)
    oc = dict(cfg.get("oracle", {}))
    oc.setdefault("seed", 0)
    oc.setdefault("n_ensemble", 64)
    nperseg = oc.pop("nperseg", None)
    relax = oc.pop("relaxation_times", 2000.0)
    explicit = {k: oc[k] for k in ("dt", "n_steps", "burn_in") if k in oc}
    if len(explicit) == 3:
        lcfg = lg.LangevinConfig(**oc)
    else:
        lcfg = lg.auto_config(fc, modes, relaxation_times=relax, **oc)
    traj = lg.simulate(fc, lcfg, modes=modes)
    h = config_hash(cfg)
    w, psd = lg.psd_estimate(traj, modes, nperseg)
    an = lg.analytic_psd(fc, modes, w)
    n, nw = psd.shape
    write_csv(out / "psd.csv", {"j": np.repeat(np.arange(1, n + 1), nw),
                                "omega_over_gamma": np.tile(w, n),
                                "psd": psd, "analytic": an}, h)
    files = ["psd.csv"]
    if "trajectories" in cfg.get("output", {}).get("formats", []):
        cols = {"t_over_gamma_inv": traj.times}
        for i in range(fc.n_sites):
            cols[f"z_{i}"] = traj.z[0, :, i]
        write_csv(out / "trajectory_member0.csv", cols, h)
        files.append("trajectory_member0.csv")
    var, se = lg.mode_variances(traj, modes)
    mass = b.trap.mass
    pred_tj = mode_temperature(fc, modes) / (mass * modes.frequencies**2)
    pred_te = fc.t_eff / (mass * modes.frequencies**2)
    band = []
    for j in range(n):
        nu_j, half = modes.frequencies[j], 5 * modes.mode_friction[j]
        if np.count_nonzero(np.abs(w - nu_j) <= half) < 2:
            band.append(None)   # spectral resolution coarser than the line
        else:
            band.append(lg.band_average(w, psd[j], nu_j, half) / lg.band_average(w, an[j], nu_j, half))
    s = _base_scalars(b)
    s.update({"t_eff": fc.t_eff, "dt": lcfg.dt, "n_steps": lcfg.n_steps,
              "n_ensemble": lcfg.n_ensemble, "seed": lcfg.seed,
              "effective_samples": lcfg.n_steps * lcfg.n_ensemble})
    extra = {"variance": var.tolist(), "variance_se": se.tolist(),
             "variance_pred_mode_temperature": pred_tj.tolist(),
             "variance_pred_t_eff": pred_te.tolist(), "psd_band_ratio": band,
             "langevin_config": lcfg.as_dict()}
    return _finish(out, cfg, "langevin", s, files, extra)


RUNNERS = {"modes": run_modes, "intensity": run_intensity, "squeezing": run_squeezing,
           "cavity-map": run_cavity_map, "langevin": run_langevin}


def run_command(command: str, cfg: dict, out) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[command](cfg, out)


def parse_axis(spec: str):
    """``path=v1,v2,...`` -> (path, [values]); values parsed as JSON when possible."""
    if "=" not in spec:
        raise ConfigError(f"sweep axis {spec!r}: expected path=v1,v2,...")
    path, raw = spec.split("=", 1)
    items = [v for v in raw.split(",") if v.strip()]
    if not path or not items:
        raise ConfigError(f"sweep axis {spec!r} has no values")
    values = []
    for v in items:
        try:
            values.append(json.loads(v))
        except json.JSONDecodeError:
            values.append(v.strip())
    return path, values


def _sweep_one(args):
    command, cfg, out = args
    run_command(command, cfg, out)
    return str(out)


def run_sweep(cfg: dict, axes, out, command: str = "squeezing", threads: int = 1) -> Path:
    if not axes:
        raise ConfigError("sweep needs at least one --axis")
    if command not in RUNNERS:
        raise ConfigError(f"cannot sweep command {command!r}")
    parsed = [parse_axis(a) if isinstance(a, str) else a for a in axes]
    for path, values in parsed:
        if not values:
            raise ConfigError(f"sweep axis {path!r} has no values")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jobs, points = [], []
    for i, combo in enumerate(itertools.product(*[v for _, v in parsed])):
        c = cfg
        for (path, _), val in zip(parsed, combo):
            c = set_path(c, path, val)
        validate(c)
        run_dir = out / f"run_{i:03d}"
        jobs.append((command, c, run_dir))
        points.append(combo)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            list(pool.map(_sweep_one, jobs))
    else:
        for j in jobs:
            _sweep_one(j)
    return aggregate(out, [(j[2], config_hash(j[1])) for j in jobs],
                     [p for p, _ in parsed], points)


def aggregate(out: Path, runs, axis_names, points) -> Path:
    """Collect manifest scalars into ``aggregate.csv``, refusing hash mismatches."""
    manifests = [load_manifest(d, h) for d, h in runs]
    scalars = [flat_scalars(m["scalars"]) for m in manifests]
    keys = sorted(set().union(*scalars))
    cols = {"run": [Path(d).name for d, _ in runs]}
    for i, name in enumerate(axis_names):
        cols[name] = [p[i] for p in points]
    cols["config_hash"] = [m["config_hash"] for m in manifests]
    for k in keys:
        cols[k] = [s.get(k, float("nan")) for s in scalars]
    # the aggregate fingerprint spans every run hash
    return write_csv(out / "aggregate.csv", cols, config_hash({"runs": cols["config_hash"]}))


def _parser():
    p = argparse.ArgumentParser(prog="atomarray",
                                description="Collective optomechanics of a trapped atom array.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", help="output directory (default: output.directory or ./out)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--seed", type=int, help="override oracle.seed")
        if name == "sweep":
            sp.add_argument("--axis", action="append", default=[],
                            help="dotted.config.path=v1,v2,... (repeatable)")
            sp.add_argument("--command", dest="sweep_command", default="squeezing",
                            choices=COMMANDS)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg = validate(set_path(cfg, "oracle.seed", args.seed))
        out = Path(args.out or cfg.get("output", {}).get("directory", "out"))
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        if args.command == "sweep":
            run_sweep(cfg, args.axis, out, args.sweep_command, args.threads)
        else:
            run_command(args.command, cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsDomainError as exc:
        print(f"physics-domain error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
