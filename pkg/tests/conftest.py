from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

import atomarray as aa
from atomarray.config import build, load_config

DATA = Path(__file__).parent / "data"
CONFIGS = Path(__file__).parents[1] / "configs"
RECOIL = 1.0 / 810.0

_ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line per acceptance criterion (shown in the terminal summary)."""
    def _report(number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"ACCEPTANCE {number} {title}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  [{detail}]"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return _report


@pytest.fixture(scope="session")
def oracles() -> dict:
    return json.loads((DATA / "oracles.json").read_text())


@dataclass
class Mechanics:
    geom: aa.ArrayGeometry
    trap: aa.TrapParams
    drive: aa.DriveProfile
    coop: aa.CooperativeResponse
    fc: aa.ForceCoefficients
    modes: aa.ModeBasis


def mechanics_for(cfg: dict) -> Mechanics:
    b = build(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", aa.SaturationWarning)
        fc = aa.force_coefficients(b.geometry, b.drive, b.coop, b.trap)
    return Mechanics(b.geometry, b.trap, b.drive, b.coop, fc, aa.normal_modes(fc))


def config(name: str) -> dict:
    return load_config(CONFIGS / name)


@pytest.fixture(scope="session")
def fig2() -> Mechanics:
    return mechanics_for(config("fig2_modes.json"))


@pytest.fixture(scope="session")
def fig5_build():
    return build(config("fig5_squeezing.json"))


@pytest.fixture(scope="session")
def chain() -> Mechanics:
    return mechanics_for(config("oracle_chain.json"))


def small_chain(n=3, a=0.3, omega=0.02, det=-0.25, nu=5e-3, recoil=0.01, w0=None):
    """A few-site chain whose mechanics is cheap to integrate."""
    geom = aa.build_lattice(n, 1, a)
    coop = aa.cooperative_response(geom, "uniform_mode")
    drive = (aa.uniform_profile(geom, omega, det) if w0 is None
             else aa.gaussian_profile(geom, w0, omega, det))
    trap = aa.trap_from_frequency(nu, recoil)
    fc = aa.force_coefficients(geom, drive, coop, trap)
    return Mechanics(geom, trap, drive, coop, fc, aa.normal_modes(fc))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fig4(fig2):
    """Intensity spectra of the Gaussian-beam build at k=0 and k=(0.2, 0.2) q."""
    from atomarray.spectra import default_omega_grid, intensity_spectrum
    m = fig2
    grid = default_omega_grid(m.trap.nu, m.modes.frequencies, m.modes.mode_friction,
                              span=2.0, num=4001, refine=10.0, refine_num=201)
    spectra = {k: intensity_spectrum(m.geom, m.modes, m.fc, m.drive, m.coop, m.trap, k, grid)
               for k in ((0.0, 0.0), (0.2, 0.2))}
    return grid, spectra


@dataclass
class ChainRun:
    mech: Mechanics
    cfg: object
    traj: object
    nperseg: int
    seconds: float


@pytest.fixture(scope="session")
def chain_run(chain) -> ChainRun:
    """One seeded ensemble of the oracle chain, shared by the oracle tests (~20 s)."""
    import time
    from atomarray import langevin as lg
    start = time.perf_counter()
    oc = dict(config("oracle_chain.json")["oracle"])
    nperseg = oc.pop("nperseg")
    relax = oc.pop("relaxation_times")
    cfg = lg.auto_config(chain.fc, chain.modes, relaxation_times=relax, **oc)
    traj = lg.simulate(chain.fc, cfg, modes=chain.modes)
    return ChainRun(chain, cfg, traj, nperseg, time.perf_counter() - start)
