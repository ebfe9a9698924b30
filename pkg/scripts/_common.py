"""Shared helpers for the experiment scripts."""
import argparse
import json
from pathlib import Path

from atomarray import cli
from atomarray.config import load_config

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def parser(description, default_out):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--out", type=Path, default=ROOT / default_out)
    return p


def run(command, config_name, args):
    cfg = load_config(args.config or CONFIGS / config_name)
    manifest = cli.run_command(command, cfg, args.out)
    return cfg, manifest


def show(title, mapping):
    print(title)
    for k, v in mapping.items():
        print(f"  {k:<34s} {json.dumps(v) if not isinstance(v, float) else f'{v:.6g}'}")
