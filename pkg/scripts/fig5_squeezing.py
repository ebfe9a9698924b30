"""Squeezing spectrum of the uniformly driven 31x31 array, plus the drive-strength and spacing sweeps."""
from atomarray import cli
from atomarray.records import read_csv
from _common import parser, run, show


def main():
    p = parser(__doc__, "out/fig5")
    p.add_argument("--no-sweep", action="store_true")
    args = p.parse_args()
    cfg, man = run("squeezing", "fig5_squeezing.json", args)
    s = man["scalars"]
    show("31x31 uniform drive", {
        "B": s["B"], "B from cavity map": s["B_cavity"], "alpha": s["alpha"],
        "min S (outside mask)": s["S_min"],
        "at (omega - nu) / alpha": s["S_min_offset_over_alpha"],
        "dips 1 + 2 Re v = 0 at": man["dip_roots_offset_over_alpha"],
        "S < 1/2 bandwidth / nu": s["bandwidth"] / s["nu"],
    })
    if args.no_sweep:
        return
    for axis in ("drive.rabi_over_gamma=0.1,0.15", "lattice.a_over_lambda=0.5,0.6"):
        name = axis.split("=")[0]
        out = args.out / ("sweep_" + name.split(".")[-1])
        _, agg = read_csv(cli.run_sweep(cfg, [axis], out))
        show(f"sweep {name}", {f"{v:g}": float(bw)
                               for v, bw in zip(agg[name], agg["bandwidth"] / agg["nu"])})
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
