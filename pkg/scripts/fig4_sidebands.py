"""Scattered-intensity sidebands at normal and oblique detection; writes intensity.csv."""
from _common import parser, run, show


def main():
    args = parser(__doc__, "out/fig4").parse_args()
    _, man = run("intensity", "fig4_intensity.json", args)
    for entry in man["per_k"]:
        kx, ky = entry["k_perp"]
        show(f"k_perp = ({kx}, {ky}) q", {
            "elastic weight": entry["linear_weight"],
            "sideband weight below nu": entry["sideband_low"],
            "sideband weight above nu": entry["sideband_high"],
            "high / low": entry["sideband_ratio"],
        })
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
