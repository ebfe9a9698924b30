"""Collective modes of the 14x14 Gaussian-beam array; writes modes.csv and mode_profiles.csv."""
import numpy as np

from atomarray.records import read_csv
from _common import parser, run, show


def main():
    args = parser(__doc__, "out/fig2").parse_args()
    _, man = run("modes", "fig2_modes.json", args)
    h = man["config_hash"]
    _, modes = read_csv(args.out / "modes.csv", h)
    _, prof = read_csv(args.out / "mode_profiles.csv", h)
    n = len(modes["j"])
    u = prof["U"].reshape(n, n)
    x = prof["x_over_lambda"].reshape(n, n)[0]
    y = prof["y_over_lambda"].reshape(n, n)[0]
    top = u[-1] ** 2
    s = man["scalars"]
    show("array and trap", {k: s[k] for k in ("eta", "nu", "linewidth", "t_eff", "alpha_0")})
    show("spectrum", {
        "modes": n,
        "nu_min / nu": s["nu_min_over_nu"],
        "nu_max / nu": s["nu_max_over_nu"],
        "off-diagonal friction / min": s["off_diagonal_friction"],
        "highest mode weight in r < 1": float(top[np.hypot(x, y) < 1].sum()),
        "lowest mode weight in r < 1": float((u[0] ** 2)[np.hypot(x, y) < 1].sum()),
    })
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
