"""Search-time classes on a small LCD ensemble.

Runs a reduced sweep, then prints the mean search time per hub distance,
the selected lognormal mixture with the responsibility of each component
per distance class, and the log-log correlations of T with the
centralities.  Defaults take a few minutes on one core; pass a larger N
or more samples for a closer look.

    python demos/search_time_classes.py [--n 1000] [--samples 4] [--nodes 50] [--out DIR]
"""
import argparse
import logging
import tempfile

import numpy as np

from qwsearch.harness.commands import cmd_correlate, cmd_fit
from qwsearch.harness.config import load_config
from qwsearch.harness.sweep import read_sweep, run_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--m", type=int, default=5)
    ap.add_argument("--samples", type=int, default=4)
    ap.add_argument("--nodes", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="output directory (default: a temporary one)")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = args.out or tempfile.mkdtemp(prefix="qwsearch-demo-")
    cfg = load_config(
        overrides=dict(model="lcd", n=[args.n], m=args.m, samples=args.samples,
                       nodes_per_sample=args.nodes, seed=args.seed, kmax=3),
        environ={},
    )  # fmt: skip
    csv = run_sweep(cfg, out)[0]
    data = read_sweep(csv)
    ok = data["status"] == "ok"

    print(f"\n{int(ok.sum())} searches on LCD N={args.n}, m={args.m} (output in {out})")
    print(f"{'l_hub_w':>8} {'count':>6} {'mean T':>10} {'mean p_max':>11}")
    for level in np.unique(data["l_hub_w"][ok]):
        sel = ok & (data["l_hub_w"] == level)
        print(f"{level:8d} {sel.sum():6d} {data['T'][sel].mean():10.1f} {data['p_max'][sel].mean():11.4f}")

    res = cmd_fit(csv, cfg, out=out)
    fit = res["fit"]
    print(f"\nmixture: k = {fit.k}, BIC " + ", ".join(f"k={k}: {v:.1f}" for k, v in fit.bic_table.items()))
    for p, mu, sigma in zip(fit.weights, fit.means, fit.sigmas):
        print(f"  p = {p:.3f}  mean ln T = {mu:.3f}  sigma = {sigma:.3f}")
    print("responsibility of each component by hub distance:")
    for level, count, _, *resp in res["crosstab"]:
        print(f"  l = {level} ({count} nodes): " + "  ".join(f"{r:.2f}" for r in resp))

    print("\nr(ln T, ln C):")
    for name, (r_t, _, n) in sorted(cmd_correlate(csv, cfg, out=out).items(), key=lambda kv: -abs(kv[1][0])):
        print(f"  {name:8s} {r_t:+.3f}  (n = {n})")


if __name__ == "__main__":
    main()
