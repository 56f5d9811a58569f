"""``qwsearch`` command line.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or data
failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ..errors import QwSearchError
from . import commands
from .config import ConfigError, load_config

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (override the config file and QWSEARCH_* variables)")
    g.add_argument("--config", metavar="PATH", help="YAML experiment file")
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--workers", type=int, help="worker processes")
    g.add_argument("--out", metavar="DIR", help="output directory")
    g.add_argument("--n", nargs="+", metavar="N", help="graph sizes, e.g. --n 500 1000 or --n 500,1000")
    g.add_argument("--m", type=int, help="edges added per node")
    g.add_argument("--beta", type=float, help="target degree exponent (LCD model)")
    g.add_argument("--model", choices=("lcd", "er"), help="network model")
    g.add_argument("--samples", type=int, help="graph samples per N")
    g.add_argument("--nodes-per-sample", help="marked nodes per sample, or 'all'")
    g.add_argument("--kmax", type=int, help="largest mixture size")
    g.add_argument("--restarts", type=int, help="EM restarts")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (-vv for debug)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwsearch", description="Quantum-walk spatial search on scale-free networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write graph samples as edge lists")
    _common(p)
    p = sub.add_parser("sweep", help="search every marked node of every sample")
    _common(p)
    p = sub.add_parser("fit", help="lognormal mixture of T from a sweep CSV")
    p.add_argument("csv", help="sweep CSV")
    _common(p)
    p = sub.add_parser("scaling", help="N-scaling exponents from sweeps at >= 3 sizes")
    p.add_argument("csv", nargs="+", help="sweep CSVs (any mix of sizes)")
    _common(p)
    p = sub.add_parser("correlate", help="log-log correlations of T and P with centralities")
    p.add_argument("csv", help="sweep CSV")
    _common(p)
    p = sub.add_parser("gamma-profile", help="eigenstate overlaps and gap against gamma")
    p.add_argument("--graph", metavar="PATH", help="edge list (default: first configured sample)")
    p.add_argument("--w", required=True, help="marked node index, 'max-degree' or 'min-degree'")
    p.add_argument("--gamma-min", type=float)
    p.add_argument("--gamma-max", type=float)
    p.add_argument("--points", type=int, default=400)
    _common(p)
    return parser


def _config(args):
    overrides = {
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
        "n": args.n,
        "m": args.m,
        "beta": args.beta,
        "model": args.model,
        "samples": args.samples,
        "nodes_per_sample": args.nodes_per_sample,
        "kmax": args.kmax,
        "restarts": args.restarts,
    }
    if args.n is not None:
        overrides["n"] = " ".join(args.n)
    return load_config(args.config, overrides)


def _run(args) -> None:
    cfg = _config(args)
    cmd = args.command
    if cmd == "generate":
        paths = commands.cmd_generate(cfg)
        print(f"wrote {len(paths)} edge lists to {cfg.out}")
    elif cmd == "sweep":
        for path in commands.cmd_sweep(cfg):
            print(path)
    elif cmd == "fit":
        res = commands.cmd_fit(args.csv, cfg)
        fit = res["fit"]
        print(f"k = {fit.k} (BIC {fit.bic:.2f}; table {', '.join(f'{k}: {v:.2f}' for k, v in fit.bic_table.items())})")
        for p_, mu, s in zip(fit.weights, fit.means, fit.sigmas):
            print(f"  p = {p_:.4f}  mu = {mu:.4f}  sigma = {s:.4f}")
    elif cmd == "scaling":
        res = commands.cmd_scaling(args.csv, cfg)
        print("mean T by hub distance:")
        for level, sf in res["distance"].items():
            print(f"  l = {level}: alpha = {sf.alpha:.3f} +/- {sf.stderr:.3f}")
        print("mixture parameters:")
        for name, i, alpha, err, _, const, _n in res["mixture"]:
            print(f"  {name}_{i}: alpha = {alpha:.3f} +/- {err:.3f}{'  (const.)' if const else ''}")
    elif cmd == "correlate":
        table = commands.cmd_correlate(args.csv, cfg)
        print(f"{'measure':8s} {'r(T)':>8s} {'r(P)':>8s} {'n':>6s}")
        for name, (r_t, r_p, n) in table.items():
            print(f"{name:8s} {r_t:8.3f} {r_p:8.3f} {n:6d}")
    elif cmd == "gamma-profile":
        res = commands.cmd_gamma_profile(cfg, args.w, args.graph, args.gamma_min, args.gamma_max, args.points)
        print(f"w = {res['w']} (degree {res['degree_w']}): gamma_opt = {res['gamma_opt']:.6g}, dE = {res['delta_e_at_opt']:.6g}")
        print(res["path"])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        _run(args)
    except ConfigError as exc:
        print(f"qwsearch: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QwSearchError as exc:
        print(f"qwsearch: {exc.status}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"qwsearch: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, IndexError) as exc:
        print(f"qwsearch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("qwsearch: interrupted; finished samples were kept", file=sys.stderr)
        return 130
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
