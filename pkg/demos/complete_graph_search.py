"""Grover-like search on the complete graph K_N.

Prints gamma_opt, tau and p_max against the closed forms
gamma_opt = (N-2)/N^2 and tau ~ (pi/2) sqrt(N), for the uniform (Perron)
start and for a start on a single vertex.

    python demos/complete_graph_search.py
"""
import math

import numpy as np

from qwsearch.graph import Multigraph
from qwsearch.search import SearchConfig, run_search


def complete(n: int) -> Multigraph:
    u, v = np.triu_indices(n, 1)
    return Multigraph.from_pairs(n, u, v)


def main() -> None:
    print(f"{'N':>5} {'gamma*N':>9} {'(N-2)/N':>9} {'tau/(pi/2 sqrtN)':>17} {'p_max':>7} {'p_max vertex start':>19}")
    for n in (16, 64, 256, 1024):
        g = complete(n)
        uniform = run_search(g, 0, SearchConfig(initial="perron"))
        vertex = run_search(g, 1)
        print(
            f"{n:5d} {uniform.gamma_opt * n:9.4f} {(n - 2) / n:9.4f} "
            f"{uniform.tau / (math.pi / 2 * math.sqrt(n)):17.4f} {uniform.p_max:7.4f} {vertex.p_max:19.4f}"
        )


if __name__ == "__main__":
    main()
