"""Small graph builders shared by the test modules."""
import numpy as np

from qwsearch.graph import Multigraph


def star(leaves: int) -> Multigraph:
    return Multigraph.from_pairs(leaves + 1, np.zeros(leaves, int), np.arange(1, leaves + 1))


def path(n: int) -> Multigraph:
    return Multigraph.from_pairs(n, np.arange(n - 1), np.arange(1, n))


def complete(n: int) -> Multigraph:
    u, v = np.triu_indices(n, 1)
    return Multigraph.from_pairs(n, u, v)


def cycle(n: int) -> Multigraph:
    return Multigraph.from_pairs(n, np.arange(n), (np.arange(n) + 1) % n)


def two_components(n: int) -> Multigraph:
    """Two disjoint paths of ``n`` nodes each."""
    u = np.r_[np.arange(n - 1), n + np.arange(n - 1)]
    return Multigraph.from_pairs(2 * n, u, u + 1)
