"""Multigraph model, Bollobas LCD generation and basic degree statistics.

The LCD (linearized chord diagram) process adds micro-nodes one at a time,
each carrying a single outgoing half-edge, and attaches it to an existing
micro-node with probability proportional to degree (or to itself with
probability ``1/(2u-1)``).  Consecutive blocks of ``m`` micro-nodes are then
contracted into one node, so intra-block edges become self-loops and repeated
attachments become parallel edges.
"""
from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import InsufficientDataError
from .rng import make_rng

__all__ = [
    "Multigraph",
    "DegreeHistogram",
    "PowerLawFit",
    "generate_lcd",
    "generate_with_exponent",
    "generate_erdos_renyi",
    "degree_histogram",
    "fit_power_law",
    "bfs_distances",
    "hub_node",
    "write_edge_list",
    "read_edge_list",
    "UNREACHABLE",
]

UNREACHABLE = -1

_INT_MAX = np.iinfo(np.int64).max


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Undirected multigraph with self-loops.

    ``edges`` is an ``(E, 3)`` int64 array of ``(u, v, multiplicity)`` rows with
    ``u <= v``, sorted lexicographically and free of duplicates.  Instances are
    immutable; derived matrices are computed lazily and cached.

    The weighted adjacency stores the loop count once on the diagonal
    (``A[u, u]`` = number of loops at ``u``) while the graph degree counts
    every loop twice.
    """

    n: int
    edges: np.ndarray
    m: int | None = None
    beta: float | None = None
    seed: int | None = None

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 3)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_pairs(cls, n: int, u, v, **meta) -> "Multigraph":
        """Build from endpoint arrays; repeated pairs accumulate multiplicity."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ValueError("edge endpoint out of range")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keys, counts = np.unique(lo * n + hi, return_counts=True)
        edges = np.column_stack([keys // n, keys % n, counts])
        return cls(n, edges, **meta)

    @property
    def edge_count(self) -> int:
        """Total edge multiplicity (loops included)."""
        return int(self.edges[:, 2].sum())

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Dense weighted adjacency as float64 (read-only)."""
        a = np.zeros((self.n, self.n))
        u, v, c = self.edges.T
        a[u, v] = c
        a[v, u] = c
        a.setflags(write=False)
        return a

    @cached_property
    def degree(self) -> np.ndarray:
        """Graph degree, each self-loop contributing 2."""
        u, v, c = self.edges.T
        d = np.bincount(u, weights=c, minlength=self.n) + np.bincount(v, weights=c, minlength=self.n)
        return d.astype(np.int64)

    @cached_property
    def loops(self) -> np.ndarray:
        u, v, c = self.edges.T
        mask = u == v
        return np.bincount(u[mask], weights=c[mask], minlength=self.n).astype(np.int64)

    @cached_property
    def weighted_simple(self) -> sparse.csr_matrix:
        """Symmetric CSR matrix of multiplicities with self-loops dropped."""
        u, v, c = self.edges[self.edges[:, 0] != self.edges[:, 1]].T
        w = sparse.coo_matrix(
            (np.concatenate([c, c]).astype(float), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.n, self.n),
        )
        return w.tocsr()

    @cached_property
    def simple(self) -> sparse.csr_matrix:
        """0/1 CSR adjacency of the simple-graph projection (no loops)."""
        s = self.weighted_simple.copy()
        s.data[:] = 1.0
        return s

    @cached_property
    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        ncomp = csgraph.connected_components(self.simple, directed=False, return_labels=False)
        return ncomp == 1

    def same_edges(self, other: "Multigraph") -> bool:
        return self.n == other.n and np.array_equal(self.edges, other.edges)


@dataclass(frozen=True)
class DegreeHistogram:
    k: np.ndarray
    count: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.count))


@dataclass(frozen=True)
class PowerLawFit:
    beta_hat: float
    kmin: int
    goodness: float  # RMS residual of the log10 fit
    log_k: np.ndarray = field(repr=False)
    log_density: np.ndarray = field(repr=False)


def _check_size(n: int, m: int) -> None:
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    if n > _INT_MAX // m or 2 * n * m > _INT_MAX:
        raise OverflowError(f"n*m = {n}*{m} overflows int64")


def _micro_targets(total: int, attractiveness: float, rng: np.random.Generator) -> np.ndarray:
    """Run the micro-node attachment process for ``total`` steps.

    Micro-node ``u`` (0-based) attaches to ``s`` with weight ``d(s) + a`` for
    ``s < u`` and ``1 + a`` for ``s = u`` (a self-loop), where ``a`` is the
    per-micro-node attractiveness.  The weight is split as ``(d(s) - 1)`` drawn
    from the list of "extra" half-edge ends plus ``(1 + a)`` drawn uniformly
    over micro-nodes, which is valid for any ``a > -1``.  For ``a = 0`` this is
    exactly the LCD rule ``d(s)/(2u-1)``.
    """
    extra = np.empty(total, dtype=np.int64)
    targets = np.empty(total, dtype=np.int64)
    draws = rng.random(total)
    base = 1.0 + attractiveness
    for u in range(total):
        # before step u there are exactly u extra ends
        r = draws[u] * (u + (u + 1) * base)
        if r < u:
            s = extra[int(r)]
        else:
            s = min(int((r - u) / base), u)
        targets[u] = s
        extra[u] = s
    return targets


def _contract(n: int, m: int, targets: np.ndarray, **meta) -> Multigraph:
    src = np.arange(n * m, dtype=np.int64) // m
    return Multigraph.from_pairs(n, src, targets // m, m=m, **meta)


def generate_lcd(n: int, m: int, seed: int) -> Multigraph:
    """Bollobas LCD scale-free multigraph with ``n`` nodes and ``m*n`` edges.

    Parameters
    ----------
    n : int
        Number of (contracted) nodes.
    m : int
        Micro-nodes per node, i.e. edges added per node.
    seed : int
        Seed of the Philox stream driving the attachment choices.

    Returns
    -------
    Multigraph
        Degree exponent 3; minimum degree ``m``, mean degree ``2m``.
    """
    _check_size(n, m)
    targets = _micro_targets(n * m, 0.0, make_rng(seed))
    return _contract(n, m, targets, beta=3.0, seed=int(seed))


def generate_with_exponent(n: int, m: int, beta: float, seed: int) -> Multigraph:
    """LCD variant with initial attractiveness tuning the degree exponent.

    Each node carries attractiveness ``a = m*(beta - 3)``, spread as
    ``beta - 3`` over each of its ``m`` micro-nodes, which yields a tail
    exponent ``3 + a/m = beta``.  With ``beta == 3`` the random draws and the
    output coincide exactly with :func:`generate_lcd`.
    """
    if not beta > 2:
        raise ValueError(f"beta must exceed 2, got {beta}")
    _check_size(n, m)
    targets = _micro_targets(n * m, float(beta) - 3.0, make_rng(seed))
    return _contract(n, m, targets, beta=float(beta), seed=int(seed))


def _decode_pairs(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row-major enumeration of pairs (i, j), i < j
    i = (n - 2 - np.floor(np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # guard against floating point at block boundaries
    low = idx < start
    i[low] -= 1
    start = i * (2 * n - i - 1) // 2
    high = idx >= start + (n - 1 - i)
    i[high] += 1
    start = i * (2 * n - i - 1) // 2
    j = idx - start + i + 1
    return i, j


def generate_erdos_renyi(n: int, edge_count: int, seed: int) -> Multigraph:
    """Simple G(n, M) graph: ``edge_count`` distinct pairs drawn uniformly."""
    if n < 2:
        raise ValueError("need n >= 2")
    pairs = n * (n - 1) // 2
    if not 0 <= edge_count <= pairs:
        raise ValueError(f"edge_count={edge_count} infeasible for n={n} (max {pairs})")
    rng = make_rng(seed)
    idx = np.sort(rng.choice(pairs, size=edge_count, replace=False))
    i, j = _decode_pairs(idx.astype(np.int64), n)
    return Multigraph.from_pairs(n, i, j, seed=int(seed))


def degree_histogram(g: Multigraph) -> DegreeHistogram:
    k, c = np.unique(g.degree, return_counts=True)
    return DegreeHistogram(k, c)


def fit_power_law(
    h: DegreeHistogram, kmin: int | None = None, bins_per_decade: int = 10, min_count: float = 3
) -> PowerLawFit:
    """Least-squares exponent of a log-binned degree distribution.

    Degrees ``k >= kmin`` are grouped in logarithmic bins with integer edges;
    each bin's density is its share of the nodes divided by the number of
    integers it spans, placed at the geometric mean of its extreme integers.
    The exponent is minus the slope of ``log10(density)`` against
    ``log10(k)``.  Bins holding fewer than ``min_count`` nodes are dropped:
    keeping sparsely populated tail bins (while empty ones necessarily drop
    out) biases the slope towards shallower values.

    ``kmin`` defaults to the smallest observed degree (``m`` for LCD output).
    """
    k = np.asarray(h.k, dtype=float)
    c = np.asarray(h.count, dtype=float)
    keep = c > 0
    k, c = k[keep], c[keep]
    if kmin is None:
        kmin = int(k.min()) if k.size else 1
    sel = k >= kmin
    if np.count_nonzero(sel) < 3:
        raise InsufficientDataError(f"need at least 3 distinct degrees >= {kmin}")
    k, c = k[sel], c[sel]
    total = c.sum()

    kmax = k.max()
    ndec = math.log10(kmax / kmin) if kmax > kmin else 0.0
    raw = kmin * 10.0 ** (np.arange(0, int(np.ceil(ndec * bins_per_decade)) + 2) / bins_per_decade)
    edges = np.unique(np.ceil(raw - 1e-9).astype(np.int64))
    edges = np.append(edges[(edges > 0) & (edges <= kmax)], int(kmax) + 1)
    idx = np.searchsorted(edges, k, side="right") - 1
    mass = np.bincount(idx, weights=c, minlength=edges.size - 1)[: edges.size - 1]
    width = np.diff(edges).astype(float)
    occupied = (mass > 0) & (mass >= min_count)
    if np.count_nonzero(occupied) < 3:
        raise InsufficientDataError("fewer than 3 occupied logarithmic bins")
    lo = edges[:-1][occupied].astype(float)
    hi = edges[1:][occupied].astype(float) - 1.0
    x = 0.5 * (np.log10(lo) + np.log10(hi))
    y = np.log10(mass[occupied] / total / width[occupied])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return PowerLawFit(float(-slope), int(kmin), float(np.sqrt(np.mean(resid**2))), x, y)


def bfs_distances(g: Multigraph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get ``UNREACHABLE``."""
    if not 0 <= source < g.n:
        raise IndexError(f"source {source} out of range for n={g.n}")
    d = csgraph.shortest_path(g.simple, method="D", unweighted=True, directed=False, indices=source)
    out = np.full(g.n, UNREACHABLE, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int64)
    return out


def hub_node(g: Multigraph) -> int:
    """Index of the largest graph degree (lowest index on ties)."""
    return int(np.argmax(g.degree))


_HEADER = re.compile(r"^# multigraph n=(\d+) m=(\S+) beta=(\S+) seed=(\S+)\s*$")


def _fmt(x) -> str:
    return "none" if x is None else repr(x)


def write_edge_list(g: Multigraph, path) -> Path:
    """Write ``g`` as a text edge list (header plus ``u v mult`` rows)."""
    path = Path(path)
    lines = [f"# multigraph n={g.n} m={_fmt(g.m)} beta={_fmt(g.beta)} seed={_fmt(g.seed)}"]
    lines += [f"{u} {v} {c}" for u, v, c in g.edges.tolist()]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_edge_list(path) -> Multigraph:
    path = Path(path)
    with path.open(encoding="ascii") as fh:
        header = fh.readline()
        match = _HEADER.match(header)
        if not match:
            raise ValueError(f"{path}: malformed header {header!r}")
        n, m, beta, seed = match.groups()
        rest = fh.read()
    body = np.empty((0, 3), dtype=np.int64)
    if rest.strip():  # an edgeless graph is a header only; loadtxt warns on empty input
        body = np.loadtxt(io.StringIO(rest), dtype=np.int64, ndmin=2).reshape(-1, 3)
    meta = dict(
        m=None if m == "none" else int(m),
        beta=None if beta == "none" else float(beta),
        seed=None if seed == "none" else int(seed),
    )
    g = Multigraph(int(n), body, **meta)
    e = g.edges
    if e.size and (np.any(e[:, 0] > e[:, 1]) or np.any(e[:, 2] < 1)):
        raise ValueError(f"{path}: rows must satisfy u <= v and mult >= 1")
    return g
