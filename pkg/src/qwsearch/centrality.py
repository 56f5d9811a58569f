"""Node centralities and classical random-walk first-passage times.

Conventions on multigraphs:

* degree centrality sums adjacency rows with loops counted once;
* shortest-path measures (closeness, betweenness) use the simple-graph
  projection, ignoring loops and multiplicities;
* the random walker picks one incident edge-end uniformly, so a node with
  ``A[j, j]`` loops stays put with probability ``2*A[j, j]/deg(j)``;
* current-flow betweenness uses conductances equal to edge multiplicities.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy.sparse import csgraph

from .errors import DegenerateVarianceError, DisconnectedGraphError, SingularSystemError
from .graph import Multigraph, hub_node
from .search import adjacency_spectrum

__all__ = [
    "CentralityReport",
    "degree_centrality",
    "eigenvector_centrality",
    "closeness_centrality",
    "betweenness_centrality",
    "transition_matrix",
    "mfpt",
    "mfpt_matrix",
    "rw_closeness_centrality",
    "rw_betweenness_centrality",
    "pearson_loglog",
    "compute_centralities",
]


def _require_connected(g: Multigraph) -> None:
    if not g.is_connected:
        raise DisconnectedGraphError("centrality requires a connected graph")


def degree_centrality(g: Multigraph) -> np.ndarray:
    """Row sums of the weighted adjacency over ``N - 1``."""
    if g.n < 2:
        raise ValueError("degree centrality needs at least two nodes")
    return g.adjacency.sum(axis=1) / (g.n - 1)


def eigenvector_centrality(g: Multigraph) -> np.ndarray:
    """Absolute components of the Perron vector (unit norm)."""
    return np.abs(adjacency_spectrum(g).perron)


def _all_distances(g: Multigraph) -> np.ndarray:
    d = csgraph.shortest_path(g.simple, method="D", unweighted=True, directed=False)
    if not np.all(np.isfinite(d)):
        raise DisconnectedGraphError("infinite shortest-path distance: graph is disconnected")
    return d.astype(np.int64)


def closeness_centrality(g: Multigraph, distances: np.ndarray | None = None) -> np.ndarray:
    d = _all_distances(g) if distances is None else distances
    return (g.n - 1) / d.sum(axis=1)


def betweenness_centrality(g: Multigraph, distances: np.ndarray | None = None) -> np.ndarray:
    """Shortest-path betweenness summed over unordered pairs ``{s, t}``.

    Brandes' accumulation, vectorised over all sources at once: path counts
    are propagated forward one BFS layer at a time and dependencies are
    pushed back layer by layer.
    """
    _require_connected(g)
    d = _all_distances(g) if distances is None else distances
    s = g.simple
    n = g.n
    sigma = np.zeros((n, n))
    np.fill_diagonal(sigma, 1.0)
    depth = int(d.max()) if n else 0
    for level in range(1, depth + 1):
        prev = np.where(d == level - 1, sigma, 0.0)
        # reach[s, v] = sum over neighbours u of v of prev[s, u]
        reach = (s @ prev.T).T
        sigma = np.where(d == level, reach, sigma)

    delta = np.zeros((n, n))
    for level in range(depth, 0, -1):
        coef = np.where(d == level, (1.0 + delta) / np.where(sigma > 0, sigma, 1.0), 0.0)
        pulled = (s @ coef.T).T
        delta = np.where(d == level - 1, sigma * pulled, delta)
    np.fill_diagonal(delta, 0.0)
    return delta.sum(axis=0) / 2.0


def transition_matrix(g: Multigraph) -> np.ndarray:
    """Edge-end random walk: ``P[j, k] = A[j, k]/deg(j)``, ``P[j, j] = 2A[j, j]/deg(j)``."""
    a = np.array(g.adjacency)
    a[np.diag_indices(g.n)] *= 2.0
    deg = g.degree.astype(float)
    if np.any(deg == 0):
        raise SingularSystemError("isolated node: random walk undefined")
    return a / deg[:, None]


def mfpt(g: Multigraph, target: int, tol: float = 1e-8) -> np.ndarray:
    r"""Mean first passage times ``H(j, target)`` for every start node ``j``.

    Solves

    .. math:: H_j = 1 + \sum_k P_{jk} H_k \quad (j \ne t), \qquad H_t = 0

    by dense LU and checks the relative residual against ``tol``.
    """
    if not 0 <= target < g.n:
        raise IndexError(f"target {target} out of range")
    if not g.is_connected:
        raise SingularSystemError("mean first passage time undefined on a disconnected graph")
    p = transition_matrix(g)
    system = np.eye(g.n) - p
    system[target, :] = 0.0
    system[target, target] = 1.0
    rhs = np.ones(g.n)
    rhs[target] = 0.0
    try:
        h = scipy.linalg.solve(system, rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystemError(str(exc)) from exc
    resid = np.abs(system @ h - rhs).max()
    if not np.isfinite(resid) or resid > tol * max(1.0, np.abs(h).max()):
        raise SingularSystemError(f"residual {resid:.3e} exceeds tolerance")
    return h


def mfpt_matrix(g: Multigraph) -> np.ndarray:
    """All-pairs ``H[i, j]`` from the fundamental matrix of the walk.

    With stationary distribution ``pi_j = deg(j)/sum(deg)`` and
    ``Z = (I - P + 1 pi^T)^{-1}``, ``H[i, j] = (Z[j, j] - Z[i, j]) / pi_j``.
    """
    if not g.is_connected:
        raise SingularSystemError("mean first passage time undefined on a disconnected graph")
    p = transition_matrix(g)
    pi = g.degree / g.degree.sum()
    try:
        z = scipy.linalg.inv(np.eye(g.n) - p + pi[None, :])
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    h = (np.diag(z)[None, :] - z) / pi[None, :]
    np.fill_diagonal(h, 0.0)
    return h


def rw_closeness_centrality(g: Multigraph, hitting: np.ndarray | None = None) -> np.ndarray:
    """``N / sum_j H(j, w)`` for every node ``w``."""
    h = mfpt_matrix(g) if hitting is None else hitting
    return g.n / h.sum(axis=0)


def _laplacian_pinv(g: Multigraph) -> np.ndarray:
    w = g.weighted_simple.toarray()
    lap = np.diag(w.sum(axis=1)) - w
    j = np.full((g.n, g.n), 1.0 / g.n)
    try:
        return scipy.linalg.inv(lap + j) - j
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc


def rw_betweenness_centrality(g: Multigraph, chunk: int = 2048) -> np.ndarray:
    """Random-walk (current-flow) betweenness, raw sum over unordered pairs.

    For a unit current injected at ``s`` and extracted at ``t`` the
    throughput of an intermediate node is half the absolute current on its
    incident edges; source and sink count 1.  For every edge the potential
    drop over all pairs is ``F[e, s] - F[e, t]`` with ``F = B @ pinv(L)``, and
    ``sum_{s<t} |x_s - x_t|`` follows from one sort per edge.
    """
    _require_connected(g)
    n = g.n
    pinv = _laplacian_pinv(g)
    e = g.edges[g.edges[:, 0] != g.edges[:, 1]]
    u, v, cond = e[:, 0], e[:, 1], e[:, 2].astype(float)
    ranks = 2.0 * np.arange(n) - n + 1.0
    edge_sum = np.empty(len(e))
    for start in range(0, len(e), chunk):
        sl = slice(start, start + chunk)
        f = np.sort(pinv[u[sl]] - pinv[v[sl]], axis=1)
        edge_sum[sl] = cond[sl] * (f @ ranks)
    node = np.bincount(u, weights=edge_sum, minlength=n) + np.bincount(v, weights=edge_sum, minlength=n)
    # endpoint pairs were counted with 1/2, but count 1
    return 0.5 * node + 0.5 * (n - 1)


def pearson_loglog(x, y) -> float:
    """Pearson correlation of ``(ln x, ln y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise ValueError("need two equal-length 1-d arrays with at least 3 entries")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log correlation needs strictly positive values")
    lx, ly = np.log(x), np.log(y)
    lx = lx - lx.mean()
    ly = ly - ly.mean()
    sx, sy = np.sqrt(lx @ lx), np.sqrt(ly @ ly)
    scale = max(1.0, np.abs(np.log(x)).max(), np.abs(np.log(y)).max()) * np.sqrt(x.size)
    if sx <= 1e-12 * scale or sy <= 1e-12 * scale:
        raise DegenerateVarianceError("zero variance in log space")
    return float(np.clip((lx @ ly) / (sx * sy), -1.0, 1.0))


CSV_COLUMNS = ("node", "degree", "C_d", "C_e", "C_c", "C_b", "C_rc", "C_rb", "H_hub_to_node")


@dataclass(frozen=True)
class CentralityReport:
    degree: np.ndarray
    C_d: np.ndarray
    C_e: np.ndarray
    C_c: np.ndarray
    C_b: np.ndarray
    C_rc: np.ndarray
    C_rb: np.ndarray
    H_hub: np.ndarray  # H(hub, node)
    hub: int

    MEASURES = ("C_d", "C_e", "C_c", "C_b", "C_rc", "C_rb")

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(CSV_COLUMNS)
            for i in range(self.degree.size):
                out.writerow(
                    [i, int(self.degree[i])]
                    + [repr(float(getattr(self, c)[i])) for c in self.MEASURES]
                    + [repr(float(self.H_hub[i]))]
                )
        return path


def compute_centralities(g: Multigraph) -> CentralityReport:
    """All six centralities plus ``H(hub, node)`` for a connected graph."""
    _require_connected(g)
    d = _all_distances(g)
    hit = mfpt_matrix(g)
    hub = hub_node(g)
    return CentralityReport(
        degree=g.degree.copy(),
        C_d=degree_centrality(g),
        C_e=eigenvector_centrality(g),
        C_c=closeness_centrality(g, d),
        C_b=betweenness_centrality(g, d),
        C_rc=rw_closeness_centrality(g, hit),
        C_rb=rw_betweenness_centrality(g),
        H_hub=hit[hub].copy(),
        hub=hub,
    )
