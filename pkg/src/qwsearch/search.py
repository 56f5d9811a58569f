"""Spatial search by continuous-time quantum walk.

The search Hamiltonian is ``H = -gamma*A - eps*|w><w|`` on the weighted
adjacency ``A`` of a multigraph.  The hopping energy is tuned to the point
where the two lowest eigenstates of ``H`` are equal-weight superpositions of
the Perron vector ``|lambda_1>`` of ``A``; evolving from the hub basis state
then rotates amplitude onto ``|w>`` in a time close to ``pi / (E_1 - E_0)``.

Scanning ``gamma`` would need hundreds of dense diagonalisations per marked
node.  Since ``H/gamma`` is a rank-one update of ``-A``, its two lowest
eigenpairs follow from the secular equation

    1 = (eps/gamma) * sum_k z_k**2 / (d_k - e),    d_k = -a_k,  z_k = <phi_k|w>,

once the adjacency spectrum ``{a_k, phi_k}`` is known, at O(N) per ``gamma``.
The same equation gives the eigenvectors, ``|E> ~ (-A - e)^{-1}|w>``, so the
two-level model needs no extra diagonalisation.  ``P(t)`` is then sampled by
sparse exponential propagation on the time grid; a dense decomposition of
``H`` remains available as ``propagator="eigh"``.
"""
from __future__ import annotations

import logging
import math
import weakref
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import optimize
from scipy.sparse.linalg import expm_multiply

from .errors import BracketError, DegenerateSpectrumError, DisconnectedGraphError, WindowEdgeError
from .graph import Multigraph, bfs_distances, hub_node
from .spectral import SpectralDecomposition, basis_state, eigendecompose

log = logging.getLogger(__name__)

__all__ = [
    "SearchConfig",
    "AdjacencySpectrum",
    "GammaOpt",
    "TwoLevelModel",
    "TauResult",
    "SearchResult",
    "adjacency_spectrum",
    "build_hamiltonian",
    "initial_hub_state",
    "crossing_quantities",
    "find_gamma_opt",
    "success_probability",
    "two_level_prediction",
    "find_tau",
    "run_search",
]

EPSILON_W = 1.0


@dataclass(frozen=True)
class SearchConfig:
    """Numerical knobs of the search pipeline.

    ``gamma_lo`` and ``gamma_hi`` are in units of ``1/lambda_1``.
    ``tau_points`` is the minimum number of grid points per predicted
    two-level time ``pi/dE``.  ``propagator`` selects how ``P(t)`` is
    sampled: ``"expm"`` (sparse exponential action) or ``"eigh"`` (dense
    diagonalisation of ``H``).  ``initial`` is the default start state of
    :func:`run_search`, ``"hub"`` or ``"perron"``.
    """

    gamma_points: int = 200
    gamma_lo: float = 1e-3
    gamma_hi: float = 10.0
    gamma_rtol: float = 1e-6
    tau_points: int = 200
    tau_rtol: float = 1e-6
    plateau_atol: float = 1e-9
    propagator: str = "expm"
    initial: str = "hub"

    def __post_init__(self):
        for name in ("gamma_points", "gamma_lo", "gamma_hi", "gamma_rtol", "tau_points", "tau_rtol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.gamma_hi <= self.gamma_lo:
            raise ValueError("gamma_hi must exceed gamma_lo")
        if self.propagator not in ("expm", "eigh"):
            raise ValueError(f"unknown propagator {self.propagator!r}")
        if self.initial not in ("hub", "perron"):
            raise ValueError(f"unknown initial state {self.initial!r}")


# --------------------------------------------------------------------------
# adjacency spectrum, cached per graph


@dataclass(frozen=True, eq=False)
class AdjacencySpectrum:
    """Adjacency eigensystem in descending eigenvalue order.

    Eigenvalues closer than ``group_tol`` are pooled into groups; the rank-one
    secular equation only sees each group's total squared overlap with the
    marked node.
    """

    values: np.ndarray  # descending
    vectors: np.ndarray  # columns match ``values``
    perron: np.ndarray
    group_start: np.ndarray  # first index of each group
    group_of: np.ndarray  # group id of each eigen-index

    @property
    def lambda1(self) -> float:
        return float(self.values[0])


_SPECTRA: "weakref.WeakKeyDictionary[Multigraph, AdjacencySpectrum]" = weakref.WeakKeyDictionary()


def adjacency_spectrum(g: Multigraph, group_tol: float = 1e-9) -> AdjacencySpectrum:
    """Eigensystem of ``g.adjacency``, computed once per graph object."""
    cached = _SPECTRA.get(g)
    if cached is not None:
        return cached
    if not g.is_connected:
        raise DisconnectedGraphError("graph is disconnected; the Perron vector is not unique")
    dec = eigendecompose(g.adjacency)
    values = dec.values[::-1].copy()
    vectors = dec.vectors[:, ::-1].copy()
    scale = max(1.0, abs(values[0]))
    if g.n > 1 and values[0] - values[1] <= 1e-10 * scale:
        raise DegenerateSpectrumError("leading adjacency eigenvalue is degenerate")
    if vectors[:, 0].sum() < 0:
        vectors[:, 0] *= -1
    new_group = np.concatenate([[True], np.diff(-values) > group_tol * scale])
    group_of = np.cumsum(new_group) - 1
    spec = AdjacencySpectrum(values, vectors, vectors[:, 0], np.flatnonzero(new_group), group_of)
    _SPECTRA[g] = spec
    return spec


# --------------------------------------------------------------------------
# rank-one secular equation for the two lowest eigenpairs of H / gamma

_ZERO_WEIGHT = 1e-16


class _Secular:
    """Two lowest eigenpairs of ``-A - s|w><w|`` with ``s = eps/gamma``.

    Energies are measured as offsets ``delta = e + lambda_1`` from the lowest
    pole, which keeps full relative precision when the roots hug that pole.
    """

    def __init__(self, spec: AdjacencySpectrum, w: int):
        self.spec = spec
        self.z = spec.vectors[w, :]
        z2 = self.z**2
        weights = np.bincount(spec.group_of, weights=z2)
        mult = np.bincount(spec.group_of)
        poles = spec.values[0] - spec.values[spec.group_start]
        self.scale = float(weights.sum())
        weights = weights / self.scale
        self.w1 = float(weights[0])
        live = weights[1:] > _ZERO_WEIGHT
        self.q = poles[1:][live]
        self.wq = weights[1:][live]
        # poles that stay eigenvalues of H: zero weight or multiplicity > 1
        stay = (~live) | (mult[1:] > 1)
        self.stuck = float(poles[1:][stay].min()) if np.any(stay) else math.inf

    def _f(self, delta: float, inv_s: float) -> float:
        return inv_s + self.w1 / delta - float(np.sum(self.wq / (self.q - delta)))

    def _norm2(self, delta: float) -> float:
        return self.w1 / delta**2 + float(np.sum(self.wq / (self.q - delta) ** 2))

    def lowest(self, s: float) -> float:
        inv_s = 1.0 / s
        hi = -self.w1 * s
        lo = -s * (1.0 + 1e-12) - 1e-300
        f_hi = self._f(hi, inv_s)
        if f_hi >= 0:
            return hi
        f_lo = self._f(lo, inv_s)
        if f_lo <= 0:
            return lo
        return optimize.brentq(self._f, lo, hi, args=(inv_s,), xtol=1e-15 * s, rtol=1e-15, maxiter=500)

    def second(self, s: float) -> float:
        """Second eigenvalue offset, or ``nan``-free ``stuck`` pole if lower."""
        inv_s = 1.0 / s
        if self.q.size == 0:
            return self.stuck
        qn, wn = self.q[0], self.wq[0]
        lo = 0.5 * self.w1 * qn
        eta = min(0.5 * qn, wn / (2.0 * (inv_s + 2.0 * self.w1 / qn)))
        hi = qn - max(eta, 4e-16 * qn)
        if self._f(hi, inv_s) >= 0:
            root = hi
        elif self._f(lo, inv_s) <= 0:
            root = lo
        else:
            root = optimize.brentq(self._f, lo, hi, args=(inv_s,), xtol=1e-15 * qn, rtol=1e-15, maxiter=500)
        return min(root, self.stuck)

    def state(self, delta: float, s: float) -> tuple[float, float]:
        """Squared overlaps ``(|<lambda_1|E>|^2, |<w|E>|^2)`` of the root ``delta``."""
        if delta == self.stuck:
            return 0.0, 0.0
        n2 = self._norm2(delta)
        return self.w1 / delta**2 / n2, (1.0 / s) ** 2 / n2

    def vector(self, delta: float) -> np.ndarray:
        """Normalised ``(-A - e)^{-1}|w>``; its ``<w|.>`` component is positive."""
        spec = self.spec
        q = spec.values[0] - spec.values
        u = spec.vectors @ (self.z / (q - delta))
        return u / np.linalg.norm(u)


@dataclass(frozen=True)
class CrossingPoint:
    gamma: float
    e0: float
    e1: float
    lam_e0: float  # |<lambda_1|E_0>|^2
    lam_e1: float
    w_e0: float  # |<w|E_0>|^2
    w_e1: float

    @property
    def gap(self) -> float:
        return self.e1 - self.e0

    @property
    def h(self) -> float:
        return self.lam_e0 - self.lam_e1


def _crossing(sec: _Secular, lam1: float, gamma: float, epsilon: float) -> CrossingPoint:
    s = epsilon / gamma
    d0 = sec.lowest(s)
    d1 = sec.second(s)
    l0, w0 = sec.state(d0, s)
    l1, w1 = sec.state(d1, s)
    return CrossingPoint(gamma, gamma * (d0 - lam1), gamma * (d1 - lam1), l0, l1, w0, w1)


def crossing_quantities(g: Multigraph, w: int, gammas, epsilon: float = EPSILON_W) -> list[CrossingPoint]:
    """Lowest two energies of ``H`` and their overlaps with ``|lambda_1>`` and ``|w>``.

    One entry per value in ``gammas`` (each must be positive).
    """
    _check_node(g, w)
    spec = adjacency_spectrum(g)
    sec = _Secular(spec, w)
    return [_crossing(sec, spec.lambda1, float(gm), epsilon) for gm in np.atleast_1d(gammas)]


# --------------------------------------------------------------------------
# dense operations


def _check_node(g: Multigraph, w: int) -> None:
    if not 0 <= w < g.n:
        raise IndexError(f"node {w} out of range for n={g.n}")


def build_hamiltonian(g: Multigraph, w: int, gamma: float, epsilon: float = EPSILON_W) -> np.ndarray:
    """Dense ``-gamma*A - epsilon*|w><w|``."""
    _check_node(g, w)
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    h = -gamma * g.adjacency
    h[w, w] -= epsilon
    return h


def initial_hub_state(g: Multigraph) -> np.ndarray:
    return basis_state(g.n, hub_node(g))


def _initial_state(g: Multigraph, initial) -> np.ndarray:
    if isinstance(initial, str):
        if initial == "hub":
            return initial_hub_state(g)
        if initial == "perron":
            return adjacency_spectrum(g).perron.astype(complex)
        raise ValueError(f"unknown initial state {initial!r}")
    psi = np.asarray(initial, dtype=complex)
    if psi.shape != (g.n,):
        raise ValueError("initial state has the wrong dimension")
    return psi


@dataclass(frozen=True)
class GammaOpt:
    gamma: float
    overlap0: float
    overlap1: float
    delta_tol: float  # max |overlap - 0.5| at the returned gamma
    delta_e: float  # secular-equation gap at gamma
    n_crossings: int
    scan: list = field(repr=False, default_factory=list)


def find_gamma_opt(g: Multigraph, w: int, config: SearchConfig | None = None) -> GammaOpt:
    """Hopping energy where ``|<lambda_1|E_0>|^2`` and ``|<lambda_1|E_1>|^2`` meet.

    A geometric grid over ``[gamma_lo, gamma_hi] / lambda_1`` locates the
    first sign change of ``h = |<lambda_1|E_0>|^2 - |<lambda_1|E_1>|^2`` (from
    negative to positive); bisection in ``log(gamma)`` then narrows it to
    relative width ``gamma_rtol``.
    """
    config = config or SearchConfig()
    _check_node(g, w)
    spec = adjacency_spectrum(g)
    sec = _Secular(spec, w)
    lam1 = spec.lambda1
    gammas = np.geomspace(config.gamma_lo / lam1, config.gamma_hi / lam1, config.gamma_points)
    scan = [_crossing(sec, lam1, gm, EPSILON_W) for gm in gammas]
    h = np.array([p.h for p in scan])
    sign = np.sign(h)
    changes = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    ups = [i for i in changes if h[i] < 0]
    if not ups:
        raise BracketError(f"no sign change of the overlap difference for w={w} in the scan window")
    if len(changes) > 1:
        log.warning("w=%d: %d sign changes of the overlap difference; using the first upward one", w, len(changes))
    i = ups[0]
    lo, hi = gammas[i], gammas[i + 1]
    while hi / lo - 1.0 > config.gamma_rtol:
        mid = math.sqrt(lo * hi)
        if _crossing(sec, lam1, mid, EPSILON_W).h < 0:
            lo = mid
        else:
            hi = mid
    best = _crossing(sec, lam1, math.sqrt(lo * hi), EPSILON_W)
    tol = max(abs(best.lam_e0 - 0.5), abs(best.lam_e1 - 0.5))
    return GammaOpt(best.gamma, best.lam_e0, best.lam_e1, tol, best.gap, len(changes), scan)


def hamiltonian_decomposition(g: Multigraph, w: int, gamma: float) -> SpectralDecomposition:
    return eigendecompose(build_hamiltonian(g, w, gamma))


def success_probability(g, w, gamma, psi0, t, decomposition: SpectralDecomposition | None = None):
    """``|<w|exp(-iHt)|psi0>|^2``; ``t`` may be a scalar or an array."""
    d = decomposition or hamiltonian_decomposition(g, w, gamma)
    psi0 = _initial_state(g, psi0)
    amp = _amplitudes(d, w, psi0)
    out = _probability(d.values, amp, np.atleast_1d(np.asarray(t, dtype=float)))
    return float(out[0]) if np.ndim(t) == 0 else out


def _amplitudes(d: SpectralDecomposition, w: int, psi0: np.ndarray) -> np.ndarray:
    return d.vectors[w, :] * (d.vectors.T @ psi0)


def _probability(energies: np.ndarray, amp: np.ndarray, times: np.ndarray, chunk: int = 256) -> np.ndarray:
    out = np.empty(times.size)
    for start in range(0, times.size, chunk):
        ts = times[start : start + chunk]
        a = np.exp(-1j * np.outer(ts, energies)) @ amp
        out[start : start + chunk] = a.real**2 + a.imag**2
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class TwoLevelModel:
    gamma: float
    e0: float
    e1: float
    delta_e: float  # exact E_1 - E_0
    delta_e_pred: float  # 2 |<lambda_1|w><w|w~>|
    tau_2lvl: float  # pi / delta_e
    w_tilde: np.ndarray = field(repr=False)
    lam_e0: float = 0.0
    lam_e1: float = 0.0


def two_level_prediction(
    g: Multigraph, w: int, gamma: float, decomposition: SpectralDecomposition | None = None
) -> TwoLevelModel:
    """Two-level picture at ``gamma`` from the exact lowest eigenpair.

    Signs are fixed so that ``<lambda_1|E_0> >= 0 >= <lambda_1|E_1>``; then
    ``|w~> = (|E_0> + |E_1>)/sqrt(2)`` and the predicted gap is
    ``2 |<lambda_1|w> <w|w~>|``.  Without a ``decomposition`` the eigenpairs
    come from the secular equation.
    """
    _check_node(g, w)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if g.n < 2:
        raise DegenerateSpectrumError("need at least two levels")
    spec = adjacency_spectrum(g)
    lam = spec.perron
    v0 = v1 = None
    if decomposition is None:
        sec = _Secular(spec, w)
        s_ = EPSILON_W / gamma
        d0, d1 = sec.lowest(s_), sec.second(s_)
        if d1 != sec.stuck:
            e0, e1 = gamma * (d0 - spec.lambda1), gamma * (d1 - spec.lambda1)
            v0, v1 = sec.vector(d0), sec.vector(d1)
        else:
            decomposition = hamiltonian_decomposition(g, w, gamma)
    if v0 is None:
        d = decomposition
        e0, e1 = float(d.values[0]), float(d.values[1])
        v0, v1 = d.vectors[:, 0], d.vectors[:, 1]
    gap = e1 - e0
    if gap <= 1e-12 * max(1.0, abs(e0)):
        raise DegenerateSpectrumError(f"E_0 and E_1 are degenerate at gamma={gamma:.6g}")
    v0 = v0 * (1.0 if lam @ v0 >= 0 else -1.0)
    v1 = v1 * (-1.0 if lam @ v1 >= 0 else 1.0)
    w_tilde = (v0 + v1) / math.sqrt(2.0)
    pred = 2.0 * abs(lam[w] * w_tilde[w])
    return TwoLevelModel(
        gamma, e0, e1, gap, pred, math.pi / gap, w_tilde, float((lam @ v0) ** 2), float((lam @ v1) ** 2)
    )


class _SpectralProbe:
    """``P(t)`` from a dense decomposition of ``H``."""

    def __init__(self, d: SpectralDecomposition, w: int, psi0: np.ndarray):
        self.values = d.values
        self.amp = _amplitudes(d, w, psi0)

    def grid(self, times: np.ndarray) -> np.ndarray:
        return _probability(self.values, self.amp, times)

    def at(self, t: float, near: int) -> float:
        return float(_probability(self.values, self.amp, np.array([t]))[0])


class _ExpmProbe:
    """``P(t)`` by sparse exponential propagation, ``exp(-iHt)`` acting on ``psi0``."""

    def __init__(self, g: Multigraph, w: int, gamma: float, psi0: np.ndarray):
        h = sp.csc_matrix(-gamma * g.weighted_simple) - sp.diags(gamma * g.loops.astype(float))
        h = h - sp.csc_matrix(([EPSILON_W], ([w], [w])), shape=h.shape)
        self.gen = (-1j * h).tocsc()
        self.w = w
        self.psi0 = psi0
        self.times = None
        self.states = None

    def grid(self, times: np.ndarray) -> np.ndarray:
        self.times = times
        self.states = expm_multiply(self.gen, self.psi0, start=times[0], stop=times[-1], num=times.size, endpoint=True)
        a = self.states[:, self.w]
        return np.clip(a.real**2 + a.imag**2, 0.0, 1.0)

    def at(self, t: float, near: int) -> float:
        dt = t - self.times[near]
        psi = self.states[near] if dt == 0 else expm_multiply(self.gen * dt, self.states[near])
        return float(min(1.0, abs(psi[self.w]) ** 2))


@dataclass(frozen=True)
class TauResult:
    tau: float
    p_max: float
    t_max: float
    doubled: bool
    grid_points: int


def find_tau(
    g: Multigraph,
    w: int,
    gamma: float,
    psi0="hub",
    *,
    decomposition: SpectralDecomposition | None = None,
    model: TwoLevelModel | None = None,
    config: SearchConfig | None = None,
) -> TauResult:
    """Earliest time maximising ``P(t)`` over ``[0, 2*pi/dE_pred]``.

    The window is scanned on a uniform grid with spacing at most
    ``tau_2lvl / tau_points``; the best grid point (earliest within
    ``plateau_atol`` of the maximum) is refined by golden-section search.  If
    the maximum lies on the last grid point the window is doubled once.
    """
    config = config or SearchConfig()
    _check_node(g, w)
    if decomposition is None and config.propagator == "eigh":
        decomposition = hamiltonian_decomposition(g, w, gamma)
    model = model or two_level_prediction(g, w, gamma, decomposition)
    psi0 = _initial_state(g, psi0)
    if decomposition is not None:
        probe = _SpectralProbe(decomposition, w, psi0)
    else:
        probe = _ExpmProbe(g, w, gamma, psi0)
    step = min(model.tau_2lvl, math.pi / model.delta_e_pred) / config.tau_points
    t_max = 2.0 * math.pi / model.delta_e_pred

    for attempt in range(2):
        npts = int(math.ceil(t_max / step)) + 1
        times = np.linspace(0.0, t_max, npts)
        p = probe.grid(times)
        top = p.max()
        i = int(np.flatnonzero(p >= top - config.plateau_atol)[0])
        if i < npts - 1:
            break
        if attempt == 0:
            t_max *= 2.0
    else:
        raise WindowEdgeError(f"P(t) maximum at the window edge t={t_max:.6g} after doubling (w={w})")

    if i == 0:
        return TauResult(0.0, float(p[0]), t_max, attempt == 1, npts)

    a, b, c = times[i - 1], times[i], times[i + 1]
    if p[i] > p[i - 1] and p[i] > p[i + 1]:
        res = optimize.minimize_scalar(
            lambda t: -probe.at(t, i - 1), bracket=(a, b, c), method="golden", tol=config.tau_rtol
        )
        tau, pm = float(res.x), float(-res.fun)
        if not (a <= tau <= c) or pm < p[i]:
            tau, pm = float(b), float(p[i])
    else:
        tau, pm = float(b), float(p[i])
    return TauResult(tau, pm, t_max, attempt == 1, npts)


@dataclass(frozen=True)
class SearchResult:
    w: int
    gamma_opt: float
    tau: float
    p_max: float
    T: float
    delta_e: float
    delta_e_pred: float
    l_hub_w: int
    e_hub_w: int
    degree_w: int
    overlap0: float
    overlap1: float
    n_crossings: int
    status: str = "ok"


def run_search(g: Multigraph, w: int, config: SearchConfig | None = None, initial=None) -> SearchResult:
    """Full pipeline for one marked node: gamma_opt, then tau and ``T = tau/P(tau)``.

    ``initial`` overrides ``config.initial`` (``"hub"``, ``"perron"`` or a
    state vector).  Errors propagate with the marked node recorded in the
    message.
    """
    config = config or SearchConfig()
    if initial is None:
        initial = config.initial
    hub = hub_node(g)
    if w == hub and isinstance(initial, str) and initial == "hub":
        raise ValueError("the hub cannot be the marked node when starting from the hub")
    try:
        opt = find_gamma_opt(g, w, config)
        dec = hamiltonian_decomposition(g, w, opt.gamma) if config.propagator == "eigh" else None
        model = two_level_prediction(g, w, opt.gamma, dec)
        res = find_tau(g, w, opt.gamma, initial, decomposition=dec, model=model, config=config)
    except (BracketError, DegenerateSpectrumError, WindowEdgeError) as exc:
        exc.args = (f"w={w}: {exc.args[0] if exc.args else exc}",)
        raise
    if res.p_max <= 0:
        raise WindowEdgeError(f"w={w}: zero success probability")
    l_hub = int(bfs_distances(g, hub)[w])
    return SearchResult(
        w=int(w),
        gamma_opt=opt.gamma,
        tau=res.tau,
        p_max=res.p_max,
        T=res.tau / res.p_max,
        delta_e=model.delta_e,
        delta_e_pred=model.delta_e_pred,
        l_hub_w=l_hub,
        e_hub_w=int(g.adjacency[hub, w]),
        degree_w=int(g.degree[w]),
        overlap0=opt.overlap0,
        overlap1=opt.overlap1,
        n_crossings=opt.n_crossings,
    )
