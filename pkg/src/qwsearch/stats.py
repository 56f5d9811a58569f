"""Lognormal mixtures, scaling-law regression and log-scale histograms."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.special import logsumexp

from .errors import DegenerateComponentError, InsufficientDataError, QwSearchError

__all__ = [
    "MixtureFit",
    "ScalingFit",
    "fit_lognormal_mixture",
    "select_components",
    "fit_scaling",
    "log_histogram",
    "mixture_pdf",
]

SIGMA_FLOOR = 1e-4
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MixtureFit:
    """Lognormal mixture ``f(T) = sum_i p_i LN(T; mu_i, sigma_i)``, ``mu`` ascending."""

    weights: np.ndarray
    means: np.ndarray
    sigmas: np.ndarray
    loglik: float  # of the samples under f(T), i.e. including the -ln T Jacobian
    bic: float
    n_samples: int
    iterations: int = 0
    restarts_used: int = 0
    bic_table: dict = field(default_factory=dict, compare=False)

    @property
    def k(self) -> int:
        return int(self.weights.size)

    def responsibilities(self, samples) -> np.ndarray:
        """Posterior component probabilities, shape ``(n, k)``."""
        x = np.log(np.asarray(samples, dtype=float))
        logp = _component_logpdf(x, self.weights, self.means, self.sigmas)
        return np.exp(logp - logsumexp(logp, axis=1, keepdims=True))

    def pdf(self, t) -> np.ndarray:
        return mixture_pdf(t, self.weights, self.means, self.sigmas)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "components": [
                {"p": float(p), "mu": float(m), "sigma": float(s)}
                for p, m, s in zip(self.weights, self.means, self.sigmas)
            ],
            "loglik": float(self.loglik),
            "bic": float(self.bic),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "MixtureFit":
        comps = data["components"]
        return cls(
            np.array([c["p"] for c in comps]),
            np.array([c["mu"] for c in comps]),
            np.array([c["sigma"] for c in comps]),
            float(data["loglik"]),
            float(data["bic"]),
            n_samples=int(data.get("n_samples", 0)),
        )


def _component_logpdf(x, weights, means, sigmas) -> np.ndarray:
    z = (x[:, None] - means[None, :]) / sigmas[None, :]
    return np.log(weights)[None, :] - 0.5 * z**2 - np.log(sigmas)[None, :] - 0.5 * _LOG_2PI


def mixture_pdf(t, weights, means, sigmas) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    pos = t > 0
    logp = _component_logpdf(np.log(t[pos]), np.asarray(weights), np.asarray(means), np.asarray(sigmas))
    out[pos] = np.exp(logsumexp(logp, axis=1)) / t[pos]
    return out


def _em_batch(x, weights, means, sigmas, tol, max_iter):
    """Run EM for a batch of starts at once.

    Parameter arrays have shape ``(R, k)``.  Each start stops on its own when
    its mean log-likelihood improves by less than ``tol``; starts in which a
    component empties or its log-std falls below the floor are flagged dead.
    """
    n = x.size
    r = weights.shape[0]
    prev = np.full(r, -np.inf)
    ll = np.full(r, -np.inf)
    iters = np.zeros(r, dtype=int)
    active = np.ones(r, dtype=bool)
    alive = np.ones(r, dtype=bool)
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        w, m, s = weights[idx], means[idx], sigmas[idx]
        const = np.log(w) - np.log(s) - 0.5 * _LOG_2PI
        d = x[None, :, None] - m[:, None, :]
        logp = const[:, None, :] - 0.5 * d * d / (s * s)[:, None, :]
        top = logp.max(axis=2, keepdims=True)
        e = np.exp(logp - top)
        total = e.sum(axis=2, keepdims=True)
        cur = (top[:, :, 0] + np.log(total[:, :, 0])).sum(axis=1) / n
        drop = cur < prev[idx] - 1e-10 * np.maximum(1.0, np.abs(prev[idx]))
        if np.any(drop):
            raise QwSearchError(f"EM log-likelihood decreased at iteration {it}")
        ll[idx] = cur
        iters[idx] = it
        done = cur - prev[idx] < tol
        prev[idx] = cur
        resp = e / total
        nk = resp.sum(axis=1)
        safe = np.where(nk > 0, nk, 1.0)
        new_m = np.einsum("rnk,n->rk", resp, x) / safe
        d = x[None, :, None] - new_m[:, None, :]
        var = np.einsum("rnk,rnk->rk", resp, d * d) / safe
        dead = np.any(nk <= 1e-12 * n, axis=1) | np.any(var < SIGMA_FLOOR**2, axis=1)
        step = ~done & ~dead
        upd = idx[step]
        weights[upd] = nk[step] / n
        means[upd] = new_m[step]
        sigmas[upd] = np.sqrt(var[step])
        alive[idx[dead & ~done]] = False
        active[idx[done | dead]] = False
    return ll, iters, alive


def fit_lognormal_mixture(
    samples,
    k: int,
    *,
    restarts: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 2000,
) -> MixtureFit:
    """EM fit of a ``k``-component Gaussian mixture to ``ln(samples)``.

    The first start splits the sorted log-samples into ``k`` equal-count
    blocks; the remaining ``restarts - 1`` starts draw ``k`` distinct samples
    as means with the pooled spread.  Iteration stops when the mean
    log-likelihood per sample improves by less than ``tol``; the best run is
    returned.  Runs in which a component's log-std drops below ``1e-4`` are
    discarded, and if every run collapses a :class:`DegenerateComponentError`
    is raised.
    """
    t = np.asarray(samples, dtype=float).ravel()
    if not np.all(np.isfinite(t) & (t > 0)):
        raise ValueError("samples must be finite and strictly positive")
    # sorted, so that sample order cannot influence the random starts
    x = np.sort(np.log(t))
    n = x.size
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < 10 * k:
        raise InsufficientDataError(f"need at least {10 * k} samples for k={k}, got {n}")

    blocks = np.array_split(x, k)
    means = [np.array([b.mean() for b in blocks])]
    sigmas = [np.array([b.std() for b in blocks])]
    rng = np.random.default_rng(seed)
    spread = x.std()
    for _ in range(max(0, restarts - 1)):
        means.append(rng.choice(x, size=k, replace=False))
        sigmas.append(np.full(k, spread))
    means = np.array(means, dtype=float)
    sigmas = np.array(sigmas, dtype=float)
    weights = np.full_like(means, 1.0 / k)
    usable = np.all(sigmas >= SIGMA_FLOOR, axis=1)
    if not np.any(usable):
        raise DegenerateComponentError(f"log-samples have no spread (k={k})")
    weights, means, sigmas = weights[usable], means[usable], sigmas[usable]

    ll, iters, alive = _em_batch(x, weights, means, sigmas, tol, max_iter)
    if not np.any(alive):
        raise DegenerateComponentError(f"every EM start collapsed a component (k={k})")
    # first start wins ties, so the quantile start is preferred
    cand = np.flatnonzero(alive)
    best = cand[np.argmax(ll[cand])]
    w, m, s = weights[best], means[best], sigmas[best]
    idx = np.argsort(m, kind="stable")
    w, m, s = w[idx], m[idx], s[idx]
    loglik = float(ll[best]) * n - float(x.sum())
    bic = -2.0 * loglik + (3 * k - 1) * math.log(n)
    return MixtureFit(w / w.sum(), m, s, loglik, bic, n, iterations=int(iters[best]), restarts_used=int(cand.size))


def select_components(samples, k_max: int = 4, **kwargs) -> MixtureFit:
    """Minimum-BIC mixture over ``k = 1..k_max``.

    Errors for ``k = 1`` propagate; a larger ``k`` that cannot be fitted
    (too few samples, every start collapsing) is skipped.
    """
    fits = {}
    for k in range(1, k_max + 1):
        try:
            fits[k] = fit_lognormal_mixture(samples, k, **kwargs)
        except (DegenerateComponentError, InsufficientDataError):
            if k == 1:
                raise
    best_k = min(fits, key=lambda k: fits[k].bic)
    best = fits[best_k]
    table = {k: f.bic for k, f in fits.items()}
    return MixtureFit(
        best.weights,
        best.means,
        best.sigmas,
        best.loglik,
        best.bic,
        best.n_samples,
        best.iterations,
        best.restarts_used,
        bic_table=table,
    )


@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    intercept: float
    stderr: float
    n_values: np.ndarray
    values: np.ndarray
    mode: str

    @property
    def is_constant(self) -> bool:
        """``|alpha|`` within two standard errors of zero."""
        return abs(self.alpha) < 2.0 * self.stderr


def fit_scaling(n_values, values, mode: str = "log-value") -> ScalingFit:
    """Exponent of ``value ~ N**alpha``.

    ``mode="log-value"`` regresses ``ln(value)`` on ``ln N``.
    ``mode="raw-log-mean"`` regresses the value itself on ``ln N``; use it
    for quantities that already are means of ``ln T`` (mixture ``mu_i``).
    """
    nv = np.asarray(n_values, dtype=float)
    val = np.asarray(values, dtype=float)
    if nv.shape != val.shape or nv.size < 3:
        raise InsufficientDataError("need at least 3 (N, value) pairs")
    if np.unique(nv).size < 2:
        raise InsufficientDataError("need at least 2 distinct N")
    if np.any(nv <= 0):
        raise ValueError("N must be positive")
    if mode == "log-value":
        if np.any(val <= 0):
            raise ValueError("log-value mode needs positive values")
        y = np.log(val)
    elif mode == "raw-log-mean":
        y = val
    else:
        raise ValueError(f"unknown mode {mode!r}")
    res = sps.linregress(np.log(nv), y)
    stderr = float(res.stderr) if np.isfinite(res.stderr) else 0.0
    return ScalingFit(float(res.slope), float(res.intercept), stderr, nv, val, mode)


def log_histogram(samples, bin_count: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Density-normalised histogram of ``ln(samples)`` with equal-width bins.

    Returns ``(edges, density)`` with edges in ``ln T``.
    """
    x = np.log(np.asarray(samples, dtype=float))
    density, edges = np.histogram(x, bins=bin_count, density=True)
    return edges, density
