"""Implementations behind the ``qwsearch`` subcommands.

Each command writes plain CSV/JSON files into the output directory and
returns the paths (and the key numbers) so it can be driven from Python as
well as from the command line.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path

import numpy as np

from ..centrality import CentralityReport, pearson_loglog
from ..errors import InsufficientDataError, QwSearchError
from ..graph import Multigraph, hub_node, read_edge_list, write_edge_list
from ..search import adjacency_spectrum, crossing_quantities, find_gamma_opt
from ..stats import fit_lognormal_mixture, fit_scaling, log_histogram, select_components
from .config import ExperimentConfig
from .sweep import graph_filename, read_sweep, run_sweep, sample_graph

log = logging.getLogger(__name__)

CORRELATION_MEASURES = CentralityReport.MEASURES + ("H_hub_w",)


def _out_dir(cfg: ExperimentConfig, out=None) -> Path:
    path = Path(out if out is not None else cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def _ok(data: dict) -> np.ndarray:
    return (data["status"] == "ok") & np.isfinite(data["T"]) & (data["T"] > 0)


def _status_counts(data: dict) -> dict:
    status, counts = np.unique(data["status"], return_counts=True)
    return {str(s): int(c) for s, c in zip(status, counts)}


# --------------------------------------------------------------------------


def cmd_generate(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Write one edge list per ``(N, sample)``."""
    out = _out_dir(cfg, out)
    paths = []
    for n in cfg.n:
        for sid in range(cfg.samples):
            g = sample_graph(cfg, n, sid)
            paths.append(write_edge_list(g, out / graph_filename(n, sid)))
    return paths


def cmd_sweep(cfg: ExperimentConfig, out=None) -> list[Path]:
    return run_sweep(cfg, _out_dir(cfg, out))


def cmd_fit(csv_path, cfg: ExperimentConfig, out=None) -> dict:
    """Minimum-BIC lognormal mixture of ``T``, histogram and class cross-tab.

    Writes ``<stem>_fit.json``, ``<stem>_hist.csv`` (density of ``ln T`` with
    the fitted curve) and ``<stem>_crosstab.csv`` (mean posterior
    responsibility of each component per hub distance).
    """
    csv_path = Path(csv_path)
    out = _out_dir(cfg, out)
    data = read_sweep(csv_path)
    ok = _ok(data)
    need = 10 * cfg.kmax
    if ok.sum() < need:
        raise InsufficientDataError(f"{csv_path}: {int(ok.sum())} successful rows, need {need}")
    t = data["T"][ok]
    fit = select_components(t, cfg.kmax, restarts=cfg.restarts, seed=cfg.seed)

    stem = csv_path.stem
    summary = fit.to_dict()
    summary.update(
        n_samples=int(t.size),
        bic_table={str(k): float(v) for k, v in fit.bic_table.items()},
        status=_status_counts(data),
        kmax=cfg.kmax,
        restarts=cfg.restarts,
        bins=cfg.bins,
    )
    _write_json(out / f"{stem}_fit.json", summary)

    edges, density = log_histogram(t, cfg.bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    model = fit.pdf(np.exp(centers)) * np.exp(centers)  # density in ln T
    _write_csv(
        out / f"{stem}_hist.csv",
        ("lnT_lo", "lnT_hi", "density", "model"),
        zip(edges[:-1], edges[1:], density, model),
    )

    resp = fit.responsibilities(t)
    dist = data["l_hub_w"][ok]
    rows = []
    for level in np.unique(dist):
        sel = dist == level
        rows.append([int(level), int(sel.sum()), float(np.log(t[sel]).mean()), *resp[sel].mean(axis=0)])
    header = ("l_hub_w", "count", "mean_lnT") + tuple(f"p{i + 1}" for i in range(fit.k))
    _write_csv(out / f"{stem}_crosstab.csv", header, rows)
    return {"fit": fit, "crosstab": rows, "paths": [out / f"{stem}_{x}" for x in ("fit.json", "hist.csv", "crosstab.csv")]}


def _group_by_n(paths) -> dict[int, dict]:
    merged: dict[int, list[dict]] = {}
    for p in paths:
        data = read_sweep(p)
        for n in np.unique(data["n"]):
            sel = data["n"] == n
            merged.setdefault(int(n), []).append({k: v[sel] for k, v in data.items()})
    return {n: {k: np.concatenate([c[k] for c in chunks]) for k in chunks[0]} for n, chunks in sorted(merged.items())}


def cmd_scaling(csv_paths, cfg: ExperimentConfig, out=None, min_count: int = 3) -> dict:
    """Exponents ``alpha`` of ``N**alpha`` for mixture parameters and distance classes.

    ``mixture_scaling.csv`` fits each parameter of a ``k = kmax`` mixture per
    N (``mu_i`` against ``ln N`` directly, ``sigma_i`` and ``p_i`` log-log).
    ``distance_scaling.csv`` fits the mean ``T`` of nodes at each hub
    distance, using N values with at least ``min_count`` such nodes.
    """
    out = _out_dir(cfg, out)
    groups = _group_by_n(csv_paths)
    if len(groups) < 3:
        raise InsufficientDataError(f"need at least 3 distinct N, got {sorted(groups)}")

    # mixture parameters at fixed k
    fits = {}
    for n, data in groups.items():
        t = data["T"][_ok(data)]
        try:
            fits[n] = fit_lognormal_mixture(t, cfg.kmax, restarts=cfg.restarts, seed=cfg.seed)
        except QwSearchError as exc:
            log.warning("N=%d: %d-component fit failed: %s", n, cfg.kmax, exc)
    mix_rows = []
    ns = np.array(sorted(fits), dtype=float)
    for i in range(cfg.kmax):
        for name, attr, mode in (("mu", "means", "raw-log-mean"), ("sigma", "sigmas", "log-value"), ("p", "weights", "log-value")):
            vals = np.array([getattr(fits[int(n)], attr)[i] for n in ns])
            try:
                sf = fit_scaling(ns, vals, mode)
                mix_rows.append([name, i + 1, sf.alpha, sf.stderr, sf.intercept, sf.is_constant, ns.size])
            except (InsufficientDataError, ValueError) as exc:
                log.warning("%s_%d: %s", name, i + 1, exc)
                mix_rows.append([name, i + 1, math.nan, math.nan, math.nan, False, ns.size])
    _write_csv(out / "mixture_scaling.csv", ("parameter", "component", "alpha", "stderr", "intercept", "constant", "n_sizes"), mix_rows)

    # mean T by hub distance
    means: dict[int, list] = {}
    mean_rows = []
    for n, data in groups.items():
        ok = _ok(data)
        for level in np.unique(data["l_hub_w"][ok]):
            t = data["T"][ok & (data["l_hub_w"] == level)]
            mean_rows.append([n, int(level), int(t.size), float(t.mean())])
            if t.size >= min_count:
                means.setdefault(int(level), []).append((n, float(t.mean())))
    _write_csv(out / "distance_means.csv", ("n", "l_hub_w", "count", "mean_T"), mean_rows)
    dist_rows = []
    alphas = {}
    for level, pairs in sorted(means.items()):
        if len(pairs) < 3:
            continue
        nv, tv = zip(*pairs)
        sf = fit_scaling(nv, tv, "log-value")
        alphas[level] = sf
        dist_rows.append([level, sf.alpha, sf.stderr, sf.intercept, sf.is_constant, len(pairs)])
    if not dist_rows:
        raise InsufficientDataError("no hub distance has enough nodes at 3 or more sizes")
    _write_csv(out / "distance_scaling.csv", ("l_hub_w", "alpha", "stderr", "intercept", "constant", "n_sizes"), dist_rows)
    return {"mixture": mix_rows, "distance": alphas, "means": mean_rows}


def cmd_correlate(csv_path, cfg: ExperimentConfig, out=None) -> dict:
    """Log-log Pearson ``r`` of ``T`` and ``P(tau)`` against each centrality.

    Nodes with a non-positive value of a measure (betweenness can vanish)
    are left out of that measure's correlation only.
    """
    csv_path = Path(csv_path)
    out = _out_dir(cfg, out)
    data = read_sweep(csv_path)
    ok = _ok(data)
    if ok.sum() < 10:
        raise InsufficientDataError(f"{csv_path}: {int(ok.sum())} successful rows, need 10")
    t, p = data["T"][ok], data["p_max"][ok]
    table = {}
    rows = []
    for name in CORRELATION_MEASURES:
        x = data[name][ok]
        sel = np.isfinite(x) & (x > 0)
        r_t = pearson_loglog(x[sel], t[sel])
        r_p = pearson_loglog(x[sel], p[sel])
        table[name] = (r_t, r_p, int(sel.sum()))
        rows.append([name, r_t, r_p, int(sel.sum())])
    stem = csv_path.stem
    _write_csv(out / f"{stem}_correlations.csv", ("measure", "r_T", "r_P", "n"), rows)
    cols = ("sample_id", "w", "l_hub_w", "e_hub_w", "T", "p_max") + CORRELATION_MEASURES
    _write_csv(out / f"{stem}_scatter.csv", cols, zip(*[data[c][ok] for c in cols]))
    return table


def crossover_width(gammas, lam_e0, lo: float = 0.25, hi: float = 0.75) -> float:
    """Decades of ``gamma`` over which ``|<lambda_1|E_0>|^2`` rises from ``lo`` to ``hi``.

    Uses log-linear interpolation at the first upward crossings of each
    level; ``nan`` if either level is never crossed.
    """
    lg = np.log10(np.asarray(gammas, dtype=float))
    y = np.asarray(lam_e0, dtype=float)

    def first_cross(level):
        idx = np.flatnonzero((y[:-1] < level) & (y[1:] >= level))
        if idx.size == 0:
            return math.nan
        i = idx[0]
        return lg[i] + (level - y[i]) * (lg[i + 1] - lg[i]) / (y[i + 1] - y[i])

    return float(first_cross(hi) - first_cross(lo))


def pick_node(g: Multigraph, spec) -> int:
    """Resolve ``"max-degree"``/``"min-degree"`` (hub excluded) or an index."""
    if isinstance(spec, (int, np.integer)) or str(spec).lstrip("-").isdigit():
        w = int(spec)
        if not 0 <= w < g.n:
            raise IndexError(f"node {w} out of range for n={g.n}")
        return w
    deg = g.degree.astype(float)
    deg[hub_node(g)] = math.nan
    if spec == "max-degree":
        return int(np.nanargmax(deg))
    if spec == "min-degree":
        return int(np.nanargmin(deg))
    raise ValueError(f"unknown node selector {spec!r}")


def cmd_gamma_profile(
    cfg: ExperimentConfig,
    w,
    graph=None,
    gamma_min: float | None = None,
    gamma_max: float | None = None,
    points: int = 400,
    out=None,
) -> dict:
    """Squared overlaps and gap of the two lowest eigenstates across ``gamma``.

    ``graph`` is an edge-list path or a :class:`Multigraph`; by default the
    first sample of the first configured N.  ``gamma_min``/``gamma_max``
    default to the search scan window.
    """
    if graph is None:
        g = sample_graph(cfg, cfg.n[0], 0)
    elif isinstance(graph, Multigraph):
        g = graph
    else:
        g = read_edge_list(graph)
    w = pick_node(g, w)
    out = _out_dir(cfg, out)
    lam1 = adjacency_spectrum(g).lambda1
    lo = gamma_min if gamma_min is not None else cfg.search.gamma_lo / lam1
    hi = gamma_max if gamma_max is not None else cfg.search.gamma_hi / lam1
    if not 0 < lo < hi:
        raise ValueError("need 0 < gamma_min < gamma_max")
    gammas = np.geomspace(lo, hi, points)
    prof = crossing_quantities(g, w, gammas)
    rows = [[c.gamma, c.gamma * lam1, c.lam_e0, c.lam_e1, c.w_e0, c.w_e1, c.gap] for c in prof]
    path = _write_csv(
        out / f"gamma_profile_w{w}.csv",
        ("gamma", "gamma_lambda1", "lam_E0", "lam_E1", "w_E0", "w_E1", "delta_E"),
        rows,
    )
    opt = find_gamma_opt(g, w, cfg.search)
    summary = {
        "w": w,
        "degree_w": int(g.degree[w]),
        "lambda1": lam1,
        "gamma_opt": opt.gamma,
        "delta_e_at_opt": opt.delta_e,
        "overlaps_at_opt": [opt.overlap0, opt.overlap1],
        "crossover_decades": crossover_width(gammas, [c.lam_e0 for c in prof]),
    }
    _write_json(out / f"gamma_profile_w{w}.json", summary)
    return {"path": path, **summary}
