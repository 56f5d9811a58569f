"""Acceptance criteria 1-12 at their stated tolerances.

The ensemble sweeps are shared between criteria through session fixtures.
Set ``QWSEARCH_ACCEPTANCE_DIR`` to keep them between runs; a completed sweep
in that directory is reused (the resume logic verifies its checksums).
"""
import filecmp
import math
import os
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from qwsearch.centrality import betweenness_centrality, mfpt
from qwsearch.graph import (
    Multigraph,
    degree_histogram,
    fit_power_law,
    generate_lcd,
    hub_node,
    write_edge_list,
)
from qwsearch.harness.commands import cmd_correlate, cmd_fit, cmd_scaling
from qwsearch.harness.config import load_config
from qwsearch.harness.sweep import MANIFEST, read_sweep, run_sweep, sweep_filename
from qwsearch.rng import make_rng
from qwsearch.search import (
    SearchConfig,
    crossing_quantities,
    find_gamma_opt,
    hamiltonian_decomposition,
    run_search,
    success_probability,
    two_level_prediction,
)
from qwsearch.spectral import eigendecompose, evolve, leading_eigenvector
from qwsearch.stats import fit_lognormal_mixture

from helpers import complete
from oracles import (
    brute_betweenness,
    connected_graphs_8,
    counting_betweenness,
    from_nx,
    lognormal_mixture,
    random_state,
    random_symmetric,
    random_walks,
    rk4,
)

pytestmark = pytest.mark.slow

ENSEMBLE = dict(model="lcd", m=5, samples=10, nodes_per_sample=50, seed=0)


class Sweeps:
    """Runs each named sweep once per session; reuses completed ones on disk."""

    def __init__(self, base: Path):
        self.base = base
        self._done: dict = {}

    def get(self, name: str, **overrides):
        if name not in self._done:
            cfg = load_config(overrides={**ENSEMBLE, **overrides}, environ={})
            out = self.base / name
            start = time.perf_counter()
            paths = run_sweep(cfg, out)
            self._done[name] = (cfg, out, paths, time.perf_counter() - start)
        return self._done[name]


@pytest.fixture(scope="session")
def sweeps(tmp_path_factory):
    base = os.environ.get("QWSEARCH_ACCEPTANCE_DIR")
    base = Path(base) if base else tmp_path_factory.mktemp("acceptance")
    return Sweeps(base)


@pytest.fixture(scope="session")
def lcd2000(sweeps):
    return sweeps.get("lcd_2000", n=[2000])


@pytest.fixture(scope="session")
def er2000(sweeps):
    return sweeps.get("er_2000", model="er", n=[2000])


def _elapsed(seconds: float) -> str:
    return f"{seconds:.0f} s" if seconds > 1 else "reused from cache"


# ---------------------------------------------------------------- 1-3: networks


@pytest.mark.criterion(1)
def test_generator_exactness(record):
    start = time.perf_counter()
    g = generate_lcd(10_000, 5, seed=0)
    elapsed = time.perf_counter() - start
    record(f"edges {g.edge_count}, min degree {g.degree.min()}, degree sum {g.degree.sum()}, {elapsed:.2f} s")
    assert g.edge_count == 50_000
    assert g.degree.min() >= 5
    assert g.degree.sum() == 2 * 50_000
    assert elapsed < 5.0


@pytest.mark.criterion(2)
def test_degree_exponent(record):
    start = time.perf_counter()
    betas = [fit_power_law(degree_histogram(generate_lcd(10_000, 5, seed=s))).beta_hat for s in range(20)]
    elapsed = time.perf_counter() - start
    mean = float(np.mean(betas))
    record(f"mean beta_hat {mean:.3f} (range {min(betas):.3f}-{max(betas):.3f}), {elapsed:.1f} s")
    assert 2.6 <= mean <= 3.2
    assert elapsed < 60.0


@pytest.mark.criterion(3)
def test_eigenvector_localization(record):
    start = time.perf_counter()
    weight = {}
    for n in (1000, 2000, 4000):
        vals = []
        for s in range(5):
            g = generate_lcd(n, 10, seed=s)
            _, vec = leading_eigenvector(g.adjacency.astype(float))
            vals.append(vec[hub_node(g)] ** 2)
        weight[n] = np.array(vals)
    elapsed = time.perf_counter() - start
    means = {n: float(v.mean()) for n, v in weight.items()}
    record(
        "mean |<hub|lambda_1>|^2 " + ", ".join(f"N={n}: {v:.3f}" for n, v in means.items())
        + f"; min {min(v.min() for v in weight.values()):.3f}; {elapsed:.0f} s"
    )
    assert all((v > 0.1).all() for v in weight.values())
    assert means[4000] >= 0.9 * means[1000]
    assert elapsed < 600.0


# ---------------------------------------------------------------- 4-6: single-graph search


@pytest.fixture(scope="module")
def crossing_graph():
    g = generate_lcd(2000, 10, seed=0)
    hub = hub_node(g)
    nodes = make_rng(0, 4).choice(np.delete(np.arange(g.n), hub), 20, replace=False)
    return g, np.sort(nodes)


@pytest.mark.criterion(4)
def test_gamma_opt_crossing(crossing_graph, record):
    g, nodes = crossing_graph
    start = time.perf_counter()
    worst, local = 0.0, 0
    for w in nodes:
        opt = find_gamma_opt(g, int(w))
        worst = max(worst, abs(opt.overlap0 - 0.5), abs(opt.overlap1 - 0.5))
        gam = np.array([p.gamma for p in opt.scan])
        gap = np.array([p.gap for p in opt.scan])
        j = int(np.argmin(gap))
        # the scan minimum brackets gamma_opt and no grid point lies below it
        near = gam[max(j - 1, 0)] <= opt.gamma <= gam[min(j + 1, gam.size - 1)]
        side = crossing_quantities(g, int(w), [opt.gamma * 0.999, opt.gamma * 1.001])
        local += near and opt.delta_e <= gap.min() and all(opt.delta_e <= p.gap for p in side)
    elapsed = time.perf_counter() - start
    record(f"max |overlap - 0.5| {worst:.2e}; dE local minimum at gamma_opt on {local}/20 nodes; {elapsed:.0f} s")
    assert worst <= 0.10
    assert local == 20
    assert elapsed < 900.0


@pytest.mark.criterion(5)
def test_two_level_fidelity(crossing_graph, record):
    g, nodes = crossing_graph
    pred_ok = tau_ok = 0
    ratios = []
    for w in nodes:
        res = run_search(g, int(w))
        model = two_level_prediction(g, int(w), res.gamma_opt)
        pred_ok += abs(model.delta_e_pred - model.delta_e) / model.delta_e <= 0.10
        ratio = res.tau * model.delta_e / math.pi
        ratios.append(ratio)
        tau_ok += 0.85 <= ratio <= 1.15
    record(
        f"gap prediction within 10% on {pred_ok}/20; tau dE/pi in band on {tau_ok}/20 "
        f"(range {min(ratios):.3f}-{max(ratios):.3f})"
    )
    assert pred_ok >= 16
    assert tau_ok >= 16


@pytest.mark.criterion(6)
def test_complete_graph_benchmark(record):
    start = time.perf_counter()
    g = complete(64)
    res = run_search(g, 0, SearchConfig(initial="perron"))
    hub_start = run_search(g, 1)
    # fine time grid on the exact spectrum of H
    d = hamiltonian_decomposition(g, 0, res.gamma_opt)
    times = np.linspace(0.0, 2.0 * res.tau, 200_001)
    p = success_probability(g, 0, res.gamma_opt, "perron", times, decomposition=d)
    i = int(np.argmax(p))
    elapsed = time.perf_counter() - start
    record(
        f"gamma_opt*64 {res.gamma_opt * 64:.4f}, tau/(4 pi) {res.tau / (4 * math.pi):.4f}, "
        f"p_max {res.p_max:.4f} (fine grid {p[i]:.4f} at {times[i]:.4f}); hub start p_max {hub_start.p_max:.4f}; "
        f"{elapsed:.1f} s"
    )
    assert res.gamma_opt == pytest.approx(1 / 64, rel=0.05)
    assert res.tau == pytest.approx(math.pi / 2 * 8, rel=0.10)
    assert res.p_max > 0.8
    assert res.p_max == pytest.approx(p[i], abs=1e-6)
    assert abs(res.tau - times[i]) <= times[1]
    assert elapsed < 60.0


# ---------------------------------------------------------------- 7-10: ensembles


@pytest.mark.criterion(7)
def test_distance_stratification(lcd2000, record):
    cfg, out, paths, elapsed = lcd2000
    data = read_sweep(paths[0])
    ok = data["status"] == "ok"
    means = {}
    for level in (1, 2, 3):
        sel = ok & (data["l_hub_w"] == level)
        means[level] = float(data["T"][sel].mean())
    record(
        f"{int(ok.sum())}/{ok.size} ok; mean T " + ", ".join(f"l={k}: {v:.0f}" for k, v in means.items())
        + f"; sweep {_elapsed(elapsed)}"
    )
    assert means[1] < means[2] < means[3]
    assert means[1] < means[3] / 10
    assert elapsed < 7200.0


@pytest.mark.criterion(8)
def test_distance_resolved_scaling(sweeps, lcd2000, tmp_path, record):
    runs = [sweeps.get(f"lcd_{n}", n=[n]) for n in (500, 1000)] + [lcd2000]
    csvs = [r[2][0] for r in runs]
    cfg = runs[-1][0].replace(n=(500, 1000, 2000))
    alphas = cmd_scaling(csvs, cfg, out=tmp_path)["distance"]
    a = {level: alphas[level].alpha for level in (1, 2, 3)}
    record(
        "alpha " + ", ".join(f"l={k}: {alphas[k].alpha:.3f} +- {alphas[k].stderr:.3f}" for k in a)
        + f"; sweeps {', '.join(_elapsed(r[3]) for r in runs)}"
    )
    assert a[1] < a[2] < a[3]
    assert a[1] < 0.35
    assert sum(r[3] for r in runs) < 4 * 3600.0


def _bic_line(fit) -> str:
    return " ".join(f"k={k}:{v:.0f}" for k, v in sorted(fit.bic_table.items()))


@pytest.mark.criterion(9)
def test_multimodality_lcd(lcd2000, tmp_path, record):
    cfg, out, paths, _ = lcd2000
    start = time.perf_counter()
    fit = cmd_fit(paths[0], cfg, out=tmp_path)["fit"]
    elapsed = time.perf_counter() - start
    record(f"LCD selects k={fit.k}; BIC {_bic_line(fit)}; {elapsed:.0f} s")
    assert fit.k >= 2
    assert elapsed < 600.0


@pytest.mark.criterion(9)
@pytest.mark.xfail(strict=True, raises=AssertionError, reason="BIC prefers more than one component on the ER ensemble; see ledger")
def test_multimodality_er_single_mode(er2000, tmp_path, record):
    cfg, out, paths, elapsed = er2000
    g = read_sweep(paths[0])
    fit = cmd_fit(paths[0], cfg, out=tmp_path)["fit"]
    record(f"ER ({g['n'][0]} nodes, {cfg.m * g['n'][0]} edges) selects k={fit.k}; BIC {_bic_line(fit)}; sweep {_elapsed(elapsed)}")
    assert fit.k == 1


@pytest.mark.criterion(10)
def test_correlation_ordering(lcd2000, tmp_path, record):
    cfg, out, paths, _ = lcd2000
    start = time.perf_counter()
    table = cmd_correlate(paths[0], cfg, out=tmp_path)
    elapsed = time.perf_counter() - start
    r = {name: v[0] for name, v in table.items() if name.startswith("C_")}
    assert len(r) == 6
    ranked = sorted(r, key=lambda k: -abs(r[k]))
    record("r(ln T, ln C) " + ", ".join(f"{k}: {r[k]:+.3f}" for k in ranked) + f"; {elapsed:.1f} s")
    assert ranked[:2] == ["C_e", "C_c"]
    assert r["C_e"] < 0 and r["C_c"] < 0
    assert elapsed < 1800.0


# ---------------------------------------------------------------- 11: oracle equivalences


@pytest.mark.criterion(11)
def test_betweenness_all_small_graphs(record):
    atlas = [h for h in nx.graph_atlas_g()[1:] if nx.is_connected(h)]
    for h in atlas:
        g = from_nx(h)
        assert np.array_equal(np.round(betweenness_centrality(g), 9), np.round(brute_betweenness(g), 9))
    count = 0
    for edges in connected_graphs_8():
        u, v = np.array(edges).T
        g = Multigraph.from_pairs(8, u, v)
        assert np.array_equal(np.round(betweenness_centrality(g), 9), np.round(counting_betweenness(g), 9))
        count += 1
    record(f"exact on {len(atlas)} connected graphs with N <= 7 and {count} 8-node graphs covering every class")


@pytest.mark.criterion(11)
def test_mfpt_monte_carlo(record):
    g = generate_lcd(500, 5, seed=1)
    hub = hub_node(g)
    cases = {"to hub": (int(np.argmin(g.degree)), hub), "from hub": (hub, int(np.flatnonzero(g.degree >= 20)[-1]))}
    errors = {}
    for label, (start, target) in cases.items():
        steps = random_walks(g, start, target, 100_000, seed=5)
        errors[label] = abs(steps.mean() / mfpt(g, target)[start] - 1)
    record("MFPT vs 1e5 walks, relative error " + ", ".join(f"{k}: {v:.4f}" for k, v in errors.items()))
    assert max(errors.values()) < 0.02


@pytest.mark.criterion(11)
def test_evolution_ode(record):
    worst = 0.0
    for seed in range(10):
        h = random_symmetric(8, seed)
        psi = random_state(8, seed + 100)
        worst = max(worst, np.abs(evolve(eigendecompose(h), psi, 1.7) - rk4(h, psi, 1.7, 4000)).max())
    record(f"max deviation from RK4 on 10 random 8x8 systems: {worst:.2e}")
    assert worst < 1e-6


@pytest.mark.criterion(11)
def test_em_recovery(record):
    cases = [
        ([0.5, 0.5], [0.0, 4.0], [0.3, 0.3]),
        ([0.3, 0.7], [2.0, 5.0], [0.5, 0.4]),
    ]
    worst = 0.0
    for i, (p, mu, s) in enumerate(cases):
        fit = fit_lognormal_mixture(lognormal_mixture(10_000, p, mu, s, seed=20 + i), len(p))
        for got, want in ((fit.weights, p), (fit.means, mu), (fit.sigmas, s)):
            worst = max(worst, float(np.abs(got - np.array(want)).max()))
    record(f"max parameter error on 10^4 samples: {worst:.4f}")
    assert worst < 0.05


# ---------------------------------------------------------------- 12: determinism


@pytest.mark.criterion(12)
def test_determinism(sweeps, tmp_path, record):
    cfg, ref_dir, ref_paths, _ = sweeps.get("lcd_500", n=[500])
    # the same sweep with two workers, into a fresh directory
    run_sweep(cfg.replace(workers=2), tmp_path / "sweep")
    names = [p.name for p in ref_paths] + [MANIFEST]
    match, mismatch, _ = filecmp.cmpfiles(ref_dir, tmp_path / "sweep", names, shallow=False)
    assert mismatch == [] and sorted(match) == sorted(names)

    # analysis outputs, twice
    csv = ref_paths[0]
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        cmd_fit(csv, cfg, out=out)
        cmd_correlate(csv, cfg, out=out)
        write_edge_list(generate_lcd(10_000, 5, seed=0), out / "graph.edges")
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], files, shallow=False)
    assert mismatch == [] and errors == []

    # single-node search results
    g = generate_lcd(500, 5, seed=11)
    assert run_search(g, 9) == run_search(g, 9)
    record(f"sweep (1 vs 2 workers) {len(names)} files identical; {len(match)} analysis files identical across reruns")
    assert read_sweep(tmp_path / "sweep" / sweep_filename(500))["status"].size == 500
