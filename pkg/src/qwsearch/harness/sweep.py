"""Reproducible ensemble sweeps over graph samples and marked nodes.

Every graph sample ``(N, sample_id)`` draws its seed from
``(master seed, N, sample_id)`` and its marked nodes from a separate stream
with the same key, so output does not depend on the number of workers or on
completion order.  Work is distributed per sample; rows are written in
sample order by the parent process only.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import __version__
from ..centrality import compute_centralities
from ..errors import DisconnectedGraphError, QwSearchError
from ..graph import Multigraph, bfs_distances, generate_erdos_renyi, generate_lcd, generate_with_exponent, hub_node
from ..rng import derive_seed, make_rng
from ..search import run_search
from .config import ExperimentConfig

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "sample_id", "n", "m", "beta", "seed", "w", "degree_w", "l_hub_w", "e_hub_w",
    "gamma_opt", "delta_e", "tau", "p_max", "T",
    "C_d", "C_e", "C_c", "C_b", "C_rc", "C_rb", "H_hub_w", "status",
)  # fmt: skip
INT_COLUMNS = ("sample_id", "n", "m", "seed", "w", "degree_w", "l_hub_w", "e_hub_w")
FLOAT_COLUMNS = tuple(c for c in CSV_COLUMNS if c not in INT_COLUMNS and c != "status")

MANIFEST = "manifest.json"
MAX_ATTEMPTS = 100
_GRAPH_STREAM = 0
_MARK_STREAM = 1


class ResumeConflictError(OSError):
    """Existing output in the target directory belongs to a different run."""


class SweepFormatError(OSError):
    """A file passed as sweep output does not have the sweep CSV layout."""


def sweep_filename(n: int) -> str:
    return f"sweep_N{n}.csv"


def graph_filename(n: int, sample_id: int) -> str:
    return f"graph_N{n}_s{sample_id:04d}.edges"


def sample_graph(cfg: ExperimentConfig, n: int, sample_id: int) -> Multigraph:
    """The connected graph of sample ``sample_id`` at size ``n``.

    Disconnected draws (possible for the Erdos-Renyi baseline) are replaced
    by a redraw with the next attempt index.
    """
    for attempt in range(MAX_ATTEMPTS):
        seed = derive_seed(cfg.seed, n, sample_id, _GRAPH_STREAM, attempt)
        if cfg.model == "er":
            g = generate_erdos_renyi(n, cfg.m * n, seed)
        elif cfg.beta == 3.0:
            g = generate_lcd(n, cfg.m, seed)
        else:
            g = generate_with_exponent(n, cfg.m, cfg.beta, seed)
        if g.is_connected:
            return g
        log.info("N=%d sample %d attempt %d disconnected; redrawing", n, sample_id, attempt)
    raise DisconnectedGraphError(f"N={n} sample {sample_id}: no connected draw in {MAX_ATTEMPTS} attempts")


def marked_nodes(cfg: ExperimentConfig, g: Multigraph, sample_id: int) -> np.ndarray:
    """Marked nodes drawn uniformly without replacement, hub excluded, ascending."""
    hub = hub_node(g)
    candidates = np.delete(np.arange(g.n), hub)
    k = cfg.nodes_for(g.n)
    if k >= candidates.size:
        return candidates
    rng = make_rng(cfg.seed, g.n, sample_id, _MARK_STREAM)
    return np.sort(rng.choice(candidates, size=k, replace=False))


def _blank_row(cfg: ExperimentConfig, g: Multigraph, sample_id: int, w: int) -> dict:
    row = dict.fromkeys(CSV_COLUMNS)
    row.update(sample_id=sample_id, n=g.n, m=cfg.m, beta=g.beta, seed=g.seed, w=int(w))
    return row


def sweep_sample(cfg: ExperimentConfig, n: int, sample_id: int) -> list[dict]:
    """All rows of one graph sample, failures included."""
    g = sample_graph(cfg, n, sample_id)
    nodes = marked_nodes(cfg, g, sample_id)
    try:
        cent = compute_centralities(g)
    except QwSearchError as exc:
        log.warning("N=%d sample %d: centralities failed: %s", n, sample_id, exc)
        rows = []
        for w in nodes:
            row = _blank_row(cfg, g, sample_id, w)
            row["status"] = exc.status
            rows.append(row)
        return rows

    hub = cent.hub
    dist = bfs_distances(g, hub)
    rows = []
    for w in nodes:
        w = int(w)
        row = _blank_row(cfg, g, sample_id, w)
        row.update(
            degree_w=int(g.degree[w]),
            l_hub_w=int(dist[w]),
            e_hub_w=int(g.adjacency[hub, w]),
            H_hub_w=float(cent.H_hub[w]),
        )
        for name in cent.MEASURES:
            row[name] = float(getattr(cent, name)[w])
        try:
            res = run_search(g, w, cfg.search)
        except QwSearchError as exc:
            log.warning("N=%d sample %d: %s", n, sample_id, exc)
            row["status"] = exc.status
        else:
            row.update(
                gamma_opt=res.gamma_opt,
                delta_e=res.delta_e,
                tau=res.tau,
                p_max=res.p_max,
                T=res.T,
                status=res.status,
            )
        rows.append(row)
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_rows(fh, rows: list[dict]) -> None:
    out = csv.writer(fh, lineterminator="\n")
    for row in rows:
        out.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    fh.flush()


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _summary(path: Path) -> dict:
    data = read_sweep(path)
    status, counts = np.unique(data["status"], return_counts=True) if data["status"].size else ([], [])
    return {
        "sha256": _sha256(path),
        "rows": int(data["status"].size),
        "status": {str(s): int(c) for s, c in zip(status, counts)},
    }


def _manifest(cfg: ExperimentConfig, files: dict, state: str) -> dict:
    cfg_dict = cfg.to_dict()
    cfg_dict["sweep"].pop("workers")
    cfg_dict.pop("out")
    return {
        "package": "qwsearch",
        "version": __version__,
        "config": cfg_dict,
        "config_hash": cfg.sweep_hash(),
        "state": state,
        "files": files,
    }


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _check_existing(cfg: ExperimentConfig, out: Path) -> bool:
    """True if ``out`` already holds this exact completed sweep."""
    mpath = out / MANIFEST
    if not mpath.exists():
        stray = [out / sweep_filename(n) for n in cfg.n if (out / sweep_filename(n)).exists()]
        if stray:
            raise ResumeConflictError(f"{stray[0]} exists without a manifest; refusing to overwrite")
        return False
    try:
        old = json.loads(mpath.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ResumeConflictError(f"{mpath}: unreadable manifest ({exc})") from exc
    if old.get("config_hash") != cfg.sweep_hash():
        raise ResumeConflictError(f"{out} holds a sweep with a different configuration; use another --out")
    if old.get("state") != "complete":
        log.info("previous sweep in %s was interrupted; recomputing", out)
        return False
    for name, info in old.get("files", {}).items():
        p = out / name
        if not p.exists() or _sha256(p) != info.get("sha256"):
            raise ResumeConflictError(f"{p} is missing or does not match the manifest checksum")
    return True


def run_sweep(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Run the configured sweep, writing one CSV per N plus ``manifest.json``.

    Re-running into a directory that holds the same completed sweep is a
    no-op; a directory holding a different sweep is an error.  On
    interruption the rows of all finished samples (in order) stay on disk and
    the manifest is marked ``interrupted``.
    """
    out = Path(out if out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / sweep_filename(n) for n in cfg.n]
    if _check_existing(cfg, out):
        log.info("sweep in %s is up to date", out)
        return paths

    tasks = [(n, sid) for n in cfg.n for sid in range(cfg.samples)]
    handles = {}
    for n, p in zip(cfg.n, paths):
        fh = p.open("w", newline="")
        csv.writer(fh, lineterminator="\n").writerow(CSV_COLUMNS)
        handles[n] = fh
    _write_json(out / MANIFEST, _manifest(cfg, {}, "running"))

    state = "interrupted"
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        if pool is None:
            results = (sweep_sample(cfg, n, sid) for n, sid in tasks)
        else:
            futures = [pool.submit(sweep_sample, cfg, n, sid) for n, sid in tasks]
            results = (f.result() for f in futures)
        for (n, sid), rows in zip(tasks, results):
            _write_rows(handles[n], rows)
            ok = sum(r["status"] == "ok" for r in rows)
            log.info("N=%d sample %d/%d done: %d/%d ok", n, sid + 1, cfg.samples, ok, len(rows))
        state = "complete"
    finally:
        if pool is not None:
            pool.shutdown(wait=state == "complete", cancel_futures=True)
        for fh in handles.values():
            fh.close()
        files = {p.name: _summary(p) for p in paths}
        _write_json(out / MANIFEST, _manifest(cfg, files, state))
    return paths


def read_sweep(path) -> dict[str, np.ndarray]:
    """Columns of a sweep CSV as arrays; blank numeric cells become ``nan``/-1."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise SweepFormatError(f"{path}: not a sweep CSV (unexpected header)")
        rows = list(reader)
    cols = list(zip(*rows)) if rows else [()] * len(CSV_COLUMNS)
    data = {}
    for name, values in zip(CSV_COLUMNS, cols):
        if name == "status":
            data[name] = np.array(values, dtype=object).astype(str)
        elif name in INT_COLUMNS:
            data[name] = np.array([int(v) if v else -1 for v in values], dtype=np.int64)
        else:
            data[name] = np.array([float(v) if v else math.nan for v in values], dtype=float)
    return data
