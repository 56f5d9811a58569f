"""Experiment configuration: YAML file, environment and flag overrides.

A config file has nested sections; every key is optional::

    network:
      model: lcd        # lcd | er
      n: [500, 1000, 2000]
      m: 5
      beta: 3.0         # lcd only
    sweep:
      samples: 10
      nodes_per_sample: 50   # or "all"
      seed: 0
      workers: 1
    search:             # any SearchConfig field
      gamma_points: 200
    stats:
      kmax: 4
      restarts: 50
      bins: 50
    out: runs/default

Later sources win: defaults, then the file, then ``QWSEARCH_*`` environment
variables (``QWSEARCH_N=500,1000``, ``QWSEARCH_SEED=7``, ...), then command
line flags.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..search import SearchConfig

ENV_PREFIX = "QWSEARCH_"


def _parse_sizes(raw) -> list[int]:
    if isinstance(raw, (list, tuple)):
        return [int(x) for x in raw]
    return [int(x) for x in str(raw).replace(",", " ").split()]


# flat override name -> (section, key, parser)
_FLAT = {
    "model": ("network", "model", str),
    "n": ("network", "n", _parse_sizes),
    "m": ("network", "m", int),
    "beta": ("network", "beta", float),
    "samples": ("sweep", "samples", int),
    "nodes_per_sample": ("sweep", "nodes_per_sample", lambda s: s if s == "all" else int(s)),
    "seed": ("sweep", "seed", int),
    "workers": ("sweep", "workers", int),
    "kmax": ("stats", "kmax", int),
    "restarts": ("stats", "restarts", int),
    "out": (None, "out", str),
}


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "lcd"
    n: tuple = (2000,)
    m: int = 5
    beta: float = 3.0
    samples: int = 10
    nodes_per_sample: int | str = 50
    seed: int = 0
    workers: int = 1
    search: SearchConfig = field(default_factory=SearchConfig)
    kmax: int = 4
    restarts: int = 50
    bins: int = 50
    out: str = "runs/default"

    def __post_init__(self):
        if self.model not in ("lcd", "er"):
            raise ConfigError(f"network.model must be 'lcd' or 'er', got {self.model!r}")
        if not self.n:
            raise ConfigError("network.n must list at least one size")
        if any(int(x) < 2 for x in self.n):
            raise ConfigError("every N must be >= 2")
        for name in ("m", "samples", "workers", "kmax", "restarts", "bins"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.nodes_per_sample != "all" and int(self.nodes_per_sample) < 1:
            raise ConfigError("nodes_per_sample must be >= 1 or 'all'")
        if self.model == "lcd" and not self.beta > 2:
            raise ConfigError("beta must exceed 2")
        if int(self.seed) < 0:
            raise ConfigError("seed must be non-negative")

    def nodes_for(self, n: int) -> int:
        """Marked nodes per sample for graph size ``n`` (the hub is excluded)."""
        if self.nodes_per_sample == "all":
            return n - 1
        return min(int(self.nodes_per_sample), n - 1)

    def to_dict(self) -> dict:
        return {
            "network": {"model": self.model, "n": list(self.n), "m": self.m, "beta": self.beta},
            "sweep": {
                "samples": self.samples,
                "nodes_per_sample": self.nodes_per_sample,
                "seed": self.seed,
                "workers": self.workers,
            },
            "search": dataclasses.asdict(self.search),
            "stats": {"kmax": self.kmax, "restarts": self.restarts, "bins": self.bins},
            "out": self.out,
        }

    def sweep_key(self) -> dict:
        """The settings that determine sweep output (not workers or paths)."""
        d = self.to_dict()
        d["sweep"].pop("workers")
        d.pop("out")
        d.pop("stats")
        return d

    def sweep_hash(self) -> str:
        blob = json.dumps(self.sweep_key(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _apply_flat(tree: dict, name: str, raw) -> None:
    section, key, parse = _FLAT[name]
    try:
        value = parse(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    if section is None:
        tree[key] = value
    else:
        tree.setdefault(section, {})[key] = value


def _from_tree(tree: dict) -> ExperimentConfig:
    known = {"network", "sweep", "search", "stats", "out"}
    unknown = set(tree) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    net = tree.get("network") or {}
    sw = tree.get("sweep") or {}
    st = tree.get("stats") or {}
    se = tree.get("search") or {}
    search_fields = {f.name for f in dataclasses.fields(SearchConfig)}
    bad = set(se) - search_fields
    if bad:
        raise ConfigError(f"unknown search settings: {sorted(bad)}")
    try:
        search = SearchConfig(**se)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"search: {exc}") from exc
    n = net.get("n", [2000])
    n = tuple(int(x) for x in (n if isinstance(n, (list, tuple)) else [n]))
    kw = dict(
        model=str(net.get("model", "lcd")),
        n=n,
        m=int(net.get("m", 5)),
        beta=float(net.get("beta", 3.0)),
        samples=int(sw.get("samples", 10)),
        nodes_per_sample=sw.get("nodes_per_sample", 50),
        seed=int(sw.get("seed", 0)),
        workers=int(sw.get("workers", 1)),
        search=search,
        kmax=int(st.get("kmax", 4)),
        restarts=int(st.get("restarts", 50)),
        bins=int(st.get("bins", 50)),
        out=str(tree.get("out", "runs/default")),
    )
    if kw["nodes_per_sample"] != "all":
        kw["nodes_per_sample"] = int(kw["nodes_per_sample"])
    return ExperimentConfig(**kw)


def load_config(path=None, overrides: dict | None = None, environ=None) -> ExperimentConfig:
    """Resolve a configuration from file, environment and explicit overrides.

    ``overrides`` uses the flat names of the command line flags
    (``n``, ``m``, ``beta``, ``samples``, ``nodes_per_sample``, ``seed``,
    ``workers``, ``kmax``, ``restarts``, ``model``, ``out``); ``None`` values
    are ignored.
    """
    tree: dict = {}
    if path is not None:
        path = Path(path)
        with path.open() as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        tree = _merge(tree, loaded)
    environ = os.environ if environ is None else environ
    for name in _FLAT:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None and raw != "":
            _apply_flat(tree, name, raw)
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        if name not in _FLAT:
            raise ConfigError(f"unknown override {name!r}")
        _apply_flat(tree, name, value)
    return _from_tree(tree)
