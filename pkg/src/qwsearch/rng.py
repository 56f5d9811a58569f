"""Counter-based random streams keyed by integer tuples.

Every stream is a Philox generator whose key is derived from a
``SeedSequence`` over ``(seed, *keys)``, so the stream used for a work unit
depends only on its key and never on scheduling order.
"""
from __future__ import annotations

import numpy as np


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return an independent Philox-backed generator for ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a 63-bit integer seed from ``(seed, *keys)``.

    Used to give each generated graph a single reproducible seed that can be
    written into file headers and CSV rows.
    """
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
