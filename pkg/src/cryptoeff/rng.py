"""Labelled, reproducible random substreams.

Every randomized experiment draws from ``substream(seed, *labels)``. The
labels are hashed into the ``spawn_key`` of a :class:`numpy.random.SeedSequence`,
so adding a new label somewhere never perturbs the streams of existing ones,
and the streams do not depend on evaluation order or worker count.

Labels in use:

======================================  ==========================================
``("backtest", "random", i, symbol)``    random strategy signals for asset ``i``
``("randombetter", "portfolios")``       portfolio draws in the random-portfolio test
``("classify", "search", i, symbol)``    hyperparameter sampling for asset ``i``
``("simulate", model, "chunk", j)``      Monte Carlo chunk ``j`` of a path ensemble
======================================  ==========================================
"""
from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label) -> int:
    digest = hashlib.sha256(repr(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def seed_sequence(seed: int, *labels) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_label_key(lb) for lb in labels))


def substream(seed: int, *labels) -> np.random.Generator:
    """Return an independent PCG64 generator for ``(seed, *labels)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *labels)))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("a seed or a numpy Generator is required")
    return np.random.default_rng(int(rng))
