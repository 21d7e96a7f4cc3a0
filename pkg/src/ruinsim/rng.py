"""Deterministic random streams keyed by (seed, index)."""

import numpy as np


def rng_substream(master_seed, index, tag=0):
    """Independent Philox stream for replication block ``index``.

    Streams depend only on ``(master_seed, tag, index)``, never on which
    worker consumes them, so parallel runs reproduce serial ones exactly.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(tag), int(index)))
    return np.random.Generator(np.random.Philox(seq))
