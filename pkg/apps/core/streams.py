"""
Reproducible random streams.

Every simulated realization draws from its own counter-based Philox generator
keyed by (master_seed, run_index, stream). Runs can therefore be executed in
any order, or in parallel, and still produce bit-identical data.
"""

import numpy as np

NOISE_STREAM = 0
PLACEMENT_STREAM = 1


def make_generator(master_seed, run_index=0, stream=NOISE_STREAM):
    """
    Build the generator for one realization.

    Args:
        master_seed (int): Scenario-level seed.
        run_index (int): Global index of the realization.
        stream (int): Sub-stream, so that e.g. placement errors and
            measurement noise of the same run are independent.

    Returns:
        np.random.Generator: Philox-backed generator.
    """
    if master_seed < 0 or run_index < 0 or stream < 0:
        raise ValueError("Seeds, run indices and streams must be non-negative")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(run_index), int(stream)))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed, stream=NOISE_STREAM):
    """
    Normalise the accepted seed forms into a generator.

    Accepts an int (master seed, run 0), a (master_seed, run_index) tuple,
    or an existing np.random.Generator which is returned unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        master_seed, run_index = seed
        return make_generator(master_seed, run_index, stream)
    return make_generator(int(seed), 0, stream)
