"""Reproducible per-trajectory Gaussian noise streams.

Each trajectory owns a counter-based Philox generator keyed by
(base seed, trajectory index); the stream position encodes the step
index.  Streams are therefore independent of how trajectories are grouped
into batches, chunks or threads, which is what makes ensemble results
bit-identical under any degree of parallelism.
"""

import numpy as np

# Standard normals consumed per trajectory per step.
NOISES_PER_STEP = 4


def trajectory_generator(seed, index):
    """Generator for one trajectory, a pure function of (seed, index)."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_block(generators, n_steps):
    """Next ``n_steps`` steps of noise for a group of trajectories.

    Returns shape (len(generators), n_steps, NOISES_PER_STEP).  Consuming
    a stream in blocks of different sizes yields identical numbers, so the
    block size is a pure performance knob.
    """
    out = np.empty((len(generators), n_steps, NOISES_PER_STEP))
    for i, gen in enumerate(generators):
        out[i] = gen.standard_normal(n_steps * NOISES_PER_STEP).reshape(
            n_steps, NOISES_PER_STEP
        )
    return out
