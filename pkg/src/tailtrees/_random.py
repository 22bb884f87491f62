"""Seeded, chunked random streams.

Every sampler splits its ``n`` draws into fixed-size blocks. Block ``k``
gets its own generator seeded with ``SeedSequence(seed, spawn_key=(k,))``,
so the output depends on ``(seed, n)`` only and never on how many worker
threads process the blocks.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 1 << 16


def block_rng(seed, k):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(k),)))


def chunked(draw, n, seed, workers=1, block_size=BLOCK_SIZE):
    """Run ``draw(rng, size)`` on consecutive blocks and concatenate.

    ``draw`` must return an array whose first axis has length ``size``.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    sizes = [block_size] * (n // block_size)
    if n % block_size:
        sizes.append(n % block_size)

    def run(k):
        return draw(block_rng(seed, k), sizes[k])

    workers = max(1, int(workers or 1))
    if workers == 1 or len(sizes) == 1:
        parts = [run(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    return np.concatenate(parts, axis=0)
