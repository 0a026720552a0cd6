"""Counter-based Gaussian stream.

Particle ``i`` lives in chunk ``i // chunk`` and every chunk owns a disjoint
slice of the Philox counter space (the chunk index goes into the second
counter word). A draw therefore depends only on (seed, i), never on how the
chunks are scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import DEFAULT_TOLERANCES

__all__ = ["normal_pairs", "uniform_pairs"]

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return seed


def _chunk_uniforms(seed: int, chunk_index: int, count: int) -> np.ndarray:
    bg = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64),
                          counter=np.array([0, chunk_index, 0, 0], dtype=np.uint64))
    raw = bg.random_raw(2 * count)
    # top 53 bits, offset by half an ulp: strictly inside (0, 1)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def uniform_pairs(seed: int, n: int, chunk: int | None = None, workers: int = 1) -> np.ndarray:
    """(n, 2) array of uniforms in (0, 1), reproducible from the seed alone."""
    seed = _check_seed(seed)
    n = int(n)
    if n < 1:
        raise ValueError(f"need at least one draw, got n={n}")
    chunk = int(chunk or DEFAULT_TOLERANCES.mc_chunk)
    out = np.empty((n, 2))
    starts = range(0, n, chunk)

    def fill(start):
        count = min(chunk, n - start)
        out[start:start + count] = _chunk_uniforms(seed, start // chunk, count).reshape(count, 2)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for s in starts:
            fill(s)
    return out


def normal_pairs(seed: int, n: int, chunk: int | None = None, workers: int = 1) -> np.ndarray:
    """(n, 2) array of independent standard normals via the Box-Muller transform."""
    u = uniform_pairs(seed, n, chunk=chunk, workers=workers)
    r = np.sqrt(-2.0 * np.log(u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))
