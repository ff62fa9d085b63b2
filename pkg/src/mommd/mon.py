"""Median-of-means machinery: block partitions, block means, median selection.

The median used throughout is the lower median (the ``ceil(Q/2)``-th order
statistic), so the median value is always attained by one of the blocks.
Odd block counts are recommended; with an even count the estimate sits on
the lower of the two middle blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PartitionError, ShapeError


@dataclass(frozen=True)
class BlockPartition:
    """Q disjoint equal-size index blocks induced by a permutation.

    Block q holds positions ``perm[q*m : (q+1)*m]`` with ``m = n_used // q_count``.
    When built with ``drop_remainder`` the trailing ``n - n_used`` entries of
    the permutation are left out, otherwise ``n_used == n``.
    """

    n: int
    q_count: int
    perm: np.ndarray = field(repr=False)
    blocks: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def block_size(self) -> int:
        return self.blocks[0].size

    @property
    def n_used(self) -> int:
        return self.q_count * self.block_size

    def used_indices(self) -> np.ndarray:
        """Indices covered by the blocks, in block order."""
        return self.perm[: self.n_used]


def make_partition(
    n: int,
    q_count: int,
    perm: np.ndarray | None = None,
    *,
    rng: np.random.Generator | None = None,
    drop_remainder: bool = False,
) -> BlockPartition:
    """Split ``[0, n)`` into ``q_count`` equal blocks along a permutation.

    Either an explicit permutation or a generator to draw one from must be
    supplied; with neither, the identity permutation is used.

    Raises:
        PartitionError: ``q_count`` exceeds ``n`` or does not divide it
            (unless ``drop_remainder``, which truncates to the largest
            multiple of ``q_count``).
    """
    if n < 1:
        raise PartitionError(f"need at least one sample, got n={n}")
    if not 1 <= q_count <= n:
        raise PartitionError(f"block count Q={q_count} must be in [1, {n}]")
    if n % q_count != 0 and not drop_remainder:
        raise PartitionError(
            f"Q={q_count} does not divide n={n}; pass drop_remainder=True to truncate"
        )
    if perm is None:
        perm = rng.permutation(n) if rng is not None else np.arange(n)
    else:
        perm = np.asarray(perm, dtype=np.intp)
        if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
            raise PartitionError("perm is not a permutation of range(n)")
    m = n // q_count
    blocks = tuple(perm[q * m : (q + 1) * m] for q in range(q_count))
    return BlockPartition(n=n, q_count=q_count, perm=perm, blocks=blocks)


def block_means(values: np.ndarray, part: BlockPartition) -> np.ndarray:
    """Per-block means of ``values`` under ``part``, in block order."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (part.n,):
        raise ShapeError(f"expected {part.n} values, got shape {values.shape}")
    m = part.block_size
    return values[part.used_indices()].reshape(part.q_count, m).mean(axis=1)


def median_block(block_values: np.ndarray) -> tuple[int, float]:
    """Index and value of the block attaining the lower median.

    Returns the ``ceil(Q/2)``-th order statistic and the smallest block index
    attaining it (ties broken toward the lowest index).
    """
    vals = np.asarray(block_values, dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise ShapeError("median_block needs a non-empty 1-D array")
    k = (vals.size + 1) // 2  # ceil(Q/2), 1-based rank
    value = float(np.partition(vals, k - 1)[k - 1])
    index = int(np.flatnonzero(vals == value)[0])
    return index, value


def mon_estimate(values: np.ndarray, part: BlockPartition) -> float:
    """Median of the per-block means (the median-of-means of ``values``)."""
    return median_block(block_means(values, part))[1]
