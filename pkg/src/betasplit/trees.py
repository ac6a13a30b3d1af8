"""Direct construction of beta-splitting trees (any beta > -2).

A set of m >= 2 elements splits into a left part of size i and a right part
of size m - i, with i drawn from the symmetric split law

    q(m, i) ~ Gamma(beta+i+1) Gamma(beta+m-i+1) / (Gamma(i+1) Gamma(m-i+1)).

At beta = -1 (the critical case) this is (m / (2 h_{m-1})) / (i (m - i)).
In continuous mode every internal node of size m carries one exponential
holding time of mean 1/h_{m-1}, shared by both children: the wait before the
set splits.  Leaf statistics read along the root-to-leaf path make this the
independent O(n)-memory oracle for the recurrence-based chain sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Literal

import numpy as np
from scipy.special import gammaln

from . import streams
from .chains import LeafStat, leaf_labels
from .special import harmonic, harmonic_array
from .stats import SampleMatrix

Mode = Literal["discrete", "continuous"]

#: Memory guard: larger trees must use the chain sampler.
MAX_LEAVES = 1_000_000

#: Split pmfs for sizes up to this are cached; beyond, the critical case uses
#: an O(log m) harmonic-CDF inversion and other betas build a throwaway pmf.
_CACHE_MAX = 4096


@dataclass
class SplitDistribution:
    """Split law of an m-element set: pmf[i-1] = P{left part has i elements}."""

    beta: float
    m: int
    pmf: np.ndarray
    cdf: np.ndarray


def split_pmf(beta: float, m: int) -> SplitDistribution:
    """Split distribution for size m; closed form at beta = -1, log-gamma else.

    Log-space evaluation with max subtraction keeps the general case finite
    up to m = 10^6.
    """
    if beta <= -2:
        raise ValueError("split_pmf needs beta > -2")
    if m < 2:
        raise ValueError("split_pmf needs m >= 2")
    i = np.arange(1, m, dtype=float)
    if beta == -1.0:
        pmf = (m / (2.0 * harmonic(m - 1))) / (i * (m - i))
    else:
        logw = (gammaln(beta + i + 1) + gammaln(beta + m - i + 1)
                - gammaln(i + 1) - gammaln(m - i + 1))
        logw -= logw.max()
        pmf = np.exp(logw)
        pmf /= pmf.sum()
    return SplitDistribution(beta, m, pmf, np.cumsum(pmf))


@lru_cache(maxsize=100_000)
def _cached_split(beta: float, m: int) -> SplitDistribution:
    return split_pmf(beta, m)


def sample_split(dist: SplitDistribution, rng: np.random.Generator) -> int:
    """Left-part size in 1..m-1 by inverse CDF over the stored pmf."""
    u = rng.random()
    i = int(np.searchsorted(dist.cdf, u, side="right")) + 1
    return min(i, dist.m - 1)  # guard the cdf[-1] < 1 rounding edge


def _critical_split_from_u(m: int, u: float) -> int:
    # Inverse CDF of the critical split law without materializing the pmf:
    # CDF(x) = (h_x + h_{m-1} - h_{m-1-x}) / (2 h_{m-1});  O(log m) search.
    H = harmonic_array(m - 1)
    target = u * 2.0 * H[m - 1]
    lo, hi = 1, m - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if H[mid] + H[m - 1] - H[m - 1 - mid] >= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _draw_split(beta: float, m: int, rng: np.random.Generator) -> int:
    if beta == -1.0 and m > _CACHE_MAX:
        return _critical_split_from_u(m, rng.random())
    return sample_split(_cached_split(beta, m), rng)


@dataclass(slots=True)
class TreeNode:
    size: int
    holding_time: float
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class SplitTree:
    """A realized splitting tree; leaves have size 1 and no children."""

    beta: float
    n: int
    mode: Mode
    root: TreeNode

    def dump_lines(self) -> Iterator[str]:
        """Depth-first '(size, holding_time, depth)' records for debugging."""
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield f"({node.size}, {node.holding_time:.17g}, {depth})"
            if not node.is_leaf:
                stack.append((node.right, depth + 1))
                stack.append((node.left, depth + 1))


def build_tree(beta: float, n: int, mode: Mode, rng: np.random.Generator,
               max_leaves: int = MAX_LEAVES) -> SplitTree:
    """Recursively split {1..n} into a tree, by explicit stack.

    Per internal node of size m: one split draw, then (continuous mode) one
    exponential holding time of mean 1/h_{m-1}.  Discrete mode sets every
    internal holding time to 1.
    """
    if n < 1:
        raise ValueError("build_tree needs n >= 1")
    if n > max_leaves:
        raise ValueError(
            f"n={n} exceeds the tree memory guard ({max_leaves}); "
            "use the chain sampler for larger n"
        )
    if mode not in ("discrete", "continuous"):
        raise ValueError(f"unknown mode {mode!r}")
    root = TreeNode(n, 0.0)
    stack = [root]
    continuous = mode == "continuous"
    while stack:
        node = stack.pop()
        m = node.size
        if m == 1:
            continue
        i = _draw_split(beta, m, rng)
        if continuous:
            node.holding_time = rng.standard_exponential() / harmonic(m - 1)
        else:
            node.holding_time = 1.0
        node.left = TreeNode(i, 0.0)
        node.right = TreeNode(m - i, 0.0)
        stack.append(node.right)
        stack.append(node.left)
    return SplitTree(beta, n, mode, root)


def leaf_stats(tree: SplitTree, leaf_index: int, j: int) -> LeafStat:
    """Statistics of the root-to-leaf path for the leaf_index-th leaf.

    Leaves are numbered 1..n left to right (element order).  The edge height
    counts internal nodes on the path, the time height sums their holding
    times, and a step from size m to size m' records the decrement m - m'.
    """
    n = tree.n
    if not 1 <= leaf_index <= n:
        raise ValueError(f"leaf_index must be in 1..{n}")
    if j < 1:
        raise ValueError("j >= 1 required")
    counts = [0] * j
    over_n = over_s = 0
    edges = 0
    time = 0.0
    node = tree.root
    idx = leaf_index
    while not node.is_leaf:
        edges += 1
        time += node.holding_time
        if idx <= node.left.size:
            child = node.left
        else:
            idx -= node.left.size
            child = node.right
        k = node.size - child.size
        if k <= j:
            counts[k - 1] += 1
        else:
            over_n += 1
            over_s += k
        node = child
    return LeafStat(n, edges, time, tuple(counts), over_n, over_s)


def sample_uniform_leaf_stat(beta: float, n: int, mode: Mode, j: int,
                             rng: np.random.Generator,
                             max_leaves: int = MAX_LEAVES) -> LeafStat:
    """Build one tree and read a uniformly chosen leaf (the oracle path)."""
    tree = build_tree(beta, n, mode, rng, max_leaves=max_leaves)
    leaf = int(rng.integers(1, n + 1))
    return leaf_stats(tree, leaf, j)


def sample_leaf_matrix(beta: float, n: int, mode: Mode, j: int, reps: int,
                       seed: int, threads: int = 1) -> SampleMatrix:
    """Replicates of ((L_{n,r})_{r<=j}, L_n, D_n) from full tree builds."""
    values = np.empty((reps, j + 2))

    def fill(rng, start, stop):
        for i in range(start, stop):
            stat = sample_uniform_leaf_stat(beta, n, mode, j, rng)
            values[i, :j] = stat.counts
            values[i, j] = stat.edge_height
            values[i, j + 1] = stat.time_height

    streams.map_blocks(reps, seed, fill, threads=threads)
    return SampleMatrix(n, reps, leaf_labels(j), values,
                        provenance={"seed": seed, "generator": "tree",
                                    "beta": beta, "mode": mode, "j": j,
                                    "block_size": streams.BLOCK_SIZE})
