"""The decreasing size chain shared by the tree and occupancy pictures.

One continuous-time Markov chain underlies both statistics families.  In the
*tree* labeling the chain starts at n, jumps from state m to m-k with
probability 1/(k h_{m-1}) and waits an exponential time of mean 1/h_{m-1};
absorption at 1 gives (L_{n,r}, L_n, D_n).  In the *occupancy* labeling the
chain starts at n, uses h_m in place of h_{m-1}, and is absorbed at 0, giving
(K_{n,r}, K_n, absorption time).  The two labelings are the same chain up to
a shift of the start: occupancy at n equals tree at n+1, which the exact
rational laws below reproduce to the last digit.

Index conventions are fixed here once: state m looks up h_{m-1} (tree) or
h_m (occupancy); callers never shift indices themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from . import streams
from .special import EULER_GAMMA, harmonic_array, harmonic_exact
from .stats import SampleMatrix

View = Literal["tree", "occupancy"]

#: Exact-law guard: path enumeration beyond this is pointless.
MAX_EXACT_N = 14


@dataclass
class ChainTrace:
    """One absorption path: (state before, jump size, holding time) per step."""

    start: int
    view: View
    steps: list[tuple[int, int, float]]

    def total_hold(self) -> float:
        return sum(h for _, _, h in self.steps)

    def final_state(self) -> int:
        if not self.steps:
            return self.start
        m, k, _ = self.steps[-1]
        return m - k


@dataclass
class LeafStat:
    """Root-to-leaf path statistics of one sampled tree leaf.

    ``counts[r-1]`` holds the number of size-r decrements for r <= j; larger
    decrements are pooled in the overflow pair so the telescoping identities
    sum(counts) + overflow_count == edge_height and
    sum(r*counts[r]) + overflow_size == n - 1 stay checkable.
    """

    n: int
    edge_height: int
    time_height: float
    counts: tuple[int, ...]
    overflow_count: int = 0
    overflow_size: int = 0

    def check_identities(self) -> None:
        if sum(self.counts) + self.overflow_count != self.edge_height:
            raise AssertionError("decrement counts do not sum to edge height")
        weighted = sum((r + 1) * c for r, c in enumerate(self.counts))
        if weighted + self.overflow_size != self.n - 1:
            raise AssertionError("weighted decrements do not telescope to n-1")


@dataclass
class OccupancyStat:
    """Occupancy counts of one balls-in-gaps replicate."""

    n: int
    occupied: int
    counts: tuple[int, ...]
    absorption_time: float
    overflow_count: int = 0
    overflow_size: int = 0

    def check_identities(self) -> None:
        if sum(self.counts) + self.overflow_count != self.occupied:
            raise AssertionError("occupancy counts do not sum to K_n")
        weighted = sum((r + 1) * c for r, c in enumerate(self.counts))
        if weighted + self.overflow_size != self.n:
            raise AssertionError("weighted occupancy counts do not sum to n")


def sample_jump(m: int, rng: np.random.Generator) -> int:
    """Jump size k in 1..m with probability 1/(k h_m).

    Inverse CDF: the smallest k with h_k >= U*h_m, located from the initial
    guess round(exp(U*h_m - gamma)) by a local scan (expected O(1) work).
    """
    if m < 1:
        raise ValueError("sample_jump needs m >= 1")
    H = harmonic_array(m)
    c = rng.random() * H[m]
    if m == 1:
        return 1
    k = int(round(math.exp(c - EULER_GAMMA)))
    if k < 1:
        k = 1
    elif k > m:
        k = m
    while H[k] < c:
        k += 1
    while k > 1 and H[k - 1] >= c:
        k -= 1
    return k


def run_chain(start: int, rng: np.random.Generator, *, view: View = "tree",
              with_holds: bool = True) -> ChainTrace:
    """Simulate one absorption path of the size chain.

    Per step the jump uniform is drawn first, then (if ``with_holds``) the
    exponential holding time; the hold at state m has mean 1/h_{m-1} in tree
    view and 1/h_m in occupancy view.
    """
    if start < 1:
        raise ValueError("run_chain needs start >= 1")
    terminal = 1 if view == "tree" else 0
    shift = 1 if view == "tree" else 0
    steps: list[tuple[int, int, float]] = []
    m = start
    while m > terminal:
        k = sample_jump(m - shift, rng)
        hold = 0.0
        if with_holds:
            hm = harmonic_array(m - shift)[m - shift]
            hold = rng.standard_exponential() / hm
        steps.append((m, k, hold))
        m -= k
    return ChainTrace(start, view, steps)


def _trace_counts(steps, j):
    counts = [0] * j
    over_n = over_s = 0
    for _, k, _ in steps:
        if k <= j:
            counts[k - 1] += 1
        else:
            over_n += 1
            over_s += k
    return tuple(counts), over_n, over_s


def leaf_stat_from_chain(n: int, j: int, rng: np.random.Generator) -> LeafStat:
    """(L_{n,r})_{r<=j}, L_n, D_n from one tree-view chain run started at n."""
    trace = run_chain(n, rng, view="tree")
    counts, over_n, over_s = _trace_counts(trace.steps, j)
    return LeafStat(n, len(trace.steps), trace.total_hold(), counts, over_n, over_s)


def occupancy_stat_from_chain(n: int, j: int, rng: np.random.Generator) -> OccupancyStat:
    """(K_{n,r})_{r<=j}, K_n and the absorption time, chain started at n."""
    trace = run_chain(n, rng, view="occupancy")
    counts, over_n, over_s = _trace_counts(trace.steps, j)
    return OccupancyStat(n, len(trace.steps), counts, trace.total_hold(), over_n, over_s)


def _batch_chain(rng: np.random.Generator, n: int, j: int, count: int,
                 view: View) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized block of chain replicates.

    Same inverse CDF as :func:`sample_jump` (a table search instead of the
    guess-and-scan), stepping all live replicates per iteration; per
    iteration the jump uniforms are drawn before the hold exponentials.
    """
    shift = 1 if view == "tree" else 0
    terminal = 1 if view == "tree" else 0
    H = harmonic_array(max(n - shift, 1))
    state = np.full(count, n, dtype=np.int64)
    total = np.zeros(count, dtype=np.int64)
    hold = np.zeros(count)
    counts = np.zeros((count, j), dtype=np.int64)
    alive = np.flatnonzero(state > terminal)
    while alive.size:
        m = state[alive]
        hm = H[m - shift]
        c = rng.random(alive.size) * hm
        k = np.searchsorted(H, c, side="left")
        np.maximum(k, 1, out=k)
        hold[alive] += rng.standard_exponential(alive.size) / hm
        state[alive] = m - k
        total[alive] += 1
        small = k <= j
        if small.any():
            np.add.at(counts, (alive[small], k[small] - 1), 1)
        alive = alive[state[alive] > terminal]
    return counts, total, hold


def leaf_labels(j: int) -> list[str]:
    return [f"L_{r}" for r in range(1, j + 1)] + ["L", "D"]


def occupancy_labels(j: int) -> list[str]:
    return [f"K_{r}" for r in range(1, j + 1)] + ["K", "absorption"]


def _sample_matrix(n, j, reps, seed, threads, view) -> SampleMatrix:
    cols = j + 2
    values = np.empty((reps, cols))

    def fill(rng, start, stop):
        counts, total, hold = _batch_chain(rng, n, j, stop - start, view)
        values[start:stop, :j] = counts
        values[start:stop, j] = total
        values[start:stop, j + 1] = hold

    streams.map_blocks(reps, seed, fill, threads=threads)
    labels = leaf_labels(j) if view == "tree" else occupancy_labels(j)
    return SampleMatrix(n, reps, labels, values,
                        provenance={"seed": seed, "generator": "chain",
                                    "view": view, "j": j,
                                    "block_size": streams.BLOCK_SIZE})


def sample_leaf_matrix(n: int, j: int, reps: int, seed: int,
                       threads: int = 1) -> SampleMatrix:
    """Replicates of ((L_{n,r})_{r<=j}, L_n, D_n) via the chain."""
    if n < 1:
        raise ValueError("n >= 1 required")
    return _sample_matrix(n, j, reps, seed, threads, "tree")


def sample_occupancy_matrix(n: int, j: int, reps: int, seed: int,
                            threads: int = 1) -> SampleMatrix:
    """Replicates of ((K_{n,r})_{r<=j}, K_n, absorption) via the chain."""
    if n < 1:
        raise ValueError("n >= 1 required")
    return _sample_matrix(n, j, reps, seed, threads, "occupancy")


@dataclass
class ExactLaw:
    """Exact rational joint law of the decrement counts and the step total.

    ``support`` maps keys ``(c_1, ..., c_j, total)`` to probabilities; ``c_r``
    counts size-r jumps for r <= j and ``total`` is the number of jumps (L_n
    in tree view, K_n in occupancy view).  Holding-time moments come from the
    exact moment recursion, not from the support.
    """

    n: int
    j: int
    view: View
    support: dict[tuple[int, ...], Fraction]
    hold_mean: Fraction
    hold_second_moment: Fraction
    meta: dict = field(default_factory=dict)

    def probability_sum(self) -> Fraction:
        return sum(self.support.values(), Fraction(0))

    def total_marginal(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for key, p in self.support.items():
            out[key[-1]] = out.get(key[-1], Fraction(0)) + p
        return out

    def count_marginal(self, r: int) -> dict[int, Fraction]:
        if not 1 <= r <= self.j:
            raise ValueError(f"r must be in 1..{self.j}")
        out: dict[int, Fraction] = {}
        for key, p in self.support.items():
            out[key[r - 1]] = out.get(key[r - 1], Fraction(0)) + p
        return out

    def total_mean(self) -> Fraction:
        return sum((p * key[-1] for key, p in self.support.items()), Fraction(0))

    def count_mean(self, r: int) -> Fraction:
        return sum((p * key[r - 1] for key, p in self.support.items()), Fraction(0))

    def hold_variance(self) -> Fraction:
        return self.hold_second_moment - self.hold_mean**2


def _exact_dp(n: int, j: int, view: View) -> ExactLaw:
    terminal = 1 if view == "tree" else 0
    shift = 1 if view == "tree" else 0
    zero = tuple([0] * j + [0])
    laws: list[dict[tuple[int, ...], Fraction]] = [dict() for _ in range(n + 1)]
    mean: list[Fraction] = [Fraction(0)] * (n + 1)
    second: list[Fraction] = [Fraction(0)] * (n + 1)
    laws[terminal] = {zero: Fraction(1)}
    for m in range(terminal + 1, n + 1):
        hm = harmonic_exact(m - shift)
        law: dict[tuple[int, ...], Fraction] = {}
        mix_mean = Fraction(0)
        mix_second = Fraction(0)
        for k in range(1, m - terminal + 1):
            pk = Fraction(1, k) / hm
            for key, q in laws[m - k].items():
                new = list(key)
                if k <= j:
                    new[k - 1] += 1
                new[-1] += 1
                tkey = tuple(new)
                law[tkey] = law.get(tkey, Fraction(0)) + pk * q
            mix_mean += pk * mean[m - k]
            mix_second += pk * second[m - k]
        laws[m] = law
        inv = Fraction(1) / hm
        mean[m] = inv + mix_mean
        second[m] = 2 * inv**2 + 2 * inv * mix_mean + mix_second
    return ExactLaw(n, j, view, laws[n], mean[n], second[n])


def exact_law(n: int, j: int) -> ExactLaw:
    """Exact joint law of ((L_{n,r})_{r<=j}, L_n) plus D_n moments, n <= 14."""
    if not 1 <= n <= MAX_EXACT_N:
        raise ValueError(f"exact_law supports 1 <= n <= {MAX_EXACT_N}")
    if j < 1:
        raise ValueError("j >= 1 required")
    return _exact_dp(n, j, "tree")


def exact_occupancy_law(n: int, j: int) -> ExactLaw:
    """Exact joint law of ((K_{n,r})_{r<=j}, K_n) plus absorption moments."""
    if not 0 <= n <= MAX_EXACT_N - 1:
        raise ValueError(f"exact_occupancy_law supports 0 <= n <= {MAX_EXACT_N - 1}")
    if j < 1:
        raise ValueError("j >= 1 required")
    return _exact_dp(n, j, "occupancy")


def jump_pmf_exact(m: int) -> list[Fraction]:
    """Exact jump pmf [P{J=1}, ..., P{J=m}] = 1/(k h_m), m <= 64."""
    hm = harmonic_exact(m)
    return [Fraction(1, k) / hm for k in range(1, m + 1)]
