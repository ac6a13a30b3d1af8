"""Approximate simulation of the gap occupancy scheme from its definition.

The driving process is an increasing Levy process with zero drift, no
killing, and jump density exp(-x)/(1 - exp(-x)) on (0, inf).  Its tail
measure has the closed form

    tail(y) = -log(1 - exp(-y)),

which happens to be its own inverse.  Jumps larger than a truncation level
eps form a compound Poisson stream (rate tail(eps)); the infinitely many
smaller jumps are replaced by their expected linear drift.  The gaps of the
path's range are exactly the jump intervals, n unit-mean exponential marks
are thrown at the positive halfline, and a mark inside a jump interval
occupies that gap.  Marks that land in the drift-approximated part (an
O(n*eps) probability event) trigger a full-replicate resample so the
occupancy identities stay exact; the resample count is reported so the bias
is observable.

This module never touches the size chain: it is the independent oracle for
the chain's occupancy view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import streams
from .chains import OccupancyStat, occupancy_labels
from .special import ZETA2
from .stats import SampleMatrix

#: Default truncation level for the compound Poisson approximation.
EPS_DEFAULT = 1e-4

_MAX_DOUBLINGS = 60


def tail(y: float | np.ndarray) -> float | np.ndarray:
    """Upper tail mass of the jump measure: -log(1 - exp(-y))."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("tail needs y > 0")
    out = -np.log1p(-np.exp(-y))
    return float(out) if out.ndim == 0 else out


def tail_inverse(v: float | np.ndarray) -> float | np.ndarray:
    """Inverse of :func:`tail`; identical formula (the tail is an involution)."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("tail_inverse needs v > 0")
    out = -np.log1p(-np.exp(-v))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def small_jump_drift(eps: float) -> float:
    """Expected drift per unit time of the discarded jumps: int_0^eps x nu(dx)."""
    if eps <= 0:
        raise ValueError("eps > 0 required")
    val, _ = integrate.quad(
        lambda x: x * math.exp(-x) / (-math.expm1(-x)), 0.0, eps,
        epsabs=1e-14, epsrel=1e-12,
    )
    return val


@dataclass
class LevyTail:
    """Truncation bookkeeping: rate and drift of the eps-approximation."""

    eps: float
    rate: float
    small_jump_drift: float

    @classmethod
    def for_eps(cls, eps: float) -> "LevyTail":
        if not 0 < eps <= 0.1:
            raise ValueError("eps must lie in (0, 0.1]")
        return cls(eps, float(tail(eps)), small_jump_drift(eps))

    def tail(self, y):
        return tail(y)

    def tail_inverse(self, v):
        return tail_inverse(v)


@dataclass
class RangeApprox:
    """Simulated jump intervals of the truncated path on [0, horizon].

    Interval i occupies (lefts[i], rights[i]] in space and was laid down at
    chain time times[i]; intervals are disjoint and ordered, with drift (if
    enabled) filling the space between them.
    """

    eps: float
    drift_mode: bool
    horizon: float
    times: np.ndarray
    lefts: np.ndarray
    rights: np.ndarray

    def path_end(self) -> float:
        drift = small_jump_drift(self.eps) if self.drift_mode else 0.0
        total_jump = float((self.rights - self.lefts).sum()) if len(self.rights) else 0.0
        return drift * self.horizon + total_jump


def simulate_range(level: float, eps: float, rng: np.random.Generator,
                   drift_mode: bool = True) -> RangeApprox:
    """Grow the truncated path until some jump interval exceeds ``level``.

    The horizon doubles by appending fresh independent increments (never by
    redrawing: conditioning accepted paths on coverage would bias them).
    """
    model = LevyTail.for_eps(eps)
    drift = model.small_jump_drift if drift_mode else 0.0
    times_parts: list[np.ndarray] = []
    sizes_parts: list[np.ndarray] = []
    t_done = 0.0
    horizon = max(1.0, 1.2 * level / ZETA2)
    total_jump = 0.0
    for _ in range(_MAX_DOUBLINGS):
        seg = horizon - t_done
        count = int(rng.poisson(model.rate * seg))
        tt = np.sort(rng.random(count)) * seg + t_done
        uu = np.maximum(rng.random(count), 1e-300) * model.rate
        ss = np.atleast_1d(tail_inverse(uu)) if count else np.empty(0)
        times_parts.append(tt)
        sizes_parts.append(ss)
        total_jump += float(ss.sum())
        t_done = horizon
        if drift * horizon + total_jump > level and total_jump > 0:
            times = np.concatenate(times_parts)
            sizes = np.concatenate(sizes_parts)
            cum = np.concatenate(([0.0], np.cumsum(sizes)))
            lefts = drift * times + cum[:-1]
            rights = lefts + sizes
            if rights[-1] > level:
                return RangeApprox(eps, drift_mode, horizon, times, lefts, rights)
        horizon *= 2.0
    raise RuntimeError("runaway path: level not covered after horizon doublings")


class ResampleCounter:
    """Counts replicates redrawn because a mark fell outside every gap."""

    def __init__(self):
        self.resamples = 0


def _gap_multiset(n: int, eps: float, rng: np.random.Generator,
                  drift_mode: bool,
                  counter: ResampleCounter | None) -> tuple[np.ndarray, float]:
    """Occupancy multiplicities of one accepted replicate plus absorption time."""
    while True:
        marks = rng.standard_exponential(n)
        mmax = float(marks.max())
        ra = simulate_range(mmax, eps, rng, drift_mode=drift_mode)
        idx = np.searchsorted(ra.rights, marks, side="left")
        if (idx < len(ra.rights)).all() and (marks > ra.lefts[idx]).all():
            per_gap = np.bincount(idx)
            occupied = per_gap[per_gap > 0]
            absorption = float(ra.times[idx[np.argmax(marks)]])
            return occupied, absorption
        if counter is not None:
            counter.resamples += 1


def simulate_occupancy(n: int, eps: float = EPS_DEFAULT,
                       rng: np.random.Generator | None = None, *, j: int = 3,
                       drift_mode: bool = True,
                       counter: ResampleCounter | None = None) -> OccupancyStat:
    """One occupancy replicate: K_n, (K_{n,r})_{r<=j} and the absorption time.

    Draws n unit-mean exponential marks, grows the truncated path past the
    maximal mark, and bins marks into jump intervals.  The absorption time is
    the chain time of the interval containing the maximal mark.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    if rng is None:
        rng = np.random.default_rng()
    occupied, absorption = _gap_multiset(n, eps, rng, drift_mode, counter)
    counts = [0] * j
    over_n = over_s = 0
    for c in occupied:
        if c <= j:
            counts[c - 1] += 1
        else:
            over_n += 1
            over_s += int(c)
    return OccupancyStat(n, len(occupied), tuple(counts), absorption,
                         over_n, over_s)


def poissonized_counts(t: float, r_max: int, eps: float = EPS_DEFAULT,
                       rng: np.random.Generator | None = None, *,
                       drift_mode: bool = True,
                       counter: ResampleCounter | None = None) -> dict[int, int]:
    """Gap counts for a Poisson(t) number of marks.

    Returns the histogram {r: number of gaps holding exactly r marks}; keys
    1..r_max are always present (possibly zero) and larger occupied
    multiplicities appear as extra keys, so sum_r r*count[r] recovers the
    Poisson mark count exactly.
    """
    if t <= 0:
        raise ValueError("t > 0 required")
    if r_max < 1:
        raise ValueError("r_max >= 1 required")
    if rng is None:
        rng = np.random.default_rng()
    hist = {r: 0 for r in range(1, r_max + 1)}
    count = int(rng.poisson(t))
    if count == 0:
        return hist
    occupied, _ = _gap_multiset(count, eps, rng, drift_mode, counter)
    for c in occupied:
        hist[int(c)] = hist.get(int(c), 0) + 1
    return hist


def sample_occupancy_matrix(n: int, eps: float, j: int, reps: int, seed: int,
                            threads: int = 1,
                            drift_mode: bool = True) -> SampleMatrix:
    """Replicates of ((K_{n,r})_{r<=j}, K_n, absorption) from the path oracle."""
    values = np.empty((reps, j + 2))
    counters: dict[int, int] = {}

    def fill(rng, start, stop):
        counter = ResampleCounter()
        for i in range(start, stop):
            stat = simulate_occupancy(n, eps, rng, j=j, drift_mode=drift_mode,
                                      counter=counter)
            values[i, :j] = stat.counts
            values[i, j] = stat.occupied
            values[i, j + 1] = stat.absorption_time
        counters[start] = counter.resamples

    streams.map_blocks(reps, seed, fill, threads=threads)
    return SampleMatrix(n, reps, occupancy_labels(j), values,
                        provenance={"seed": seed, "generator": "subordinator",
                                    "eps": eps, "j": j,
                                    "drift_mode": drift_mode,
                                    "resamples": int(sum(counters.values())),
                                    "block_size": streams.BLOCK_SIZE})
