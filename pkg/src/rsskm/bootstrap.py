"""Rank-wise multiplier (perturbation) bootstrap for the RSS Kaplan-Meier.

Each replicate reweights the counting and at-risk processes within every
rank by iid nonnegative mean-1 weights, recomputes the weighted KM per rank,
and averages across ranks; the variance across replicates estimates the
sampling variance of the rank-averaged KM without redrawing subjects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rss import ParameterError, RankedSetSample
from .sampling import RngStream


@dataclass(frozen=True)
class MultiplierLaw:
    """Nonnegative multiplier weights with mean 1.

    kinds: "unit-exponential" (variance 1, the default), "gamma" with
    shape s and scale 1/s (variance 1/s), and "degenerate-one" (variance 0,
    test-only).
    """

    kind: str = "unit-exponential"
    gamma_shape: float = 1.0

    def __post_init__(self):
        if self.kind not in ("unit-exponential", "gamma", "degenerate-one"):
            raise ParameterError(f"unknown multiplier law: {self.kind}")
        if self.kind == "gamma" and self.gamma_shape <= 0:
            raise ParameterError("gamma shape must be positive")

    def draw(self, gen: np.random.Generator, size):
        if self.kind == "unit-exponential":
            return gen.exponential(1.0, size)
        if self.kind == "gamma":
            return gen.gamma(self.gamma_shape, 1.0 / self.gamma_shape, size)
        return np.ones(size)


def weighted_km_at(times, events, weights, t_grid):
    """Weighted product-limit curve evaluated on t_grid.

    dN*(u) = sum W I(Y = u, event), R*(u) = sum W I(Y >= u); the curve is
    prod_{u <= t} (1 - dN*(u)/R*(u)) over event times u.  Returns the values
    and a flag: True when some event time u <= max(t_grid) had R*(u) <= 0.
    """
    times = np.asarray(times, float)
    events = np.asarray(events, bool)
    weights = np.asarray(weights, float)
    order = np.argsort(times, kind="stable")
    ts, ev, w = times[order], events[order], weights[order]

    # left-continuous weighted risk set at each sorted observation
    r_star = np.cumsum(w[::-1])[::-1]
    u_idx = np.flatnonzero(ev)
    if u_idx.size == 0:
        return np.ones(len(t_grid)), False

    u_times = ts[u_idx]
    uniq, start = np.unique(u_times, return_index=True)
    # tie-aware: dN* sums event weights at the tied time; R* at first slot
    dn = np.add.reduceat(w[u_idx], start)
    first_pos = np.searchsorted(ts, uniq, side="left")
    r_at = r_star[first_pos]

    bad = r_at <= 0
    degenerate = bool(np.any(bad & (uniq <= np.max(t_grid))))
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(bad, 0.0, 1.0 - np.clip(dn / np.where(bad, 1.0, r_at), 0.0, 1.0))
    surv = np.cumprod(fac)
    idx = np.searchsorted(uniq, t_grid, side="right") - 1
    values = np.where(idx < 0, 1.0, surv[np.maximum(idx, 0)])
    return values, degenerate


@dataclass(frozen=True)
class BootstrapResult:
    t_grid: np.ndarray
    point_estimate: np.ndarray
    variance: np.ndarray
    replicates: np.ndarray
    n_excluded: int


def multiplier_bootstrap(
    sample: RankedSetSample,
    t_grid,
    n_reps: int,
    law: MultiplierLaw | None = None,
    rng: RngStream | None = None,
) -> BootstrapResult:
    """Bootstrap variance of the rank-averaged KM on a time grid.

    Replicates where any rank's weighted risk set vanished before the
    largest grid point are flagged and excluded from the variance (their
    count is reported), rather than imputed.
    """
    t_grid = np.asarray(t_grid, float)
    if t_grid.size == 0:
        raise ParameterError("empty evaluation grid")
    if n_reps < 2:
        raise ParameterError(f"n_reps must be >= 2, got {n_reps}")
    law = law or MultiplierLaw()
    rng = rng or RngStream(0)

    k, m = sample.set_size_k, sample.cycles_m
    point = np.mean(
        [weighted_km_at(sample.times[r], sample.events[r], np.ones(m), t_grid)[0]
         for r in range(k)],
        axis=0,
    )

    reps = np.empty((n_reps, t_grid.size))
    ok = np.ones(n_reps, dtype=bool)
    for b in range(n_reps):
        gen = rng.child(b).generator()
        w = law.draw(gen, (k, m))
        acc = np.zeros(t_grid.size)
        for r in range(k):
            vals, bad = weighted_km_at(sample.times[r], sample.events[r], w[r], t_grid)
            acc += vals
            ok[b] &= not bad
        reps[b] = acc / k

    kept = reps[ok]
    if kept.shape[0] < 2:
        raise ParameterError("fewer than 2 usable bootstrap replicates")
    # shift by the first replicate so constant columns (e.g. under the
    # degenerate-one law) yield exactly zero variance
    variance = np.var(kept - kept[:1], axis=0, ddof=1)
    return BootstrapResult(t_grid, point, variance, reps, int(np.sum(~ok)))
