"""Rank-wise estimation on balanced ranked set samples.

The RSS Kaplan-Meier is the equal-weight average of the k within-rank
product-limit curves; its plug-in variance is the sum of the k rank
Greenwood variances divided by k^2.  A pooled-risk-set Greenwood (ranks
discarded) and a simple shrinkage blend are provided for thin tails.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .survival import (
    CensoredObservation,
    ParameterError,
    StepSurvivalCurve,
    fit_curve_arrays,
)


class UnbalancedDesignError(ValueError):
    pass


class EmptyDesignError(ValueError):
    pass


@dataclass(frozen=True)
class RankedSetSample:
    """Balanced k x m grid of censored observations.

    ``times`` and ``events`` are (k, m) arrays; row r-1 holds the m cycle
    observations of judged rank r.  ``from_observations`` accepts the flat
    record layout and checks balance.
    """

    set_size_k: int
    cycles_m: int
    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        if self.set_size_k < 1 or self.cycles_m < 1:
            raise EmptyDesignError("empty design: k and m must be >= 1")
        if self.times.shape != (self.set_size_k, self.cycles_m):
            raise UnbalancedDesignError(
                f"unbalanced design: expected {(self.set_size_k, self.cycles_m)} "
                f"times, got {self.times.shape}"
            )

    @classmethod
    def from_observations(cls, obs) -> "RankedSetSample":
        obs = list(obs)
        if not obs:
            raise EmptyDesignError("empty design")
        k = max(o.rank for o in obs)
        counts = {r: 0 for r in range(1, k + 1)}
        for o in obs:
            counts[o.rank] += 1
        m = counts[1]
        if any(c != m for c in counts.values()):
            raise UnbalancedDesignError(
                f"unbalanced design: per-rank counts {sorted(counts.values())}"
            )
        times = np.empty((k, m))
        events = np.empty((k, m), dtype=bool)
        slot = {r: 0 for r in counts}
        for o in obs:
            j = slot[o.rank]
            times[o.rank - 1, j] = o.time
            events[o.rank - 1, j] = o.event
            slot[o.rank] += 1
        return cls(k, m, times, events)

    @cached_property
    def observations(self) -> list[CensoredObservation]:
        return [
            CensoredObservation(float(self.times[r, j]), bool(self.events[r, j]),
                                rank=r + 1, cycle=j + 1)
            for r in range(self.set_size_k)
            for j in range(self.cycles_m)
        ]

    @property
    def n_total(self) -> int:
        return self.set_size_k * self.cycles_m

    def min_at_risk(self, t: float) -> int:
        """Smallest per-rank at-risk count just before t."""
        return int(np.min(np.sum(self.times >= t, axis=1)))


@dataclass(frozen=True)
class RssSurvivalEstimate:
    """Equal-weight RSS KM with its rank-average and pooled Greenwood
    plug-ins, evaluated on the union of rank event times."""

    rank_curves: tuple[StepSurvivalCurve, ...]
    grid: np.ndarray
    rss_survival: np.ndarray
    rss_greenwood: np.ndarray
    pooled_greenwood: np.ndarray
    pooled_curve: StepSurvivalCurve

    @property
    def set_size_k(self) -> int:
        return len(self.rank_curves)

    def survival_at(self, t):
        k = self.set_size_k
        return sum(c.survival_at(t) for c in self.rank_curves) / k

    def greenwood_at(self, t):
        k = self.set_size_k
        return sum(c.greenwood_at(t) for c in self.rank_curves) / k**2


def rss_kaplan_meier(sample: RankedSetSample) -> RssSurvivalEstimate:
    """Fit each rank's KM on its m observations and average across ranks.

    A rank without events contributes the constant-1 curve (which is what
    the product-limit formula yields with no jumps).
    """
    curves = tuple(
        fit_curve_arrays(sample.times[r], sample.events[r])
        for r in range(sample.set_size_k)
    )
    grid = np.unique(np.concatenate([c.jump_times for c in curves]))
    k = sample.set_size_k
    if grid.size:
        surv = sum(c.survival_at(grid) for c in curves) / k
        gw = sum(c.greenwood_at(grid) for c in curves) / k**2
    else:
        surv = np.empty(0)
        gw = np.empty(0)
    pooled = fit_curve_arrays(sample.times.ravel(), sample.events.ravel())
    pooled_gw = pooled.greenwood_at(grid) if grid.size else np.empty(0)
    return RssSurvivalEstimate(curves, grid, surv, gw, pooled_gw, pooled)


def rss_greenwood(estimate: RssSurvivalEstimate, t: float) -> float:
    """(1/k^2) * sum of the rank Greenwood variances at t."""
    if t < 0:
        raise ParameterError(f"invalid time: {t}")
    return float(estimate.greenwood_at(t))


def pooled_greenwood(sample: RankedSetSample, t: float) -> float:
    """Greenwood variance at t of the KM fit on all n observations with the
    rank labels discarded."""
    if t < 0:
        raise ParameterError(f"invalid time: {t}")
    pooled = fit_curve_arrays(sample.times.ravel(), sample.events.ravel())
    return float(pooled.greenwood_at(t))


def shrunk_variance(
    rank_avg_var: float,
    pooled_var: float,
    min_at_risk: int,
    threshold: int = 5,
    weight: float = 0.5,
) -> float:
    """Blend the rank-average Greenwood toward the pooled one when per-rank
    information thins out.

    Returns ``rank_avg_var`` untouched while every rank still has at least
    ``threshold`` subjects at risk; below that, a fixed-weight convex
    combination.  The step trigger is a placeholder schedule: the weight and
    threshold are configuration knobs, not derived quantities.
    """
    if not 0.0 <= weight <= 1.0:
        raise ParameterError(f"weight must be in [0, 1], got {weight}")
    if rank_avg_var < 0 or pooled_var < 0:
        raise ParameterError("variances must be nonnegative")
    if min_at_risk >= threshold:
        return rank_avg_var
    return (1.0 - weight) * rank_avg_var + weight * pooled_var
