"""Kaplan-Meier and Nelson-Aalen estimation on right-censored samples.

Single-sample building block: everything here works on one homogeneous
sample (an SRS, or the m observations of one rank of a ranked set sample).
Curves are immutable step functions; all estimation is tie-aware, with
deaths processed before censorings at tied times.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class EmptySampleError(ValueError):
    pass


class ParameterError(ValueError):
    pass


class InvalidObservationError(ValueError):
    pass


@dataclass(frozen=True)
class CensoredObservation:
    """One follow-up record: observed time, event flag, judged rank, cycle.

    ``event`` is True when the death was observed, False when censored.
    ``rank`` and ``cycle`` are both 1 for plain SRS data.
    """

    time: float
    event: bool
    rank: int = 1
    cycle: int = 1

    def __post_init__(self):
        if not np.isfinite(self.time) or self.time < 0:
            raise InvalidObservationError(f"invalid observation: time={self.time}")
        if self.rank < 1 or self.cycle < 1:
            raise InvalidObservationError(
                f"invalid observation: rank={self.rank}, cycle={self.cycle}"
            )


class EvalResult(NamedTuple):
    survival: float
    greenwood_var: float
    extrapolated: bool
    degenerate: bool


@dataclass(frozen=True)
class StepSurvivalCurve:
    """Right-continuous step estimates of S and the cumulative hazard.

    Values are stored at the distinct event times only (censoring times
    enter through the risk sets, not the grid).  Before the first event the
    curve is identically 1 with zero variance.

    ``degenerate_from`` is the index of the first jump where the whole risk
    set died (R == dN); survival is exactly 0 and the Greenwood variance is
    reported as 0 from there on.
    """

    jump_times: np.ndarray
    survival: np.ndarray
    cum_hazard: np.ndarray
    hazard_var: np.ndarray
    greenwood_var: np.ndarray
    n_at_risk_initial: int
    last_observed: float
    degenerate_from: int | None = None

    def _lookup(self, values: np.ndarray, t, before: float):
        """Right-continuous step lookup with value ``before`` ahead of the
        first jump (and everywhere, for a jumpless curve)."""
        if self.jump_times.size == 0:
            return np.full_like(np.asarray(t, dtype=float), before)
        idx = np.searchsorted(self.jump_times, t, side="right") - 1
        return np.where(idx < 0, before, values[np.maximum(idx, 0)])

    def survival_at(self, t):
        """Right-continuous lookup of S-hat; 1.0 before the first event."""
        return self._lookup(self.survival, t, 1.0)

    def greenwood_at(self, t):
        return self._lookup(self.greenwood_var, t, 0.0)

    def cum_hazard_at(self, t):
        return self._lookup(self.cum_hazard, t, 0.0)

    def hazard_var_at(self, t):
        return self._lookup(self.hazard_var, t, 0.0)


def _as_arrays(obs: Sequence[CensoredObservation] | Iterable):
    obs = list(obs)
    if not obs:
        raise EmptySampleError("empty sample")
    times = np.asarray([o.time for o in obs], dtype=float)
    events = np.asarray([o.event for o in obs], dtype=bool)
    return times, events


def fit_curve_arrays(times: np.ndarray, events: np.ndarray) -> StepSurvivalCurve:
    """Fit KM/NA from raw arrays; the fast path used by the MC harness."""
    times = np.asarray(times, dtype=float)
    events = np.asarray(events, dtype=bool)
    if times.size == 0:
        raise EmptySampleError("empty sample")
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise InvalidObservationError("invalid observation: negative or non-finite time")

    n = times.size
    order = np.argsort(times, kind="stable")
    ts = times[order]

    event_times = ts[events[order]]
    if event_times.size == 0:
        return StepSurvivalCurve(
            jump_times=np.empty(0),
            survival=np.empty(0),
            cum_hazard=np.empty(0),
            hazard_var=np.empty(0),
            greenwood_var=np.empty(0),
            n_at_risk_initial=n,
            last_observed=float(ts[-1]),
        )

    u, dn = np.unique(event_times, return_counts=True)
    # R(u) = #{Y >= u}; ties between deaths and censorings keep both at risk
    r = n - np.searchsorted(ts, u, side="left")

    frac = dn / r
    cum_hazard = np.cumsum(frac)
    hazard_var = np.cumsum(dn / r**2)
    survival = np.cumprod(1.0 - frac)

    exhausted = r == dn
    degenerate_from = int(np.argmax(exhausted)) if exhausted.any() else None
    gw_terms = np.where(exhausted, 0.0, dn / (r * np.maximum(r - dn, 1)))
    greenwood_var = survival**2 * np.cumsum(gw_terms)
    if degenerate_from is not None:
        greenwood_var[degenerate_from:] = 0.0

    return StepSurvivalCurve(
        jump_times=u,
        survival=survival,
        cum_hazard=cum_hazard,
        hazard_var=hazard_var,
        greenwood_var=greenwood_var,
        n_at_risk_initial=n,
        last_observed=float(ts[-1]),
        degenerate_from=degenerate_from,
    )


def kaplan_meier(obs: Sequence[CensoredObservation]) -> StepSurvivalCurve:
    """Product-limit estimate with the with-ties Greenwood variance.

    S-hat(t) = prod_{u <= t} (1 - dN(u)/R(u)) over distinct event times u,
    Greenwood(t) = S-hat(t)^2 * sum_{u <= t} dN / (R (R - dN)).
    """
    return fit_curve_arrays(*_as_arrays(obs))


def nelson_aalen(obs: Sequence[CensoredObservation]) -> StepSurvivalCurve:
    """Cumulative-hazard estimate Lambda-hat(t) = sum_{u <= t} dN(u)/R(u),
    with plug-in variance sum dN/R^2."""
    return fit_curve_arrays(*_as_arrays(obs))


def evaluate(curve: StepSurvivalCurve, t: float) -> EvalResult:
    """Right-continuous lookup of (S-hat, Greenwood) at time t.

    Never raises: values beyond the last observed time are returned with an
    ``extrapolated`` flag, and values on a fully-died tail carry a
    ``degenerate`` flag (variance reported as 0 there).
    """
    if t < 0:
        raise InvalidObservationError(f"invalid time: {t}")
    idx = int(np.searchsorted(curve.jump_times, t, side="right")) - 1
    if idx < 0:
        return EvalResult(1.0, 0.0, t > curve.last_observed, False)
    degenerate = curve.degenerate_from is not None and idx >= curve.degenerate_from
    return EvalResult(
        float(curve.survival[idx]),
        float(curve.greenwood_var[idx]),
        t > curve.last_observed,
        degenerate,
    )


def curve_to_rows(curve: StepSurvivalCurve):
    """Rows in the CSV curve schema (time, survival, greenwood_var,
    cum_hazard, hazard_var)."""
    for i, t in enumerate(curve.jump_times):
        yield (
            float(t),
            float(curve.survival[i]),
            float(curve.greenwood_var[i]),
            float(curve.cum_hazard[i]),
            float(curve.hazard_var[i]),
        )
