"""Seed-deterministic balanced RSS and SRS generation.

Streams are addressed, not stateful: an ``RngStream`` is a (seed, stream_id,
path) address into numpy's SeedSequence tree, so identical addresses always
yield identical draws and distinct addresses are statistically independent.
Lifetimes, ranking proxies, and censoring each consume their own substream,
so e.g. adding censoring never perturbs the lifetime draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Addressable deterministic random stream."""

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = field(default_factory=tuple)

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + ids)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))


# substream tags within one sample draw
_LIFETIMES, _PROXIES, _CENSORING = 0, 1, 2


def draw_balanced_rss(model, k: int, m: int, censoring, rng: RngStream):
    """Draw a balanced k x m ranked set sample.

    Per cycle and slot r, k independent (lifetime, proxy) candidates are
    drawn; the unit whose proxy is judged r-th smallest is measured and
    independently censored.  Proxy ties break by candidate index (stable
    sort).  Only mk units are fully measured out of the m*k^2 candidates.
    """
    from .rss import EmptyDesignError, RankedSetSample

    if k < 1 or m < 1:
        raise EmptyDesignError(f"empty design: k={k}, m={m}")

    gen_x = rng.child(_LIFETIMES).generator()
    gen_p = rng.child(_PROXIES).generator()
    gen_c = rng.child(_CENSORING).generator()

    x = model.draw_lifetimes(gen_x, (m, k, k))
    scores = model.ranking_scores(x, gen_p)
    order = np.argsort(scores, axis=-1, kind="stable")
    # slot r measures the unit judged r-th smallest in its own candidate set
    slots = np.broadcast_to(np.arange(k)[None, :, None], (m, k, 1))
    chosen = np.take_along_axis(order, slots, axis=-1)
    x_sel = np.take_along_axis(x, chosen, axis=-1)[..., 0]  # (m, k)

    c = censoring.draw(gen_c, (m, k))
    times = np.minimum(x_sel, c).T.copy()  # (k, m)
    events = (x_sel <= c).T.copy()
    return RankedSetSample(k, m, times, events)


def draw_srs(model, n: int, censoring, rng: RngStream):
    """Draw n iid censored observations as a k=1, m=n ranked set sample.

    Uses the same lifetime/censoring substream layout as
    ``draw_balanced_rss``, so a k=1 RSS draw with the same stream is
    bit-identical.
    """
    from .rss import EmptyDesignError, RankedSetSample

    if n < 1:
        raise EmptyDesignError(f"empty design: n={n}")

    gen_x = rng.child(_LIFETIMES).generator()
    gen_c = rng.child(_CENSORING).generator()

    x = model.draw_lifetimes(gen_x, n)
    c = censoring.draw(gen_c, n)
    times = np.minimum(x, c).reshape(1, n)
    events = (x <= c).reshape(1, n)
    return RankedSetSample(1, n, times, events)
