"""Evaluatable speed fields F(x, y, t)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_OFFSETS = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=3)))


@dataclass(frozen=True)
class SpeedField:
    """A speed field with a global Lipschitz constant.

    ``fn`` must accept numpy arrays and broadcast; scalar calls go through it
    too unless a faster ``scalar`` version is given.
    """

    fn: Callable
    K: float = 1.0
    time_dependent: bool = True
    scalar: Callable | None = None

    def __call__(self, x, y, t):
        if self.scalar is not None:
            return self.scalar(x, y, t)
        return float(self.fn(x, y, t))

    def eval(self, x, y, t):
        return self(x, y, t)

    def many(self, x, y, t) -> np.ndarray:
        x, y, t = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(t, dtype=float)
        )
        return np.asarray(self.fn(x, y, t), dtype=float) * np.ones(x.shape)

    def local_bound(self, p, rho: float) -> float:
        """Sampled sup of |F| over the box of half-width ``rho`` around ``p``."""
        pts = np.asarray(p, dtype=float)[None, :] + rho * _OFFSETS
        t = np.maximum(pts[:, 2], 0.0)
        return float(np.max(np.abs(self.many(pts[:, 0], pts[:, 1], t))))

    def local_lipschitz(self, p, rho: float) -> float:
        """Finite-difference estimate of |grad F| (x, y, t) near ``p``.

        Capped by the global constant ``K``.
        """
        x, y, t = (float(c) for c in p)
        lo_t = max(t - rho, 0.0)
        xs = np.array([x - rho, x + rho, x, x, x, x])
        ys = np.array([y, y, y - rho, y + rho, y, y])
        ts = np.array([t, t, t, t, lo_t, t + rho])
        v = self.many(xs, ys, np.maximum(ts, 0.0))
        gx = (v[1] - v[0]) / (2 * rho)
        gy = (v[3] - v[2]) / (2 * rho)
        gt = (v[5] - v[4]) / (t + rho - lo_t)
        est = math.sqrt(gx * gx + gy * gy + gt * gt)
        return min(est, self.K) if self.K > 0 else est


def constant(value: float) -> SpeedField:
    return SpeedField(
        lambda x, y, t: np.full(np.shape(x), value, dtype=float) if np.ndim(x) else value,
        K=0.0,
        time_dependent=False,
        scalar=lambda x, y, t: value,
    )
