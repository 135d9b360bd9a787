"""Grid geometry, surface points and the marching lists."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

SOURCES = ("fmm", "tfmm", "sideways-yt", "sideways-xt", "sideways-skew", "init")


class EmptyBandError(LookupError):
    """Raised when extracting from an empty narrow band."""


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    y_min: float
    h: float
    n: int
    T: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"mesh size must be positive, got {self.h}")
        if self.n < 3:
            raise ValueError(f"need at least 3 points per axis, got {self.n}")
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")

    @classmethod
    def square(cls, lo: float, hi: float, intervals: int, T: float) -> "GridSpec":
        """Square domain [lo, hi]^2 split into ``intervals`` cells per axis."""
        return cls(lo, lo, (hi - lo) / intervals, intervals + 1, T)

    def x(self, i):
        return self.x_min + i * self.h

    def y(self, j):
        return self.y_min + j * self.h

    @property
    def xs(self) -> np.ndarray:
        return self.x_min + np.arange(self.n) * self.h

    @property
    def ys(self) -> np.ndarray:
        return self.y_min + np.arange(self.n) * self.h

    def inside(self, i: int, j: int) -> bool:
        return 0 <= i < self.n and 0 <= j < self.n

    def neighbors(self, i: int, j: int):
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= a < self.n and 0 <= b < self.n:
                yield a, b


def unit(v) -> tuple:
    norm = math.sqrt(sum(c * c for c in v))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError(f"cannot normalize {v!r}")
    return tuple(float(c) / norm for c in v)


def _sign(v: float) -> int:
    return int(v > 0) - int(v < 0)


@dataclass(slots=True)
class SurfacePoint:
    i: int
    j: int
    x: float
    y: float
    psi: float
    normal3: tuple = (0.0, 0.0, -1.0)
    source: str = "fmm"
    attempts: int = 0
    orient: int = 0
    normal2: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.orient == 0:
            self.orient = -_sign(self.normal3[2]) or 1
        n1, n2 = self.normal3[0], self.normal3[1]
        r = math.hypot(n1, n2)
        self.normal2 = (n1 / r, n2 / r) if r > 0 else (0.0, 0.0)

    @property
    def key(self) -> tuple:
        return (self.psi, self.i, self.j)


def project_space(p: SurfacePoint) -> tuple:
    return (p.x, p.y)


def project_time(p: SurfacePoint) -> float:
    return p.psi


class NarrowBand:
    """Binary min-heap on (psi, i, j) holding at most one entry per cell.

    A position index supports replacing or removing the entry of any cell.
    """

    def __init__(self):
        self._heap: list[SurfacePoint] = []
        self._pos: dict[tuple, int] = {}

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)

    def __contains__(self, ij) -> bool:
        return ij in self._pos

    def get(self, ij):
        k = self._pos.get(ij)
        return None if k is None else self._heap[k]

    def points(self):
        return list(self._heap)

    def push(self, p: SurfacePoint) -> None:
        """Insert ``p``, replacing any entry with the same coordinates."""
        ij = (p.i, p.j)
        k = self._pos.get(ij)
        if k is not None:
            old = self._heap[k]
            self._heap[k] = p
            if p.key < old.key:
                self._up(k)
            else:
                self._down(k)
            return
        self._heap.append(p)
        self._pos[ij] = len(self._heap) - 1
        self._up(len(self._heap) - 1)

    def remove(self, ij) -> SurfacePoint | None:
        k = self._pos.get(ij)
        if k is None:
            return None
        return self._take(k)

    def pop(self) -> SurfacePoint:
        if not self._heap:
            raise EmptyBandError("narrow band is empty")
        return self._take(0)

    def peek(self) -> SurfacePoint:
        if not self._heap:
            raise EmptyBandError("narrow band is empty")
        return self._heap[0]

    def _take(self, k: int) -> SurfacePoint:
        heap = self._heap
        out = heap[k]
        del self._pos[(out.i, out.j)]
        last = heap.pop()
        if k < len(heap):
            heap[k] = last
            self._pos[(last.i, last.j)] = k
            self._up(k)
            self._down(self._pos[(last.i, last.j)])
        return out

    def _swap(self, a: int, b: int) -> None:
        heap = self._heap
        heap[a], heap[b] = heap[b], heap[a]
        self._pos[(heap[a].i, heap[a].j)] = a
        self._pos[(heap[b].i, heap[b].j)] = b

    def _up(self, k: int) -> None:
        heap = self._heap
        while k > 0:
            parent = (k - 1) >> 1
            if heap[k].key < heap[parent].key:
                self._swap(k, parent)
                k = parent
            else:
                break

    def _down(self, k: int) -> None:
        heap = self._heap
        n = len(heap)
        while True:
            left = 2 * k + 1
            if left >= n:
                break
            child = left
            if left + 1 < n and heap[left + 1].key < heap[left].key:
                child = left + 1
            if heap[child].key < heap[k].key:
                self._swap(k, child)
                k = child
            else:
                break


class PointStore:
    """Growable columnar copy of accepted points for vectorized window queries."""

    _cols = ("i", "j", "x", "y", "psi", "n1", "n2", "n3")

    def __init__(self, capacity: int = 1024):
        self._n = 0
        self._data = np.empty((capacity, len(self._cols)))

    def __len__(self):
        return self._n

    def append(self, p: SurfacePoint) -> None:
        if self._n == self._data.shape[0]:
            self._data = np.concatenate([self._data, np.empty_like(self._data)])
        n3 = p.normal3
        self._data[self._n] = (p.i, p.j, p.x, p.y, p.psi, n3[0], n3[1], n3[2])
        self._n += 1

    def column(self, name: str) -> np.ndarray:
        return self._data[: self._n, self._cols.index(name)]

    def window(self, i: int, j: int, s: int) -> np.ndarray:
        """Row indices of points with |di|, |dj| <= s."""
        d = self._data[: self._n]
        return np.nonzero((np.abs(d[:, 0] - i) <= s) & (np.abs(d[:, 1] - j) <= s))[0]


@dataclass
class MarchState:
    grid: GridSpec
    accepted: list = field(default_factory=list)
    narrow_band: NarrowBand = field(default_factory=NarrowBand)
    pile: list = field(default_factory=list)
    far_away: set = field(default_factory=set)
    grid_fn: np.ndarray = None
    latest: dict = field(default_factory=dict)
    store: PointStore = field(default_factory=PointStore)
    behind: dict = field(default_factory=dict)  # (i, j) -> orientation of the motion that left it behind
    initial_side: np.ndarray = None  # sign of the initial level-set function per cell

    def __post_init__(self):
        if self.grid_fn is None:
            self.grid_fn = np.full((self.grid.n, self.grid.n), INF)
        if not self.far_away and not self.accepted:
            n = self.grid.n
            self.far_away = {(i, j) for i in range(n) for j in range(n)}

    def current(self, i: int, j: int) -> SurfacePoint | None:
        """The accepted point whose psi equals Grid(i, j), if any."""
        return self.latest.get((i, j))

    def traversals(self, i: int, j: int) -> list:
        return [p for p in self.accepted if p.i == i and p.j == j]

    def accept(self, p: SurfacePoint) -> None:
        """File ``p`` as accepted (used for points that bypass the band)."""
        grid_set(self, p.i, p.j, p.psi)
        self.latest[(p.i, p.j)] = p
        self.accepted.append(p)
        self.store.append(p)
        self.far_away.discard((p.i, p.j))


def grid_set(state: MarchState, i: int, j: int, psi: float) -> None:
    """Record ``psi`` as the latest arrival at (i, j); earlier values live on in ``accepted``."""
    state.grid_fn[i, j] = psi


def nb_extract_min(state: MarchState) -> SurfacePoint:
    """Pop the band minimum and file it as accepted."""
    p = state.narrow_band.pop()
    state.accept(p)
    return p
