"""Finite metric measure spaces, open balls and doubling analysis."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

DENSE_CAP = 4096

METRIC_TAGS = ("euclidean", "circle_geodesic", "sphere_geodesic", "cc_ball_box")


class ValidationError(ValueError):
    """Raised when a space violates a metric or measure axiom."""


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """Point set with a metric and positive point masses.

    Distances are held as a dense symmetric matrix for ``n <= DENSE_CAP``;
    larger spaces supply ``row_fn`` returning one row of distances on demand.
    """

    measure: np.ndarray
    matrix: Optional[np.ndarray] = None
    row_fn: Optional[Callable[[int], np.ndarray]] = None
    label: str = ""
    coordinates: Optional[np.ndarray] = None
    metric: Optional[str] = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        mu = np.asarray(self.measure, dtype=float)
        object.__setattr__(self, "measure", mu)
        if mu.ndim != 1 or mu.size == 0:
            raise ValidationError("measure must be a non-empty 1-d array")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            bad = int(np.flatnonzero(~(mu > 0))[0]) if np.any(~(mu > 0)) else -1
            raise ValidationError(f"measure must be positive and finite (index {bad})")
        if self.matrix is None and self.row_fn is None:
            raise ValidationError("either a distance matrix or a row oracle is required")
        if self.matrix is not None:
            d = np.asarray(self.matrix, dtype=float)
            if d.shape != (mu.size, mu.size):
                raise ValidationError(f"distance matrix shape {d.shape} does not match {mu.size} points")
            object.__setattr__(self, "matrix", d)

    @property
    def point_count(self) -> int:
        return self.measure.size

    @property
    def n(self) -> int:
        return self.measure.size

    @property
    def total_measure(self) -> float:
        return float(self.measure.sum())

    def row(self, i: int) -> np.ndarray:
        self._check_index(i)
        if self.matrix is not None:
            return self.matrix[i]
        return np.asarray(self.row_fn(int(i)), dtype=float)

    def rows(self, idx) -> np.ndarray:
        idx = np.atleast_1d(np.asarray(idx, dtype=int))
        if self.matrix is not None:
            return self.matrix[idx]
        return np.vstack([self.row(i) for i in idx])

    def distance(self, i: int, j: int) -> float:
        self._check_index(j)
        return float(self.row(i)[j])

    def dense(self) -> np.ndarray:
        if self.matrix is None:
            raise MemoryError(f"{self.n} points exceed the dense cap of {DENSE_CAP}")
        return self.matrix

    @cached_property
    def diameter(self) -> float:
        if self.matrix is not None:
            return float(self.matrix.max())
        return float(max(self.row(i).max() for i in range(self.n)))

    @cached_property
    def min_positive_distance(self) -> float:
        if self.matrix is not None:
            d = self.matrix
            return float(d[d > 0].min()) if np.any(d > 0) else 0.0
        best = np.inf
        for i in range(self.n):
            r = self.row(i)
            r = r[r > 0]
            if r.size:
                best = min(best, r.min())
        return float(best) if np.isfinite(best) else 0.0

    @cached_property
    def resolution(self) -> float:
        """Largest nearest-neighbour distance (the sampling scale)."""
        if self.n == 1:
            return 0.0
        if self.matrix is not None:
            d = self.matrix + np.diag(np.full(self.n, np.inf))
            return float(d.min(axis=1).max())
        out = 0.0
        for i in range(self.n):
            r = self.row(i).copy()
            r[i] = np.inf
            out = max(out, r.min())
        return float(out)

    def _check_index(self, i):
        if not (0 <= int(i) < self.n):
            raise IndexError(f"point index {i} out of range for {self.n} points")

    @classmethod
    def from_matrix(cls, matrix, measure, label="", validate=True, **kw) -> "MetricMeasureSpace":
        space = cls(measure=measure, matrix=np.asarray(matrix, dtype=float), label=label, **kw)
        if validate:
            validate_space(space)
        return space

    @classmethod
    def from_coordinates(cls, coordinates, metric: str, measure, label="", **params) -> "MetricMeasureSpace":
        coords = np.asarray(coordinates, dtype=float)
        if metric not in METRIC_TAGS:
            raise ValidationError(f"unknown metric tag {metric!r}; expected one of {METRIC_TAGS}")
        if metric == "cc_ball_box":
            from .cc import cc_distance_matrix, cc_row_oracle

            if coords.shape[0] <= DENSE_CAP:
                mat, rowf = cc_distance_matrix(coords, **params), None
            else:
                mat, rowf = None, cc_row_oracle(coords, **params)
        else:
            fn = _metric_row(metric, coords, **params)
            if coords.shape[0] <= DENSE_CAP:
                mat = np.vstack([fn(i) for i in range(coords.shape[0])])
                np.fill_diagonal(mat, 0.0)
                mat = 0.5 * (mat + mat.T)
                rowf = None
            else:
                mat, rowf = None, fn
        return cls(measure=measure, matrix=mat, row_fn=rowf, label=label,
                   coordinates=coords, metric=metric, extras=dict(params))


def _metric_row(metric, coords, circumference=None, **_):
    if metric == "euclidean":
        pts = coords.reshape(coords.shape[0], -1)
        return lambda i: np.linalg.norm(pts - pts[i], axis=1)
    if metric == "circle_geodesic":
        if circumference is None:
            raise ValidationError("circle_geodesic needs a circumference")
        pos = coords.reshape(-1) % circumference

        def row(i):
            a = np.abs(pos - pos[i])
            return np.minimum(a, circumference - a)

        return row
    if metric == "sphere_geodesic":
        pts = coords / np.linalg.norm(coords, axis=1, keepdims=True)
        return lambda i: np.arccos(np.clip(pts @ pts[i], -1.0, 1.0))
    raise ValidationError(f"no row oracle for metric {metric!r}")


def validate_space(space: MetricMeasureSpace, triples: int = 100_000, full: bool = False,
                   seed: int = 0, atol: float = 1e-9) -> None:
    """Check zero diagonal, symmetry, non-negativity and the triangle inequality.

    Triangle inequality is tested on ``triples`` random triples unless ``full``.
    """
    d = space.dense()
    if np.any(~np.isfinite(d)):
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise ValidationError(f"non-finite distance at ({i}, {j})")
    if np.any(np.abs(np.diag(d)) > atol):
        i = int(np.argmax(np.abs(np.diag(d))))
        raise ValidationError(f"distance({i},{i}) = {d[i, i]} is not zero")
    asym = np.abs(d - d.T)
    if asym.max() > atol:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValidationError(f"asymmetric distance at ({i}, {j}): {d[i, j]} vs {d[j, i]}")
    if d.min() < -atol:
        i, j = np.unravel_index(np.argmin(d), d.shape)
        raise ValidationError(f"negative distance at ({i}, {j})")
    i, j, k = triangle_violation(space, triples=triples, full=full, seed=seed, atol=atol)
    if i >= 0:
        raise ValidationError(f"triangle inequality fails for ({i}, {j}, {k})")


def triangle_violation(space, triples=100_000, full=False, seed=0, atol=1e-9):
    """Return a violating triple (i, j, k) or (-1, -1, -1)."""
    d = space.dense()
    n = space.n
    if full:
        for j in range(n):
            # d(i,k) <= d(i,j) + d(j,k) for all i,k with this j
            bad = d > d[:, j][:, None] + d[j][None, :] + atol
            if bad.any():
                i, k = np.argwhere(bad)[0]
                return int(i), j, int(k)
        return -1, -1, -1
    rng = np.random.default_rng(seed)
    t = rng.integers(0, n, size=(triples, 3))
    lhs = d[t[:, 0], t[:, 2]]
    rhs = d[t[:, 0], t[:, 1]] + d[t[:, 1], t[:, 2]]
    bad = np.flatnonzero(lhs > rhs + atol)
    if bad.size:
        i, j, k = t[bad[0]]
        return int(i), int(j), int(k)
    return -1, -1, -1


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float
    members: np.ndarray
    volume: float


def ball(space: MetricMeasureSpace, center: int, radius: float) -> Ball:
    """Open ball ``{y : d(center, y) < radius}``."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    row = space.row(center)
    members = np.flatnonzero(row < radius)
    return Ball(int(center), float(radius), members, float(space.measure[members].sum()))


def ball_volumes(space: MetricMeasureSpace, radii, centers=None) -> np.ndarray:
    """Volumes ``|B(x, r)|`` as an array of shape (len(centers), len(radii))."""
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    idx = np.arange(space.n) if centers is None else np.atleast_1d(np.asarray(centers, dtype=int))
    out = np.empty((idx.size, radii.size))
    mu = space.measure
    for start in range(0, idx.size, 512):
        rows = space.rows(idx[start:start + 512])
        for k, r in enumerate(radii):
            out[start:start + rows.shape[0], k] = (rows < r) @ mu
    return out


def ball_volume_at(space, centers, radii) -> np.ndarray:
    """Elementwise ``|B(centers[i], radii[i])|``."""
    centers = np.asarray(centers, dtype=int)
    radii = np.broadcast_to(np.asarray(radii, dtype=float), centers.shape)
    rows = space.rows(centers)
    return ((rows < radii[:, None]) * space.measure[None, :]).sum(axis=1)


@dataclass(frozen=True)
class DoublingEstimate:
    D: float
    witness: tuple
    radius_grid: np.ndarray


def default_radius_grid(space: MetricMeasureSpace, count: int = 16) -> np.ndarray:
    lo = 2.0 * space.min_positive_distance
    hi = space.diameter / 2.0
    if not (0 < lo < hi):
        return np.array([max(hi, lo, 1.0)])
    return np.geomspace(lo, hi, count)


def doubling_estimate(space: MetricMeasureSpace, radius_grid: Optional[Sequence[float]] = None) -> DoublingEstimate:
    """Largest ``log2(|B(x,2r)| / |B(x,r)|)`` over all centers and grid radii."""
    if radius_grid is None:
        radius_grid = default_radius_grid(space)
    grid = np.asarray(radius_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("radius grid is empty")
    if np.any(grid <= 0):
        raise ValueError("radius grid must be positive")
    vol = ball_volumes(space, np.concatenate([grid, 2 * grid]))
    small, big = vol[:, :grid.size], vol[:, grid.size:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(small > 0, np.log2(big / small), -np.inf)
    x, k = np.unravel_index(np.argmax(ratio), ratio.shape)
    D = max(0.0, float(ratio[x, k]))
    return DoublingEstimate(D=D, witness=(int(x), float(grid[k])), radius_grid=grid)


@dataclass
class ComparisonReport:
    samples: int
    violations_1a: int
    violations_1b: int
    violations_reverse: int
    worst_slack_1a: float
    worst_slack_1b: float
    worst_slack_reverse: float

    @property
    def violations(self) -> int:
        return self.violations_1a + self.violations_1b + self.violations_reverse


def check_ball_comparisons(space: MetricMeasureSpace, D: float, samples: int = 10_000,
                           radius_range=None, seed: int = 0, rtol: float = 1e-12) -> ComparisonReport:
    """Sample the three ball comparison inequalities implied by doubling.

    Slack is ``rhs / lhs``; values below 1 are violations. Radii are drawn
    log-uniformly from ``radius_range`` (default: the doubling grid range).
    """
    rng = np.random.default_rng(seed)
    if radius_range is None:
        g = default_radius_grid(space)
        radius_range = (g[0], g[-1])
    lo, hi = radius_range
    n = space.n
    x = rng.integers(0, n, samples)
    y = rng.integers(0, n, samples)
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), samples))
    rho = np.exp(rng.uniform(0.0, np.log(max(2.0, 2 * space.diameter / lo)), samples))
    rho = np.maximum(rho, 1.0 + 1e-9)

    # (1a): |B(x, rho r)| <= (2 rho)^D |B(x, r)|
    lhs = ball_volume_at(space, x, rho * r)
    rhs = (2 * rho) ** D * ball_volume_at(space, x, r)
    s1a = rhs / lhs
    # (1b): |B(x, r)| <= 2^D (1 + d(x,y)/r)^D |B(y, r)|
    dxy = space.rows(x)[np.arange(samples), y]
    lhs = ball_volume_at(space, x, r)
    rhs = 2 ** D * (1 + dxy / r) ** D * ball_volume_at(space, y, r)
    s1b = rhs / lhs
    # reverse: d(x,y) <= 2 rho  =>  |B(x, rho/2)| >= 10^-D |B(y, rho/2)|, rho here a radius
    rad = r
    hyp = dxy <= 2 * rad
    bx = ball_volume_at(space, x, rad / 2)
    by = ball_volume_at(space, y, rad / 2)
    srev = np.where(hyp, bx / (10.0 ** (-D) * by), np.inf)

    def _count(s):
        return int(np.sum(s < 1 - rtol))

    return ComparisonReport(
        samples=samples,
        violations_1a=_count(s1a), violations_1b=_count(s1b), violations_reverse=_count(srev),
        worst_slack_1a=float(s1a.min()), worst_slack_1b=float(s1b.min()),
        worst_slack_reverse=float(srev.min()),
    )
