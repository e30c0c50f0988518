"""Example geometries: flat circle/torus/interval, a sphere point cloud and the
sub-Riemannian sphere with sub-Laplacian Y1^2 + Y2^2."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .dirichlet import DirichletOperator
from .mms import DENSE_CAP, MetricMeasureSpace
from .spectral import CapabilityError

KINDS = ("circle", "torus2", "interval", "sphere_mesh", "sr_sphere")


class ConstructionError(ValueError):
    pass


@dataclass
class InstanceSpec:
    kind: str
    n: int = 256
    nx: int = 64
    ny: int = 64
    circumference: float = 2 * np.pi
    cx: float = 2 * np.pi
    cy: float = 2 * np.pi
    length: float = 1.0
    l_max: int = 2
    edge_radius: float = 0.6
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}; expected one of {KINDS}")

    @property
    def point_count(self) -> int:
        return self.nx * self.ny if self.kind == "torus2" else self.n


@dataclass
class Instance:
    space: MetricMeasureSpace
    operator: DirichletOperator
    oracle: Optional["AnalyticSpectrum"] = None


class AnalyticSpectrum:
    """Exact continuum spectrum of an instance: sorted eigenvalues and N_omega."""

    def eigenvalues(self, count: int) -> np.ndarray:
        raise NotImplementedError

    def counting(self, omega: float) -> int:
        raise NotImplementedError


@dataclass
class CircleSpectrum(AnalyticSpectrum):
    circumference: float = 2 * np.pi

    def eigenvalues(self, count):
        k = np.arange(count)
        freq = (k + 1) // 2
        return (2 * np.pi * freq / self.circumference) ** 2

    def counting(self, omega):
        if omega < 0:
            return 0
        kmax = int(np.floor(self.circumference * np.sqrt(omega) / (2 * np.pi) + 1e-12))
        return 2 * kmax + 1


@dataclass
class IntervalSpectrum(AnalyticSpectrum):
    length: float = 1.0

    def eigenvalues(self, count):
        return (np.pi * np.arange(count) / self.length) ** 2

    def counting(self, omega):
        if omega < 0:
            return 0
        return int(np.floor(self.length * np.sqrt(omega) / np.pi + 1e-12)) + 1


@dataclass
class TorusSpectrum(AnalyticSpectrum):
    cx: float = 2 * np.pi
    cy: float = 2 * np.pi

    def _values(self, omega):
        kx = int(np.floor(self.cx * np.sqrt(max(omega, 0)) / (2 * np.pi))) + 1
        ky = int(np.floor(self.cy * np.sqrt(max(omega, 0)) / (2 * np.pi))) + 1
        a, b = np.meshgrid(np.arange(-kx, kx + 1), np.arange(-ky, ky + 1), indexing="ij")
        return ((2 * np.pi * a / self.cx) ** 2 + (2 * np.pi * b / self.cy) ** 2).ravel()

    def eigenvalues(self, count):
        omega = 1.0
        while self.counting(omega) < count:
            omega *= 2
        return np.sort(self._values(omega))[:count]

    def counting(self, omega):
        if omega < 0:
            return 0
        return int(np.sum(self._values(omega) <= omega * (1 + 1e-12)))


@dataclass
class SubRiemannianSphereSpectrum(AnalyticSpectrum):
    """Eigenvalues l(l+1) - m^2 of the sub-Laplacian (with multiplicity)."""

    l_max: int = 2

    def listed(self) -> np.ndarray:
        """All eigenvalues with l <= l_max, sorted."""
        return np.sort(np.array([l * (l + 1) - m * m for l in range(self.l_max + 1)
                                 for m in range(-l, l + 1)], dtype=float))

    def eigenvalues(self, count):
        omega = 1.0
        while self.counting(omega) < count:
            omega *= 2
        return self._all_below(omega)[:count]

    def _all_below(self, omega):
        # l(l+1) - m^2 >= l, so l <= omega suffices
        lmax = int(np.floor(max(omega, 0)))
        vals = [l * (l + 1) - m * m for l in range(lmax + 1) for m in range(-l, l + 1)]
        vals = np.sort(np.array(vals, dtype=float))
        return vals[vals <= omega]

    def counting(self, omega):
        if omega < 0:
            return 0
        return int(self._all_below(omega).size)


def _check_cap(n):
    if n > DENSE_CAP:
        raise CapabilityError(f"{n} points exceed the dense cap {DENSE_CAP}")


def make_circle(n: int, circumference: float = 2 * np.pi) -> Instance:
    """Equispaced circle, geodesic metric, nearest-neighbour weights 1/h."""
    if n < 8:
        raise ValueError("circle needs n >= 8")
    _check_cap(n)
    h = circumference / n
    pos = np.arange(n) * h
    k = np.arange(n)
    steps = np.abs(k[:, None] - k[None, :])
    dist = np.minimum(steps, n - steps) * h
    space = MetricMeasureSpace(measure=np.full(n, h), matrix=dist, label=f"circle n={n}",
                               coordinates=pos, metric="circle_geodesic",
                               extras={"circumference": circumference})
    i = np.arange(n)
    w = sp.coo_matrix((np.full(n, 1.0 / h), (i, (i + 1) % n)), shape=(n, n))
    return Instance(space, DirichletOperator(space, (w + w.T).tocsr()), CircleSpectrum(circumference))


def make_interval(n: int, length: float = 1.0) -> Instance:
    """Cell-centred interval with Neumann path-graph weights."""
    if n < 2:
        raise ValueError("interval needs n >= 2")
    _check_cap(n)
    h = length / n
    pos = (np.arange(n) + 0.5) * h
    dist = np.abs(pos[:, None] - pos[None, :])
    space = MetricMeasureSpace(measure=np.full(n, h), matrix=dist, label=f"interval n={n}",
                               coordinates=pos[:, None], metric="euclidean")
    i = np.arange(n - 1)
    w = sp.coo_matrix((np.full(n - 1, 1.0 / h), (i, i + 1)), shape=(n, n))
    return Instance(space, DirichletOperator(space, (w + w.T).tocsr()), IntervalSpectrum(length))


def make_torus2(nx: int, ny: int, cx: float = 2 * np.pi, cy: float = 2 * np.pi) -> Instance:
    """Product grid on a flat torus with the 5-point Laplacian."""
    _check_cap(nx * ny)
    hx, hy = cx / nx, cy / ny
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    sx = np.abs(ix[:, None] - ix[None, :])
    sx = np.minimum(sx, nx - sx) * hx
    sy = np.abs(iy[:, None] - iy[None, :])
    sy = np.minimum(sy, ny - sy) * hy
    dist = np.sqrt(sx ** 2 + sy ** 2)
    del sx, sy
    n = nx * ny
    space = MetricMeasureSpace(measure=np.full(n, hx * hy), matrix=dist, label=f"torus {nx}x{ny}",
                               coordinates=np.column_stack([ix * hx, iy * hy]), metric=None,
                               extras={"cx": cx, "cy": cy})
    idx = np.arange(n).reshape(nx, ny)
    right = np.roll(idx, -1, axis=0).ravel()
    up = np.roll(idx, -1, axis=1).ravel()
    src = idx.ravel()
    w = sp.coo_matrix((np.concatenate([np.full(n, hy / hx), np.full(n, hx / hy)]),
                       (np.concatenate([src, src]), np.concatenate([right, up]))), shape=(n, n))
    return Instance(space, DirichletOperator(space, (w + w.T).tocsr()), TorusSpectrum(cx, cy))


def spiral_points(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (1 + np.sqrt(5.0)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def make_sphere_mesh(n: int, seed: Optional[int] = None, bandwidth: float = 0.05) -> Instance:
    """Spiral sample of S^2 with a Gaussian-kernel graph Laplacian.

    ``w_ij = mu_i mu_j exp(-d^2 / (4 eps)) / (4 pi eps^2)`` with
    ``eps = bandwidth * n^{-1/4}``, which converges to the Laplace-Beltrami
    operator.  A seed applies a random rotation plus a small jitter.
    """
    _check_cap(n)
    pts = spiral_points(n)
    if seed is not None:
        rng = np.random.default_rng(seed)
        pts = pts @ _random_rotation(rng).T
        pts = pts + 0.1 * np.sqrt(4 * np.pi / n) * rng.standard_normal(pts.shape)
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    eps = bandwidth * n ** -0.25
    mu = np.full(n, 4 * np.pi / n)
    space = MetricMeasureSpace.from_coordinates(pts, "sphere_geodesic", mu, label=f"sphere n={n}")
    d = space.dense()
    cut = d < 8 * np.sqrt(eps)
    w = np.where(cut, mu[:, None] * mu[None, :] * np.exp(-d ** 2 / (4 * eps)) / (4 * np.pi * eps ** 2), 0.0)
    np.fill_diagonal(w, 0.0)
    w = sp.csr_matrix(w)
    if connected_components(w, directed=False)[0] > 1:
        raise ConstructionError(f"kernel graph is disconnected at eps = {eps:.4g}; increase bandwidth")
    space.extras["eps"] = eps
    return Instance(space, DirichletOperator(space, w))


@dataclass
class LatLonGrid:
    n_theta: int
    n_phi: int
    theta: np.ndarray
    phi: np.ndarray
    points: np.ndarray
    measure: np.ndarray

    @property
    def d_theta(self):
        return np.pi / self.n_theta

    @property
    def d_phi(self):
        return 2 * np.pi / self.n_phi


def latlon_grid(n: int) -> LatLonGrid:
    """Cell-centred grid with an odd number of rings (one ring on the equator)."""
    base = int(round(np.sqrt(n / 2)))
    odd = [k for k in (base - 1, base, base + 1) if k % 2 == 1 and k >= 3 and 2 * k * k <= DENSE_CAP]
    if not odd:
        raise ConstructionError(f"cannot fit an odd-ring lat-lon grid near {n} points")
    nt = min(odd, key=lambda k: abs(2 * k * k - n))
    npf = 2 * nt
    dt, dp = np.pi / nt, 2 * np.pi / npf
    th = (np.arange(nt) + 0.5) * dt
    ph = np.arange(npf) * dp
    T, P = np.meshgrid(th, ph, indexing="ij")
    pts = np.column_stack([(np.sin(T) * np.cos(P)).ravel(), (np.sin(T) * np.sin(P)).ravel(),
                           np.cos(T).ravel()])
    area = dp * (np.cos(th - dt / 2) - np.cos(th + dt / 2))
    mu = np.repeat(area, npf)
    return LatLonGrid(nt, npf, T.ravel(), P.ravel(), pts, mu)


@dataclass
class HorizontalDifferences:
    """Y1, Y2 as edge-valued first-order difference operators with edge measure."""

    Y1: sp.csr_matrix
    Y2: sp.csr_matrix
    edge_measure: np.ndarray

    def energy_matrix(self) -> sp.csr_matrix:
        m = sp.diags(self.edge_measure)
        return (self.Y1.T @ m @ self.Y1 + self.Y2.T @ m @ self.Y2).tocsr()

    def gamma_integral(self, f) -> float:
        """``sum_e m_e ((Y1 f)_e^2 + (Y2 f)_e^2)``."""
        a, b = self.Y1 @ f, self.Y2 @ f
        return float(np.sum(self.edge_measure * (a * a + b * b)))


def horizontal_differences(grid: LatLonGrid) -> HorizontalDifferences:
    """Edge form of Y1 = -sin(phi) d_theta - cot(theta) cos(phi) d_phi and
    Y2 = -cos(phi) d_theta + cot(theta) sin(phi) d_phi.

    Each edge carries the component of Y_k along that edge: theta-edges the
    d_theta coefficient, phi-edges the d_phi coefficient.  Cross terms cancel
    in Y1^2 + Y2^2, so nothing is lost.  Edges whose coefficient vanishes
    (phi-edges on the equator) are absent: no regularization is added.
    """
    nt, npf = grid.n_theta, grid.n_phi
    dt, dp = grid.d_theta, grid.d_phi
    idx = np.arange(nt * npf).reshape(nt, npf)
    th = (np.arange(nt) + 0.5) * dt
    ph = np.arange(npf) * dp
    rows, cols, vals1, vals2, meas = [], [], [], [], []
    e = 0
    # theta-edges between rings a and a+1, at the same phi
    for a in range(nt - 1):
        tm = th[a] + dt / 2
        for b in range(npf):
            i, j = idx[a, b], idx[a + 1, b]
            rows += [e, e]
            cols += [i, j]
            c1, c2 = -np.sin(ph[b]), -np.cos(ph[b])
            vals1 += [-c1 / dt, c1 / dt]
            vals2 += [-c2 / dt, c2 / dt]
            meas.append(np.sin(tm) * dt * dp)
            e += 1
    # phi-edges within ring a
    for a in range(nt):
        cot = np.cos(th[a]) / np.sin(th[a])
        if abs(cot) < 1e-12:
            continue
        for b in range(npf):
            i, j = idx[a, b], idx[a, (b + 1) % npf]
            pm = ph[b] + dp / 2
            c1, c2 = -cot * np.cos(pm), cot * np.sin(pm)
            rows += [e, e]
            cols += [i, j]
            vals1 += [-c1 / dp, c1 / dp]
            vals2 += [-c2 / dp, c2 / dp]
            meas.append(np.sin(th[a]) * dt * dp)
            e += 1
    shape = (e, nt * npf)
    y1 = sp.csr_matrix((vals1, (rows, cols)), shape=shape)
    y2 = sp.csr_matrix((vals2, (rows, cols)), shape=shape)
    return HorizontalDifferences(y1, y2, np.asarray(meas))


def make_sr_sphere(n: int, l_max: int = 2, seed: Optional[int] = None,
                   edge_radius: float = 0.6) -> Instance:
    """Sub-Riemannian sphere on a lat-lon grid with the ball-box quasi-metric.

    The operator is ``M^{-1} (Y1^T M_e Y1 + Y2^T M_e Y2)``; the analytic
    oracle lists l(l+1) - m^2.  ``seed`` is accepted for interface symmetry;
    the grid is deterministic.
    """
    if l_max > 40:
        raise ValueError("l_max must be <= 40")
    grid = latlon_grid(n)
    m = grid.n_theta * grid.n_phi
    _check_cap(m)
    if grid.n_theta < 5:
        raise ConstructionError("sample too sparse for horizontal connectivity near the equator")
    space = MetricMeasureSpace.from_coordinates(grid.points, "cc_ball_box", grid.measure,
                                                label=f"sr_sphere {grid.n_theta}x{grid.n_phi}",
                                                edge_radius=edge_radius)
    hd = horizontal_differences(grid)
    energy = hd.energy_matrix()
    w = -energy
    w.setdiag(0.0)
    w.eliminate_zeros()
    w.data = np.where(np.abs(w.data) < 1e-14 * np.abs(w.data).max(), 0.0, w.data)
    w.eliminate_zeros()
    op = DirichletOperator(space, w.tocsr())
    if not op.is_connected():
        raise ConstructionError("horizontal graph is disconnected")
    space.extras.update(grid=grid, horizontal=hd)
    return Instance(space, op, SubRiemannianSphereSpectrum(l_max))


def pole_and_equator(space: MetricMeasureSpace) -> tuple[int, int]:
    pts = space.coordinates
    pole = int(np.argmax(pts[:, 2]))
    eq = int(np.argmax(pts[:, 0] - 10 * np.abs(pts[:, 2])))
    return pole, eq


def cc_volume_exponent(space: MetricMeasureSpace, center: int, eps_grid) -> float:
    """Slope of log |B(center, eps)| against log eps."""
    row = space.row(center)
    eps = np.asarray(eps_grid, dtype=float)
    vol = np.array([space.measure[row < e].sum() for e in eps])
    return float(np.polyfit(np.log(eps), np.log(vol), 1)[0])


@dataclass
class SandwichReport:
    a: float
    b: float
    pairs: int
    quasi_triangle_K: float

    @property
    def holds(self) -> bool:
        return self.a > 0 and np.isfinite(self.b) and self.quasi_triangle_K <= 2.0


def metric_sandwich(space: MetricMeasureSpace, pairs: int = 1000, seed: int = 0,
                    max_dist: float = 1.0) -> SandwichReport:
    """Constants with ``a dist <= pi <= b dist^{1/2}`` over sampled pairs.

    ``dist`` is the great-circle distance; pairs are restricted to
    ``dist <= max_dist`` (the comparison is local).
    """
    pts = space.coordinates
    rng = np.random.default_rng(seed)
    got, a, b = 0, np.inf, 0.0
    while got < pairs:
        i = rng.integers(0, space.n, 4 * pairs)
        j = rng.integers(0, space.n, 4 * pairs)
        geo = np.arccos(np.clip(np.sum(pts[i] * pts[j], axis=1), -1, 1))
        keep = (i != j) & (geo <= max_dist)
        i, j, geo = i[keep][:pairs - got], j[keep][:pairs - got], geo[keep][:pairs - got]
        cc = space.rows(i)[np.arange(i.size), j]
        a = min(a, float(np.min(cc / geo)))
        b = max(b, float(np.max(cc / np.sqrt(geo))))
        got += i.size
    x, y, z = rng.integers(0, space.n, (3, pairs))
    d = space.dense()
    den = d[x, y] + d[y, z]
    ok = den > 0
    K = float(np.max(d[x, z][ok] / den[ok])) if ok.any() else 0.0
    return SandwichReport(a=a, b=b, pairs=pairs, quasi_triangle_K=K)


def build(spec: InstanceSpec) -> Instance:
    if spec.kind == "circle":
        return make_circle(spec.n, spec.circumference)
    if spec.kind == "torus2":
        return make_torus2(spec.nx, spec.ny, spec.cx, spec.cy)
    if spec.kind == "interval":
        return make_interval(spec.n, spec.length)
    if spec.kind == "sphere_mesh":
        return make_sphere_mesh(spec.n, spec.seed, **spec.params)
    return make_sr_sphere(spec.n, spec.l_max, spec.seed, spec.edge_radius)


__all__ = [
    "InstanceSpec", "Instance", "build", "make_circle", "make_interval", "make_torus2",
    "make_sphere_mesh", "make_sr_sphere", "latlon_grid", "horizontal_differences",
    "cc_volume_exponent", "metric_sandwich", "pole_and_equator",
    "CircleSpectrum", "TorusSpectrum", "IntervalSpectrum", "SubRiemannianSphereSpectrum",
]
