"""Measure-symmetric graph operators, carre du champ and local Poincare constants."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .mms import Ball, MetricMeasureSpace, ball


@dataclass(frozen=True, eq=False)
class DirichletOperator:
    """``(Lf)_i = (1/mu_i) sum_j w_ij (f_i - f_j)`` on a metric measure space."""

    space: MetricMeasureSpace
    weights: sp.csr_matrix

    def __post_init__(self):
        w = sp.csr_matrix(self.weights, dtype=float)
        n = self.space.n
        if w.shape != (n, n):
            raise ValueError(f"weight matrix shape {w.shape} does not match {n} points")
        w = w - sp.diags(w.diagonal())
        w.eliminate_zeros()
        if w.nnz and w.data.min() < 0:
            raise ValueError("edge weights must be non-negative")
        if abs(w - w.T).max() > 1e-12 * max(1.0, abs(w).max()):
            raise ValueError("edge weights must be symmetric")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_degree", np.asarray(w.sum(axis=1)).ravel())

    @property
    def mu(self) -> np.ndarray:
        return self.space.measure

    @property
    def n(self) -> int:
        return self.space.n

    def apply(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        return (self._degree[:, None] * f.reshape(self.n, -1)
                - self.weights @ f.reshape(self.n, -1)).reshape(f.shape) / (
            self.mu if f.ndim == 1 else self.mu[:, None])

    __call__ = apply

    def laplacian(self) -> sp.csr_matrix:
        """Unnormalized ``diag(deg) - W`` (so that ``L = M^{-1} laplacian``)."""
        return (sp.diags(self._degree) - self.weights).tocsr()

    def symmetrized(self) -> np.ndarray:
        """Dense ``M^{1/2} L M^{-1/2}``, symmetric in the Euclidean sense."""
        s = 1.0 / np.sqrt(self.mu)
        a = self.laplacian().toarray()
        return s[:, None] * a * s[None, :]

    def inner(self, f, g) -> float:
        return float(np.sum(np.asarray(f) * np.asarray(g) * self.mu))

    def energy(self, f) -> float:
        """``<Lf, f>_mu = 1/2 sum w_ij (f_i - f_j)^2``."""
        w = self.weights.tocoo()
        f = np.asarray(f, dtype=float)
        return 0.5 * float(np.sum(w.data * (f[w.row] - f[w.col]) ** 2))

    def is_connected(self) -> bool:
        return connected_components(self.weights, directed=False)[0] == 1

    def triples(self):
        w = sp.triu(self.weights).tocoo()
        return w.row, w.col, w.data


def gamma(op: DirichletOperator, f, g) -> np.ndarray:
    """Pointwise ``1/2 (f Lg + g Lf - L(fg))`` (L is the non-negative generator)."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (op.n,) or g.shape != (op.n,):
        raise ValueError(f"functions must have shape ({op.n},), got {f.shape} and {g.shape}")
    return 0.5 * (f * op.apply(g) + g * op.apply(f) - op.apply(f * g))


def gamma_edges(op: DirichletOperator, f, g) -> np.ndarray:
    """Edge-sum form ``(1/(2 mu_i)) sum_j w_ij (f_i - f_j)(g_i - g_j)``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (op.n,) or g.shape != (op.n,):
        raise ValueError(f"functions must have shape ({op.n},), got {f.shape} and {g.shape}")
    w = op.weights.tocoo()
    prod = w.data * (f[w.row] - f[w.col]) * (g[w.row] - g[w.col])
    return 0.5 * np.bincount(w.row, weights=prod, minlength=op.n) / op.mu


def check_symmetry(op: DirichletOperator, trials: int = 10, seed: int = 0) -> dict:
    """Largest relative defects of mu-symmetry, positivity and constant annihilation."""
    rng = np.random.default_rng(seed)
    sym = pos = 0.0
    for _ in range(trials):
        f, g = rng.standard_normal((2, op.n))
        lf, lg = op.apply(f), op.apply(g)
        scale = np.sqrt(op.inner(lf, lf) * op.inner(g, g)) + 1e-300
        sym = max(sym, abs(op.inner(lf, g) - op.inner(f, lg)) / scale)
        pos = max(pos, max(0.0, -op.inner(lf, f)) / (abs(op.inner(lf, f)) + 1e-300))
    const = float(np.abs(op.apply(np.ones(op.n))).max() / (np.abs(op._degree / op.mu).max() + 1e-300))
    return {"symmetry": sym, "negativity": pos, "constants": const}


def check_gradient_bound(op: DirichletOperator, trials: int = 100, seed: int = 0) -> float:
    """Max over random mean-free f of ``int Gamma(f,f) dmu / <Lf, f>_mu``."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        f = rng.standard_normal(op.n)
        f -= np.sum(f * op.mu) / op.space.total_measure
        den = op.inner(op.apply(f), f)
        if den <= 1e-14 * op.inner(f, f):
            continue
        num = float(np.sum(gamma_edges(op, f, f) * op.mu))
        worst = max(worst, num / den)
    return float(worst)


def gradient_ratio(op: DirichletOperator, f) -> float:
    f = np.asarray(f, dtype=float)
    return float(np.sum(gamma_edges(op, f, f) * op.mu)) / op.inner(op.apply(f), f)


def neumann_gap(op: DirichletOperator, members) -> float:
    """Second eigenvalue of the form restricted to ``members``; 0 if that subgraph is disconnected."""
    idx = np.asarray(members, dtype=int)
    if idx.size < 2:
        return np.nan
    w = op.weights[idx][:, idx]
    if w.nnz == 0 or connected_components(w, directed=False)[0] > 1:
        return 0.0
    deg = np.asarray(w.sum(axis=1)).ravel()
    a = np.diag(deg) - w.toarray()
    m = op.mu[idx]
    s = 1.0 / np.sqrt(m)
    vals = la.eigvalsh(s[:, None] * a * s[None, :], subset_by_index=[0, 1])
    return float(vals[1])


def poincare_constant(op: DirichletOperator, ball_: Ball, rho: float | None = None) -> float:
    """``1 / (rho^2 lambda_1)`` for the Neumann form on the ball; inf if it is disconnected."""
    rho = ball_.radius if rho is None else rho
    if ball_.members.size < 2:
        raise ValueError("ball needs at least two members")
    gap = neumann_gap(op, ball_.members)
    if not gap > 0:
        return np.inf
    return 1.0 / (rho ** 2 * gap)


@dataclass
class PoincareProfile:
    rho: float
    constants: dict = field(default_factory=dict)
    sup_constant: float = np.nan
    disconnected: list = field(default_factory=list)


def poincare_profile(op: DirichletOperator, rho: float, centers=None) -> PoincareProfile:
    """Poincare constants for balls of radius ``rho`` around ``centers`` (default: all)."""
    centers = range(op.n) if centers is None else centers
    prof = PoincareProfile(rho=float(rho))
    for c in centers:
        b = ball(op.space, int(c), rho)
        if b.members.size < 2:
            continue
        val = poincare_constant(op, b, rho)
        if np.isinf(val):
            prof.disconnected.append(int(c))
        else:
            prof.constants[int(c)] = val
    finite = list(prof.constants.values())
    prof.sup_constant = max(finite) if finite else np.nan
    return prof
