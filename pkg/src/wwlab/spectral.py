"""Eigendecomposition, counting function, Paley-Wiener spaces and frame bounds.

Conventions: eigenvalues are those of L; E_omega is spanned by modes with
eigenvalue <= omega; Bernstein uses ||L^{k/2} f|| <= omega^{k/2} ||f||.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy import stats

from .dirichlet import DirichletOperator
from .lattice import Lattice
from .mms import DENSE_CAP


class CapabilityError(RuntimeError):
    """The requested computation is outside what this build supports."""


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray      # columns are mu-orthonormal
    measure: np.ndarray
    residual_tol: float

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def coefficients(self, f) -> np.ndarray:
        """``<f, psi_l>_mu`` for every mode (f may be (n,) or (n, k))."""
        f = np.asarray(f, dtype=float)
        w = f * (self.measure if f.ndim == 1 else self.measure[:, None])
        return self.eigenvectors.T @ w

    def synthesize(self, c) -> np.ndarray:
        return self.eigenvectors @ c


def operator_hash(op: DirichletOperator) -> str:
    h = hashlib.sha256()
    w = sp.triu(op.weights).tocoo()
    order = np.lexsort((w.col, w.row))
    for arr in (op.mu, w.row[order].astype(np.int64), w.col[order].astype(np.int64), w.data[order]):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()[:16]


def decompose(op: DirichletOperator, cap: int = DENSE_CAP, validate: bool = True) -> SpectralDecomposition:
    """Full spectrum of L through the symmetric matrix M^{1/2} L M^{-1/2}."""
    if op.n > cap:
        raise CapabilityError(f"{op.n} points exceed the dense eigensolver cap {cap}; use a coarser instance")
    vals, vecs = la.eigh(op.symmetrized())
    psi = vecs / np.sqrt(op.mu)[:, None]
    tol = 1e-10 * (1.0 + float(vals.max()))
    if vals[0] < -tol:
        raise ArithmeticError(f"negative eigenvalue {vals[0]} below tolerance {tol}")
    vals = np.where(np.abs(vals) <= tol, 0.0, vals)
    vals = np.maximum(vals, 0.0)
    dec = SpectralDecomposition(vals, psi, op.mu.copy(), tol)
    if validate:
        _validate(op, dec)
    return dec


def _validate(op, dec, probe: int = 64):
    idx = np.unique(np.linspace(0, dec.n - 1, min(probe, dec.n)).astype(int))
    psi = dec.eigenvectors[:, idx]
    res = op.apply(psi) - psi * dec.eigenvalues[idx]
    rn = np.sqrt((res ** 2 * op.mu[:, None]).sum(axis=0))
    bad = rn > dec.residual_tol * (1 + dec.eigenvalues[idx]) * 1e3
    if np.any(bad):
        raise ArithmeticError(f"eigen-residual {rn.max():.3e} exceeds tolerance")
    gram = psi.T @ (psi * op.mu[:, None])
    if np.abs(gram - np.eye(idx.size)).max() > 1e-8:
        raise ArithmeticError("eigenvectors are not mu-orthonormal")


def from_eigenvalues(eigenvalues) -> SpectralDecomposition:
    """Eigenvalue-only decomposition (analytic oracles); eigenvectors are empty."""
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    return SpectralDecomposition(ev, np.empty((0, ev.size)), np.empty(0), 0.0)


def counting(dec, omega: float) -> int:
    """Number of eigenvalues <= omega, with multiplicity."""
    ev = dec.eigenvalues if hasattr(dec, "eigenvalues") else np.asarray(dec)
    return int(np.searchsorted(ev, omega, side="right"))


def counting_many(dec, omegas) -> np.ndarray:
    ev = dec.eigenvalues if hasattr(dec, "eigenvalues") else np.asarray(dec)
    return np.searchsorted(ev, np.asarray(omegas, dtype=float), side="right")


@dataclass(frozen=True)
class PaleyWienerSpace:
    omega: float
    member_indices: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.member_indices.size)


def pw_space(dec: SpectralDecomposition, omega: float) -> PaleyWienerSpace:
    return PaleyWienerSpace(float(omega), np.arange(counting(dec, omega)))


def pw_project(dec: SpectralDecomposition, omega: float, f) -> np.ndarray:
    k = counting(dec, omega)
    c = dec.coefficients(f)[:k]
    return dec.eigenvectors[:, :k] @ c


@dataclass
class BernsteinResult:
    max_ratio: float
    top_mode_ratio: float
    dimension: int


def bernstein_check(dec: SpectralDecomposition, omega: float, k: int = 1, trials: int = 200,
                    seed: int = 0, include_top: bool = True) -> BernsteinResult:
    """Max over random f in E_omega of ``||L^{k/2} f|| / (omega^{k/2} ||f||)``.

    Norms are evaluated in point space with the mu-weighted inner product.
    """
    dim = counting(dec, omega)
    if dim == 0:
        raise CapabilityError(f"E_omega is trivial at omega = {omega}")
    if k < 1:
        raise ValueError("k must be a positive integer")
    rng = np.random.default_rng(seed)
    lam = dec.eigenvalues[:dim]
    psi = dec.eigenvectors[:, :dim]
    coeffs = rng.standard_normal((dim, trials))
    if include_top:
        top = np.zeros((dim, 1))
        top[-1, 0] = 1.0
        coeffs = np.hstack([coeffs, top])
    f = psi @ coeffs
    lf = psi @ (lam[:, None] ** (k / 2) * coeffs)
    mu = dec.measure[:, None]
    ratio = np.sqrt((lf ** 2 * mu).sum(0)) / (omega ** (k / 2) * np.sqrt((f ** 2 * mu).sum(0)))
    return BernsteinResult(max_ratio=float(ratio.max()),
                           top_mode_ratio=float(ratio[-1]) if include_top else np.nan,
                           dimension=dim)


def sampling_matrix(dec: SpectralDecomposition, space, centers, rho: float, omega: float) -> np.ndarray:
    """Rows ``<psi_l, xi_j>_mu`` with ``xi_j = |B(x_j, rho)|^{-1/2} chi_{B(x_j, rho)}``."""
    k = counting(dec, omega)
    centers = np.asarray(centers, dtype=int)
    chi = space.rows(centers) < rho                 # (J, n)
    vol = chi @ dec.measure
    rows = chi * dec.measure[None, :] / np.sqrt(vol)[:, None]
    return rows @ dec.eigenvectors[:, :k]


def frame_bound(dec: SpectralDecomposition, omega: float, lattice: Lattice | None, space, *,
                centers=None, rho: float | None = None) -> tuple[float, float]:
    """Extreme eigenvalues of ``sum_j |<f, xi_j>|^2`` on the unit sphere of E_omega.

    Pass a lattice, or ``lattice=None`` with explicit ``centers`` and ``rho``
    (used to probe center sets that are not covers).
    """
    if lattice is not None:
        centers, rho = lattice.centers, lattice.rho
    if counting(dec, omega) == 0:
        raise CapabilityError(f"E_omega is trivial at omega = {omega}")
    s = sampling_matrix(dec, space, centers, rho, omega)
    ev = la.eigvalsh(s.T @ s)
    return float(max(ev[0], 0.0)), float(ev[-1])


@dataclass
class WeylFit:
    slope: float
    intercept: float
    r_squared: float


def weyl_fit(dec, omega_grid) -> WeylFit:
    """Least squares of log N_omega against log omega."""
    om = np.asarray(omega_grid, dtype=float)
    if hasattr(dec, "counting"):
        counts = np.array([dec.counting(w) for w in om], dtype=float)
    else:
        counts = counting_many(dec, om).astype(float)
    keep = (counts > 0) & (om > 0)
    om, counts = om[keep], counts[keep]
    if om.size < 2 or np.ptp(np.log(om)) == 0:
        raise ValueError("degenerate omega grid: need at least two distinct omegas with N > 0")
    fit = stats.linregress(np.log(om), np.log(counts))
    return WeylFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2))


def young_split_holds(a, b, alpha) -> np.ndarray:
    """``(1+alpha)^{-1} A^2 <= alpha^{-1} (A-B)^2 + B^2`` elementwise."""
    a, b, alpha = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, alpha)))
    lhs = a ** 2 / (1 + alpha)
    rhs = (a - b) ** 2 / alpha + b ** 2
    return lhs <= rhs * (1 + 1e-12) + 1e-300
