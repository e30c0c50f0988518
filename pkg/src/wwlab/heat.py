"""Heat kernels, spectral kernels K^F_t, Gaussian envelopes and spectral-function bounds.

Spectral sums indexed by a frequency s compare s against sqrt(eigenvalue of L).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .mms import MetricMeasureSpace, ball_volumes
from .spectral import SpectralDecomposition


def _sqrt_spec(dec):
    return np.sqrt(np.maximum(dec.eigenvalues, 0.0))


def heat_kernel(dec: SpectralDecomposition, t: float, rows=None) -> np.ndarray:
    """``P_t(x, y) = sum_l exp(-t lambda_l) psi_l(x) psi_l(y)`` (optionally only some rows)."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    psi = dec.eigenvectors
    left = psi if rows is None else psi[np.asarray(rows, dtype=int)]
    return (left * np.exp(-t * dec.eigenvalues)) @ psi.T


def heat_diagonal(dec: SpectralDecomposition, t: float) -> np.ndarray:
    return (dec.eigenvectors ** 2) @ np.exp(-t * dec.eigenvalues)


def apply_kernel(kernel: np.ndarray, f, measure) -> np.ndarray:
    """``x -> sum_y K(x, y) f(y) mu_y``."""
    return kernel @ (np.asarray(f) * measure)


def kernel_of(dec: SpectralDecomposition, F, t: float) -> np.ndarray:
    """``K^F_t(x, y) = sum_l F(t sqrt(lambda_l)) psi_l(x) psi_l(y)``."""
    weights = np.asarray(F(t * _sqrt_spec(dec)), dtype=float)
    weights = np.broadcast_to(weights, dec.eigenvalues.shape)
    return (dec.eigenvectors * weights) @ dec.eigenvectors.T


def kernel_diagonal(dec: SpectralDecomposition, F, t: float) -> np.ndarray:
    weights = np.broadcast_to(np.asarray(F(t * _sqrt_spec(dec)), dtype=float), dec.eigenvalues.shape)
    return (dec.eigenvectors ** 2) @ weights


def spectral_function(dec: SpectralDecomposition, s: float) -> np.ndarray:
    """``Phi_s(x) = sum_{sqrt(lambda_l) <= s} psi_l(x)^2``."""
    if not s > 0:
        raise ValueError("s must be positive")
    k = int(np.searchsorted(dec.eigenvalues, s * s, side="right"))
    return (dec.eigenvectors[:, :k] ** 2).sum(axis=1)


class FitError(RuntimeError):
    pass


@dataclass
class GaussianFit:
    C1: float
    C2: float
    c1: float
    c2: float
    t_window: tuple
    d2t_cap: float
    residual_r2: float
    ls_rate: float = np.nan
    diag_low: float = np.nan
    diag_high: float = np.nan
    excluded: int = 0
    retained: int = 0
    samples: dict = field(default_factory=dict, repr=False)

    @property
    def exclusion_rate(self) -> float:
        total = self.excluded + self.retained
        return self.excluded / total if total else 0.0

    @property
    def diag_ratio(self) -> float:
        return self.diag_high / self.diag_low

    def holds(self) -> bool:
        """Two-sided bound on every retained sample."""
        u = self.samples["d2t"]
        g = self.samples["G"]
        lo = self.C1 * np.exp(-self.c1 * u)
        hi = self.C2 * np.exp(-self.c2 * u)
        return bool(np.all(lo <= g * (1 + 1e-9)) and np.all(g <= hi * (1 + 1e-9)))


def support_line(u, y, upper: bool):
    """Tightest line ``a - c u`` above (or below) all points, minimizing the mean gap."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    ubar = u.mean()
    sign = 1.0 if upper else -1.0
    # variables (a, c): objective sign*(a - c ubar); constraint sign*(a - c u_i) >= sign*y_i
    res = optimize.linprog(
        c=[sign, -sign * ubar],
        A_ub=np.column_stack([-sign * np.ones_like(u), sign * u]),
        b_ub=-sign * y,
        bounds=[(None, None), (None, None)],
        method="highs",
    )
    if not res.success:
        raise FitError(f"support line LP failed: {res.message}")
    a, c = res.x
    # exact support intercept for the LP slope (removes solver tolerance)
    gap = y + c * u
    a = gap.max() if upper else gap.min()
    return float(a), float(c)


def gaussian_fit(dec: SpectralDecomposition, space: MetricMeasureSpace, t_grid, d2t_cap: float = 8.0,
                 sources=None, max_exclusion: float = 0.05) -> GaussianFit:
    """Fit two-sided Gaussian envelopes to ``G = P_t(x,y) sqrt(|B(x,sqrt t)| |B(y,sqrt t)|)``.

    Samples all targets y with ``d(x,y)^2 / t <= d2t_cap`` from each source x
    (default: 64 evenly spaced sources).  Non-positive kernel values are
    excluded and counted.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise ValueError("t must be positive")
    n = space.n
    if sources is None:
        sources = np.unique(np.linspace(0, n - 1, min(64, n)).astype(int))
    sources = np.asarray(sources, dtype=int)
    rows = space.rows(sources)
    cols = {k: [] for k in ("x", "y", "t", "d2t", "P", "Bx", "By", "G")}
    excluded = 0
    diag_vals = []
    for t in t_grid:
        vol = ball_volumes(space, [np.sqrt(t)])[:, 0]
        diag_vals.append(heat_diagonal(dec, t) * vol)
        pt = heat_kernel(dec, t, rows=sources)
        for k, x in enumerate(sources):
            d2t = rows[k] ** 2 / t
            y = np.flatnonzero(d2t <= d2t_cap)
            p = pt[k, y]
            pos = p > 0
            excluded += int((~pos).sum())
            y, p = y[pos], p[pos]
            g = p * np.sqrt(vol[x] * vol[y])
            cols["x"].append(np.full(y.size, x))
            cols["y"].append(y)
            cols["t"].append(np.full(y.size, t))
            cols["d2t"].append(d2t[y])
            cols["P"].append(p)
            cols["Bx"].append(np.full(y.size, vol[x]))
            cols["By"].append(vol[y])
            cols["G"].append(g)
    samples = {k: np.concatenate(v) for k, v in cols.items()}
    retained = samples["G"].size
    if retained == 0:
        raise FitError("no samples retained")
    rate = excluded / (excluded + retained)
    if rate > max_exclusion:
        raise FitError(f"exclusion rate {rate:.3f} exceeds {max_exclusion}")
    u, logg = samples["d2t"], np.log(samples["G"])
    a_hi, c2 = support_line(u, logg, upper=True)
    a_lo, c1 = support_line(u, logg, upper=False)
    slope, icpt = np.polyfit(u, logg, 1)
    pred = icpt + slope * u
    ss = np.sum((logg - logg.mean()) ** 2)
    r2 = 1 - np.sum((logg - pred) ** 2) / ss if ss > 0 else 1.0
    diag = np.concatenate(diag_vals)
    return GaussianFit(C1=float(np.exp(a_lo)), C2=float(np.exp(a_hi)), c1=c1, c2=c2,
                       t_window=(float(t_grid.min()), float(t_grid.max())), d2t_cap=float(d2t_cap),
                       residual_r2=float(r2), ls_rate=float(-slope),
                       diag_low=float(diag.min()), diag_high=float(diag.max()),
                       excluded=excluded, retained=retained, samples=samples)


def cutoff_scalar_holds(lam, s) -> np.ndarray:
    """``chi_[0,s](lam) <= e * exp(-lam^2 / s^2)``."""
    lam, s = np.broadcast_arrays(np.asarray(lam, float), np.asarray(s, float))
    lhs = (lam <= s).astype(float)
    return lhs <= np.e * np.exp(-(lam / s) ** 2) * (1 + 1e-12)


def dyadic_bound(lam, s, t, terms: int = 60) -> np.ndarray:
    """``chi_[0,s](lam) + sum_{j>=0} chi_[0, 2^{j+1} s](lam) exp(-t 4^j s^2)``."""
    lam, s, t = np.broadcast_arrays(*(np.asarray(x, float) for x in (lam, s, t)))
    out = (lam <= s).astype(float)
    for j in range(terms):
        out = out + (lam <= 2.0 ** (j + 1) * s) * np.exp(-t * 4.0 ** j * s * s)
    return out


def dyadic_scalar_holds(lam, s, t) -> np.ndarray:
    """``exp(-t lam^2) <= dyadic_bound(lam, s, t)``."""
    lam, s, t = np.broadcast_arrays(*(np.asarray(x, float) for x in (lam, s, t)))
    return np.exp(-t * lam ** 2) <= dyadic_bound(lam, s, t) * (1 + 1e-12)


@dataclass
class SpectralFunctionBound:
    a1: float
    a2: float
    s_grid: np.ndarray
    worst_ratio: float
    skipped: int = 0
    cutoff_scalar_ok: bool = True
    dyadic_scalar_ok: bool = True
    cutoff_kernel_ok: bool = True
    dyadic_kernel_ok: bool = True
    per_s: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return (np.isfinite(self.worst_ratio) and self.cutoff_scalar_ok and self.dyadic_scalar_ok
                and self.cutoff_kernel_ok and self.dyadic_kernel_ok)


def spectral_function_check(dec: SpectralDecomposition, space: MetricMeasureSpace, s_grid,
                    scalar_samples: int = 20_000, seed: int = 0) -> SpectralFunctionBound:
    """Bracket ``|B(x, 1/s)| * Phi_s(x)`` and run the proof's scalar and kernel inequalities."""
    s_grid = np.asarray(s_grid, dtype=float)
    vols = ball_volumes(space, 1.0 / s_grid)
    lo, hi, skipped = np.inf, -np.inf, 0
    per_s = []
    cutoff_ok = dyadic_ok = True
    lam_root = _sqrt_spec(dec)
    for k, s in enumerate(s_grid):
        vol = vols[:, k]
        phi = spectral_function(dec, s)
        good = vol > 0
        if not good.all():
            skipped += int((~good).sum())
            warnings.warn(f"{(~good).sum()} empty balls at radius {1 / s}")
        prod = vol[good] * phi[good]
        per_s.append((float(s), float(prod.min()), float(prod.max())))
        lo, hi = min(lo, prod.min()), max(hi, prod.max())
        # Phi_s(x) <= e P_{s^-2}(x, x)
        cutoff_ok &= bool(np.all(phi <= np.e * heat_diagonal(dec, s ** -2) * (1 + 1e-9) + 1e-12))
        # P_t(x,x) <= Phi_s(x) + sum_{j>=0} exp(-t 4^j s^2) Phi_{2^{j+1} s}(x), here with t = s^-2
        t = s ** -2
        w = dyadic_bound(lam_root, s, t)
        rhs = (dec.eigenvectors ** 2) @ w
        dyadic_ok &= bool(np.all(heat_diagonal(dec, t) <= rhs * (1 + 1e-9) + 1e-12))
    rng = np.random.default_rng(seed)
    lam = rng.exponential(10.0, scalar_samples)
    ss = rng.uniform(0.1, 50.0, scalar_samples)
    tt = np.exp(rng.uniform(np.log(1e-4), np.log(10.0), scalar_samples))
    return SpectralFunctionBound(
        a1=float(lo), a2=float(hi), s_grid=s_grid, worst_ratio=float(hi / lo), skipped=skipped,
        cutoff_scalar_ok=bool(cutoff_scalar_holds(lam, ss).all()),
        dyadic_scalar_ok=bool(dyadic_scalar_holds(lam, ss, tt).all()),
        cutoff_kernel_ok=cutoff_ok, dyadic_kernel_ok=dyadic_ok, per_s=per_s,
    )
