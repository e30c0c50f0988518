"""Experiment pipeline: generate -> decompose -> lattice sweeps -> checks -> report."""
from __future__ import annotations

import configparser
import csv
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import heat, instances, io, lattice, spectral
from .dirichlet import check_gradient_bound, gamma, gamma_edges, poincare_profile
from .mms import doubling_estimate
from .svg import loglog_plot

log = logging.getLogger("wwlab")

DEFAULT_GAMMAS = (0.5, 0.25, 0.1, 0.05, 0.02)
WEYL_TARGET = {"circle": 0.5, "interval": 0.5, "torus2": 1.0, "sphere_mesh": 1.0}


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


# --------------------------------------------------------------------- config

def _floats(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


@dataclass
class SweepConfig:
    omega: list
    gamma: list = field(default_factory=lambda: list(DEFAULT_GAMMAS))
    trials: int = 16
    spectrum: str = "discrete"


@dataclass
class ChecksConfig:
    weyl: bool = True
    weyl_target: Optional[float] = None
    weyl_tol: float = 0.05
    wwl: bool = True
    wwl_ratio_spread: float = 3.0
    wwl_ratio_target: Optional[float] = None
    wwl_ratio_tol: float = 0.3
    gamma_identity: bool = True
    lattice: bool = True
    poincare: bool = False
    poincare_rho: list = field(default_factory=lambda: [0.2, 0.4])
    poincare_centers: int = 16
    gaussian: bool = False
    t_grid: list = field(default_factory=list)
    d2t_cap: float = 8.0
    gaussian_rate: Optional[float] = None
    gaussian_rate_tol: float = 0.2
    diag_band: float = 4.0
    spectral_function: bool = False
    s_grid: list = field(default_factory=list)
    spectral_function_max_ratio: Optional[float] = None
    frame: bool = False
    frame_gamma: float = 0.1
    frame_omega: list = field(default_factory=list)
    bernstein: bool = False
    bernstein_omega: Optional[float] = None


@dataclass
class ExperimentConfig:
    instance: instances.InstanceSpec
    sweep: SweepConfig
    checks: ChecksConfig
    out_dir: Path
    plots: bool = True
    seed: int = 0
    threads: int = 1
    space_file: Optional[Path] = None
    operator_file: Optional[Path] = None
    source: Optional[Path] = None


def _grid(section, key, count_key=None):
    """``key = a, b, c`` explicit list, or ``key_min/key_max/key_count`` log grid."""
    if key in section:
        return _floats(section[key])
    lo, hi = section.get(f"{key}_min"), section.get(f"{key}_max")
    if lo is None or hi is None:
        return []
    return list(np.geomspace(float(lo), float(hi), int(section.get(f"{key}_count", 12))))


def load_config(path, out=None, seed=None, threads=None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read(path)
    for sec in ("instance", "sweep"):
        if sec not in cp:
            raise ConfigError(f"{path}: missing section [{sec}]")
    ins = cp["instance"]
    space_file = operator_file = None
    if "space_file" in ins or "operator_file" in ins:
        for key in ("space_file", "operator_file"):
            if key in ins:
                p = Path(ins[key])
                p = p if p.is_absolute() else path.parent / p
                if not p.exists():
                    raise ConfigError(f"{path}: {key} does not exist: {p}")
                if key == "space_file":
                    space_file = p
                else:
                    operator_file = p
    kind = ins.get("kind", "circle")
    known = {"n", "nx", "ny", "circumference", "cx", "cy", "length", "l_max", "edge_radius", "seed"}
    kw = {}
    for k in known & set(ins):
        kw[k] = int(ins[k]) if k in ("n", "nx", "ny", "l_max", "seed") else float(ins[k])
    params = {}
    if "bandwidth" in ins:
        params["bandwidth"] = float(ins["bandwidth"])
    try:
        spec = instances.InstanceSpec(kind=kind, params=params, **kw)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    sw = cp["sweep"]
    omega = _grid(sw, "omega")
    if not omega:
        raise ConfigError(f"{path}: [sweep] needs omega or omega_min/omega_max")
    sweep = SweepConfig(omega=omega, gamma=_floats(sw.get("gamma", ", ".join(map(str, DEFAULT_GAMMAS)))),
                        trials=sw.getint("trials", 16), spectrum=sw.get("spectrum", "discrete"))
    if sweep.spectrum not in ("discrete", "analytic"):
        raise ConfigError(f"{path}: spectrum must be 'discrete' or 'analytic'")

    checks = ChecksConfig()
    if "checks" in cp:
        ck = cp["checks"]
        for f_name, f_val in asdict(checks).items():
            if f_name in ("t_grid", "s_grid", "poincare_rho", "frame_omega"):
                key = {"t_grid": "t", "s_grid": "s"}.get(f_name, f_name)
                vals = _grid(ck, key)
                if vals:
                    setattr(checks, f_name, vals)
            elif f_name in ck:
                if isinstance(f_val, bool):
                    setattr(checks, f_name, ck.getboolean(f_name))
                elif isinstance(f_val, int) and not isinstance(f_val, bool):
                    setattr(checks, f_name, ck.getint(f_name))
                else:
                    setattr(checks, f_name, ck.getfloat(f_name))
    if checks.weyl_target is None:
        checks.weyl_target = WEYL_TARGET.get(kind)

    outsec = cp["output"] if "output" in cp else {}
    out_dir = Path(out) if out else Path(outsec.get("dir", "out")) if outsec else Path("out")
    if not out_dir.is_absolute() and not out:
        out_dir = path.parent / out_dir
    plots = str(outsec.get("plots", "true")).lower() in ("1", "true", "yes", "on")
    seed = int(seed if seed is not None else (ins.get("seed") or 0))
    return ExperimentConfig(instance=spec, sweep=sweep, checks=checks, out_dir=out_dir, plots=plots,
                            seed=seed, threads=int(threads or 1), space_file=space_file,
                            operator_file=operator_file, source=path)


# --------------------------------------------------------------------- weak Weyl

@dataclass
class WWLRow:
    omega: float
    N: int
    max_card: int
    min_card_unit: int
    min_card_gamma: dict
    passed: bool = False


@dataclass
class WWLReport:
    label: str
    omega_grid: list
    gamma_grid: list
    rows: list
    c: float
    gamma: Optional[float]
    feasibility: dict
    dropped: list
    ratio_spread: float
    ratios: list
    D: float = float("nan")
    N_mult: int = 0
    weyl_slope: float = float("nan")
    spectral_function: tuple = ()
    gaussian: tuple = ()
    poincare_C: float = float("nan")
    checks: dict = field(default_factory=dict)
    lattices: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("lattices")
        d["rows"] = [asdict(r) | {"min_card_gamma": {str(k): v for k, v in r.min_card_gamma.items()}}
                     for r in self.rows]
        d["feasibility"] = {str(k): v for k, v in self.feasibility.items()}
        return _jsonable(d)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Path):
        return str(x)
    return x


def recheck_rows(report: WWLReport) -> list:
    """Recompute each row's pass flag from the stored constants."""
    out = []
    for r in report.rows:
        upper = report.gamma is not None and r.N <= r.min_card_gamma[report.gamma]
        lower = report.c * r.max_card <= r.N
        out.append(bool(upper and lower))
    return out


def verify_wwl(instance, omega_grid, gamma_grid=DEFAULT_GAMMAS, trials: int = 16, seed: int = 0,
               spectrum: str = "discrete", dec=None, threads: int = 1) -> WWLReport:
    """Check ``c max_card(rho) <= N_omega <= min_card(gamma rho)`` with rho = omega^{-1/2}.

    ``instance`` is an InstanceSpec or a built Instance.  With
    ``spectrum='analytic'`` the counting function comes from the oracle.
    """
    inst = instances.build(instance) if isinstance(instance, instances.InstanceSpec) else instance
    space = inst.space
    if spectrum == "analytic":
        if inst.oracle is None:
            raise ValueError("instance has no analytic spectrum")
        count = inst.oracle.counting
    else:
        dec = dec if dec is not None else spectral.decompose(inst.operator)
        count = lambda w: spectral.counting(dec, w)   # noqa: E731

    gammas = sorted({float(g) for g in gamma_grid}, reverse=True)
    rows, dropped, lats = [], [], []
    for w in sorted(float(x) for x in omega_grid):
        rho = w ** -0.5
        if rho < space.resolution:
            dropped.append(w)
            warnings.warn(f"omega = {w:g}: radius {rho:.4g} below sampling resolution {space.resolution:.4g}")
            continue
        unit = lattice.cardinality_sweep(space, rho, trials, seed=seed, threads=threads)
        lats += unit.lattices
        by_gamma = {}
        for g in gammas:
            sw = lattice.cardinality_sweep(space, g * rho, trials, seed=seed, threads=threads)
            by_gamma[g] = sw.min_card
            lats += sw.lattices
        rows.append(WWLRow(omega=w, N=int(count(w)), max_card=unit.max_card, min_card_unit=unit.min_card,
                           min_card_gamma=by_gamma))
    feas = {g: [r.N <= r.min_card_gamma[g] for r in rows] for g in gammas}
    good = [g for g in gammas if g < 1 and rows and all(feas[g])]
    gamma_sel = max(good) if good else None
    ratios = [r.N / r.max_card for r in rows]
    c = min(min(ratios), math.nextafter(1.0, 0.0)) if ratios else float("nan")
    spread = max(ratios) / min(ratios) if ratios else float("nan")
    rep = WWLReport(label=space.label, omega_grid=[r.omega for r in rows], gamma_grid=gammas, rows=rows,
                    c=c, gamma=gamma_sel, feasibility=feas, dropped=dropped, ratio_spread=spread,
                    ratios=ratios, lattices=lats)
    for r, ok in zip(rows, recheck_rows(rep)):
        r.passed = ok
    return rep


# --------------------------------------------------------------------- pipeline

def _instance(cfg: ExperimentConfig):
    if cfg.operator_file is not None:
        op = io.load_operator(cfg.operator_file, io.load_space(cfg.space_file) if cfg.space_file else None)
        return instances.Instance(op.space, op, None)
    if cfg.space_file is not None:
        raise ConfigError("a space_file needs an operator_file for the spectral stages")
    return instances.build(cfg.instance)


def _stage(name, fn, *a, **kw):
    log.info("stage %s", name)
    try:
        return fn(*a, **kw)
    except (StageError, KeyboardInterrupt):
        raise
    except Exception as exc:  # noqa: BLE001
        raise StageError(name, exc) from exc


def _decompose(inst, cache_dir):
    cached = io.load_spectrum(cache_dir, inst.operator)
    if cached is not None and cached.eigenvectors.size:
        return cached
    dec = spectral.decompose(inst.operator)
    io.save_spectrum(dec, cache_dir, inst.operator)
    return dec


def run_checks(cfg: ExperimentConfig, inst, dec, report: WWLReport) -> dict:
    ck = cfg.checks
    space = inst.space
    res = {}
    band = cfg.sweep.omega
    counter = inst.oracle if cfg.sweep.spectrum == "analytic" else dec

    if ck.weyl:
        fit = spectral.weyl_fit(counter, band)
        report.weyl_slope = fit.slope
        ok = ck.weyl_target is None or abs(fit.slope - ck.weyl_target) <= ck.weyl_tol
        res["weyl"] = {"slope": fit.slope, "r_squared": fit.r_squared, "target": ck.weyl_target,
                       "tol": ck.weyl_tol, "pass": ok}
    if ck.wwl:
        ok = (report.gamma is not None and 0 < report.c < 1 and bool(report.rows)
              and report.ratio_spread <= ck.wwl_ratio_spread and all(r.passed for r in report.rows))
        entry = {"c": report.c, "gamma": report.gamma, "ratio_spread": report.ratio_spread,
                 "dropped": report.dropped}
        if ck.wwl_ratio_target is not None:
            mean_ratio = float(np.mean(report.ratios))
            tgt_ok = abs(mean_ratio - ck.wwl_ratio_target) <= ck.wwl_ratio_tol * ck.wwl_ratio_target
            entry.update(mean_ratio=mean_ratio, ratio_target=ck.wwl_ratio_target, ratio_target_pass=tgt_ok)
            ok = ok and tgt_ok
        entry["pass"] = ok
        res["wwl"] = entry
    D = doubling_estimate(space).D
    report.D = D
    if ck.lattice:
        worst, fails = 0, []
        for lat in report.lattices:
            try:
                worst = max(worst, lattice.verify_lattice(space, lat, D).multiplicity)
            except lattice.LatticeVerificationError as exc:
                fails.append(str(exc))
        report.N_mult = worst
        res["lattice"] = {"D": D, "max_multiplicity": worst, "bound": 80.0 ** D,
                          "checked": len(report.lattices), "failures": fails[:5], "pass": not fails}
    if ck.gamma_identity:
        rng = np.random.default_rng(cfg.seed)
        f, g = rng.standard_normal((2, space.n))
        a, b = gamma(inst.operator, f, g), gamma_edges(inst.operator, f, g)
        rel = float(np.abs(a - b).max() / np.abs(b).max())
        cmeas = check_gradient_bound(inst.operator, trials=100, seed=cfg.seed)
        res["gamma_identity"] = {"formula_rel_diff": rel, "c_measured": cmeas,
                                 "pass": rel <= 1e-12 and abs(cmeas - 1) <= 1e-10}
    if ck.poincare:
        step = max(1, space.n // ck.poincare_centers)
        centers = range(0, space.n, step)
        vals = {}
        for rho in ck.poincare_rho:
            vals[rho] = poincare_profile(inst.operator, rho, centers).sup_constant
        finite = [v for v in vals.values() if np.isfinite(v)]
        report.poincare_C = max(finite) if finite else float("nan")
        spread = max(finite) / min(finite) if finite else float("inf")
        res["poincare"] = {"C_by_rho": vals, "spread": spread, "pass": bool(finite) and spread <= 2.0}
    if ck.gaussian and ck.t_grid:
        try:
            fit = heat.gaussian_fit(dec, space, ck.t_grid, ck.d2t_cap)
        except heat.FitError as exc:
            res["gaussian"] = {"error": str(exc), "pass": False}
        else:
            report.gaussian = (fit.C1, fit.C2, fit.c1, fit.c2)
            ok = fit.exclusion_rate <= 0.05 and fit.diag_ratio <= ck.diag_band and fit.holds()
            entry = {"C1": fit.C1, "C2": fit.C2, "c1": fit.c1, "c2": fit.c2, "ls_rate": fit.ls_rate,
                     "exclusion_rate": fit.exclusion_rate, "diag_ratio": fit.diag_ratio}
            if ck.gaussian_rate is not None:
                r, tol = ck.gaussian_rate, ck.gaussian_rate_tol
                bracket = abs(fit.c1 - r) <= tol * r and abs(fit.c2 - r) <= tol * r
                entry["rate_bracket_pass"] = bracket
                ok = ok and bracket
            entry["pass"] = ok
            res["gaussian"] = entry
            _write_csv(cfg.out_dir / "heat_samples.csv", fit.samples)
    if ck.spectral_function and ck.s_grid:
        lk = heat.spectral_function_check(dec, space, ck.s_grid)
        report.spectral_function = (lk.a1, lk.a2)
        cap = ck.spectral_function_max_ratio
        ok = lk.ok and (cap is None or lk.worst_ratio <= cap)
        res["spectral_function"] = {"a1": lk.a1, "a2": lk.a2, "worst_ratio": lk.worst_ratio,
                            "proof_chain": lk.ok, "pass": ok}
    if ck.frame and ck.frame_omega:
        out = {}
        for w in ck.frame_omega:
            lat = lattice.build_lattice(space, ck.frame_gamma * w ** -0.5, "index_order")
            lo, hi = spectral.frame_bound(dec, w, lat, space)
            out[w] = {"lower": lo, "upper": hi, "centers": lat.cardinality}
        res["frame"] = {"by_omega": out, "pass": all(v["lower"] > 0 for v in out.values())}
    if ck.bernstein:
        w = ck.bernstein_omega or band[len(band) // 2]
        k_top = spectral.counting(dec, w)
        w_eig = float(dec.eigenvalues[k_top - 1])
        by_k = {}
        for k in (1, 2, 4):
            b = spectral.bernstein_check(dec, w_eig, k, trials=200, seed=cfg.seed)
            by_k[k] = {"max_ratio": b.max_ratio, "top": b.top_mode_ratio}
        ok = all(v["max_ratio"] <= 1 + 1e-8 and v["top"] >= 1 - 1e-8 for v in by_k.values())
        res["bernstein"] = {"omega": w_eig, "by_k": by_k, "pass": ok}
    return res


def _write_csv(path, columns: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    keys = list(columns)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for row in zip(*(columns[k] for k in keys)):
            w.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])


def write_tables(report: WWLReport, out_dir) -> list:
    out_dir = Path(out_dir)
    cols = {"omega": [r.omega for r in report.rows], "N_omega": [r.N for r in report.rows],
            "max_card": [r.max_card for r in report.rows],
            "min_card_unit": [r.min_card_unit for r in report.rows]}
    for g in report.gamma_grid:
        cols[f"min_card_gamma_{g:g}"] = [r.min_card_gamma[g] for r in report.rows]
    cols["pass"] = [int(r.passed) for r in report.rows]
    _write_csv(out_dir / "wwl_table.csv", cols)
    feas = {"gamma": report.gamma_grid}
    for k, w in enumerate(report.omega_grid):
        feas[f"omega_{w:g}"] = [int(report.feasibility[g][k]) for g in report.gamma_grid]
    _write_csv(out_dir / "feasibility.csv", feas)
    return [out_dir / "wwl_table.csv", out_dir / "feasibility.csv"]


def write_plots(report: WWLReport, out_dir) -> list:
    out_dir = Path(out_dir)
    if not report.rows:
        return []
    om = [r.omega for r in report.rows]
    paths = [loglog_plot(out_dir / "weyl.svg",
                         [("N_omega", om, [r.N for r in report.rows], "points")],
                         title=f"Counting function: {report.label}", xlabel="omega", ylabel="N_omega")]
    series = [("N_omega", om, [r.N for r in report.rows], "line"),
              ("sup card (radius omega^-1/2)", om, [r.max_card for r in report.rows], "points")]
    if report.gamma is not None:
        series.append((f"inf card (gamma = {report.gamma:g})", om,
                       [r.min_card_gamma[report.gamma] for r in report.rows], "points"))
    paths.append(loglog_plot(out_dir / "wwl.svg", series, title=f"Weak Weyl law: {report.label}",
                             xlabel="omega", ylabel="count"))
    return paths


def run_experiment(config_path, out=None, seed=None, threads=None) -> int:
    """Run the full pipeline; returns 0 iff every enabled check passes."""
    cfg = _stage("config", load_config, config_path, out=out, seed=seed, threads=threads)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    inst = _stage("generate", _instance, cfg)
    dec = None
    if cfg.sweep.spectrum == "discrete" or any(
            (cfg.checks.gaussian, cfg.checks.spectral_function, cfg.checks.frame, cfg.checks.bernstein)):
        dec = _stage("decompose", _decompose, inst, cfg.out_dir / "cache")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = _stage("sweeps", verify_wwl, inst, cfg.sweep.omega, cfg.sweep.gamma, cfg.sweep.trials,
                        seed=cfg.seed, spectrum=cfg.sweep.spectrum, dec=dec, threads=cfg.threads)
    for w in caught:
        log.warning("%s", w.message)
    report.checks = _stage("checks", run_checks, cfg, inst, dec, report)
    passed = all(v.get("pass", False) for v in report.checks.values())
    doc = report.to_dict() | {"config": str(cfg.source), "seed": cfg.seed, "pass": passed}
    (cfg.out_dir / "report.json").write_text(json.dumps(doc, indent=1, sort_keys=True))
    write_tables(report, cfg.out_dir)
    if cfg.plots:
        _stage("plots", write_plots, report, cfg.out_dir)
    for name, v in report.checks.items():
        log.info("%-15s %s", name, "PASS" if v.get("pass") else "FAIL")
    return 0 if passed else 1
