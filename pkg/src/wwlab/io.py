"""Space, operator, lattice and spectrum files.

Space file (JSON, one document per space)::

    {"label": str, "measure": [mu_0, ...],
     "distance_matrix": [d_10, d_20, d_21, d_30, ...]}      # row-major strict lower triangle
or
    {"label": str, "measure": [...], "coordinates": [[...], ...],
     "metric": "euclidean" | "circle_geodesic" | "sphere_geodesic" | "cc_ball_box",
     "params": {...}}                                       # e.g. circumference, edge_radius

Balls are open: B(x, r) = {y : d(x, y) < r}.

Operator file (JSON)::

    {"space": "<path relative to this file>", "edges": [[i, j, w_ij], ...]}
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .dirichlet import DirichletOperator
from .lattice import Lattice
from .mms import METRIC_TAGS, MetricMeasureSpace, ValidationError, validate_space
from .spectral import SpectralDecomposition, operator_hash


def space_to_dict(space: MetricMeasureSpace, use_coordinates: bool = False) -> dict:
    doc = {"label": space.label, "measure": space.measure.tolist()}
    if use_coordinates and space.metric in METRIC_TAGS and space.coordinates is not None:
        doc["coordinates"] = np.asarray(space.coordinates).tolist()
        doc["metric"] = space.metric
        doc["params"] = {k: v for k, v in space.extras.items() if isinstance(v, (int, float, str))}
    else:
        d = space.dense()
        i, j = np.tril_indices(space.n, -1)
        doc["distance_matrix"] = d[i, j].tolist()
    return doc


def save_space(space: MetricMeasureSpace, path, use_coordinates: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(space_to_dict(space, use_coordinates)))
    return path


def space_from_dict(doc: dict, where: str = "<dict>", triples: int = 100_000) -> MetricMeasureSpace:
    if "measure" not in doc:
        raise ValidationError(f"{where}: missing field 'measure'")
    mu = np.asarray(doc["measure"], dtype=float)
    if mu.ndim != 1:
        raise ValidationError(f"{where}: 'measure' must be a flat array")
    bad = np.flatnonzero(~(mu > 0))
    if bad.size:
        raise ValidationError(f"{where}: measure[{bad[0]}] = {mu[bad[0]]} is not positive")
    has_mat = "distance_matrix" in doc
    has_coord = "coordinates" in doc
    if has_mat == has_coord:
        raise ValidationError(f"{where}: give exactly one of 'distance_matrix' or 'coordinates'")
    label = doc.get("label", "")
    if has_mat:
        tri = np.asarray(doc["distance_matrix"], dtype=float)
        n = mu.size
        if tri.size != n * (n - 1) // 2:
            raise ValidationError(f"{where}: lower triangle has {tri.size} entries, expected {n * (n - 1) // 2}")
        d = np.zeros((n, n))
        i, j = np.tril_indices(n, -1)
        d[i, j] = tri
        d[j, i] = tri
        space = MetricMeasureSpace(measure=mu, matrix=d, label=label)
    else:
        metric = doc.get("metric")
        if metric not in METRIC_TAGS:
            raise ValidationError(f"{where}: metric must be one of {METRIC_TAGS}, got {metric!r}")
        coords = np.asarray(doc["coordinates"], dtype=float)
        if coords.shape[0] != mu.size:
            raise ValidationError(f"{where}: {coords.shape[0]} coordinates for {mu.size} masses")
        space = MetricMeasureSpace.from_coordinates(coords, metric, mu, label=label, **doc.get("params", {}))
    if space.matrix is not None:
        try:
            validate_space(space, triples=triples)
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    return space


def load_space(path) -> MetricMeasureSpace:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"space file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return space_from_dict(doc, where=str(path))


def save_operator(op: DirichletOperator, path, space_path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    i, j, w = op.triples()
    rel = Path(space_path)
    try:
        rel = rel.resolve().relative_to(path.parent.resolve())
    except ValueError:
        rel = rel.resolve()
    doc = {"space": str(rel), "edges": [[int(a), int(b), float(c)] for a, b, c in zip(i, j, w)]}
    path.write_text(json.dumps(doc))
    return path


def load_operator(path, space: MetricMeasureSpace | None = None) -> DirichletOperator:
    path = Path(path)
    doc = json.loads(path.read_text())
    if space is None:
        sp_path = Path(doc["space"])
        if not sp_path.is_absolute():
            sp_path = path.parent / sp_path
        space = load_space(sp_path)
    e = np.asarray(doc["edges"], dtype=float).reshape(-1, 3)
    i, j, w = e[:, 0].astype(int), e[:, 1].astype(int), e[:, 2]
    if i.size and (min(i.min(), j.min()) < 0 or max(i.max(), j.max()) >= space.n):
        raise ValidationError(f"{path}: edge index out of range for {space.n} points")
    m = sp.coo_matrix((w, (i, j)), shape=(space.n, space.n))
    return DirichletOperator(space, (m + m.T).tocsr())


def save_lattice(lattice: Lattice, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(lattice.to_dict(), indent=1))
    return path


def load_lattice(path) -> Lattice:
    return Lattice.from_dict(json.loads(Path(path).read_text()))


def cache_paths(cache_dir, op: DirichletOperator):
    key = operator_hash(op)
    base = Path(cache_dir) / f"spectrum-{key}"
    return base.with_suffix(".txt"), base.with_suffix(".npy")


def save_spectrum(dec: SpectralDecomposition, cache_dir, op: DirichletOperator,
                  vectors: bool = True) -> Path:
    txt, npy = cache_paths(cache_dir, op)
    txt.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(txt, dec.eigenvalues, fmt="%.17g")
    if vectors:
        np.save(npy, dec.eigenvectors)
    return txt


def load_spectrum(cache_dir, op: DirichletOperator):
    """Cached decomposition for ``op`` or None.  Without a vector block only eigenvalues return."""
    txt, npy = cache_paths(cache_dir, op)
    if not txt.exists():
        return None
    ev = np.atleast_1d(np.loadtxt(txt))
    if npy.exists():
        vec = np.load(npy)
        return SpectralDecomposition(ev, vec, op.mu.copy(), 1e-10 * (1 + float(ev.max())))
    return SpectralDecomposition(ev, np.empty((0, ev.size)), np.empty(0), 0.0)
