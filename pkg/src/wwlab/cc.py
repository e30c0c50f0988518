"""Ball-box quasi-metric on the sphere for the frame Y1 = X_{2,3}, Y2 = X_{1,3}.

A single step from x to y costs the smallest eps such that the tangent
displacement at the midpoint can be written h1 Y1 + h2 Y2 + h3 Y3 with
|h1|, |h2| <= eps and |h3| <= eps**2 (Y3 = [Y1, Y2] = X_{1,2}).  The
distance is the shortest-path metric of those step costs over all pairs
closer than ``edge_radius`` (chordal).
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree


def frame(points: np.ndarray) -> np.ndarray:
    """Vector fields (Y1, Y2, Y3) at unit vectors, shape (n, 3, 3)."""
    x = np.atleast_2d(points)
    e = np.eye(3)
    y1 = np.cross(e[0], x)            # x2 d3 - x3 d2
    y2 = -np.cross(e[1], x)           # x1 d3 - x3 d1
    y3 = np.cross(e[2], x)            # x1 d2 - x2 d1
    return np.stack([y1, y2, y3], axis=1)


def ball_box_cost(xi: np.ndarray, xj: np.ndarray, iters: int = 80) -> np.ndarray:
    """Single-step ball-box cost between rows of ``xi`` and ``xj``."""
    xi = np.atleast_2d(xi)
    xj = np.atleast_2d(xj)
    m = xi + xj
    norm = np.linalg.norm(m, axis=1, keepdims=True)
    # antipodal pairs have no midpoint; give them infinite single-step cost
    anti = norm[:, 0] < 1e-12
    m = m / np.where(norm > 0, norm, 1.0)
    m[anti] = (0.0, 0.0, 1.0)
    v = xj - xi
    v = v - (v * m).sum(axis=1, keepdims=True) * m
    # (h1, -h2, h3) x m = v has solutions u = m x v + tau m
    u = np.cross(m, v)
    u[:, 1] = -u[:, 1]
    w = m.copy()
    w[:, 1] = -w[:, 1]

    def cost(t):
        a = np.abs(u[:, 0] + t * w[:, 0])
        b = np.abs(u[:, 1] + t * w[:, 1])
        c = np.sqrt(np.abs(u[:, 2] + t * w[:, 2]))
        return np.maximum(np.maximum(a, b), c)

    c0 = cost(np.zeros(len(m)))
    k = np.argmax(np.abs(w), axis=1)
    r = np.arange(len(m))
    bound = (np.abs(u[r, k]) + np.maximum(c0, c0 ** 2)) / np.abs(w[r, k])
    lo, hi = -bound, bound.copy()
    # cost is quasiconvex in tau
    for _ in range(iters):
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        left = cost(a) <= cost(b)
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
    out = np.minimum(cost(0.5 * (lo + hi)), c0)
    out[anti] = np.inf
    return out


def cc_graph(points: np.ndarray, edge_radius: float = 0.6) -> sp.csr_matrix:
    pts = np.asarray(points, dtype=float)
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    pairs = cKDTree(pts).query_pairs(edge_radius, output_type="ndarray")
    n = pts.shape[0]
    if pairs.size == 0:
        return sp.csr_matrix((n, n))
    c = ball_box_cost(pts[pairs[:, 0]], pts[pairs[:, 1]])
    keep = np.isfinite(c) & (c > 0)
    g = sp.coo_matrix((c[keep], (pairs[keep, 0], pairs[keep, 1])), shape=(n, n)).tocsr()
    return (g + g.T).tocsr()


def cc_distance_matrix(points, edge_radius: float = 0.6, **_) -> np.ndarray:
    g = cc_graph(points, edge_radius)
    ncomp, _ = connected_components(g, directed=False)
    if ncomp > 1:
        raise ValueError(f"ball-box graph has {ncomp} components; increase edge_radius")
    d = dijkstra(g, directed=False)
    return 0.5 * (d + d.T)


def cc_row_oracle(points, edge_radius: float = 0.6, **_):
    g = cc_graph(points, edge_radius)
    return lambda i: dijkstra(g, directed=False, indices=int(i))
