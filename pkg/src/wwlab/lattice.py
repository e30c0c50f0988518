"""Greedy metric (rho, N)-lattices and cardinality sweeps."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mms import MetricMeasureSpace

ORDERS = ("index_order", "random", "farthest_point")


@dataclass(frozen=True)
class Lattice:
    rho: float
    centers: np.ndarray
    multiplicity: int
    strategy_seed: int = 0
    order: str = "index_order"
    below_resolution: bool = False

    @property
    def cardinality(self) -> int:
        return int(self.centers.size)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "centers": [int(c) for c in self.centers],
            "multiplicity": self.multiplicity,
            "strategy_seed": self.strategy_seed,
            "order": self.order,
            "below_resolution": self.below_resolution,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Lattice":
        return cls(rho=float(d["rho"]), centers=np.asarray(d["centers"], dtype=int),
                   multiplicity=int(d["multiplicity"]), strategy_seed=int(d.get("strategy_seed", 0)),
                   order=d.get("order", "index_order"),
                   below_resolution=bool(d.get("below_resolution", False)))


class LatticeVerificationError(AssertionError):
    def __init__(self, clause: str, witnesses, detail: str = ""):
        self.clause = clause
        self.witnesses = tuple(int(w) for w in witnesses)
        super().__init__(f"{clause} violated at points {self.witnesses}" + (f": {detail}" if detail else ""))


def cover_multiplicity(space: MetricMeasureSpace, centers, rho: float) -> int:
    centers = np.asarray(centers, dtype=int)
    if centers.size == 0:
        return 0
    hits = space.rows(centers) < rho          # (J, n)
    return int(hits.sum(axis=0).max())


def _greedy(space, rho, order):
    blocked = np.zeros(space.n, dtype=bool)
    centers = []
    for c in order:
        if blocked[c]:
            continue
        centers.append(int(c))
        blocked |= space.row(c) < rho
    return np.asarray(centers, dtype=int)


def _farthest(space, rho):
    # start at index 0; argmax breaks ties toward the lowest index
    centers = [0]
    nearest = space.row(0).copy()
    while True:
        c = int(np.argmax(nearest))
        if nearest[c] < rho:
            break
        centers.append(c)
        np.minimum(nearest, space.row(c), out=nearest)
    return np.asarray(centers, dtype=int)


def build_lattice(space: MetricMeasureSpace, rho: float, order: str = "index_order",
                  seed: int = 0) -> Lattice:
    """Greedy maximal packing with pairwise center distance >= rho.

    Maximality of the packing makes the radius-rho balls a cover.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if order == "index_order":
        centers = _greedy(space, rho, range(space.n))
    elif order == "random":
        centers = _greedy(space, rho, np.random.default_rng(seed).permutation(space.n))
    elif order == "farthest_point":
        centers = _farthest(space, rho)
    else:
        raise ValueError(f"unknown order {order!r}; expected one of {ORDERS}")
    return Lattice(rho=float(rho), centers=centers,
                   multiplicity=cover_multiplicity(space, centers, rho),
                   strategy_seed=int(seed), order=order,
                   below_resolution=bool(rho < 4 * space.resolution))


@dataclass
class LatticeReport:
    rho: float
    cardinality: int
    multiplicity: int
    bound: float
    min_center_distance: float
    max_cover_distance: float
    below_resolution: bool

    @property
    def ok(self) -> bool:
        return self.multiplicity <= self.bound


def verify_lattice(space: MetricMeasureSpace, lattice: Lattice, D: float) -> LatticeReport:
    """Check packing, cover, multiplicity, and multiplicity <= 80**D.

    Raises ``LatticeVerificationError`` naming the failing clause.
    """
    rho = lattice.rho
    c = np.asarray(lattice.centers, dtype=int)
    if c.size == 0:
        raise LatticeVerificationError("cover", [], "empty lattice")
    rows = space.rows(c)                           # (J, n)
    cc = rows[:, c] + np.diag(np.full(c.size, np.inf))
    min_sep = float(cc.min()) if c.size > 1 else np.inf
    if min_sep < rho:
        a, b = np.unravel_index(np.argmin(cc), cc.shape)
        raise LatticeVerificationError("disjoint half-balls", [c[a], c[b]],
                                       f"d = {min_sep} < rho = {rho}")
    nearest = rows.min(axis=0)
    far = float(nearest.max())
    if far >= rho:
        p = int(np.argmax(nearest))
        raise LatticeVerificationError("cover", [p], f"nearest center at {far} >= rho = {rho}")
    mult = int((rows < rho).sum(axis=0).max())
    if mult != lattice.multiplicity:
        p = int(np.argmax((rows < rho).sum(axis=0)))
        raise LatticeVerificationError("multiplicity", [p],
                                       f"measured {mult}, recorded {lattice.multiplicity}")
    bound = 80.0 ** D
    if mult > bound:
        p = int(np.argmax((rows < rho).sum(axis=0)))
        raise LatticeVerificationError("multiplicity bound", [p], f"{mult} > 80^{D:.3f}")
    return LatticeReport(rho=rho, cardinality=int(c.size), multiplicity=mult, bound=bound,
                         min_center_distance=min_sep, max_cover_distance=far,
                         below_resolution=lattice.below_resolution)


@dataclass
class CardinalitySweep:
    rho: float
    min_card: int
    max_card: int
    cardinalities: list = field(default_factory=list)
    lattices: list = field(default_factory=list, repr=False)


def cardinality_sweep(space: MetricMeasureSpace, rho: float, trials: int = 16, seed: int = 0,
                      deterministic: bool = True, threads: int = 1) -> CardinalitySweep:
    """Min and max lattice cardinality over randomized greedy orders.

    Runs ``trials`` random orders (seeds ``seed .. seed+trials-1``) and, if
    ``deterministic``, the index order and farthest-point strategies.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [("random", seed + k) for k in range(trials)]
    if deterministic:
        jobs += [("index_order", 0), ("farthest_point", 0)]

    def run(job):
        return build_lattice(space, rho, order=job[0], seed=job[1])

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            lats = list(ex.map(run, jobs))
    else:
        lats = [run(j) for j in jobs]
    cards = [lat.cardinality for lat in lats]
    return CardinalitySweep(rho=float(rho), min_card=min(cards), max_card=max(cards),
                            cardinalities=cards, lattices=lats)
