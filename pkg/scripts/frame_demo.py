"""Frame constants of ball-average sampling on the circle: covering lattices vs. a sparse center set."""
import numpy as np

from wwlab import build_lattice, counting, decompose, frame_bound
from wwlab.instances import make_circle

inst = make_circle(2048)
dec = decompose(inst.operator)
for omega in (100.0, 400.0):
    lat = build_lattice(inst.space, 0.1 * omega ** -0.5)
    lo, hi = frame_bound(dec, omega, lat, inst.space)
    sparse = np.linspace(0, inst.space.n - 1, counting(dec, omega) // 2).astype(int)
    lo2, _ = frame_bound(dec, omega, None, inst.space, centers=sparse, rho=0.1 * omega ** -0.5)
    print(f"omega={omega:g}: lattice ({lat.cardinality} centers) [{lo:.4f}, {hi:.4f}]; "
          f"{sparse.size} sparse centers lower {lo2:.2e}")
