"""Sub-Riemannian sphere: low spectrum, CC ball growth at pole and equator, metric sandwich."""
import sys

import numpy as np

from wwlab import decompose
from wwlab.instances import (SubRiemannianSphereSpectrum, cc_volume_exponent, make_sr_sphere,
                             metric_sandwich, pole_and_equator)

n = int(sys.argv[1]) if len(sys.argv) > 1 else 1922
inst = make_sr_sphere(n)
dec = decompose(inst.operator)
exact = SubRiemannianSphereSpectrum(8).eigenvalues(9)
print("first 9 eigenvalues:", np.round(dec.eigenvalues[:9], 4))
print("exact             :", exact)
eps = np.geomspace(0.15, 0.45, 8)
pole, eq = pole_and_equator(inst.space)
print(f"volume exponent pole {cc_volume_exponent(inst.space, pole, eps):.3f}, "
      f"equator {cc_volume_exponent(inst.space, eq, eps):.3f}")
s = metric_sandwich(inst.space, pairs=1000)
print(f"sandwich a={s.a:.3f} b={s.b:.3f} holds={s.holds}")
