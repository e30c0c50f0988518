"""Counting-function slopes: analytic circle, discrete circle, discrete torus."""
import numpy as np

from wwlab import decompose, weyl_fit
from wwlab.instances import CircleSpectrum, make_circle, make_torus2

cases = [
    ("circle, analytic", CircleSpectrum(), np.geomspace(1e2, 1e4, 20)),
    ("circle n=2048", decompose(make_circle(2048).operator), np.geomspace(25, 400, 16)),
    ("torus 64x64", decompose(make_torus2(64, 64).operator), np.geomspace(10, 256, 16)),
]
for name, spec, grid in cases:
    fit = weyl_fit(spec, grid)
    print(f"{name:18s} slope {fit.slope:.4f}  r^2 {fit.r_squared:.5f}")
