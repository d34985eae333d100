"""Projective flatness tests and the metric constructions around Funk geometry.

* Hamel's condition separates projectively flat metrics from a conformal control.
* The Zermelo transform of the Euclidean norm under the wind Z(x) = x is the
  Funk metric of the unit disk.
* The Funk metric of the disk is a Randers metric.
"""

from __future__ import annotations

import numpy as np

from finsler import (Ellipsoid, ad, classify_projective_flatness, euclidean, funk_metric,
                     hilbert_metric, klein_metric, minkowski, randers, reverse,
                     riemannian, spherical_metric, zermelo)
from finsler.verification import skew_ellipsoid

rng = np.random.default_rng(2)
E = skew_ellipsoid(2)
zoo = {
    "funk": funk_metric(E),
    "reverse funk": reverse(funk_metric(E)),
    "hilbert": hilbert_metric(E),
    "klein": klein_metric(2),
    "spherical": spherical_metric(2),
    "funk + minkowski": funk_metric(E) + minkowski(Ellipsoid.ball([0.2, 0.0], 1.0)),
    "conformal (1+|x|^2)|y|": riemannian(lambda x, y: (1 + ad.dot(x, x)) ** 2 * ad.dot(y, y), 2),
}
print("Hamel classification (30 samples each)")
for name, F in zoo.items():
    v = classify_projective_flatness(F, rng, samples=30)
    print(f"  {name:24s} {v.verdict:13s} max residual {max(v.max_residual, v.max_symmetry_residual):.1e}")

disk = Ellipsoid.ball([0.0, 0.0], 1.0)
Ff = funk_metric(disk)
Z = zermelo(euclidean(2), lambda x: x)
quad = lambda x, y: ((1 - ad.dot(x, x)) * ad.dot(y, y) + ad.dot(x, y) ** 2) / (1 - ad.dot(x, x)) ** 2
R = randers(quad, lambda x, y: ad.dot(x, y) / (1 - ad.dot(x, x)), 2, domains=disk)
pts = disk.sample_interior(rng, 200)
dirs = rng.normal(size=(200, 2))
print("\nFunk metric of the disk, three ways")
print(f"  max |zermelo - funk| = {max(abs(Z(x, y) - Ff(x, y)) for x, y in zip(pts, dirs)):.1e}")
print(f"  max |randers - funk| = {max(abs(R(x, y) - Ff(x, y)) for x, y in zip(pts, dirs)):.1e}")
