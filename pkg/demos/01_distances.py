"""Funk, reverse Funk and Hilbert distances on a few convex bodies.

The Funk distance is asymmetric; the Hilbert distance is its symmetrization
and, on the unit disk, coincides with the Klein model of the hyperbolic plane.
"""

from __future__ import annotations

import math

import numpy as np

from finsler import (Curve, Ellipsoid, funk_distance, funk_metric, hilbert_distance,
                     klein_metric, length, regular_polygon, reverse_funk_distance)
from finsler.verification import skew_ellipsoid, smooth_polytope

disk = Ellipsoid.ball([0.0, 0.0], 1.0)
p, q = np.zeros(2), np.array([0.5, 0.0])

print("unit disk, p = 0, q = (0.5, 0)")
print(f"  funk(p, q)          = {funk_distance(disk, p, q):.15f}   log 2     = {math.log(2):.15f}")
print(f"  funk(q, p)          = {funk_distance(disk, q, p):.15f}   log 1.5   = {math.log(1.5):.15f}")
print(f"  reverse funk(p, q)  = {reverse_funk_distance(disk, p, q):.15f}")
print(f"  hilbert(p, q)       = {hilbert_distance(disk, p, q):.15f}   artanh .5 = {math.atanh(0.5):.15f}")
print(f"  klein segment length= {length(klein_metric(2), Curve.segment(p, q)):.15f}")

# the closed forms against quadrature of the Lagrangian along the segment
print("\nclosed form vs quadrature along random chords")
rng = np.random.default_rng(3)
for name, body in [("ellipse", skew_ellipsoid(2)), ("smoothed polygon", smooth_polytope(2)),
                   ("heptagon", regular_polygon(7))]:
    F = funk_metric(body)
    pts = body.sample_interior(rng, 20)
    err = max(abs(funk_distance(body, a, b) - length(F, Curve.segment(a, b)))
              for a, b in zip(pts[::2], pts[1::2]))
    print(f"  {name:17s} max |closed - quadrature| = {err:.2e}")

# straight lines are geodesics: distances add up along a segment
a, b = np.array([-0.6, 0.3]), np.array([0.7, -0.2])
z = a + 0.37 * (b - a)
body = skew_ellipsoid(2)
print("\nadditivity along a segment in the ellipse:")
print(f"  d(a,z) + d(z,b) - d(a,b) = {funk_distance(body, a, z) + funk_distance(body, z, b) - funk_distance(body, a, b):.2e}")
