"""Geometry of the normal family: metric by quadrature, geodesics by shooting."""

import numpy as np

from qdist import fisher_rao as fr
from qdist import geodesy as geo
from qdist.dist_core import gaussian_family

family = gaussian_family()

# quadrature metric against the closed form at a few points
for theta in ([1.0, 0.0], [0.5, 2.0], [3.0, -1.0]):
    g = fr.fr_metric(family, theta)
    print(theta, np.round(g.components, 12), "closed:", np.diag(fr.gauss_metric_closed(theta).components))

# distances along a horizontal segment of growing length
field = geo.gaussian_fr_field()
print(f"{'dmu':>5} {'shooting':>12} {'exact':>12} {'asinh form':>12}")
for dmu in (0.5, 1.0, 2.0, 4.0):
    shot = geo.shoot_distance(field, [1.0, 0.0], [1.0, dmu])
    exact = fr.gauss_distance_exact([1.0, 0.0], [1.0, dmu])
    approx = fr.gauss_distance_asinh([1.0, 0.0], [1.0, dmu])
    print(f"{dmu:5.1f} {shot.length:12.9f} {exact:12.9f} {approx:12.9f}")

# the geodesic bulges toward larger sigma
shot = geo.shoot_distance(field, [1.0, 0.0], [1.0, 2.0])
print("max sigma along the geodesic:", shot.path.theta[:, 0].max())
