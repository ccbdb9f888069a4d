"""Oscillator parameter plane: signature table and the eigenstate metric."""

import numpy as np

from qdist import ho_manifold as ho
from qdist.dist_core import ho_eigenstate_family
from qdist.fisher_rao import fr_metric

print(f"{'n':>3} {'a':>8} {'eta':>10} {'eta exact':>10}  class")
for row in ho.signature_report(6):
    print(f"{row.n:3d} {row.a:8.3f} {row.eta:10.4f} {str(row.eta_exact):>10}  {row.signature_class}")

# straight lines in (U, V) are geodesics, so distances are closed form
for n in (0, 1, 2):
    print(n, ho.manifold_distance(n, (1.0, 1.0), (2.0, 3.0)))

# quadrature of the eigenstate densities gives a rank-one metric instead
m, w = 1.3, 0.8
for n in range(4):
    quad = fr_metric(ho_eigenstate_family(n), [m, w], form="hessian").components
    print(n, "quadrature eigenvalues:", np.round(np.linalg.eigvalsh(quad), 10),
          "closed-form eigenvalues:", np.round(np.linalg.eigvalsh(ho.ho_metric_closed(n, m, w).components), 6))
