"""Relative entropy between density matrices, thermal states and a scalar field."""

import numpy as np

from qdist import qinfo as qi

rho, sigma = qi.DensityMatrix.diag([0.5, 0.5]), qi.DensityMatrix.diag([0.7, 0.3])
print("S(rho||sigma) =", qi.relative_entropy(rho, sigma))
print("distinct pure states:", qi.relative_entropy(qi.DensityMatrix.diag([1, 0]), qi.DensityMatrix.diag([0, 1])))

# four routes to the same number for two Gibbs states of one Hamiltonian
model = qi.ThermalModel.from_hamiltonian(np.diag([0.0, 1.0, 2.0]), 0.7)
b = 1.3
r, s = qi.gibbs_state(model.with_beta(b)), qi.gibbs_state(model)
print(qi.relative_entropy(r, s), qi.relative_entropy_decomposed(r, s).total,
      qi.thermal_relative_entropy(r, model), qi.two_thermal_relative_entropy(model, b))

# thermal scalar field: relative entropy near b and distance in energy
field = qi.FreeScalarField(volume=1.0)
for delta in (1e-1, 1e-2, 1e-3):
    print(delta, field.relative_entropy(1.0, 1.0 + delta) / (6 * field.scale * delta**2))
print("d(1, 2) =", field.distance(1.0, 2.0), "numeric:", field.distance_numeric(1.0, 2.0)[0])
