"""Metric on the amplitude sphere for a two-mode oscillator state."""

import numpy as np

from qdist import hilbert_sphere as hs

rng = np.random.default_rng(0)
state = hs.AmplitudeState.normalized([np.sqrt(0.7), 1j * np.sqrt(0.3)])

for t in (0.2, 0.4, 0.8):
    basis = hs.HarmonicOscillator(time=t)
    met = hs.sphere_metric(basis, state)
    fd = hs.sphere_metric_fd(basis, state)
    print(f"t={t}: |g - g_fd| = {np.abs(met.g - fd.g).max():.2e}, "
          f"|g_mixed| = {np.abs(met.g_mixed).max():.2e}, normalization = {hs.normalization(basis, state):.12f}")

# line element on random tangents is real
basis = hs.HarmonicOscillator(time=0.4)
met = hs.sphere_metric(basis, state)
for _ in range(3):
    dc = hs.tangent_projection(state, rng.normal(size=2) + 1j * rng.normal(size=2))
    print("ds^2 =", met.line_element(dc))

# the diagonal-only density loses the interference terms
x = np.linspace(-3, 3, 7)
print(np.round(hs.probability(basis, state, x), 4))
print(np.round(hs.probability(basis, state, x, mode="diagonal"), 4))
