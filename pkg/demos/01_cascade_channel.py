"""
The RIS cascade channel and its Gamma fit
=========================================

The AAV receives the ground station through N reflecting elements, each
contributing the product of two Rician envelopes. The sum of N such products
is matched by a Gamma law through its first two moments; here we compare
that fit with samples.
"""

import numpy as np

from ris_lab import SystemConfig, fit_cascade
from ris_lab.channel import cdf_cascade_power
from ris_lab.montecarlo import block_rng, sample_cascade

cfg = SystemConfig()
fit = fit_cascade(cfg)
print(f"N = {cfg.n_elements}, K = {cfg.k_gr_db} dB: k_hat = {fit.k_hat:.3f}, theta_hat = {fit.theta_hat:.4f}")

# a quarter of a million cascade draws, generated block by block
x = np.concatenate([sample_cascade(cfg, block_rng(1, b), 25_000) for b in range(10)])
print(f"mean amplitude: fit {fit.mean_amplitude:.3f}, samples {x.mean():.3f}")

# the power CDF at a few quantiles of the samples
z = x ** 2
for q in (0.05, 0.25, 0.5, 0.75, 0.95):
    zq = np.quantile(z, q)
    print(f"  P(Z <= {zq:9.1f}): empirical {q:.2f}, fit {cdf_cascade_power(fit, zq):.4f}")
