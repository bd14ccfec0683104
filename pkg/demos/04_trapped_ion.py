"""
Trapped-ion implementation
==========================

Laser parameters for a target model, validity margins, and a check that
the full three-drive Hamiltonian follows the effective two-photon
Rabi-Stark model. Frequencies are angular, built from 2 pi x kHz values.
"""

import math

from dickestark.dynamics import compare_effective
from dickestark.ion_map import TWO_PI, forward_map, inverse_map
from dickestark.model import ModelParams

eta, trap = 0.1, TWO_PI * 4980.0
Omega_S = TWO_PI * 120.0

# A carrier of 2 pi x 120 kHz at eta = 0.1 fixes U = 2 pi x 0.6 kHz. Choosing
# U / omega_c = 0.0168 then fixes the phonon-frame frequency omega_c.
U = eta**2 * Omega_S / 2
wc = U / 0.0168
eps = Omega_S / trap
lam = eta**2 * TWO_PI * 200.0 / 8 * (1 - 2 * eps)
N = 50
target = ModelParams(omega_q=0.015 * wc, g=N * lam, U=U, N=N, omega_c=wc)

drive = inverse_map(target, eta, trap)
khz = 1 / TWO_PI
print(f"U = 2pi x {U * khz:.3f} kHz, omega_c = 2pi x {wc * khz:.3f} kHz")
print(f"Omega_r = 2pi x {drive.Omega_r * khz:.3f} kHz, Omega_b = 2pi x {drive.Omega_b * khz:.3f} kHz")
print(f"delta_r = 2pi x {drive.delta_r * khz:.3f} kHz, delta_b = 2pi x {drive.delta_b * khz:.3f} kHz")

mapped = forward_map(drive, target.omega_c)
print("dimensionless model:", mapped.dimensionless())
for c in mapped.diagnostics:
    print(f"  {c.name:17s} {c.value:.4f} (threshold {c.threshold}) {c.status}")

# Full versus effective evolution of one ion from |g, 0>. A tenth of the
# natural period keeps the demo quick; the acceptance suite runs a full period.
single = drive.replace(N_ions=1)
lam1 = forward_map(single).lam
T = 0.1 * 2 * math.pi / (10 * lam1)
(report,) = compare_effective(single, n_max=20, T=T)
print(f"\nT = {report.T:.4f} ms, {report.steps} steps, fidelity {report.fidelity:.6f}, "
      f"norm drift {report.norm_drift:.1e}")
