"""
Stark-tunable phase diagram
===========================

Where the normal phase gives way to superradiance, and where the spectrum
collapses, as the Stark coupling U is turned up. All frequencies are in
units of the cavity frequency.
"""

import numpy as np

from dickestark.meanfield import energy_landscape, phase_diagram, solve
from dickestark.model import ModelParams, collapse_coupling, critical_rabi

# The canonical point: 50 qubits with a small splitting.
base = ModelParams(omega_q=0.015, N=50)

# Both boundaries in closed form. A larger U lowers the transition coupling
# and, more slowly, the collapse coupling.
print("    U      g_t      g_c")
for U in (0.0, 0.0168, 0.03):
    p = base.replace(U=U)
    print(f"{U:7.4f}  {critical_rabi(p):.4f}  {collapse_coupling(p):.4f}")

# A coarse map of the three regions (N = normal, S = superradiant, x = collapse).
U_grid = np.linspace(0, 0.03, 7)
g_grid = np.linspace(0, 0.6, 31)
diagram = phase_diagram(U_grid, g_grid)
glyph = {"NormalPhase": ".", "SuperradiantPhase": "S", "CollapseRegion": "x"}
print("\ng from 0 to 0.6 ->")
for U, row in zip(U_grid, diagram.labels):
    print(f"U={U:.3f} " + "".join(glyph[str(lab)] for lab in row))

# Switching at fixed g: at g = 0.3 the normal phase is stable for small U and
# becomes superradiant once g_t(U) drops below 0.3.
print("\nfixed g = 0.3:")
for U in (0.0, 0.0168, 0.025, 0.03):
    s = solve(base.replace(g=0.3, U=U))
    print(f"  U={U:.4f}  {s.phase!s:18s} beta={s.beta:.4f}  E={s.energy:.6f}")

# The energy landscape shows the double well forming: E(beta) for three
# couplings around the U = 0.0168 transition.
betas = np.linspace(0, 5, 11)
print("\nE_G(beta), U = 0.0168")
print("beta  " + "  ".join(f"{b:8.2f}" for b in betas))
for g in (0.25, 0.33, 0.40):
    pts = energy_landscape(base.replace(g=g, U=0.0168), betas)
    print(f"g={g:.2f} " + "  ".join(f"{q.energy:8.4f}" for q in pts))
