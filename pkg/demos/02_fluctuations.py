"""
Fluctuations and squeezing across the transition
================================================

Above mean field the collective spin carries a single bosonic fluctuation
mode. Its gap closes at g_t and its vacuum is squeezed; in the normal phase
the squeezed quadrature is P.
"""

from dickestark import BogoliubovUnstable
from dickestark.fluctuations import (
    bogoliubov_diagonalize,
    np_effective,
    np_squeezing,
    quadrature_variances,
    sp_effective,
    spin_moments,
)
from dickestark.model import ModelParams, collapse_coupling, critical_rabi

base = ModelParams(omega_q=0.015, N=50, U=0.0168)
gt, gc = critical_rabi(base), collapse_coupling(base)
print(f"g_t = {gt:.5f}, g_c = {gc:.5f}")

# Approaching g_t from below, the excitation energy goes to zero like
# sqrt(1 - g/g_t), the fluctuation signature of a second-order transition.
print("\nnormal phase")
print("  g/g_t     gap        r      var X     var P")
for f in (0.0, 0.5, 0.9, 0.99, 0.9999):
    p = base.replace(g=f * gt)
    gap = bogoliubov_diagonalize(np_effective(p)).excitation_energy
    r = np_squeezing(p)
    vx, vp = quadrature_variances(r)
    print(f"  {f:6.4f}  {gap:.3e}  {r:7.4f}  {vx:8.4f}  {vp:.4f}")

# In the superradiant phase the linear term in the fluctuations must vanish;
# alpha is re-solved for that and the mean-field value is kept for comparison.
print("\nsuperradiant phase")
print("  frac    beta_MF   beta_used    residual(MF)      omega1      omega2")
for frac in (0.1, 0.5, 0.9, 0.99):
    p = base.replace(g=gt + frac * (gc - gt))
    try:
        sp, form = sp_effective(p)
    except BogoliubovUnstable as exc:
        print(f"  {frac:4.2f}   unstable: {exc}")
        continue
    print(f"  {frac:4.2f}  {sp.beta_meanfield:8.4f}  {sp.alpha * 50**0.5:10.4f}  "
          f"{sp.residual_meanfield:13.2e}  {sp.omega1:10.5f}  {sp.omega2:10.5f}")

# Collective-spin moments; (sqrt var Jx, sqrt var Jy) are the axes of the
# fluctuation ellipse on the Bloch sphere.
print("\nspin moments")
for g in (0.1, 0.3, 0.38, 0.42):
    m = spin_moments(base.replace(g=g))
    ax, ay = m.ellipse_axes
    print(f"  g={g:.2f}  <Jx>={m.mean_Jx:7.3f}  <Jz>={m.mean_Jz:8.3f}  ellipse=({ax:.3f}, {ay:.3f})")
