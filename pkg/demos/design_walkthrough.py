"""From converter parameters to a prediction horizon.

Walks the design path: operating point, small-signal model, discrete CARIMA
model, GPC gains, closed-loop poles, then the horizon scans and parameter
sweeps used to pick P.
"""
import numpy as np

from gpcboost import (
    ConverterParams,
    GpcConfig,
    assess,
    continuous_tf,
    discrete_plant,
    min_horizon,
    operating_point,
    robust_horizon,
    sweep,
    synthesize,
)
from gpcboost.errors import CornerDominanceViolated

np.set_printoptions(precision=6, suppress=True)
rule = "-" * 60

params = ConverterParams()  # 50 V -> 70 V, 15 mH, 470 uF, 66 ohm, 10 kHz
op = operating_point(params)
print(f"operating point: D = {op.d:.4f}, iL = {op.il:.4f} A, vO = {op.vo} V")

ct = continuous_tf(params)
print("G_vd(s) numerator (ascending s):", np.array(ct.num))
print("G_vd(s) denominator (ascending s):", np.array(ct.den))
print("right-half-plane zero at s =", ct.zeros().real, "rad/s")
print("DC gain:", ct(0).real, "V per unit duty")
print(rule)

# ZOH is the default; Tustin is kept for comparison
for method in ("zoh", "tustin"):
    plant = discrete_plant(params, method)
    print(f"{method:6s} b = {plant.b.coeffs}  a = {plant.a.coeffs}")
print(rule)

plant = discrete_plant(params)
syn = synthesize(plant, GpcConfig(horizon_p=13, lam=10.0))
print("step coefficients g_1..g_13:")
print(syn.step_coeffs)
print("gain row K:")
print(syn.k_row)
print("sum of K:", syn.k_row.sum())

rep = assess(plant, syn)
print("closed-loop poles at P = 13:")
for z in rep.poles:
    print(f"   {z.real:+.6f} {z.imag:+.6f}j   |z| = {abs(z):.6f}")
print("stable:", rep.stable)
print(rule)

# the sign of sum(K) flips where the horizon first looks past the inverse response
print(" P   sum(K)     max|z|   stable")
for p in range(8, 21):
    s = synthesize(plant, GpcConfig(horizon_p=p))
    r = assess(plant, s)
    print(f"{p:2d}  {s.k_row.sum():+.4f}   {r.max_modulus:.4f}   {r.stable}")
print("smallest stabilizing horizon:", min_horizon(params))
print(rule)

print("lambda at P = 13:")
for rec in sweep(params, {"lambda": range(2, 11)}):
    print(f"   lambda = {rec.lam:4.1f}  max|z| = {rec.max_modulus:.4f}  stable = {rec.stable}")

print("load at P = 13:")
for rec in sweep(params, {"R": [40, 50, 60, 70]}):
    print(f"   R = {rec.r:4.0f} ohm  max|z| = {rec.max_modulus:.4f}  stable = {rec.stable}")

print("reference at P = 13:")
for rec in sweep(params, {"vref": [60, 70, 80, 90]}):
    print(f"   vref = {rec.vo_ref:4.0f} V  max|z| = {rec.max_modulus:.4f}  stable = {rec.stable}")
print(rule)

print("minimum horizon over the operating range:")
print("      ", "  ".join(f"{v:3d} V" for v in (60, 70, 80, 90)))
for r in (70, 60, 50, 40):
    row = [min_horizon(params.replace(r=r, vo_ref=v), p_max=60) for v in (60, 70, 80, 90)]
    print(f"{r:3d} ohm", "  ".join(f"{p:5d}" for p in row))

try:
    p = robust_horizon(params, (40, 70), (60, 90), p_max=60)
    print("robust horizon for R in [40, 70] ohm, vref in [60, 90] V:", p)
except CornerDominanceViolated as exc:
    print("corner check failed:", exc)
