"""Tour of the special functions behind the closed forms.

Run: python3 demos/01_special_functions.py
"""
from scipy import special

from crancomp import specfun as sf

print("E1(x) against scipy.special.exp1")
for x in (1e-3, 0.5, 1.0, 5.0, 50.0):
    print(f"  x={x:<7g} ours={sf.exp_integral_e1(x):.15e}  scipy={special.exp1(x):.15e}")

print("\nlower incomplete gamma (unnormalized) against scipy")
for a, x in ((0.5, 0.1), (2.0, 1.0), (1.7, 10.0)):
    ref = special.gammainc(a, x) * special.gamma(a)
    print(f"  a={a}, x={x}: ours={sf.incomplete_gamma_lower(a, x):.15e}  scipy={ref:.15e}")

print("\ninverse error function")
for y in (0.1, 0.8, 0.999999):
    print(f"  y={y}: ours={sf.inv_erf(y):.15f}  scipy={special.erfinv(y):.15f}")

print("\nlog-space normal quantile, far tail (no underflow)")
for lp in (-1e2, -1e4):
    print(f"  log p={lp:g}: z={sf.norm_ppf_log(lp):.6f}")
