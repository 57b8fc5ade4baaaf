"""Pooling many cells: per-cell outage budget, gain and diversity.

Users are dropped uniformly in a cell with fractional power control.

Run: python3 demos/03_pooling.py
"""
import math

from crancomp import ComplexityModelParams, make_equally_spaced_table, path_loss_fpc
from crancomp import analytic as an

params = ComplexityModelParams()
table = make_equally_spaced_table(27)
ch = path_loss_fpc(1.0, 2.0, 0.1)

for variance in ("total", "conditional"):
    m, v = an.complexity_moments(params, table, 1.0, ch, variance)
    print(f"variance mode {variance!r}: E[C]={m:.4f}  Var[C]={v:.4f}")
    for n_c in (1, 2, 10, 100):
        print(f"  N_c={n_c:<4d} per-cell budget {an.outage_complexity_clt(m, v, 0.1, n_c):.4f}")
    print(f"  N_c=inf  per-cell budget {an.outage_complexity_asymptotic(m, v, 0.1):.4f}")
    for n_c in (2, math.inf):
        g = an.computational_gain(params, table, 1.0, ch, 0.1, n_c, numerator="cdf_inversion",
                                  variance=variance, moments=(m, v))
        print(f"  gain at N_c={n_c}: {g:.4f}")
    d = an.computational_diversity(params, table, 1.0, ch, 0.1, variance=variance, moments=(m, v))
    print(f"  diversity at eps=0.1: {d:.4f}")

print("\nexact single-cell budget (CDF inversion):",
      f"{an.outage_complexity_single(params, table, 1.0, ch, 0.1):.4f}")
