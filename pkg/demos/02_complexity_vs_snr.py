"""Per-block complexity against SNR, and its moments against table size.

Run: python3 demos/02_complexity_vs_snr.py
"""
import numpy as np

from crancomp import ComplexityModelParams, complexity, make_equally_spaced_table
from crancomp.analytic import average_rate, fixed_moments, outage_complexity_single
from crancomp.channel import FixedRayleigh

params = ComplexityModelParams()
table = make_equally_spaced_table(27)

# sawtooth: complexity drops each time a faster MCS becomes available
snr_db = np.arange(-8.0, 20.0, 1.0)
c = complexity(10 ** (snr_db / 10), 1.0, params, table)
print("SNR [dB]  complexity [bit-iter/pcu]")
for s, v in zip(snr_db, c):
    print(f"{s:8.1f}  {v:8.4f}")

print("\nRayleigh, 10 dB mean SNR")
print(" N_R  margin[dB]   E[C]    10log10 Var   C_out(0.1)   E[R]")
ch = FixedRayleigh(10.0)
for n_r in (10, 30, 50):
    tab = make_equally_spaced_table(n_r)
    for mdb in (0.0, 0.9):
        mg = 10 ** (mdb / 10)
        m1, m2 = fixed_moments(params, tab, mg, 10.0)
        out = outage_complexity_single(params, tab, mg, ch, 0.1)
        print(f"{n_r:4d}  {mdb:9.1f}  {m1:7.4f}  {10 * np.log10(m2 - m1 * m1):11.4f}"
              f"  {out:10.4f}  {average_rate(tab, mg, ch):6.4f}")
