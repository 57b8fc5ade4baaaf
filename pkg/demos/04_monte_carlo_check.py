"""Simulation against the analytic results.

Run: python3 demos/04_monte_carlo_check.py
"""
from crancomp import ComplexityModelParams, FixedRayleigh, make_equally_spaced_table
from crancomp import analytic as an
from crancomp.montecarlo import SimConfig, confidence, run

params = ComplexityModelParams()
ch = FixedRayleigh(10.0)
for n_r in (10, 50):
    table = make_equally_spaced_table(n_r)
    st = run(SimConfig(ch, table, params, n_trials=1_000_000, seed=1), workers=2)
    ci = confidence(st)
    m, v = an.complexity_moments(params, table, 1.0, ch)
    lo, hi = ci["mean_complexity"]
    print(f"N_R={n_r}")
    print(f"  mean complexity: simulated {st.mean_complexity:.4f} [{lo:.4f}, {hi:.4f}]  closed form {m:.4f}")
    print(f"  variance:        simulated {st.var_complexity:.4f}  closed form {v:.4f}")
    print(f"  mean rate:       simulated {st.mean_rate:.4f}  analytic {an.average_rate(table, 1.0, ch):.4f}")
    print(f"  90% budget | tx: simulated {st.outage_complexity_tx:.4f}"
          f"  CDF inversion {an.outage_complexity_single(params, table, 1.0, ch, 0.1):.4f}")
