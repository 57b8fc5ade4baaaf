"""Simulation driven by per-code-block iteration statistics.

Real decoder logs are not shipped, so this builds a synthetic iteration pmf
shaped by the analytic model, writes it next to an MCS table carrying
transport-block geometry, and simulates from the files. Swap in measured
files with the same layout to use real data.

Run: python3 demos/05_lte_data_driven.py
"""
import math
from pathlib import Path

import numpy as np
from scipy import stats

from crancomp import ComplexityModelParams, FixedRayleigh, complexity, make_equally_spaced_table
from crancomp.decoder import IterationPmf, save_iteration_pmf
from crancomp.mcs import save_table, with_geometry
from crancomp.montecarlo import LteDataDriven, SimConfig, run

L_MAX, S_RE, CB_BITS = 8, 6480, 6144
here = Path(__file__).parent / "data"
here.mkdir(exist_ok=True)

params = ComplexityModelParams()
base = make_equally_spaced_table(15)
c_k = [max(1, math.ceil(r * S_RE / CB_BITS)) for r in base.rates]
d_k = [round(r * S_RE / c) for r, c in zip(base.rates, c_k)]
table = with_geometry(base, d_k, c_k)

rows_k, rows_s, rows_e, rows_p = [], [], [], []
edges = list(table.thresholds_db) + [45.0]
for k in range(1, table.n_r + 1):
    for s in np.round(np.arange(edges[k - 1] - 0.1, edges[k] + 0.1, 0.1), 1):
        c = float(complexity(10 ** (s / 10), 1.0, params, table)) if s >= edges[0] else 0.0
        # target mean iteration count from the model, kept inside [1, L_MAX]
        mean_it = min(max(c / table.rates[k - 1], 1.0), L_MAX - 0.5)
        p = stats.binom.pmf(np.arange(L_MAX), L_MAX - 1, (mean_it - 1) / (L_MAX - 1))
        rows_k.append(k)
        rows_s.append(float(s))
        rows_e.append(float(min(0.1 * math.exp(-(s - edges[k - 1])), 0.5)))
        rows_p.append(p / p.sum())
pmf = IterationPmf(np.array(rows_k), np.array(rows_s), np.array(rows_e), np.array(rows_p))
save_iteration_pmf(pmf, here / "iteration_pmf.csv")
save_table(table, here / "mcs_with_geometry.csv")
print(f"wrote {here / 'iteration_pmf.csv'} ({len(rows_k)} rows) and {here / 'mcs_with_geometry.csv'}")

ch = FixedRayleigh(10.0)
for mode in ("model_driven", LteDataDriven(pmf, S_RE)):
    st = run(SimConfig(ch, table, params, n_trials=200_000, seed=3, mode=mode))
    name = mode if isinstance(mode, str) else "data_driven"
    print(f"{name:>13}: E[C]={st.mean_complexity:.4f}  Var={st.var_complexity:.4f}"
          f"  90% budget={st.empirical_outage_complexity:.4f}")
