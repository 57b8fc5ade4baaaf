"""Trial-based estimation of the complexity statistics.

Trials are processed in fixed-size blocks. Block ``b`` draws from a Philox
stream keyed by the run seed with ``b`` in the high counter word, so the
draws for a given trial never depend on how blocks are spread over
workers.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .channel import ChannelSpec, FixedRayleigh, snr_from_uniforms
from .decoder import ComplexityModelParams, IterationPmf, complexity
from .mcs import McsTable, below_first_threshold, select_index

BLOCK = 1 << 16


class SimConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LteDataDriven:
    """Iteration statistics mode: code-block iteration counts drawn from `pmf`.

    The table must carry D_k and C_k for every MCS.
    """

    pmf: IterationPmf
    s_re: int = 6480


@dataclass(frozen=True)
class SimConfig:
    channel: ChannelSpec
    table: McsTable
    params: ComplexityModelParams = ComplexityModelParams()
    margin: float = 1.0
    n_trials: int = 100_000
    n_c: int = 1
    eps_hat: float = 0.1
    seed: int = 0
    mode: Union[str, LteDataDriven] = "model_driven"

    def __post_init__(self):
        if self.n_c < 1:
            raise SimConfigError("n_c must be >= 1")
        if self.n_trials < self.n_c or self.n_trials % self.n_c:
            raise SimConfigError("n_trials must be a positive multiple of n_c")
        if not 0 < self.eps_hat < 1:
            raise SimConfigError("eps_hat must lie in (0, 1)")
        if not self.margin >= 1:
            raise SimConfigError("margin must be >= 1 (linear)")
        if not 0 <= self.seed < 2 ** 64:
            raise SimConfigError("seed must be an unsigned 64-bit integer")
        if isinstance(self.mode, LteDataDriven):
            if not self.table.has_geometry():
                raise SimConfigError("data-driven mode needs d_k and c_k in the MCS table")
        elif self.mode != "model_driven":
            raise SimConfigError(f"unknown mode {self.mode!r}")


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent generator for block `block` of a run seeded by `seed`."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(block)]))


def _lte_complexity(gamma, k, tx, mode: LteDataDriven, table: McsTable, rng):
    n = gamma.size
    d = np.array([e.tb_info_bits_per_cb for e in table.entries], dtype=float)
    c = np.array([e.cb_count for e in table.entries], dtype=int)
    cmax = int(c.max())
    u_out = rng.random((n, cmax))
    u_it = rng.random((n, cmax))
    out = np.zeros(n)
    idx = np.flatnonzero(tx)
    if idx.size == 0:
        return out
    pmf = mode.pmf
    with np.errstate(divide="ignore"):
        snr_db = 10.0 * np.log10(gamma[idx])
    rows = np.atleast_1d(pmf.lookup(k[idx], snr_db))
    cdf = np.cumsum(pmf.probs[rows], axis=1)
    its = 1 + np.sum(u_it[idx][:, :, None] > cdf[:, None, :-1], axis=2)
    its = np.where(u_out[idx] < pmf.eps_cb[rows][:, None], pmf.l_max, its)
    used = np.arange(cmax)[None, :] < c[k[idx] - 1][:, None]
    out[idx] = d[k[idx] - 1] * np.sum(its * used, axis=1) / mode.s_re
    return out


def simulate_block(cfg: SimConfig, block: int, n: int):
    """(snr, mcs index, rate, complexity, transmitted) for one block."""
    rng = block_generator(cfg.seed, block)
    u1 = 1.0 - rng.random(n)
    u2 = None if isinstance(cfg.channel, FixedRayleigh) else 1.0 - rng.random(n)
    gamma = snr_from_uniforms(cfg.channel, u1, u2)
    k = select_index(gamma, cfg.margin, cfg.table)
    tx = ~below_first_threshold(gamma, cfg.margin, cfg.table)
    rate = np.where(tx, cfg.table.rates[k - 1], 0.0)
    if isinstance(cfg.mode, LteDataDriven):
        c = _lte_complexity(gamma, k, tx, cfg.mode, cfg.table, rng)
    else:
        c = complexity(gamma, cfg.margin, cfg.params, cfg.table)
    return gamma, k, rate, np.asarray(c, dtype=float), tx


def _run_block(args):
    cfg, b, n = args
    _, _, rate, c, tx = simulate_block(cfg, b, n)
    return rate, c, tx


# ------------------------------------------------------------ statistics

def quantile(sorted_sample, p: float) -> float:
    """Order statistic with linear interpolation, h = (n - 1) p."""
    x = np.asarray(sorted_sample, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    h = (x.size - 1) * p
    lo = int(math.floor(h))
    hi = min(lo + 1, x.size - 1)
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


@dataclass
class TrialStats:
    mean_complexity: float
    var_complexity: float
    mean_rate: float
    empirical_outage_complexity: float
    group_sum_quantiles: list
    n_effective: int
    seed_lineage: dict
    n_trials: int
    seed: int
    n_c: int
    eps_hat: float
    p_transmit: float
    mean_complexity_tx: float
    var_complexity_tx: float
    mean_rate_tx: float
    outage_complexity_tx: float
    group_mean_quantiles: list = field(default_factory=list)
    samples: Optional[np.ndarray] = field(default=None, repr=False)  # sorted complexities
    group_means: Optional[np.ndarray] = field(default=None, repr=False)  # sorted
    rates: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "mean_complexity": self.mean_complexity,
            "var_complexity": self.var_complexity,
            "mean_rate": self.mean_rate,
            "outage_complexity_percell": self.empirical_outage_complexity,
            "quantiles": [{"p": p, "group_sum": v} for p, v in self.group_sum_quantiles],
            "n_trials": self.n_trials,
            "seed": self.seed,
            "n_c": self.n_c,
            "eps_hat": self.eps_hat,
            "n_effective": self.n_effective,
            "p_transmit": self.p_transmit,
            "mean_complexity_tx": self.mean_complexity_tx,
            "var_complexity_tx": self.var_complexity_tx,
            "mean_rate_tx": self.mean_rate_tx,
            "outage_complexity_tx": self.outage_complexity_tx,
            "seed_lineage": self.seed_lineage,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run(cfg: SimConfig, workers: int = 1, keep_samples: bool = True) -> TrialStats:
    """Run the trials and aggregate.

    The per-cell outage budget is the (1 - eps_hat) quantile of single-cell
    complexity when n_c = 1, and otherwise the quantile of group means
    (consecutive groups of n_c trials) at probability (1 - eps_hat)^n_c.
    No-transmission draws contribute zero complexity and rate; the ``*_tx``
    fields condition on transmission instead.
    """
    nb = -(-cfg.n_trials // BLOCK)
    jobs = [(cfg, b, min(BLOCK, cfg.n_trials - b * BLOCK)) for b in range(nb)]
    parts = _pmap(_run_block, jobs, workers)
    rate = np.concatenate([p[0] for p in parts])
    c = np.concatenate([p[1] for p in parts])
    tx = np.concatenate([p[2] for p in parts])

    n = c.size
    groups = c.reshape(-1, cfg.n_c).mean(axis=1)
    p_grp = (1.0 - cfg.eps_hat) ** cfg.n_c
    cs = np.sort(c)
    gs = np.sort(groups)
    c_tx = c[tx]
    cs_tx = np.sort(c_tx)
    outage = quantile(cs, 1.0 - cfg.eps_hat) if cfg.n_c == 1 else quantile(gs, p_grp)
    probs = sorted({0.5, 0.9, 0.99, p_grp})
    sum_q = [(p, cfg.n_c * quantile(gs, p)) for p in probs]
    mean_q = [(p, quantile(gs, p)) for p in probs]
    ntx = int(tx.sum())
    return TrialStats(
        mean_complexity=float(c.mean()),
        var_complexity=float(c.var(ddof=1)) if n > 1 else 0.0,
        mean_rate=float(rate.mean()),
        empirical_outage_complexity=outage,
        group_sum_quantiles=sum_q,
        n_effective=n,
        seed_lineage={"seed": cfg.seed, "generator": "philox", "streams": list(range(nb)),
                      "block_size": BLOCK},
        n_trials=cfg.n_trials,
        seed=cfg.seed,
        n_c=cfg.n_c,
        eps_hat=cfg.eps_hat,
        p_transmit=ntx / n,
        mean_complexity_tx=float(c_tx.mean()) if ntx else 0.0,
        var_complexity_tx=float(c_tx.var(ddof=1)) if ntx > 1 else 0.0,
        mean_rate_tx=float(rate[tx].mean()) if ntx else 0.0,
        outage_complexity_tx=quantile(cs_tx, 1.0 - cfg.eps_hat) if ntx else 0.0,
        group_mean_quantiles=mean_q,
        samples=cs if keep_samples else None,
        group_means=gs if keep_samples else None,
        rates=rate if keep_samples else None,
    )


def confidence(stats: TrialStats, level: float = 0.95) -> dict:
    """Approximate intervals for the scalar fields.

    Means use a normal interval from the within-run variance; the outage
    quantile uses binomial order-statistic bounds on the kept samples.
    """
    from scipy.stats import norm

    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    z = float(norm.ppf(0.5 + level / 2.0))
    n = stats.n_effective
    out = {}
    se = math.sqrt(stats.var_complexity / n)
    out["mean_complexity"] = (stats.mean_complexity - z * se, stats.mean_complexity + z * se)
    if stats.rates is not None:
        sr = float(np.std(stats.rates, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
        out["mean_rate"] = (stats.mean_rate - z * sr, stats.mean_rate + z * sr)
    if stats.samples is not None:
        x = stats.samples
        m4 = float(np.mean((x - stats.mean_complexity) ** 4))
        sv = math.sqrt(max(m4 - stats.var_complexity ** 2, 0.0) / n)
        out["var_complexity"] = (stats.var_complexity - z * sv, stats.var_complexity + z * sv)
        if stats.n_c == 1:
            sample, p = x, 1.0 - stats.eps_hat
        else:
            sample, p = stats.group_means, (1.0 - stats.eps_hat) ** stats.n_c
        m = sample.size
        half = z * math.sqrt(m * p * (1.0 - p))
        lo = int(min(max(math.floor(m * p - half), 0), m - 1))
        hi = int(min(max(math.ceil(m * p + half), 0), m - 1))
        if level == 0:
            q = stats.empirical_outage_complexity
            out["outage_complexity_percell"] = (q, q)
        else:
            out["outage_complexity_percell"] = (float(sample[lo]), float(sample[hi]))
    return out
