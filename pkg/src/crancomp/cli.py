"""Command-line experiment runner.

Each experiment evaluates a grid and writes one row per grid point, as CSV
(``#``-prefixed metadata lines, then a header) or JSON (``meta`` plus
``columns`` and ``rows``). Numeric headers end in a unit suffix.

Exit codes: 0 success, 2 configuration error, 3 a validation check failed,
4 numerical failure. Errors go to stderr as a single ``key=value`` line.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional

import numpy as np

from . import __version__
from . import analytic as an
from .config import ConfigError, ResolvedConfig, load_config
from .decoder import complexity
from .mcs import McsTable, below_first_threshold, make_equally_spaced_table, select_index
from .montecarlo import SimConfig, SimConfigError, run as mc_run
from .specfun import SpecFunDomainError

EXPERIMENTS = ("sweep_snr", "sweep_nr", "sweep_nc", "gain", "diversity", "crt", "simulate", "validate")

# default axes when the config has no sweep block
_DEFAULT_AXES = {
    "sweep_snr": [round(-10.0 + 0.05 * i, 12) for i in range(601)],
    "sweep_nr": [10, 15, 20, 25, 30, 35, 40, 45, 50],
    "sweep_nc": [1, 2, 3, 4, 5, 10, 20, 50, 100, math.inf],
    "gain": [2, 3, 4, 5, 10, 20, 50, 100, math.inf],
    "crt": [1, 2, 5, 10, 100, math.inf],
    "diversity": [float(f"{x:.12g}") for x in np.logspace(-3, -1, 9)],
}


# ------------------------------------------------------------- experiments
# Each work function maps (cfg, unit) -> list of row dicts; units are
# evaluated in order and rows are concatenated in that order.

def _table_for(cfg: ResolvedConfig, n_r: int) -> McsTable:
    v = cfg.values
    return make_equally_spaced_table(n_r, v["mcs.gamma_first_db"], v["mcs.gamma_last_db"], v["model.nu_db"])


def _sweep_snr(cfg, unit):
    mdb, snr_db = unit
    g = 10.0 ** (np.asarray(snr_db) / 10.0)
    mg = 10.0 ** (mdb / 10.0)
    tx = ~below_first_threshold(g, mg, cfg.table)
    k = np.where(tx, select_index(g, mg, cfg.table), 0)
    rate = np.where(tx, cfg.table.rates[np.maximum(k, 1) - 1], 0.0)
    c = complexity(g, mg, cfg.params, cfg.table)
    ce = complexity(g, mg, cfg.params, cfg.table, exact=True)
    return [dict(margin_db=mdb, snr_db=s, snr_lin=float(gi), mcs_index_idx=int(ki), rate_bits_pcu=float(r),
                 complexity_bititer_pcu=float(a), complexity_exact_bititer_pcu=float(b))
            for s, gi, ki, r, a, b in zip(snr_db, g, k, rate, c, ce)]


def _mc(cfg, table, margin, n_c, workers=1):
    n = cfg.n_trials - cfg.n_trials % n_c
    sc = SimConfig(cfg.channel, table, cfg.params, margin, n, n_c, cfg.eps_hat, cfg.seed, cfg.sim_mode)
    return mc_run(sc, workers=workers, keep_samples=False)


def _sweep_nr(cfg, unit):
    mdb, n_r = unit
    n_r = int(n_r)
    table = _table_for(cfg, n_r)
    mg = 10.0 ** (mdb / 10.0)
    m, v = an.complexity_moments(cfg.params, table, mg, cfg.channel, cfg.variance)
    row = dict(margin_db=mdb, n_r_count=n_r, mean_complexity_bititer_pcu=m,
               var_complexity_bititer2_pcu2=v,
               var_complexity_db=10.0 * math.log10(v) if v > 0 else -math.inf,
               outage_complexity_bititer_pcu=an.outage_complexity_single(
                   cfg.params, table, mg, cfg.channel, cfg.eps_hat),
               expected_rate_bits_pcu=an.average_rate(table, mg, cfg.channel))
    if cfg.monte_carlo:
        st = _mc(cfg, table, mg, 1)
        row.update(mc_mean_complexity_bititer_pcu=st.mean_complexity,
                   mc_var_complexity_bititer2_pcu2=st.var_complexity,
                   mc_outage_complexity_bititer_pcu=st.outage_complexity_tx,
                   mc_expected_rate_bits_pcu=st.mean_rate)
    return [row]


def _moments(cfg, mg):
    return an.complexity_moments(cfg.params, cfg.table, mg, cfg.channel, cfg.variance)


def _sweep_nc(cfg, unit):
    mdb, axis = unit
    mg = 10.0 ** (mdb / 10.0)
    m, v = _moments(cfg, mg)
    rows = []
    for n_c in axis:
        row = dict(margin_db=mdb, n_c_cells=n_c,
                   eps_comp_prob=an.per_cell_constraint(cfg.eps_hat, n_c) if math.isfinite(n_c) else 1.0,
                   outage_clt_bititer_pcu=an._outage(cfg.params, cfg.table, mg, cfg.channel,
                                                     cfg.eps_hat, n_c, "clt", cfg.variance, (m, v)))
        if cfg.monte_carlo:
            row["mc_outage_bititer_pcu"] = (_mc(cfg, cfg.table, mg, int(n_c)).empirical_outage_complexity
                                           if math.isfinite(n_c) else math.nan)
        rows.append(row)
    return rows


def _gain(cfg, unit):
    mdb, axis = unit
    mg = 10.0 ** (mdb / 10.0)
    mom = _moments(cfg, mg)
    rows = []
    for n_c in axis:
        row = dict(margin_db=mdb, n_c_cells=n_c)
        for norm in ("per_cell", "scaled"):
            for num, tag in (("clt", "clt"), ("cdf_inversion", "cdf")):
                row[f"gain_{norm.replace('_', '')}_{tag}_ratio"] = an.computational_gain(
                    cfg.params, cfg.table, mg, cfg.channel, cfg.eps_hat, n_c,
                    normalization=norm, numerator=num, variance=cfg.variance, moments=mom)
        rows.append(row)
    return rows


def _diversity(cfg, unit):
    mdb, axis = unit
    mg = 10.0 ** (mdb / 10.0)
    mom = _moments(cfg, mg)
    rows = []
    for eps in axis:
        row = dict(margin_db=mdb, eps_hat_prob=eps)
        for ec in ("system", "per_cell"):
            for cm, tag in (("clt", "clt"), ("cdf_inversion", "cdf")):
                row[f"diversity_{ec.replace('_', '')}_{tag}_decades_per_cell"] = an.computational_diversity(
                    cfg.params, cfg.table, mg, cfg.channel, eps, eps_comp=ec, c_max=cm,
                    variance=cfg.variance, moments=mom)
        rows.append(row)
    return rows


def _crt(cfg, unit):
    mdb, axis = unit
    mg = 10.0 ** (mdb / 10.0)
    return [dict(margin_db=mdb, n_c_cells=n_c,
                 crt_bits_per_bititer=an.complexity_rate_tradeoff(
                     cfg.params, cfg.table, cfg.channel, cfg.eps_hat, n_c, mg, variance=cfg.variance),
                 expected_rate_bits_pcu=an.average_rate(cfg.table, mg, cfg.channel))
            for n_c in axis]


_WORK: dict[str, Callable] = dict(sweep_snr=_sweep_snr, sweep_nr=_sweep_nr, sweep_nc=_sweep_nc,
                                  gain=_gain, diversity=_diversity, crt=_crt)


def _call(args):
    name, cfg, unit = args
    return _WORK[name](cfg, unit)


def _units(name, cfg):
    axis = cfg.sweep if cfg.sweep is not None else _DEFAULT_AXES[name]
    if name == "sweep_nr":
        if cfg.values["mcs.mode"] != "equally_spaced":
            raise ConfigError("sweeping the table size needs mcs.mode = equally_spaced", "mcs.mode")
        if any(x < 1 or x != int(x) for x in axis):
            raise ConfigError("table sizes must be positive integers", "sweep")
        return [(m, x) for m in cfg.margins_db for x in axis]
    if name in ("sweep_nc", "gain", "crt"):
        if any(not (x >= 1) for x in axis):
            raise ConfigError("cell counts must be >= 1", "sweep")
        if cfg.monte_carlo and any(math.isfinite(x) and x != int(x) for x in axis):
            raise ConfigError("simulated cell counts must be integers", "sweep")
    if name == "diversity" and any(not 0 < x < 1 for x in axis):
        raise ConfigError("outage targets must lie in (0, 1)", "sweep")
    return [(m, axis) for m in cfg.margins_db]


def _pmap(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run_grid(name: str, cfg: ResolvedConfig, workers: int = 1) -> list:
    units = _units(name, cfg)
    parts = _pmap(_call, [(name, cfg, u) for u in units], workers)
    return [r for p in parts for r in p]


def run_simulate(cfg: ResolvedConfig, workers: int = 1) -> list:
    rows = []
    for mdb, mg in zip(cfg.margins_db, cfg.margins):
        try:
            sc = SimConfig(cfg.channel, cfg.table, cfg.params, mg, cfg.n_trials, cfg.n_c,
                           cfg.eps_hat, cfg.seed, cfg.sim_mode)
        except SimConfigError as e:
            raise ConfigError(str(e), "run") from None
        st = mc_run(sc, workers=workers, keep_samples=False)
        m, v = _moments(cfg, mg)
        row = dict(margin_db=mdb, n_trials_count=st.n_trials, n_c_cells=st.n_c,
                   mc_mean_complexity_bititer_pcu=st.mean_complexity,
                   mc_var_complexity_bititer2_pcu2=st.var_complexity,
                   mc_expected_rate_bits_pcu=st.mean_rate,
                   mc_outage_percell_bititer_pcu=st.empirical_outage_complexity,
                   mc_transmit_prob=st.p_transmit,
                   mc_outage_tx_bititer_pcu=st.outage_complexity_tx)
        for p, q in st.group_sum_quantiles:
            row[f"mc_group_sum_q{p:.6g}_bititer_pcu"] = q
        row.update(mean_complexity_bititer_pcu=m, var_complexity_bititer2_pcu2=v,
                   expected_rate_bits_pcu=an.average_rate(cfg.table, mg, cfg.channel))
        if cfg.n_c == 1:
            row["outage_complexity_bititer_pcu"] = an.outage_complexity_single(
                cfg.params, cfg.table, mg, cfg.channel, cfg.eps_hat)
        else:
            row["outage_clt_bititer_pcu"] = an.outage_complexity_clt(m, v, cfg.eps_hat, cfg.n_c)
        rows.append(row)
    return rows


def run_validate(cfg: ResolvedConfig, workers: int = 1) -> list:
    from .validation import run_suite

    return run_suite(seed=cfg.seed, workers=workers)


# ------------------------------------------------------------------ output

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    if isinstance(x, (list, tuple)):
        return ";".join(_fmt(v) for v in x)
    return "" if x is None else str(x)


def _jval(x):
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(format(x, ".12g")) if math.isfinite(x) else format(x, "g")
    if isinstance(x, (list, tuple)):
        return [_jval(v) for v in x]
    return str(x)


def render(rows: list, meta: dict, fmt: str) -> str:
    cols: list = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    if fmt == "json":
        doc = dict(meta={k: _jval(v) for k, v in meta.items()}, columns=cols,
                   rows=[{c: _jval(r.get(c)) for c in cols} for r in rows])
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(r.get(c)) for c in cols) + "\n")
    return buf.getvalue()


def _err(kind: str, code: int, msg: str) -> int:
    msg = " ".join(str(msg).split()).replace('"', "'")
    print(f'error kind={kind} code={code} message="{msg}"', file=sys.stderr)
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"arguments: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crancomp", description="Decoder complexity experiments.")
    p.add_argument("--config", help="YAML config file (defaults apply when omitted)")
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strict", action="store_true", help="reject unknown config keys")
    return p


def main(argv: Optional[list] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        return _err("config", 2, e)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    if args.workers < 1:
        return _err("config", 2, "--workers must be >= 1")
    try:
        cfg = load_config(args.config, strict=args.strict, seed_override=args.seed)
        if args.experiment == "simulate":
            rows = run_simulate(cfg, args.workers)
        elif args.experiment == "validate":
            rows = run_validate(cfg, args.workers)
        else:
            rows = run_grid(args.experiment, cfg, args.workers)
    except ConfigError as e:
        return _err("config", 2, e)
    except (ArithmeticError, SpecFunDomainError) as e:
        return _err("numeric", 4, f"{type(e).__name__}: {e}")

    meta = {"crancomp.version": __version__, "experiment": args.experiment, "format": args.format}
    meta.update(cfg.echo())
    text = render(rows, meta, args.format)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as e:
            return _err("io", 2, f"cannot write {args.out}: {e.strerror}")
    else:
        sys.stdout.write(text)
    if args.experiment == "validate":
        bad = [r["check"] for r in rows if not r["passed_bool"]]
        if bad:
            return _err("validation", 3, "failed checks: " + ";".join(bad))
    return 0


if __name__ == "__main__":
    sys.exit(main())
