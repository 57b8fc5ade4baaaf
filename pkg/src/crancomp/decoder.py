"""Turbo-decoder complexity model in bit-iterations per channel use."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .mcs import McsTable, below_first_threshold, select_index


class DecoderModelError(ValueError):
    pass


@dataclass(frozen=True)
class ComplexityModelParams:
    """Decoder model constants.

    zeta : node degree of the decoding graph (> 2)
    k_prime : fitted constant K'
    nu : gap to capacity, linear (> 1)
    eps_channel : target channel outage probability in (0, 1)
    """

    zeta: float = 6.0
    k_prime: float = 0.2
    nu: float = 10.0 ** 0.02
    eps_channel: float = 0.1

    def __post_init__(self):
        if not self.zeta > 2:
            raise DecoderModelError("zeta must exceed 2")
        if not self.k_prime > 0:
            raise DecoderModelError("k_prime must be positive")
        if not self.nu > 1:
            raise DecoderModelError("nu must exceed 1 (linear)")
        if not 0 < self.eps_channel < 1:
            raise DecoderModelError("eps_channel must lie in (0, 1)")

    @property
    def k(self) -> float:
        return k_of_eps(self)

    @property
    def g2(self) -> float:
        """(zeta - 2) / (K zeta); the gap at which complexity reaches zero is sqrt of this."""
        return (self.zeta - 2.0) / (self.k * self.zeta)

    @property
    def g(self) -> float:
        return math.sqrt(self.g2)

    @property
    def log2_zeta_m1(self) -> float:
        return math.log2(self.zeta - 1.0)


def k_of_eps(params: ComplexityModelParams) -> float:
    """K = -K' / log10(eps_channel)."""
    e = params.eps_channel
    if not 0 < e < 1:
        raise DecoderModelError("eps_channel must lie in (0, 1)")
    return -params.k_prime / math.log10(e)


@dataclass(frozen=True)
class TransportBlockGeometry:
    d_k: int  # info bits per code block
    c_k: int = 1  # code blocks per TB
    s_re: int = 6480  # channel uses per TB
    l_max: int = 8

    def __post_init__(self):
        for name in ("d_k", "c_k", "s_re", "l_max"):
            if getattr(self, name) < 1:
                raise DecoderModelError(f"{name} must be positive")


def gap(gamma, margin: float, table: McsTable):
    """l = log2(1 + gamma) - r(gamma, margin), inside the transmission region."""
    g = np.asarray(gamma, dtype=float)
    if np.any(below_first_threshold(g, margin, table)):
        raise DecoderModelError("gap undefined below the first threshold (no transmission)")
    r = table.rates[select_index(g, margin, table) - 1]
    out = np.log2(1.0 + g) - r
    return float(out) if out.ndim == 0 else out


def complexity(gamma, margin: float, params: ComplexityModelParams, table: McsTable,
               exact: bool = False, floor: Union[None, float, Sequence[float]] = None,
               return_raw: bool = False):
    """Decoding complexity C(gamma, margin) in bit-iterations pcu.

    Zero below the first threshold (scaled by the margin) and clamped at
    zero above the point where the gap reaches sqrt(g2).

    Parameters
    ----------
    exact : bool
        Keep the additive 2/zeta term inside the logarithm.
    floor : float or per-MCS sequence, optional
        Lower bound applied in the transmission region (e.g. one iteration,
        D_k C_k / S_re).
    return_raw : bool
        Also return the unclamped values (nan where no transmission).
    """
    g = np.asarray(gamma, dtype=float)
    k = select_index(g, margin, table)
    r = table.rates[k - 1]
    tx = ~below_first_threshold(g, margin, table)
    with np.errstate(divide="ignore", invalid="ignore"):
        l = np.log2(1.0 + g) - r
        if exact:
            z = params.zeta
            arg = -math.log10(params.eps_channel) / (l * l * params.k_prime) * (z - 2.0) / z + 2.0 / z
            raw = r / params.log2_zeta_m1 * np.log2(arg)
        else:
            raw = r / params.log2_zeta_m1 * (math.log2(params.g2) - 2.0 * np.log2(l))
    raw = np.where(tx, raw, np.nan)
    c = np.where(tx, np.maximum(np.nan_to_num(raw, nan=0.0), 0.0), 0.0)
    if floor is not None:
        fl = np.asarray(floor, dtype=float)
        fl = fl[k - 1] if fl.ndim else fl
        c = np.where(tx, np.maximum(c, fl), 0.0)
    if c.ndim == 0:
        c = float(c)
        raw = float(raw)
    return (c, raw) if return_raw else c


# ----------------------------------------------------------- iteration pmf

@dataclass(frozen=True)
class IterationPmf:
    """Iteration-count pmfs on an (mcs_index, snr_db) grid.

    ``probs[j, i]`` is P(L = i + 1) for grid row j among decoded (non-outage)
    code blocks; ``eps_cb[j]`` is the code-block outage probability.
    """

    mcs_index: np.ndarray
    snr_db: np.ndarray
    eps_cb: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[0] != len(self.mcs_index):
            raise DecoderModelError("malformed pmf array")
        if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-9):
            raise DecoderModelError("malformed pmf: rows must be nonnegative and sum to 1")
        e = np.asarray(self.eps_cb, dtype=float)
        if np.any((e < 0) | (e > 1)):
            raise DecoderModelError("eps_cb must lie in [0, 1]")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "eps_cb", e)
        object.__setattr__(self, "mcs_index", np.asarray(self.mcs_index, dtype=int))
        object.__setattr__(self, "snr_db", np.asarray(self.snr_db, dtype=float))

    @property
    def l_max(self) -> int:
        return self.probs.shape[1]

    def lookup(self, mcs_index, snr_db, tol_db: float = 0.05):
        """Grid row(s) nearest in SNR for the given MCS, within `tol_db`."""
        ks = np.atleast_1d(np.asarray(mcs_index, dtype=int))
        ss = np.atleast_1d(np.asarray(snr_db, dtype=float))
        ks, ss = np.broadcast_arrays(ks, ss)
        rows = np.empty(ks.shape, dtype=int)
        for kv in np.unique(ks):
            sel = np.flatnonzero(self.mcs_index == kv)
            m = ks == kv
            if sel.size == 0:
                raise DecoderModelError(f"no pmf grid for MCS {kv}")
            order = sel[np.argsort(self.snr_db[sel])]
            grid = self.snr_db[order]
            x = ss[m]
            pos = np.searchsorted(grid, x)
            lo = np.clip(pos - 1, 0, len(grid) - 1)
            hi = np.clip(pos, 0, len(grid) - 1)
            pos = np.where(np.abs(x - grid[lo]) <= np.abs(grid[hi] - x), lo, hi)
            d = np.abs(grid[pos] - x)
            if np.any(d > tol_db + 1e-12):
                bad = x[np.argmax(d)]
                raise DecoderModelError(f"no pmf grid point within {tol_db} dB of {bad:.3f} dB for MCS {kv}")
            rows[m] = order[pos]
        return rows if np.ndim(mcs_index) or np.ndim(snr_db) else int(rows[0])

    def mean_iterations(self, row):
        i = np.arange(1, self.l_max + 1)
        e = self.eps_cb[row]
        return (1.0 - e) * (self.probs[row] @ i) + e * self.l_max


def empirical_complexity(geom: TransportBlockGeometry, pmf: IterationPmf,
                         mcs_index: int, snr_db: float) -> float:
    """D_k C_k E[L] / S_re with outage blocks counted at L_max iterations."""
    if pmf.l_max != geom.l_max:
        raise DecoderModelError("pmf length does not match l_max")
    row = pmf.lookup(mcs_index, snr_db)
    return geom.d_k * geom.c_k * float(pmf.mean_iterations(row)) / geom.s_re


def load_iteration_pmf(path) -> IterationPmf:
    """Read ``mcs_index,snr_db,eps_cb,p1,...,pLmax`` CSV."""
    text = Path(path).read_text(encoding="utf-8")
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        toks = [t.strip() for t in next(csv.reader([s]))]
        if header is None:
            want = ["mcs_index", "snr_db", "eps_cb"]
            if toks[:3] != want or len(toks) < 4 or toks[3:] != [f"p{i}" for i in range(1, len(toks) - 2)]:
                raise DecoderModelError(f"line {lineno}: bad pmf header")
            header = toks
            continue
        if len(toks) != len(header):
            raise DecoderModelError(f"line {lineno}: expected {len(header)} fields")
        try:
            rows.append([int(toks[0])] + [float(t) for t in toks[1:]])
        except ValueError:
            raise DecoderModelError(f"line {lineno}: non-numeric field") from None
    if header is None or not rows:
        raise DecoderModelError("empty pmf file")
    a = np.array(rows, dtype=float)
    return IterationPmf(a[:, 0].astype(int), a[:, 1], a[:, 2], a[:, 3:])


def save_iteration_pmf(pmf: IterationPmf, path) -> None:
    lines = [",".join(["mcs_index", "snr_db", "eps_cb"] + [f"p{i}" for i in range(1, pmf.l_max + 1)])]
    for j in range(len(pmf.mcs_index)):
        vals = [str(int(pmf.mcs_index[j])), repr(float(pmf.snr_db[j])), repr(float(pmf.eps_cb[j]))]
        vals += [repr(float(p)) for p in pmf.probs[j]]
        lines.append(",".join(vals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
