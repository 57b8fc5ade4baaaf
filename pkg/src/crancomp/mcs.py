"""MCS tables and SNR-threshold rate selection with an SNR margin."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class McsError(ValueError):
    pass


class McsParseError(McsError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class McsValidationError(McsError):
    pass


def db_to_lin(x_db):
    v = 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)
    return float(v) if v.ndim == 0 else v


def lin_to_db(x):
    v = 10.0 * np.log10(np.asarray(x, dtype=float))
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class McsEntry:
    index: int
    threshold_snr: float  # linear
    rate: float  # bits pcu
    tb_info_bits_per_cb: Optional[int] = None
    cb_count: Optional[int] = None

    @property
    def threshold_db(self) -> float:
        return 10.0 * math.log10(self.threshold_snr)


@dataclass(frozen=True)
class McsTable:
    """Ordered MCS thresholds (linear) and rates (bits per channel use)."""

    entries: tuple[McsEntry, ...]
    nu: float = 10.0 ** 0.02
    source: str = "equally_spaced"
    thresholds: np.ndarray = field(init=False, repr=False, compare=False)
    rates: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.entries:
            raise McsValidationError("table must have at least one entry")
        th = np.array([e.threshold_snr for e in self.entries], dtype=float)
        r = np.array([e.rate for e in self.entries], dtype=float)
        if np.any(th <= 0) or not np.all(np.isfinite(th)):
            raise McsValidationError("thresholds must be positive")
        if np.any(r <= 0):
            raise McsValidationError("rates must be positive")
        if np.any(np.diff(th) <= 0):
            raise McsValidationError("thresholds not strictly increasing")
        if np.any(np.diff(r) <= 0):
            raise McsValidationError("rates not strictly increasing")
        if not self.nu > 1:
            raise McsValidationError("nu must exceed 1 (linear)")
        th.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "rates", r)

    @property
    def n_r(self) -> int:
        return len(self.entries)

    @property
    def thresholds_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.thresholds)

    def has_geometry(self) -> bool:
        return all(e.tb_info_bits_per_cb is not None and e.cb_count is not None for e in self.entries)


def rate_model(threshold, nu):
    """R = log2(1 + threshold / nu), all linear."""
    return np.log2(1.0 + np.asarray(threshold, dtype=float) / nu)


def make_equally_spaced_table(n_r: int, gamma_first_db: float = -6.4, gamma_last_db: float = 17.6,
                              nu_db: float = 0.2) -> McsTable:
    """Thresholds equally spaced in dB, rates from the gap model.

    Parameters
    ----------
    n_r : int
        Number of MCSs.
    gamma_first_db, gamma_last_db : float
        First and last thresholds in dB (inclusive).
    nu_db : float
        Gap to capacity in dB, must be positive.
    """
    if int(n_r) != n_r or n_r < 1:
        raise McsError(f"n_r must be a positive integer, got {n_r}")
    n_r = int(n_r)
    if n_r >= 2 and not gamma_first_db < gamma_last_db:
        raise McsError("gamma_first_db must be below gamma_last_db")
    if not nu_db > 0:
        raise McsError("nu_db must be positive")
    th_db = np.linspace(gamma_first_db, gamma_last_db, n_r) if n_r > 1 else np.array([gamma_first_db], float)
    nu = 10.0 ** (nu_db / 10.0)
    th = 10.0 ** (th_db / 10.0)
    r = rate_model(th, nu)
    entries = tuple(McsEntry(k + 1, float(t), float(x)) for k, (t, x) in enumerate(zip(th, r)))
    return McsTable(entries, nu=nu, source="equally_spaced")


def select_index(gamma, margin: float, table: McsTable) -> np.ndarray:
    """Vectorized 1-based MCS index: k with th_k < gamma/margin <= th_{k+1}."""
    x = np.asarray(gamma, dtype=float) / margin
    k = np.searchsorted(table.thresholds, x, side="left")
    return np.clip(k, 1, table.n_r)


def rate_select(gamma: float, margin: float, table: McsTable) -> tuple[int, float]:
    """Selected (index, rate) for SNR `gamma` and linear margin `margin`.

    Below the first threshold the first MCS is returned; use
    :func:`below_first_threshold` to detect that region.
    """
    if not gamma > 0:
        raise McsError("gamma must be positive")
    if not margin >= 1:
        raise McsError("margin must be >= 1 (linear)")
    k = int(select_index(gamma, margin, table))
    return k, float(table.rates[k - 1])


def below_first_threshold(gamma, margin: float, table: McsTable):
    """True where gamma/margin <= first threshold (no transmission)."""
    return np.asarray(gamma, dtype=float) / margin <= table.thresholds[0]


# ---------------------------------------------------------------- file io

_HEADER = ["index", "threshold_db", "rate_bits_pcu"]
_HEADER_GEOM = _HEADER + ["d_k", "c_k"]


def _parse_int(tok, name, line):
    try:
        v = int(tok)
    except ValueError:
        raise McsParseError(f"{name} is not an integer: {tok!r}", line) from None
    return v


def _parse_float(tok, name, line):
    try:
        v = float(tok)
    except ValueError:
        raise McsParseError(f"{name} is not a number: {tok!r}", line) from None
    if not math.isfinite(v):
        raise McsParseError(f"{name} is not finite", line)
    return v


def parse_table(text: str, nu: float = 10.0 ** 0.02) -> McsTable:
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        toks = [t.strip() for t in next(csv.reader([s]))]
        if header is None:
            if toks not in (_HEADER, _HEADER_GEOM):
                raise McsParseError(f"bad header {toks}", lineno)
            header = toks
            continue
        if len(toks) != len(header):
            raise McsParseError(f"expected {len(header)} fields, got {len(toks)}", lineno)
        idx = _parse_int(toks[0], "index", lineno)
        th_db = _parse_float(toks[1], "threshold_db", lineno)
        rate = _parse_float(toks[2], "rate_bits_pcu", lineno)
        d_k = c_k = None
        if len(header) == 5:
            d_k = _parse_int(toks[3], "d_k", lineno)
            c_k = _parse_int(toks[4], "c_k", lineno)
            if d_k <= 0 or c_k < 1:
                raise McsParseError("d_k and c_k must be positive", lineno)
        rows.append((lineno, idx, th_db, rate, d_k, c_k))
    if header is None:
        raise McsParseError("empty table file", 1)
    if not rows:
        raise McsParseError("no data rows", None)
    for pos, (lineno, idx, *_r) in enumerate(rows, start=1):
        if idx != pos:
            raise McsParseError(f"index {idx} out of order (expected {pos})", lineno)
    entries = tuple(McsEntry(idx, 10.0 ** (th / 10.0), rate, d, c)
                    for _l, idx, th, rate, d, c in rows)
    return McsTable(entries, nu=nu, source="loaded_from_file")


def load_table(path, nu: float = 10.0 ** 0.02) -> McsTable:
    """Read an MCS table CSV (``index,threshold_db,rate_bits_pcu[,d_k,c_k]``)."""
    return parse_table(Path(path).read_text(encoding="utf-8"), nu=nu)


def format_table(table: McsTable) -> str:
    geom = table.has_geometry()
    buf = io.StringIO()
    buf.write(",".join(_HEADER_GEOM if geom else _HEADER) + "\n")
    for e in table.entries:
        row = [str(e.index), repr(e.threshold_db), repr(e.rate)]
        if geom:
            row += [str(e.tb_info_bits_per_cb), str(e.cb_count)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def save_table(table: McsTable, path) -> None:
    Path(path).write_text(format_table(table), encoding="utf-8")


def with_geometry(table: McsTable, d_k: Sequence[int], c_k: Sequence[int]) -> McsTable:
    if len(d_k) != table.n_r or len(c_k) != table.n_r:
        raise McsValidationError("geometry length must match the table")
    entries = tuple(McsEntry(e.index, e.threshold_snr, e.rate, int(d), int(c))
                    for e, d, c in zip(table.entries, d_k, c_k))
    return McsTable(entries, nu=table.nu, source=table.source)
