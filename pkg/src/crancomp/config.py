"""Experiment configuration: YAML file with dotted canonical keys."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .channel import ChannelError, ChannelSpec, FixedRayleigh, path_loss_fpc
from .decoder import ComplexityModelParams, DecoderModelError, load_iteration_pmf
from .mcs import McsError, McsTable, load_table, make_equally_spaced_table


class ConfigError(ValueError):
    def __init__(self, msg: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {msg}" if key else msg)


_NUM = "number"
_INT = "integer"
_STR = "string"
_BOOL = "boolean"
_NUMS = "number or list of numbers"

# key -> (kind, default)
SCHEMA: dict[str, tuple[str, Any]] = {
    "model.zeta": (_NUM, 6.0),
    "model.k_prime": (_NUM, 0.2),
    "model.nu_db": (_NUM, 0.2),
    "model.eps_channel": (_NUM, 0.1),
    "mcs.mode": (_STR, "equally_spaced"),
    "mcs.n_r": (_INT, 27),
    "mcs.gamma_first_db": (_NUM, -6.4),
    "mcs.gamma_last_db": (_NUM, 17.6),
    "mcs.table_path": (_STR, None),
    "channel.kind": (_STR, "rayleigh"),
    "channel.gamma_bar_db": (_NUM, 10.0),
    "channel.gamma_ud_db": (_NUM, 0.0),
    "channel.eta": (_NUM, 2.0),
    "channel.s": (_NUM, 0.1),
    "run.margin_db": (_NUMS, 0.0),
    "run.eps_hat": (_NUM, 0.1),
    "run.n_c": (_INT, 1),
    "run.n_trials": (_INT, 100_000),
    "run.seed": (_INT, 0),
    # extensions
    "run.variance": (_STR, "total"),
    "run.monte_carlo": (_BOOL, False),
    "run.sim_mode": (_STR, "model_driven"),
    "lte.pmf_path": (_STR, None),
    "lte.s_re": (_INT, 6480),
    "sweep.values": (_NUMS, None),
    "sweep.start": (_NUM, None),
    "sweep.stop": (_NUM, None),
    "sweep.step": (_NUM, None),
}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_type(key, kind, v):
    if v is None:
        return None
    if kind == _NUM:
        if not _is_num(v):
            raise ConfigError(f"expected a number, got {type(v).__name__}", key)
        return float(v)
    if kind == _INT:
        if isinstance(v, bool) or not (isinstance(v, int) or (isinstance(v, float) and v.is_integer())):
            raise ConfigError(f"expected an integer, got {v!r}", key)
        return int(v)
    if kind == _STR:
        if not isinstance(v, str):
            raise ConfigError(f"expected a string, got {type(v).__name__}", key)
        return v
    if kind == _BOOL:
        if not isinstance(v, bool):
            raise ConfigError(f"expected true/false, got {v!r}", key)
        return v
    if kind == _NUMS:
        vals = v if isinstance(v, list) else [v]
        if not vals or not all(_is_num(x) for x in vals):
            raise ConfigError("expected a number or a non-empty list of numbers", key)
        return [float(x) for x in vals]
    raise AssertionError(kind)


@dataclass
class ResolvedConfig:
    """Validated inputs plus the flat key/value echo."""

    values: dict
    params: ComplexityModelParams
    table: McsTable
    channel: ChannelSpec
    margins_db: list
    eps_hat: float
    n_c: int
    n_trials: int
    seed: int
    variance: str
    monte_carlo: bool
    sim_mode: Any
    sweep: Optional[list]
    source: Optional[str] = None
    warnings: list = field(default_factory=list)

    @property
    def margins(self) -> list:
        return [10.0 ** (d / 10.0) for d in self.margins_db]

    def echo(self) -> dict:
        """Resolved keys with derived linear values alongside the dB ones."""
        e = dict(self.values)
        e["model.nu_lin"] = self.params.nu
        if isinstance(self.channel, FixedRayleigh):
            e["channel.gamma_bar_lin"] = self.channel.gamma_bar
        else:
            e["channel.gamma_ud_lin"] = self.channel.gamma_ud
        e["run.margin_lin"] = self.margins
        return e


def resolve(raw: dict, strict: bool = False, base_dir: Optional[Path] = None,
            seed_override: Optional[int] = None) -> ResolvedConfig:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    flat = _flatten(raw)
    warnings = []
    for key in flat:
        if key not in SCHEMA:
            if strict:
                raise ConfigError("unknown key", key)
            warnings.append(f"ignoring unknown key {key}")
    vals = {}
    for key, (kind, default) in SCHEMA.items():
        v = _check_type(key, kind, flat.get(key))
        vals[key] = _check_type(key, kind, default) if v is None else v
    if seed_override is not None:
        vals["run.seed"] = int(seed_override)
    if not 0 <= vals["run.seed"] < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", "run.seed")
    base = base_dir or Path(".")

    try:
        params = ComplexityModelParams(vals["model.zeta"], vals["model.k_prime"],
                                       10.0 ** (vals["model.nu_db"] / 10.0), vals["model.eps_channel"])
    except DecoderModelError as e:
        raise ConfigError(str(e), "model") from None

    mode = vals["mcs.mode"]
    try:
        if mode == "equally_spaced":
            table = make_equally_spaced_table(vals["mcs.n_r"], vals["mcs.gamma_first_db"],
                                              vals["mcs.gamma_last_db"], vals["model.nu_db"])
        elif mode == "file":
            if not vals["mcs.table_path"]:
                raise ConfigError("mcs.mode = file needs a table path", "mcs.table_path")
            table = load_table(base / vals["mcs.table_path"], nu=params.nu)
            vals["mcs.n_r"] = table.n_r
        else:
            raise ConfigError(f"unknown MCS mode {mode!r}", "mcs.mode")
    except (McsError, OSError) as e:
        raise ConfigError(str(e), "mcs") from None

    kind = vals["channel.kind"]
    try:
        if kind == "rayleigh":
            channel = FixedRayleigh(10.0 ** (vals["channel.gamma_bar_db"] / 10.0))
        elif kind == "pathloss":
            channel = path_loss_fpc(10.0 ** (vals["channel.gamma_ud_db"] / 10.0),
                                    vals["channel.eta"], vals["channel.s"])
        else:
            raise ConfigError(f"unknown channel kind {kind!r}", "channel.kind")
    except ChannelError as e:
        raise ConfigError(str(e), "channel") from None

    margins_db = vals["run.margin_db"]
    if any(m < 0 for m in margins_db):
        raise ConfigError("margins must be >= 0 dB", "run.margin_db")
    if not 0 < vals["run.eps_hat"] < 1:
        raise ConfigError("must lie in (0, 1)", "run.eps_hat")
    if vals["run.n_c"] < 1:
        raise ConfigError("must be >= 1", "run.n_c")
    if vals["run.n_trials"] < 1:
        raise ConfigError("must be >= 1", "run.n_trials")
    if vals["run.variance"] not in ("total", "conditional"):
        raise ConfigError("must be 'total' or 'conditional'", "run.variance")

    sim_mode: Any = vals["run.sim_mode"]
    if sim_mode == "lte_data_driven":
        from .montecarlo import LteDataDriven

        if not vals["lte.pmf_path"]:
            raise ConfigError("data-driven mode needs a pmf file", "lte.pmf_path")
        try:
            pmf = load_iteration_pmf(base / vals["lte.pmf_path"])
        except (DecoderModelError, OSError) as e:
            raise ConfigError(str(e), "lte.pmf_path") from None
        if not table.has_geometry():
            raise ConfigError("data-driven mode needs d_k,c_k columns in the MCS table", "mcs.table_path")
        sim_mode = LteDataDriven(pmf, vals["lte.s_re"])
    elif sim_mode != "model_driven":
        raise ConfigError(f"unknown simulation mode {sim_mode!r}", "run.sim_mode")

    sweep = None
    if vals["sweep.values"] is not None:
        sweep = sorted(vals["sweep.values"])
    elif vals["sweep.start"] is not None:
        a, b, st = vals["sweep.start"], vals["sweep.stop"], vals["sweep.step"]
        if b is None or st is None or not st > 0 or b < a:
            raise ConfigError("sweep needs start <= stop and step > 0", "sweep")
        n = int(math.floor((b - a) / st + 1e-9)) + 1
        sweep = [round(a + i * st, 12) for i in range(n)]

    return ResolvedConfig(values=vals, params=params, table=table, channel=channel,
                          margins_db=margins_db, eps_hat=vals["run.eps_hat"], n_c=vals["run.n_c"],
                          n_trials=vals["run.n_trials"], seed=vals["run.seed"],
                          variance=vals["run.variance"], monte_carlo=vals["run.monte_carlo"],
                          sim_mode=sim_mode, sweep=sweep, warnings=warnings)


def load_config(path: Union[str, Path, None], strict: bool = False,
                seed_override: Optional[int] = None) -> ResolvedConfig:
    """Parse and resolve a YAML config; `None` gives all defaults."""
    if path is None:
        cfg = resolve({}, strict, seed_override=seed_override)
        return cfg
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"parse error: {e}".replace("\n", " ")) from None
    cfg = resolve(raw, strict, base_dir=p.parent, seed_override=seed_override)
    cfg.source = str(p)
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return cfg
