"""Seeded Monte-Carlo runs, parameter sweeps and CSV output."""

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .config import SystemConfig, dbm_to_mw, gbps_to_bits
from .coordination import overhead_per_link
from .evaluation import SCHEMES, cutset_bound, evaluate
from .hybrid import HYBRID_MODES
from .scenario import draw_scenario

SWEEP_AXES = ("C_F", "M", "P_tx", "N")
CSV_COLUMNS = ("sweep_axis", "sweep_value", "scheme", "hybrid", "mean_sum_rate",
               "std_sum_rate", "mean_cutset", "mean_fh_rate", "overhead_reals", "trials", "seed")
CONFIG_COLUMNS = tuple(f.name for f in fields(SystemConfig) if f.name not in ("seed", "trials", "P_k"))

_CONFIG_KEYS = {
    "M", "L", "N", "K", "total_aps", "C_F_bits", "C_F_gbps", "P_tx_mW", "P_tx_dBm",
    "sigma_z2_dBm", "bandwidth_hz", "coverage_radius", "ap_height_delta", "sigma_phi_deg",
    "d_H", "seed", "trials", "placement", "sweep_axis", "sweep_values", "schemes", "hybrid",
    "output_path", "quadrature_order", "workers",
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentSpec:
    """A base scenario plus an optional one-axis sweep.

    ``sweep_values`` are in bits per channel use for ``C_F``, dBm for
    ``P_tx`` and plain counts for ``M`` and ``N``. Sweeping ``M`` keeps
    ``total_aps = M * L`` fixed.
    """

    base: SystemConfig = field(default_factory=SystemConfig)
    sweep_axis: str = None
    sweep_values: list = field(default_factory=list)
    schemes: tuple = SCHEMES
    hybrid: str = "off"
    output_path: str = None
    total_aps: int = None
    workers: int = 1

    def __post_init__(self):
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown or not self.schemes:
            raise ConfigError(f"schemes must be a non-empty subset of {SCHEMES}, got {self.schemes}")
        if self.hybrid not in HYBRID_MODES:
            raise ConfigError(f"hybrid must be one of {HYBRID_MODES}, got {self.hybrid!r}")
        if self.total_aps is None:
            self.total_aps = self.base.M * self.base.L
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.sweep_axis is None:
            if self.sweep_values:
                raise ConfigError("sweep_values given without sweep_axis")
            return
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if not self.sweep_values:
            raise ConfigError("sweep_values must be non-empty")
        for v in self.sweep_values:
            self.point_config(v)

    def point_config(self, value):
        """The scenario at one sweep value (validated)."""
        axis = self.sweep_axis
        try:
            if axis is None:
                return self.base
            if axis == "C_F":
                return self.base.replace(C_F=float(value))
            if axis == "P_tx":
                return self.base.replace(P_tx=float(dbm_to_mw(value)))
            if int(value) != value:
                raise ConfigError(f"{axis} sweep values must be integers, got {value!r}")
            if axis == "N":
                return self.base.replace(N=int(value))
            if self.total_aps % int(value):
                raise ConfigError(f"total_aps={self.total_aps} is not divisible by M={value}")
            return self.base.replace(M=int(value), L=self.total_aps // int(value))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"invalid {axis} sweep value {value!r}: {exc}") from exc

    def points(self):
        if self.sweep_axis is None:
            return [(None, self.base)]
        return [(v, self.point_config(v)) for v in self.sweep_values]


def _parse_error(text, exc):
    lines = text.splitlines()
    line = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
    return ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}\n    {line}")


def spec_from_dict(d):
    """Build an :class:`ExperimentSpec` from parsed JSON key-value pairs."""
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(d) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    for a, b in (("C_F_bits", "C_F_gbps"), ("P_tx_mW", "P_tx_dBm")):
        if a in d and b in d:
            raise ConfigError(f"give at most one of {a} and {b}")

    kw = {}
    for key in ("M", "L", "N", "K", "seed", "trials", "quadrature_order"):
        if key in d:
            kw[key] = d[key]
    for key in ("coverage_radius", "ap_height_delta", "d_H", "placement"):
        if key in d:
            kw[key] = d[key]
    bandwidth = float(d.get("bandwidth_hz", 100e6))
    kw["bandwidth"] = bandwidth
    if "C_F_bits" in d:
        kw["C_F"] = float(d["C_F_bits"])
    elif "C_F_gbps" in d:
        kw["C_F"] = float(gbps_to_bits(d["C_F_gbps"], bandwidth))
    if "P_tx_mW" in d:
        kw["P_tx"] = float(d["P_tx_mW"])
    elif "P_tx_dBm" in d:
        kw["P_tx"] = float(dbm_to_mw(d["P_tx_dBm"]))
    if "sigma_z2_dBm" in d:
        kw["sigma_z2"] = float(dbm_to_mw(d["sigma_z2_dBm"]))
    if "sigma_phi_deg" in d:
        kw["sigma_phi"] = float(np.deg2rad(d["sigma_phi_deg"]))

    total = d.get("total_aps")
    if total is not None:
        M = kw.get("M", SystemConfig.M)
        if int(total) != total or total < 1 or total % M:
            raise ConfigError(f"total_aps={total} is not divisible by M={M}")
        if "L" in kw and kw["L"] * M != total:
            raise ConfigError(f"L={kw['L']} contradicts total_aps={total} with M={M}")
        kw["L"] = int(total) // M

    try:
        base = SystemConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    schemes = d.get("schemes", SCHEMES)
    if isinstance(schemes, str):
        schemes = [s.strip() for s in schemes.split(",") if s.strip()]
    return ExperimentSpec(
        base=base,
        sweep_axis=d.get("sweep_axis"),
        sweep_values=list(d.get("sweep_values", [])),
        schemes=tuple(schemes),
        hybrid=d.get("hybrid", "off"),
        output_path=d.get("output_path"),
        total_aps=total,
        workers=int(d.get("workers", 1)),
    )


def parse_config(path):
    """Read a JSON experiment file; ``{}`` gives all defaults.

    Raises
    ------
    ConfigError
        On malformed JSON (with line context), unknown keys or invalid values.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        d = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise _parse_error(text, exc) from None
    return spec_from_dict(d)


def trial_seed(seed, trial):
    """Independent stream for one trial, derived from ``(seed, trial)``."""
    return np.random.SeedSequence([int(seed), int(trial)])


def run_trial(config, schemes, hybrid, seed, trial):
    """One scenario draw scored by every scheme (common random numbers).

    Returns an array of shape (len(schemes), 3): sum rate, cutset and mean
    per-AP fronthaul rate.
    """
    ss = trial_seed(seed, trial)
    scen_ss, *scheme_ss = ss.spawn(1 + len(schemes))
    scen = draw_scenario(config, np.random.default_rng(scen_ss))
    cut = cutset_bound(scen.states, config.Sigma_x, config.C_F)
    out = np.empty((len(schemes), 3))
    for j, scheme in enumerate(schemes):
        rep = evaluate(scen.states, config.Sigma_x, config.C_F, scheme, hybrid,
                       np.random.default_rng(scheme_ss[j]), cutset=cut)
        out[j] = rep.sum_rate_lb, cut, rep.mean_fh_rate
    return out


def _trial_job(args):
    return run_trial(*args)


def run_point(config, schemes, hybrid="off", seed=None, trials=None, workers=1):
    """Per-trial results at one operating point, shape (trials, len(schemes), 3)."""
    seed = config.seed if seed is None else seed
    trials = config.trials if trials is None else trials
    jobs = [(config, tuple(schemes), hybrid, seed, t) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps submission order, so the reduction below is fixed-order
            res = list(pool.map(_trial_job, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        res = [_trial_job(j) for j in jobs]
    return np.stack(res)


def _fmt(x):
    if isinstance(x, (bool, str)) or x is None:
        return "" if x is None else str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def run_experiment(spec, seed=None, trials=None):
    """Average every scheme at every sweep value.

    Returns
    -------
    list of dict
        One row per (sweep value, scheme) with the CSV columns followed by
        the scenario fields of that point.
    """
    rows = []
    for value, cfg in spec.points():
        s = cfg.seed if seed is None else seed
        n = cfg.trials if trials is None else trials
        res = run_point(cfg, spec.schemes, spec.hybrid, s, n, spec.workers)
        for j, scheme in enumerate(spec.schemes):
            combiner, quantizer = scheme.split("-")
            rates = res[:, j, 0]
            row = {
                "sweep_axis": spec.sweep_axis or "",
                "sweep_value": "" if value is None else value,
                "scheme": scheme,
                "hybrid": spec.hybrid,
                "mean_sum_rate": float(np.mean(rates)),
                "std_sum_rate": float(np.std(rates, ddof=1)) if n > 1 else 0.0,
                "mean_cutset": float(np.mean(res[:, j, 1])),
                "mean_fh_rate": float(np.mean(res[:, j, 2])),
                "overhead_reals": cfg.M * cfg.L * overhead_per_link(combiner, quantizer, cfg.K),
                "trials": n,
                "seed": s,
            }
            row.update({k: getattr(cfg, k) for k in CONFIG_COLUMNS})
            rows.append(row)
    return rows


def rows_to_csv(rows, path=None):
    """Write rows with floats at 9 significant digits; returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + CONFIG_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS + CONFIG_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def mean_ci(x, z=1.96):
    """Mean and normal-approximation confidence half-width."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), math.inf
    return float(x.mean()), float(z * x.std(ddof=1) / np.sqrt(x.size))
