import csv
import io
import json

import numpy as np
import pytest

from radiostripes import SystemConfig
from radiostripes.config import dbm_to_mw
from radiostripes.experiments import (
    CONFIG_COLUMNS,
    CSV_COLUMNS,
    ConfigError,
    ExperimentSpec,
    parse_config,
    rows_to_csv,
    run_experiment,
    run_point,
    spec_from_dict,
)

SMALL = {"M": 2, "L": 2, "N": 4, "K": 2, "C_F_bits": 6, "trials": 2, "seed": 3}


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_empty_object_gives_defaults(tmp_path):
    spec = parse_config(_write(tmp_path, {}))
    assert spec.base == SystemConfig()
    assert spec.base.P_tx == 50.0
    assert spec.base.sigma_z2 == pytest.approx(dbm_to_mw(-85.0))
    assert spec.base.sigma_phi == pytest.approx(np.deg2rad(15))
    assert spec.sweep_axis is None and spec.hybrid == "off"
    assert parse_config(_write(tmp_path, "", "blank.json")).base == SystemConfig()


def test_gbps_conversion():
    assert spec_from_dict({"C_F_gbps": 10}).base.C_F == pytest.approx(100.0)
    assert spec_from_dict({"C_F_gbps": 10, "bandwidth_hz": 50e6}).base.C_F == pytest.approx(200.0)


def test_total_aps_divisibility():
    with pytest.raises(ConfigError, match="not divisible"):
        spec_from_dict({"M": 3, "total_aps": 32})
    assert spec_from_dict({"M": 4, "total_aps": 32}).base.L == 8
    with pytest.raises(ConfigError, match="not divisible"):
        ExperimentSpec(base=SystemConfig(M=4, L=8), sweep_axis="M", sweep_values=[1, 3])


def test_malformed_json_has_line_context(tmp_path):
    p = _write(tmp_path, '{\n  "M": 2,\n  "K": ,\n}')
    with pytest.raises(ConfigError) as exc:
        parse_config(p)
    assert "line 3" in str(exc.value)
    assert '"K": ,' in str(exc.value)


@pytest.mark.parametrize("bad", [
    {"colour": 1},
    {"C_F_bits": 2, "C_F_gbps": 1},
    {"schemes": ["mmse-opt", "zf-opt"]},
    {"hybrid": "greedy"},
    {"sweep_axis": "K", "sweep_values": [1]},
    {"sweep_axis": "C_F", "sweep_values": []},
    {"sweep_axis": "N", "sweep_values": [2.5]},
    {"K": 0},
    {"workers": 0},
    [1, 2],
])
def test_invalid_configs_rejected(bad):
    with pytest.raises(ConfigError):
        spec_from_dict(bad)


def test_sweep_points():
    spec = spec_from_dict({"M": 4, "L": 8, "sweep_axis": "M", "sweep_values": [1, 2, 4]})
    assert [(c.M, c.L) for _, c in spec.points()] == [(1, 32), (2, 16), (4, 8)]
    spec = spec_from_dict({"sweep_axis": "P_tx", "sweep_values": [0, 10]})
    assert [c.P_tx for _, c in spec.points()] == pytest.approx([1.0, 10.0])


def test_csv_is_byte_identical_across_runs(tmp_path):
    spec = spec_from_dict({**SMALL, "trials": 1})
    a = rows_to_csv(run_experiment(spec), tmp_path / "a.csv")
    b = rows_to_csv(run_experiment(spec))
    assert a == b == (tmp_path / "a.csv").read_text()


def test_csv_schema():
    spec = spec_from_dict({**SMALL, "schemes": ["mmse-opt", "mrc-naive"]})
    text = rows_to_csv(run_experiment(spec))
    rows = list(csv.DictReader(io.StringIO(text)))
    header = text.splitlines()[0].split(",")
    assert header[:len(CSV_COLUMNS)] == list(CSV_COLUMNS)
    assert set(CONFIG_COLUMNS) <= set(header)
    assert [r["scheme"] for r in rows] == ["mmse-opt", "mrc-naive"]
    for r in rows:
        assert int(r["trials"]) == 2 and int(r["seed"]) == 3
        assert int(r["overhead_reals"]) == 2 * 2 * 2 * 2**2
        assert float(r["mean_sum_rate"]) <= float(r["mean_cutset"]) + 1e-6


def test_seed_determines_results():
    cfg = SystemConfig(**{k: v for k, v in SMALL.items() if k in ("M", "L", "N", "K", "trials", "seed")},
                       C_F=6.0)
    a = run_point(cfg, ("mmse-opt",), seed=1, trials=3)
    b = run_point(cfg, ("mmse-opt",), seed=1, trials=3)
    c = run_point(cfg, ("mmse-opt",), seed=2, trials=3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    # trials extend: the first trials of a longer run are unchanged
    np.testing.assert_array_equal(run_point(cfg, ("mmse-opt",), seed=1, trials=5)[:3], a)


def test_worker_pool_matches_serial():
    cfg = SystemConfig(M=2, L=2, N=4, K=2, C_F=6.0)
    serial = run_point(cfg, ("mmse-opt", "mrc-opt"), seed=0, trials=4, workers=1)
    pooled = run_point(cfg, ("mmse-opt", "mrc-opt"), seed=0, trials=4, workers=2)
    np.testing.assert_array_equal(serial, pooled)


def test_sum_rate_grows_with_budget():
    spec = spec_from_dict({"M": 2, "L": 4, "N": 8, "K": 4, "schemes": ["mmse-opt"],
                           "sweep_axis": "C_F", "sweep_values": [2, 6, 10]})
    rows = run_experiment(spec, seed=0, trials=100)
    rates = [r["mean_sum_rate"] for r in rows]
    assert rates == sorted(rates)
