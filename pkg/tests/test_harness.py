import json
import math

import numpy as np
import pytest

from nckscma.harness import (CSV_COLUMNS, ConfigError, ExperimentConfig, PointMetrics, compute_throughput,
                             config_from_dict, emit_csv, format_csv, load_config, read_csv,
                             resolve_data_path, run_experiment)


def _cfg(**kw):
    base = dict(scheme={"K_eq": 3, "T": 2, "K_in": 1, "layout": "TypeA"}, N_re=0, snr_db=[60.0],
                trials=2, fading="awgn_unit", seed=3)
    base.update(kw)
    return config_from_dict(base)


def test_compute_throughput():
    assert compute_throughput(8, 10) == 0.8
    assert compute_throughput(0, 7) == 0.0
    assert compute_throughput(7, 7) == 1.0
    with pytest.raises(ValueError):
        compute_throughput(0, 0)
    with pytest.raises(ValueError):
        compute_throughput(3, 2)


@pytest.mark.parametrize("edit, msg", [
    ({"trials": 0}, "trials"),
    ({"snr_db": []}, "snr_db"),
    ({"N_re": -1}, "N_re"),
    ({"fading": "ricean"}, "ricean"),
    ({"scheme": {"K_eq": 3, "T": 2, "K_in": 1, "layout": "TypeZ"}}, "TypeZ"),
    ({"scheme": {"K_eq": 3, "T": 2, "K_in": 1, "depth": 2}}, "depth"),
    ({"detector": {"max_iter": 0}}, "max_iter"),
    ({"colour": "blue"}, "colour"),
])
def test_config_errors(edit, msg):
    with pytest.raises(ConfigError, match=msg):
        _cfg(**edit)


def test_infeasible_scheme_is_config_error():
    cfg = _cfg(scheme={"K_eq": 4, "T": 3, "K_in": 1, "layout": "TypeC"})
    with pytest.raises(ConfigError, match="K_nc"):
        run_experiment(cfg)


def test_config_file_round_trip(tmp_path):
    cfg = _cfg()
    (tmp_path / "c.json").write_text(json.dumps(cfg.to_dict()))
    back = load_config(tmp_path / "c.json")
    assert back == cfg and back.base_dir == str(tmp_path)


def test_bad_json(tmp_path):
    (tmp_path / "c.json").write_text("{\n 'trials': 3\n}")
    with pytest.raises(ConfigError, match="line 2"):
        load_config(tmp_path / "c.json")


def test_data_paths(tmp_path, data_dir):
    assert resolve_data_path("codebook_4x6.json") == data_dir / "codebook_4x6.json"
    (tmp_path / "codebook_4x6.json").write_text("{}")
    assert resolve_data_path("codebook_4x6.json", tmp_path) == tmp_path / "codebook_4x6.json"
    with pytest.raises(FileNotFoundError):
        resolve_data_path("nope.json")


def test_noiseless_experiment():
    (m,) = run_experiment(_cfg(trials=3))
    assert (m.t_total, m.t_correct) == (3 * 6 * 2, 3 * 6 * 2)
    assert m.throughput == 1.0 and m.per == 0.0 and m.ci95_per == 0.0
    assert m.mean_ttis_per_packet == 2.0     # N_R / T
    assert m.throughput_per_tti == 0.5


def test_metrics_invariants():
    m = PointMetrics(0.0, 100, 800, 600, 5000, 150, 600, 6, 2)
    assert m.throughput + m.per == pytest.approx(1.0)
    assert m.ci95_per == pytest.approx(1.96 * math.sqrt(0.25 * 0.75 / 800))
    assert m.mean_ttis_per_packet == 3.0 and m.mean_iters == pytest.approx(5000 / 150)
    big = PointMetrics(0.0, 400, 3200, 2400, 0, 1, 1, 6, 2)
    assert m.ci95_per / big.ci95_per == pytest.approx(2.0)  # shrinks as 1/sqrt(trials)


def test_measured_resources_at_least_configured():
    cfg = _cfg(snr_db=[-12.0], fading="rayleigh_iid", N_re=1, trials=2,
               detector={"max_iter": 3})
    (m,) = run_experiment(cfg)
    assert m.mean_ttis_per_packet >= 2.0
    assert m.per > 0.5


def test_csv_format(tmp_path):
    cfg = _cfg(trials=1)
    metrics = run_experiment(cfg)
    path = emit_csv(metrics, tmp_path / "out" / "r.csv", cfg)
    text = path.read_text()
    lines = text.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    assert len(body) == 2 and body[0] == ",".join(CSV_COLUMNS)
    assert any("seed: 3" in c for c in comments)
    assert any(c.startswith("# version: nckscma") for c in comments)
    echo = json.loads(next(c for c in comments if c.startswith("# config:"))[len("# config: "):])
    assert echo["scheme"]["K_in"] == 1
    row = read_csv(path)[0]
    assert row["throughput"] == 1.0 and row["trials"] == 1


def test_empty_metrics_writes_nothing(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "r.csv")
    assert not (tmp_path / "r.csv").exists()


def test_same_seed_same_bytes():
    cfg = _cfg(snr_db=[-3.0], fading="rayleigh_iid", trials=2, N_re=1, detector={"max_iter": 4})
    assert format_csv(run_experiment(cfg), cfg) == format_csv(run_experiment(cfg), cfg)


def test_worker_split_does_not_matter():
    cfg = _cfg(snr_db=[-4.0, -2.0], fading="rayleigh_iid", trials=3, N_re=1, detector={"max_iter": 4})
    serial = format_csv(run_experiment(cfg, threads=1), cfg)
    assert format_csv(run_experiment(cfg, threads=2), cfg) == serial
