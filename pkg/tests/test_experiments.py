import dataclasses
import json

import numpy as np
import pytest

from relaycs import cli
from relaycs.experiments import (
    ConfigError,
    ExperimentConfig,
    Table,
    emit_csv,
    load_config,
    preset,
    read_csv,
    run_experiment,
    run_trials,
    stream,
    table_to_csv,
)


def tiny_nmse(**kw):
    base = dict(
        scenario="custom", kind="nmse", n_bs=16, n_ms=8, g_bs=16, g_ms=8, paths=2,
        m_bs=[8, 16], m_ms=4, faults=[2], snr_db=[10.0], trials=4, seed=7,
    )
    base.update(kw)
    return ExperimentConfig(**base).validate()


def tiny_diag(**kw):
    base = dict(
        scenario="fig1_diagnosis", kind="diagnosis", n_bs=16, m_bs=[4, 8, 16], m_ms=1,
        faults=[1, 3], blockage=["complete", "partial"], snr_db=[], trials=6, seed=42,
    )
    base.update(kw)
    return ExperimentConfig(**base).validate()


@pytest.mark.parametrize(
    "field, value",
    [("m_bs", [10]), ("faults", [99]), ("paths", 0), ("blockage", ["bogus"]), ("kind", "x"), ("seed", -1), ("trials", 0)],
)
def test_validation_names_field(field, value):
    with pytest.raises(ConfigError, match=field):
        dataclasses.replace(tiny_nmse(), **{field: value}).validate()


def test_presets_validate():
    for name in ("fig1_diagnosis", "fig2_nmse_vs_measurements", "fig3_nmse_vs_snr", "custom"):
        preset(name).validate()
    with pytest.raises(ConfigError):
        preset("nope")


def test_load_config_merges_over_preset(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("trials: 3\nm_bs: [8]\nrelay_solver:\n  support_rho: 0.2\n")
    cfg = load_config(p, "fig1_diagnosis")
    assert cfg.trials == 3 and cfg.m_bs == [8] and cfg.kind == "diagnosis"
    assert cfg.relay_solver.support_rho == 0.2
    assert cfg.relay_solver.lam_floor == preset("fig1_diagnosis").relay_solver.lam_floor
    p.write_text("tirals: 3\n")
    with pytest.raises(ConfigError, match="tirals"):
        load_config(p)


def test_streams_independent():
    a = stream(1, 0, 0).standard_normal(4)
    assert np.array_equal(a, stream(1, 0, 0).standard_normal(4))
    assert not np.array_equal(a, stream(1, 1, 0).standard_normal(4))
    assert not np.array_equal(a, stream(1, 0, 1).standard_normal(4))


def test_empty_table_is_header_only():
    assert table_to_csv(Table("t", ["a", "b"])) == "a,b\n"


def test_summary_recomputable_from_trials(tmp_path):
    cfg = tiny_nmse()
    res = run_experiment(cfg)
    emit_csv([res.summary, res.records], tmp_path, cfg)
    summary = read_csv(tmp_path / "custom.csv")
    trials = read_csv(tmp_path / "custom_trials.csv")
    meta = json.loads((tmp_path / "custom.meta.json").read_text())
    assert meta["seed"] == 7 and meta["config"]["m_bs"] == [8, 16]
    assert len(trials) == cfg.trials * len(res.summary.rows)
    for row in summary:
        keys = ("m_bs", "m_ms", "snr_db", "regime", "blockage", "faults")
        vals = [float(t["nmse"]) for t in trials if all(t[k] == row[k] for k in keys)]
        assert len(vals) == int(row["trials"])
        assert float(row["mean_nmse"]) == pytest.approx(np.mean(vals), rel=1e-10)


def test_regimes_present():
    rows = run_experiment(tiny_nmse(trials=1)).summary.rows
    assert {r["regime"] for r in rows} == {"fault_free", "fault_unaware", "relay_aided", "baseline_psi_a"}
    assert all(r["m_bs"] % r["m_ms"] == 0 for r in rows)


def test_seed_determinism(tmp_path):
    cfg = tiny_diag()
    for d in ("a", "b"):
        res = run_experiment(cfg)
        emit_csv([res.summary, res.records], tmp_path / d, cfg)
    for name in ("fig1_diagnosis.csv", "fig1_diagnosis_trials.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    other = run_trials(dataclasses.replace(cfg, seed=43))
    assert other != run_trials(cfg)


def test_thread_invariance():
    cfg = tiny_diag(trials=4)
    assert run_trials(cfg, threads=1) == run_trials(cfg, threads=2)


def test_cli_fig1(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("n_bs: 16\nm_bs: [8, 16]\nfaults: [2]\n")
    rc = cli.main(["fig1", "--config", str(cfg), "--trials", "3", "--seed", "5", "--out", str(tmp_path / "o")])
    assert rc == 0
    rows = read_csv(tmp_path / "o" / "fig1_diagnosis.csv")
    assert len(rows) == 4 and {r["trials"] for r in rows} == {"3"}
    assert "fig1_diagnosis.csv" in capsys.readouterr().out


def test_cli_custom_requires_config(tmp_path, capsys):
    assert cli.main(["custom", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("kind: nmse\nm_bs: [121]\nm_ms: 4\n")
    assert cli.main(["custom", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "m_bs" in capsys.readouterr().err


def test_cli_custom_runs(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "kind: nmse\nn_bs: 16\nn_ms: 8\ng_bs: 16\ng_ms: 8\npaths: 1\nm_bs: [8]\nm_ms: 4\n"
        "faults: [1]\nsnr_db: [0, 10]\ninclude_baseline: false\n"
    )
    assert cli.main(["custom", "--config", str(cfg), "--trials", "2", "--out", str(tmp_path / "o"), "--no-trials-csv"]) == 0
    rows = read_csv(tmp_path / "o" / "custom.csv")
    assert {r["snr_db"] for r in rows} == {"0", "10"}
    assert not (tmp_path / "o" / "custom_trials.csv").exists()
