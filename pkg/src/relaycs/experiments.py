"""Monte Carlo harness for the diagnosis and channel-estimation experiments.

Random streams
--------------
Every trial draws from independent generators seeded by
``SeedSequence(seed, spawn_key=(trial, stream))``.  Sub-seeds depend only on
the master seed, the trial index and the stream id, never on execution
order, so serial and parallel runs give identical records.  Within a trial
the same streams are reused at every sweep point (common random numbers):
codebooks are nested in ``M_BS``, masks are nested in ``S`` and share their
support across blockage kinds, and the fault-free and faulty measurements
share one noise draw.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import yaml

from relaycs.arrays import build_dictionary, sine_grid
from relaycs.channel import sample_channel
from relaycs.diagnosis import RelayLink, innovation, recover_mask, simulate_relay_measurements
from relaycs.estimator import EstimationRegime, estimate_channel, nmse, regime_sensing_matrix
from relaycs.impairments import BlockageKind, BlockageMask, corrupt_channel, sample_blockage
from relaycs.recovery import SolverConfig, SupportRule
from relaycs.sounding import (
    SoundingCodebook,
    assemble_psi,
    baseline_codebook,
    random_beams,
    sensing_matrix,
    simulate_measurements,
)

log = logging.getLogger(__name__)

SCENARIOS = ("fig1_diagnosis", "fig2_nmse_vs_measurements", "fig3_nmse_vs_snr", "custom")
KINDS = ("diagnosis", "nmse")

# stream ids
CHANNEL, BEAMS, COMBINERS, MASK, MS_NOISE, RELAY_NOISE, BASELINE_NOISE = range(7)


class ConfigError(ValueError):
    pass


@dataclass
class SolverParams:
    lam_scale: float = 1.0
    lam_floor: float = 1e-2
    max_iterations: int = 2000
    tol: float = 1e-8
    support_rho: float = 0.1
    max_condition: float | None = 30.0

    def to_config(self) -> SolverConfig:
        return SolverConfig(
            lam_scale=self.lam_scale,
            lam_floor=self.lam_floor,
            max_iterations=self.max_iterations,
            tol=self.tol,
            support_rule=SupportRule("relative", self.support_rho),
            max_condition=self.max_condition,
        )


@dataclass
class ExperimentConfig:
    scenario: str = "custom"
    kind: str = "nmse"
    n_bs: int = 64
    n_ms: int = 32
    g_bs: int = 64
    g_ms: int = 32
    paths: int = 3
    m_bs: list = field(default_factory=lambda: [32, 48, 64, 96, 128])
    m_ms: int = 4
    faults: list = field(default_factory=lambda: [8, 16])
    snr_db: list = field(default_factory=lambda: [10.0])
    blockage: list = field(default_factory=lambda: ["mixed"])
    relay_snr_db: float = 30.0
    relay_aod: float = math.pi / 6
    relay_gain: float = 1.0
    relay_path_gain: float = 1.0
    include_baseline: bool = True
    trials: int = 500
    seed: int = 0
    threads: int = 1
    solver: SolverParams = field(default_factory=lambda: SolverParams(support_rho=0.01))
    relay_solver: SolverParams = field(default_factory=lambda: SolverParams(support_rho=0.3))

    def validate(self) -> "ExperimentConfig":
        def fail(name, why):
            raise ConfigError(f"invalid config field '{name}': {why}")

        if self.scenario not in SCENARIOS:
            fail("scenario", f"must be one of {SCENARIOS}")
        if self.kind not in KINDS:
            fail("kind", f"must be one of {KINDS}")
        for name in ("n_bs", "n_ms", "g_bs", "g_ms", "paths", "m_ms", "trials"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                fail(name, f"must be a positive integer, got {value!r}")
        if self.threads < 1:
            fail("threads", "must be >= 1")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            fail("seed", "must be an unsigned 64-bit integer")
        if self.paths > self.g_bs * self.g_ms:
            fail("paths", "exceeds the number of grid points")
        if not self.m_bs:
            fail("m_bs", "sweep is empty")
        for m in self.m_bs:
            if not isinstance(m, int) or m < 1:
                fail("m_bs", f"must hold positive integers, got {m!r}")
            if m % self.m_ms:
                fail("m_bs", f"M_MS={self.m_ms} does not divide M_BS={m}")
        for s in self.faults:
            if not isinstance(s, int) or not 0 <= s <= self.n_bs:
                fail("faults", f"fault counts must lie in [0, {self.n_bs}], got {s!r}")
        if self.kind == "nmse" and not self.snr_db:
            fail("snr_db", "sweep is empty")
        for b in self.blockage:
            if b not in [k.value for k in BlockageKind]:
                fail("blockage", f"unknown blockage kind {b!r}")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("solver", "relay_solver"):
            if key in data and isinstance(data[key], dict):
                base = dataclasses.asdict(getattr(cls(), key))
                base.update(data[key])
                data[key] = SolverParams(**base)
        return cls(**data)


def preset(scenario: str) -> ExperimentConfig:
    """Default configuration for a named scenario."""
    if scenario == "fig1_diagnosis":
        return ExperimentConfig(
            scenario=scenario,
            kind="diagnosis",
            m_bs=[8, 16, 24, 32, 40, 48, 56, 64],
            m_ms=1,
            faults=[4, 8, 16],
            blockage=["complete", "partial"],
            snr_db=[],
        )
    if scenario == "fig2_nmse_vs_measurements":
        return ExperimentConfig(scenario=scenario, kind="nmse", trials=200)
    if scenario == "fig3_nmse_vs_snr":
        return ExperimentConfig(
            scenario=scenario,
            kind="nmse",
            m_bs=[121],
            m_ms=11,
            include_baseline=False,
            snr_db=[-15.0, -10.0, -5.0, 0.0, 5.0],
            trials=200,
        )
    if scenario == "custom":
        return ExperimentConfig(scenario="custom")
    raise ConfigError(f"unknown scenario {scenario!r}")


def load_config(path, scenario: str | None = None) -> ExperimentConfig:
    """Read a YAML config; fields it omits keep the scenario preset's defaults."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    scenario = scenario or data.get("scenario", "custom")
    merged = preset(scenario).to_dict()
    for key, value in data.items():
        if key in ("solver", "relay_solver") and isinstance(value, dict):
            merged[key].update(value)
        else:
            merged[key] = value
    merged["scenario"] = scenario
    return ExperimentConfig.from_dict(merged)


def stream(seed: int, trial: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, stream_id)))


@lru_cache(maxsize=8)
def _dictionary(n: int, g: int):
    return build_dictionary(n, sine_grid(g))


def _link(config: ExperimentConfig) -> RelayLink:
    return RelayLink.los(
        config.n_bs,
        config.relay_aod,
        gain=config.relay_gain,
        path_gain=config.relay_path_gain,
        snr_db=config.relay_snr_db,
    )


def _diagnose(config, trial, P, mask, link, solver):
    y_star = simulate_relay_measurements(stream(config.seed, trial, RELAY_NOISE), P, link, mask)
    y_s, _ = innovation(y_star, P, link)
    return recover_mask(y_s, P, link, solver, true_mask=mask)


def diagnosis_trial(config: ExperimentConfig, trial: int) -> list[dict]:
    link = _link(config)
    solver = config.relay_solver.to_config()
    P_all = random_beams(stream(config.seed, trial, BEAMS), max(config.m_bs), config.n_bs)
    records = []
    for kind in config.blockage:
        for S in config.faults:
            mask = sample_blockage(stream(config.seed, trial, MASK), config.n_bs, S, kind)
            for m in config.m_bs:
                res = _diagnose(config, trial, P_all[:, :m], mask, link, solver)
                missed, false_alarm = res.support_errors
                records.append(
                    {
                        "scenario": config.scenario,
                        "trial": trial,
                        "m_bs": m,
                        "blockage": kind,
                        "faults": S,
                        "success": int(res.success),
                        "missed": missed,
                        "false_alarm": false_alarm,
                        "iterations": res.recovery.iterations,
                    }
                )
    return records


def nmse_trial(config: ExperimentConfig, trial: int) -> list[dict]:
    bs = _dictionary(config.n_bs, config.g_bs)
    ms = _dictionary(config.n_ms, config.g_ms)
    link = _link(config)
    ms_solver = config.solver.to_config()
    relay_solver = config.relay_solver.to_config()
    ch = sample_channel(stream(config.seed, trial, CHANNEL), config.paths, bs, ms)
    H = ch.matrix
    P_all = random_beams(stream(config.seed, trial, BEAMS), max(config.m_bs), config.n_bs)
    Q = random_beams(stream(config.seed, trial, COMBINERS), config.m_ms, config.n_ms)
    ms_identity = BlockageMask.identity(config.n_ms)
    records = []

    def record(m, snr, regime, kind, S, H_est, rec, diag=None):
        row = {
            "scenario": config.scenario,
            "trial": trial,
            "m_bs": m,
            "m_ms": config.m_ms,
            "snr_db": snr,
            "regime": regime.value,
            "blockage": kind,
            "faults": S,
            "nmse": nmse(H, H_est),
            "iterations": rec.iterations,
            "success": "",
            "missed": "",
            "false_alarm": "",
        }
        if diag is not None:
            row["success"] = int(diag.success)
            row["missed"], row["false_alarm"] = diag.support_errors
        records.append(row)

    for m in config.m_bs:
        cb = SoundingCodebook(P=P_all[:, :m], Q=Q)
        psi = assemble_psi(cb)
        phi = sensing_matrix(psi, bs, ms)
        if config.include_baseline:
            base_cb = baseline_codebook(cb)
            phi_a = regime_sensing_matrix(cb, bs, ms, EstimationRegime.BASELINE_PSI_A)
        faulty = []
        for kind in config.blockage:
            for S in config.faults:
                mask = sample_blockage(stream(config.seed, trial, MASK), config.n_bs, S, kind)
                diag = _diagnose(config, trial, cb.P, mask, link, relay_solver)
                phi_hat = sensing_matrix(psi, bs, ms, bs_mask=diag.estimated_mask)
                faulty.append((kind, S, corrupt_channel(H, mask, ms_identity), diag, phi_hat))
        for snr in config.snr_db:
            batch = simulate_measurements(stream(config.seed, trial, MS_NOISE), cb, H, snr)
            H_est, rec = estimate_channel(batch, cb, bs, ms, solver_config=ms_solver, sensing=phi)
            record(m, snr, EstimationRegime.FAULT_FREE, "none", 0, H_est, rec)
            if config.include_baseline:
                batch_a = simulate_measurements(stream(config.seed, trial, BASELINE_NOISE), base_cb, H, snr)
                H_est, rec = estimate_channel(batch_a, base_cb, bs, ms, solver_config=ms_solver, sensing=phi_a)
                record(m, snr, EstimationRegime.BASELINE_PSI_A, "none", 0, H_est, rec)
            for kind, S, H_hat, diag, phi_hat in faulty:
                batch_f = simulate_measurements(stream(config.seed, trial, MS_NOISE), cb, H_hat, snr)
                H_est, rec = estimate_channel(batch_f, cb, bs, ms, solver_config=ms_solver, sensing=phi)
                record(m, snr, EstimationRegime.FAULT_UNAWARE, kind, S, H_est, rec)
                H_est, rec = estimate_channel(batch_f, cb, bs, ms, solver_config=ms_solver, sensing=phi_hat)
                record(m, snr, EstimationRegime.RELAY_AIDED, kind, S, H_est, rec, diag)
    return records


def _run_trial(args):
    config, trial = args
    fn = diagnosis_trial if config.kind == "diagnosis" else nmse_trial
    return fn(config, trial)


def run_trials(config: ExperimentConfig, threads: int | None = None) -> list[dict]:
    """All per-trial records, ordered by trial index regardless of ``threads``."""
    config.validate()
    threads = config.threads if threads is None else threads
    jobs = [(config, t) for t in range(config.trials)]
    if threads <= 1:
        chunks = [_run_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [rec for chunk in chunks for rec in chunk]


# ---- aggregation ---------------------------------------------------------


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)

    def column(self, name):
        return [row[name] for row in self.rows]

    def select(self, **where) -> list[dict]:
        return [row for row in self.rows if all(row[k] == v for k, v in where.items())]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: Table
    summary: Table


def _mean_stderr(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else float("nan")
    return mean, stderr


def summarize_diagnosis(records: list[dict], name: str) -> Table:
    groups = defaultdict(list)
    for r in records:
        groups[(r["m_bs"], r["blockage"], r["faults"])].append(r)
    cols = ["m_bs", "blockage", "faults", "success_rate", "stderr", "mean_missed", "mean_false_alarm", "trials"]
    rows = []
    for (m, kind, S) in sorted(groups, key=lambda k: (k[1], k[2], k[0])):
        g = groups[(m, kind, S)]
        rate, se = _mean_stderr([r["success"] for r in g])
        rows.append(
            {
                "m_bs": m,
                "blockage": kind,
                "faults": S,
                "success_rate": rate,
                "stderr": se,
                "mean_missed": float(np.mean([r["missed"] for r in g])),
                "mean_false_alarm": float(np.mean([r["false_alarm"] for r in g])),
                "trials": len(g),
            }
        )
    return Table(name, cols, rows)


REGIME_ORDER = {r.value: i for i, r in enumerate(EstimationRegime)}


def summarize_nmse(records: list[dict], name: str) -> Table:
    groups = defaultdict(list)
    for r in records:
        groups[(r["m_bs"], r["m_ms"], r["snr_db"], r["regime"], r["blockage"], r["faults"])].append(r)
    cols = [
        "m_bs", "m_ms", "snr_db", "regime", "blockage", "faults",
        "mean_nmse", "stderr", "mean_nmse_db", "diag_success_rate", "trials",
    ]
    rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[2], REGIME_ORDER[k[3]], k[4], k[5])):
        g = groups[key]
        mean, se = _mean_stderr([r["nmse"] for r in g])
        succ = [r["success"] for r in g if r["success"] != ""]
        rows.append(
            dict(
                zip(cols[:6], key),
                mean_nmse=mean,
                stderr=se,
                mean_nmse_db=10.0 * math.log10(mean) if mean > 0 else float("-inf"),
                diag_success_rate=float(np.mean(succ)) if succ else "",
                trials=len(g),
            )
        )
    return Table(name, cols, rows)


DIAGNOSIS_RECORD_COLUMNS = ["scenario", "trial", "m_bs", "blockage", "faults", "success", "missed", "false_alarm", "iterations"]
NMSE_RECORD_COLUMNS = [
    "scenario", "trial", "m_bs", "m_ms", "snr_db", "regime", "blockage", "faults",
    "nmse", "iterations", "success", "missed", "false_alarm",
]


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    config.validate()
    log.info("running %s: %d trials", config.scenario, config.trials)
    records = run_trials(config, threads)
    if config.kind == "diagnosis":
        summary = summarize_diagnosis(records, config.scenario)
        rec_cols = DIAGNOSIS_RECORD_COLUMNS
    else:
        summary = summarize_nmse(records, config.scenario)
        rec_cols = NMSE_RECORD_COLUMNS
    return ExperimentResult(config, Table(f"{config.scenario}_trials", rec_cols, records), summary)


def _with_overrides(config: ExperimentConfig, scenario: str, kind: str) -> ExperimentConfig:
    if config.scenario != scenario or config.kind != kind:
        config = dataclasses.replace(config, scenario=scenario, kind=kind)
    return config


def run_fig1(config: ExperimentConfig | None = None, threads: int | None = None) -> ExperimentResult:
    """Diagnosis success rate per (M_BS, blockage kind, S)."""
    config = _with_overrides(config or preset("fig1_diagnosis"), "fig1_diagnosis", "diagnosis")
    return run_experiment(config, threads)


def run_fig2(config: ExperimentConfig | None = None, threads: int | None = None) -> ExperimentResult:
    """Mean NMSE per (M_BS, regime, S) at a fixed MS SNR."""
    config = _with_overrides(config or preset("fig2_nmse_vs_measurements"), "fig2_nmse_vs_measurements", "nmse")
    return run_experiment(config, threads)


def run_fig3(config: ExperimentConfig | None = None, threads: int | None = None) -> ExperimentResult:
    """Mean NMSE per (SNR, regime, S) at a fixed M_BS."""
    config = _with_overrides(config or preset("fig3_nmse_vs_snr"), "fig3_nmse_vs_snr", "nmse")
    return run_experiment(config, threads)


# ---- output --------------------------------------------------------------


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".12g")
    return str(value)


def table_to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(row[c]) for c in table.columns])
    return buf.getvalue()


def emit_csv(tables, path, config: ExperimentConfig | None = None) -> list[Path]:
    """Write one ``<name>.csv`` per table into directory ``path`` plus a metadata sidecar.

    The sidecar ``<first table name>.meta.json`` records the full config, the
    seed and the package version.
    """
    from relaycs import __version__

    out = Path(path)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for table in tables:
            target = out / f"{table.name}.csv"
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(table_to_csv(table))
            written.append(target)
        if tables:
            meta = {
                "tables": [t.name for t in tables],
                "version": __version__,
                "seed": config.seed if config else None,
                "config": config.to_dict() if config else None,
            }
            target = out / f"{tables[0].name}.meta.json"
            with open(target, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True)
                fh.write("\n")
            written.append(target)
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return written


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)
