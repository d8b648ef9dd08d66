"""End-to-end pipeline: telemetry in, anomaly reports and rendered levels out.

Intervals outside every congestion window calibrate the detection threshold;
every interval is then scored at the coarsest pyramid level, and positive
intervals are localized and written out as artifacts. All outputs are
deterministic for a fixed config and seed.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .errors import CalibrationError
from .graphs import LayerGraph, load_topology
from .monitor import (AnomalyReport, aggregate, build_monitor_layer,
                      calibrate_threshold, detect_on_pyramid, localize)
from .pyramid import build_pyramid, level_doc, pyramid_level_sizes
from .render import render_graph
from .simulate import (TrafficScenario, ingest_telemetry, load_scenario,
                       records_by_interval, simulate_traffic)
from .spectral import eigendecompose, export_spectrum_csv, gft

SEED_ENV_VAR = "GSPNETMON_SEED"


@dataclass
class RunConfig:
    topology: str | None = None
    scenario: str | None = None
    levels: int = 2
    chebyshev_degree: int = 4
    cutoff_fraction: float = 0.5
    safety: float = 4.0
    top_m: int = 1
    seed: int | None = None
    output_dir: str = "out"
    jobs: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_config(path=None, **overrides) -> RunConfig:
    """Config file, then explicit overrides, then the seed env var."""
    data: dict = {}
    if path is not None:
        data.update(json.loads(Path(path).read_text()))
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(**data)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        cfg.seed = int(env_seed)
    return cfg


class IntervalResult(NamedTuple):
    interval: int
    hf_ratio: float
    detected: bool


@dataclass
class PipelineResult:
    tau: float
    intervals: list[IntervalResult]
    reports: dict[int, AnomalyReport]
    artifacts: list[str]
    summary: dict

    @property
    def any_detected(self) -> bool:
        return any(r.detected for r in self.intervals)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def run_pipeline(config: RunConfig) -> PipelineResult:
    """Simulate, aggregate, decompose, detect and localize every interval.

    Artifacts land in ``config.output_dir``: a summary ``report.json`` always,
    plus per detected interval the anomaly report, the coarsest-level spectrum
    CSV, and one colored DOT file per pyramid level.
    """
    if config.topology is None or config.scenario is None:
        raise FileNotFoundError("config must name topology and scenario files")
    g1 = load_topology(config.topology)
    scenario = load_scenario(config.scenario)
    if config.seed is not None:
        scenario = dataclasses.replace(scenario, seed=config.seed)

    records = simulate_traffic(g1, scenario)
    grouped = records_by_interval(records)
    signals1 = {t: ingest_telemetry(batch, g1) for t, batch in grouped.items()}

    g2, _coupling, assignment = build_monitor_layer(g1)
    signals2 = {t: aggregate(x, assignment) for t, x in signals1.items()}

    quiet = [signals2[t] for t in sorted(signals2)
             if not any(e.active(t) for e in scenario.events)]
    if len(quiet) < 5:
        raise CalibrationError(
            "scenario leaves fewer than 5 event-free intervals for calibration")
    tau = calibrate_threshold(quiet, g2, config.levels, config.cutoff_fraction,
                              config.safety, config.chebyshev_degree)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports: dict[int, AnomalyReport] = {}
    artifacts: list[str] = []
    results: dict[int, IntervalResult] = {}

    def process(t: int) -> list[str]:
        pyramid = build_pyramid(signals2[t], g2, config.levels,
                                degree=config.chebyshev_degree)
        det = detect_on_pyramid(pyramid, tau, config.cutoff_fraction)
        results[t] = IntervalResult(interval=t, hf_ratio=det.hf_ratio,
                                    detected=det.detected)
        if not det.detected:
            return []
        report = localize(pyramid, assignment, det, config.top_m)
        reports[t] = report
        written = []
        stem = f"t{t:04d}"
        report_path = out_dir / f"anomaly_{stem}.json"
        _atomic_write(report_path, json.dumps(report.to_dict(), indent=1) + "\n")
        written.append(str(report_path))

        coarse = pyramid.coarsest
        basis = eigendecompose(coarse.laplacian)
        spec_path = out_dir / f"spectrum_{stem}.csv"
        export_spectrum_csv(gft(coarse.approx, basis), basis, spec_path)
        written.append(str(spec_path))

        for level in pyramid.levels:
            dot_path = out_dir / f"level{level.index}_{stem}.dot"
            render_graph(level.graph, level.approx, dot_path, fmt="dot",
                         title=f"level{level.index}_{stem}")
            written.append(str(dot_path))
        doc = [level_doc(level) for level in pyramid.levels]
        pyr_path = out_dir / f"pyramid_{stem}.json"
        _atomic_write(pyr_path, json.dumps(doc, indent=1) + "\n")
        written.append(str(pyr_path))
        return written

    order = sorted(signals2)
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            for written in pool.map(process, order):
                artifacts.extend(written)
    else:
        for t in order:
            artifacts.extend(process(t))

    interval_results = [results[t] for t in order]
    summary = {
        "config": config.to_dict(),
        "tau": tau,
        "g1_nodes": g1.n_nodes,
        "g2_nodes": g2.n_nodes,
        "fan_in": assignment.fan_in,
        "level_sizes": list(pyramid_level_sizes(g2.n_nodes, config.levels)),
        "intervals": [{"t": r.interval, "hf_ratio": r.hf_ratio,
                       "detected": r.detected} for r in interval_results],
        "anomalies": [reports[t].to_dict() for t in sorted(reports)],
    }
    report_path = out_dir / "report.json"
    _atomic_write(report_path, json.dumps(summary, indent=1) + "\n")
    artifacts.append(str(report_path))
    return PipelineResult(tau=tau, intervals=interval_results, reports=reports,
                          artifacts=artifacts, summary=summary)
