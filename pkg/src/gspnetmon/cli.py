"""Command-line interface.

Subcommands mirror the pipeline stages: topo, simulate, monitor, decompose,
detect, localize, run, bench, render. ``run`` exits 0 when no anomaly was
detected, 2 when one was, 1 on error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (DEFAULT_DEGREES, DEFAULT_EDGE_COUNTS, bench_sweep,
                    write_benchmark)
from .graphs import load_topology, save_topology
from .monitor import aggregate, build_monitor_layer, calibrate_threshold
from .pipeline import PipelineResult, RunConfig, load_config, run_pipeline
from .pyramid import build_pyramid, level_doc
from .render import render_graph
from .simulate import (LeafSpineSpec, gen_leaf_spine, ingest_telemetry,
                       load_scenario, read_telemetry_jsonl, records_by_interval,
                       simulate_traffic, write_telemetry_jsonl)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ANOMALY = 2


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration file")
    p.add_argument("--topology", help="topology JSON path")
    p.add_argument("--scenario", help="traffic scenario JSON path")
    p.add_argument("--levels", type=int, help="pyramid levels (default 2)")
    p.add_argument("--degree", type=int, dest="chebyshev_degree",
                   help="Chebyshev polynomial degree (default 4)")
    p.add_argument("--cutoff", type=float, dest="cutoff_fraction",
                   help="high-frequency cutoff fraction (default 0.5)")
    p.add_argument("--safety", type=float, help="threshold safety factor (default 4)")
    p.add_argument("--top-m", type=int, dest="top_m",
                   help="vertices tracked per level during localization")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--output-dir", dest="output_dir", help="artifact directory")
    p.add_argument("--jobs", type=int, help="parallel interval workers")


def _config_from(args) -> RunConfig:
    keys = ("topology", "scenario", "levels", "chebyshev_degree",
            "cutoff_fraction", "safety", "top_m", "seed", "output_dir", "jobs")
    overrides = {k: getattr(args, k, None) for k in keys}
    return load_config(args.config, **overrides)


def _signals_on_monitor(cfg: RunConfig, telemetry_path: str | None):
    g1 = load_topology(cfg.topology)
    if telemetry_path:
        records = read_telemetry_jsonl(telemetry_path)
    else:
        records = simulate_traffic(g1, load_scenario(cfg.scenario))
    grouped = records_by_interval(records)
    g2, coupling, assignment = build_monitor_layer(g1)
    signals = {t: aggregate(ingest_telemetry(batch, g1), assignment)
               for t, batch in grouped.items()}
    return g1, g2, coupling, assignment, signals


def cmd_topo(args) -> int:
    spec = LeafSpineSpec(spines=args.spines, leaves=args.leaves,
                         hosts_per_leaf=args.hosts_per_leaf)
    g = gen_leaf_spine(spec)
    save_topology(g, args.out)
    print(f"wrote {args.out}: {g.n_nodes} nodes, {g.n_edges} edges")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config_from(args)
    g1 = load_topology(cfg.topology)
    scenario = load_scenario(cfg.scenario)
    if cfg.seed is not None:
        import dataclasses

        scenario = dataclasses.replace(scenario, seed=cfg.seed)
    records = simulate_traffic(g1, scenario)
    write_telemetry_jsonl(records, args.out)
    print(f"wrote {args.out}: {len(records)} records over {scenario.intervals} intervals")
    return EXIT_OK


def cmd_monitor(args) -> int:
    cfg = _config_from(args)
    g1 = load_topology(cfg.topology)
    g2, coupling, assignment = build_monitor_layer(g1)
    doc = {
        "fan_in": assignment.fan_in,
        "g1_nodes": g1.n_nodes,
        "g2_nodes": g2.n_nodes,
        "blocks": {str(m): list(block) for m, block in enumerate(assignment.blocks)},
        "monitor_topology": {
            "version": 1,
            "nodes": [{"id": i, "label": g2.labels[i], "role": g2.roles[i]}
                      for i in range(g2.n_nodes)],
            "edges": [[i, j] for i, j, _ in g2.edges()],
        },
    }
    Path(args.out).write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {args.out}: {g2.n_nodes} monitors, fan-in {assignment.fan_in}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg = _config_from(args)
    _g1, g2, _coupling, _assignment, signals = _signals_on_monitor(cfg, args.telemetry)
    if args.interval not in signals:
        raise KeyError(f"interval {args.interval} not present in the telemetry")
    pyramid = build_pyramid(signals[args.interval], g2, cfg.levels,
                            degree=cfg.chebyshev_degree)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = [level_doc(level) for level in pyramid.levels]
    (out_dir / "pyramid.json").write_text(json.dumps(doc, indent=1) + "\n")
    for level in pyramid.levels:
        render_graph(level.graph, level.approx,
                     out_dir / f"level{level.index}.dot", fmt="dot",
                     title=f"level{level.index}")
    print(f"wrote pyramid with sizes {list(pyramid.sizes)} to {out_dir}")
    return EXIT_OK


def _detect_stage(args, do_localize: bool) -> int:
    from .monitor import detect_on_pyramid, localize as run_localize

    cfg = _config_from(args)
    _g1, g2, _coupling, assignment, signals = _signals_on_monitor(cfg, args.telemetry)
    order = sorted(signals)
    n_base = args.baseline_count if args.baseline_count is not None else len(order) - 1
    baseline = [signals[t] for t in order[:n_base]]
    tau = calibrate_threshold(baseline, g2, cfg.levels, cfg.cutoff_fraction,
                              cfg.safety, cfg.chebyshev_degree)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    anomalies = []
    for t in order:
        pyramid = build_pyramid(signals[t], g2, cfg.levels,
                                degree=cfg.chebyshev_degree)
        det = detect_on_pyramid(pyramid, tau, cfg.cutoff_fraction)
        rows.append({"t": t, "hf_ratio": det.hf_ratio, "detected": det.detected})
        if det.detected and do_localize:
            report = run_localize(pyramid, assignment, det, cfg.top_m)
            anomalies.append(report.to_dict())
            (out_dir / f"anomaly_t{t:04d}.json").write_text(
                json.dumps(report.to_dict(), indent=1) + "\n")
    doc = {"tau": tau, "intervals": rows}
    if do_localize:
        doc["anomalies"] = anomalies
    out_path = out_dir / ("localize.json" if do_localize else "detect.json")
    out_path.write_text(json.dumps(doc, indent=1) + "\n")
    detected = [r["t"] for r in rows if r["detected"]]
    print(f"tau={tau:.6g}; detected intervals: {detected or 'none'}")
    return EXIT_ANOMALY if detected else EXIT_OK


def cmd_detect(args) -> int:
    return _detect_stage(args, do_localize=False)


def cmd_localize(args) -> int:
    return _detect_stage(args, do_localize=True)


def cmd_run(args) -> int:
    cfg = _config_from(args)
    result: PipelineResult = run_pipeline(cfg)
    detected = [r.interval for r in result.intervals if r.detected]
    print(f"tau={result.tau:.6g}; {len(result.intervals)} intervals; "
          f"detected: {detected or 'none'}")
    print(f"artifacts in {cfg.output_dir}")
    return EXIT_ANOMALY if detected else EXIT_OK


def cmd_bench(args) -> int:
    edges = tuple(int(v) for v in args.edges.split(","))
    degrees = tuple(int(v) for v in args.degrees.split(","))
    backends = tuple(args.backends.split(",")) if args.backends else None
    result = bench_sweep(edge_counts=edges, degrees=degrees,
                         n_scales=args.scales, repeats=args.repeats,
                         backends=backends, seed=args.seed)
    write_benchmark(result, args.out)
    for backend, fit in result["fits"].items():
        print(f"{backend}: R^2 = {fit['r_squared']:.4f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = _config_from(args)
    g1 = load_topology(cfg.topology)
    if args.telemetry:
        records = read_telemetry_jsonl(args.telemetry)
    else:
        records = simulate_traffic(g1, load_scenario(cfg.scenario))
    grouped = records_by_interval(records)
    if args.interval not in grouped:
        raise KeyError(f"interval {args.interval} not present in the telemetry")
    x = ingest_telemetry(grouped[args.interval], g1)
    render_graph(g1, x, args.out, fmt=args.format, title=f"t{args.interval}")
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gspnetmon",
        description="SDN traffic monitoring on a reduced monitor layer with "
                    "multiscale spectral anomaly detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("topo", help="generate a leaf-spine topology file")
    p.add_argument("--spines", type=int, required=True)
    p.add_argument("--leaves", type=int, required=True)
    p.add_argument("--hosts-per-leaf", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_topo)

    p = sub.add_parser("simulate", help="write telemetry JSON lines for a scenario")
    _add_config_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("monitor", help="derive the monitor layer from a topology")
    _add_config_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("decompose", help="pyramid-decompose one interval")
    _add_config_args(p)
    p.add_argument("--telemetry", help="telemetry JSONL (default: simulate)")
    p.add_argument("--interval", type=int, required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("detect", help="calibrate and score every interval")
    _add_config_args(p)
    p.add_argument("--telemetry", help="telemetry JSONL (default: simulate)")
    p.add_argument("--baseline-count", type=int,
                   help="intervals used for calibration (default: all but last)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("localize", help="detect plus coarse-to-fine localization")
    _add_config_args(p)
    p.add_argument("--telemetry", help="telemetry JSONL (default: simulate)")
    p.add_argument("--baseline-count", type=int,
                   help="intervals used for calibration (default: all but last)")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("run", help="full pipeline with artifacts")
    _add_config_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="time the fast transform and fit the cost model")
    p.add_argument("--edges", default=",".join(str(e) for e in DEFAULT_EDGE_COUNTS))
    p.add_argument("--degrees", default=",".join(str(d) for d in DEFAULT_DEGREES))
    p.add_argument("--scales", type=int, default=4)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--backends", help="comma list, e.g. numba,numpy")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="color a topology by one interval's traffic")
    _add_config_args(p)
    p.add_argument("--telemetry", help="telemetry JSONL (default: simulate)")
    p.add_argument("--interval", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("dot", "svg", "json"), default="dot")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_ERROR
    except Exception as exc:  # surface as exit 1 with a diagnostic
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
