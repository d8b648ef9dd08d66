"""Synthetic SDN telemetry: leaf-spine topology generation and deterministic
per-interval byte counters standing in for switch statistics replies.

Counters follow a lognormal whose log-load varies as a slowly drifting
gradient across the breadth-first order of the topology plus a small
uncorrelated jitter. Normal traffic is therefore spatially smooth (spectrally
low-frequency on the monitor layer), which is the regime the detector's
hypothesis requires; a congestion event multiplies one host's counter and
shows up as a sharp localized spike. Everything is reproducible per seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GraphError, TelemetryError
from .graphs import GraphSignal, LayerGraph, build_layer


@dataclass(frozen=True)
class LeafSpineSpec:
    spines: int
    leaves: int
    hosts_per_leaf: int

    def __post_init__(self):
        if min(self.spines, self.leaves, self.hosts_per_leaf) < 1:
            raise ValueError("spines, leaves and hosts_per_leaf must all be >= 1")

    @property
    def n_nodes(self) -> int:
        return self.spines + self.leaves + self.leaves * self.hosts_per_leaf


@dataclass(frozen=True)
class CongestionEvent:
    start_interval: int
    end_interval: int
    target_host: int
    amplification: float

    def active(self, t: int) -> bool:
        return self.start_interval <= t <= self.end_interval


@dataclass(frozen=True)
class TrafficScenario:
    seed: int
    intervals: int
    baseline_mu: float
    baseline_sigma: float
    events: tuple[CongestionEvent, ...] = ()

    def __post_init__(self):
        if self.intervals < 1:
            raise ValueError("scenario needs at least one interval")
        for e in self.events:
            if not (0 <= e.start_interval <= e.end_interval < self.intervals):
                raise ValueError(
                    f"event window [{e.start_interval}, {e.end_interval}] outside"
                    f" [0, {self.intervals})")
            if not (math.isfinite(e.amplification) and e.amplification >= 1.0):
                raise ValueError("amplification must be finite and >= 1")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "intervals": self.intervals,
            "baseline": {"distribution": "lognormal",
                         "mu": self.baseline_mu, "sigma": self.baseline_sigma},
            "congestion_events": [
                {"start_interval": e.start_interval, "end_interval": e.end_interval,
                 "target_host": e.target_host, "amplification": e.amplification}
                for e in self.events],
        }


def save_scenario(s: TrafficScenario, path) -> None:
    Path(path).write_text(json.dumps(s.to_dict(), indent=1) + "\n")


def load_scenario(path) -> TrafficScenario:
    doc = json.loads(Path(path).read_text())
    base = doc["baseline"]
    if base.get("distribution", "lognormal") != "lognormal":
        raise ValueError(f"unsupported baseline distribution {base.get('distribution')!r}")
    return TrafficScenario(
        seed=int(doc["seed"]), intervals=int(doc["intervals"]),
        baseline_mu=float(base["mu"]), baseline_sigma=float(base["sigma"]),
        events=tuple(CongestionEvent(
            start_interval=int(e["start_interval"]),
            end_interval=int(e["end_interval"]),
            target_host=int(e["target_host"]),
            amplification=float(e["amplification"]))
            for e in doc.get("congestion_events", [])))


@dataclass(frozen=True)
class TelemetryRecord:
    interval: int
    node: int
    rx_bytes: int
    tx_bytes: int
    rx_errors: int = 0


def gen_leaf_spine(spec: LeafSpineSpec) -> LayerGraph:
    """Leaf-spine data layer: full spine-leaf bipartite mesh, hosts per leaf.

    Node order is spines, then leaves, then hosts; labels s*, l*, h*.
    """
    labels, roles = [], []
    for i in range(spec.spines):
        labels.append(f"s{i}")
        roles.append("spine-switch")
    for i in range(spec.leaves):
        labels.append(f"l{i}")
        roles.append("leaf-switch")
    for i in range(spec.leaves * spec.hosts_per_leaf):
        labels.append(f"h{i}")
        roles.append("host")

    first_leaf = spec.spines
    first_host = spec.spines + spec.leaves
    edges = []
    for s in range(spec.spines):
        for l in range(spec.leaves):
            edges.append((s, first_leaf + l))
    for h in range(spec.leaves * spec.hosts_per_leaf):
        edges.append((first_leaf + h // spec.hosts_per_leaf, first_host + h))
    g = build_layer(range(len(labels)), edges, roles=roles, layer_index=1)
    return LayerGraph(layer_index=1, labels=tuple(labels), adjacency=g.adjacency,
                      roles=g.roles)


# Weight of the uncorrelated per-node component of the log-load field; the
# remainder is the smooth drifting gradient.
JITTER_WEIGHT = 0.03


def _gradient_positions(g: LayerGraph) -> np.ndarray:
    """Node positions in [0, 1) along the breadth-first order."""
    pos = np.empty(g.n_nodes)
    pos[g.bfs_order()] = np.arange(g.n_nodes) / max(g.n_nodes, 1)
    return pos


def _load_field(pos: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One interval's standardized log-load: drifting half-cosine gradient
    over the BFS order plus a small independent jitter."""
    phase = rng.uniform(0.0, 2.0 * np.pi)
    profile = np.cos(np.pi * pos + phase)
    profile = profile - profile.mean()
    std = profile.std()
    if std > 0:
        profile /= std
    noise = rng.standard_normal(pos.shape[0])
    return np.sqrt(1.0 - JITTER_WEIGHT ** 2) * profile + JITTER_WEIGHT * noise


def traffic_matrices(g: LayerGraph, scenario: TrafficScenario
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Receive and transmit counters as (T, N) int64 arrays.

    Fully deterministic per seed. The draws do not depend on the configured
    events, so an amplification of 1 reproduces the no-event stream bit for
    bit; amplification applies to the already-rounded base counter.
    """
    hosts = {i for i, r in enumerate(g.roles) if r == "host"}
    for e in scenario.events:
        if e.target_host not in hosts:
            raise GraphError(f"event target {e.target_host} is not a host node")

    pos = _gradient_positions(g)
    rng = np.random.default_rng(scenario.seed)
    rx = np.empty((scenario.intervals, g.n_nodes), dtype=np.int64)
    tx = np.empty((scenario.intervals, g.n_nodes), dtype=np.int64)
    for t in range(scenario.intervals):
        for counters in (rx, tx):
            field = _load_field(pos, rng)
            counters[t] = np.rint(np.exp(
                scenario.baseline_mu + scenario.baseline_sigma * field)
            ).astype(np.int64)
        for e in scenario.events:
            if e.active(t):
                rx[t, e.target_host] = int(round(rx[t, e.target_host]
                                                 * e.amplification))
    return rx, tx


def simulate_traffic(g: LayerGraph, scenario: TrafficScenario) -> list[TelemetryRecord]:
    """Materialize the record stream, intervals ascending, nodes ascending."""
    rx, tx = traffic_matrices(g, scenario)
    return [TelemetryRecord(interval=t, node=v, rx_bytes=int(rx[t, v]),
                            tx_bytes=int(tx[t, v]), rx_errors=0)
            for t in range(scenario.intervals) for v in range(g.n_nodes)]


def ingest_telemetry(records, g: LayerGraph) -> GraphSignal:
    """Turn one interval's records into the data-layer signal (rx bytes).

    Raises:
        TelemetryError: on multiple intervals in the batch, duplicated nodes,
            or nodes with no record.
    """
    records = list(records)
    if not records:
        raise TelemetryError("no telemetry records supplied")
    intervals = {r.interval for r in records}
    if len(intervals) != 1:
        raise TelemetryError(f"records span multiple intervals: {sorted(intervals)}")
    t = intervals.pop()
    values = np.full(g.n_nodes, -1.0)
    for r in records:
        if not 0 <= r.node < g.n_nodes:
            raise TelemetryError(f"record for unknown node {r.node}")
        if values[r.node] >= 0:
            raise TelemetryError(f"duplicate record for node {r.node} at t={t}")
        if min(r.rx_bytes, r.tx_bytes, r.rx_errors) < 0:
            raise TelemetryError(f"negative counter for node {r.node} at t={t}")
        values[r.node] = float(r.rx_bytes)
    missing = np.flatnonzero(values < 0)
    if missing.size:
        raise TelemetryError(
            f"missing telemetry at t={t} for nodes {[int(v) for v in missing]}")
    return GraphSignal(layer_index=g.layer_index, values=values, interval_index=t)


def write_telemetry_jsonl(records, path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps({"t": r.interval, "node": r.node,
                                 "rx_bytes": r.rx_bytes, "tx_bytes": r.tx_bytes,
                                 "rx_errors": r.rx_errors}) + "\n")


def read_telemetry_jsonl(path) -> list[TelemetryRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            out.append(TelemetryRecord(interval=int(d["t"]), node=int(d["node"]),
                                       rx_bytes=int(d["rx_bytes"]),
                                       tx_bytes=int(d["tx_bytes"]),
                                       rx_errors=int(d.get("rx_errors", 0))))
    return out


def records_by_interval(records) -> dict[int, list[TelemetryRecord]]:
    grouped: dict[int, list[TelemetryRecord]] = {}
    for r in records:
        grouped.setdefault(r.interval, []).append(r)
    return grouped
