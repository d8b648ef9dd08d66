"""Monitor layer construction, traffic aggregation, threshold calibration,
spectral detection, and coarse-to-fine localization.

Each monitor node senses a block of at most ceil(log2 N) data-layer nodes,
cut from the BFS order so monitored sets stay topologically local; block
sizes are balanced to within one node so no monitor carries a structural
bias. The monitor topology is virtual: monitors are chained in block order,
which keeps a smooth data-layer load smooth on the monitor graph and makes a
congested block a sharp, spectrally high feature. Detection runs on the
coarsest pyramid level; localization drills back down through parent maps,
re-ranking a parent and its graph neighbors at every level, which is where
the node-count reduction comes from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CalibrationError, DimensionError, GraphError, UsageError
from .graphs import GraphSignal, InterlayerCoupling, LayerGraph, build_layer
from .pyramid import Pyramid, PyramidLevel, build_pyramid, pyramid_level_sizes
from .spectral import eigendecompose, gft, high_frequency_ratio, laplacian

MONITOR_LAYER_INDEX = 2


@dataclass(eq=False)
class MonitorAssignment:
    """Partition of the data layer into per-monitor blocks."""

    blocks: tuple[tuple[int, ...], ...]
    fan_in: int

    @property
    def n_monitors(self) -> int:
        return len(self.blocks)

    @property
    def n_data_nodes(self) -> int:
        return sum(len(b) for b in self.blocks)

    def monitor_of(self) -> np.ndarray:
        """Data node id -> monitor id lookup."""
        out = np.empty(self.n_data_nodes, dtype=np.int64)
        for m, block in enumerate(self.blocks):
            out[list(block)] = m
        return out


class DetectionResult(NamedTuple):
    detected: bool
    hf_ratio: float
    tau: float


@dataclass(eq=False)
class AnomalyReport:
    detected: bool
    hf_ratio: float
    tau: float
    localization_path: tuple[tuple[int, int, float], ...]  # (level, vertex, intensity)
    suspect_g2_nodes: tuple[int, ...]
    suspect_g1_nodes: tuple[int, ...]
    nodes_examined: int

    def to_dict(self) -> dict:
        return {
            "detected": self.detected,
            "hf_ratio": self.hf_ratio,
            "tau": self.tau,
            "path": [{"level": lv, "vertex": v, "intensity": i}
                     for lv, v, i in self.localization_path],
            "suspect_g2": list(self.suspect_g2_nodes),
            "suspect_g1": list(self.suspect_g1_nodes),
            "nodes_examined": self.nodes_examined,
        }


def monitor_fan_in(n_data_nodes: int) -> int:
    """ceil(log2 N), computed in integer arithmetic."""
    if n_data_nodes < 2:
        raise ValueError("fan-in is defined for at least 2 data nodes")
    return (n_data_nodes - 1).bit_length()


def build_monitor_layer(data_layer: LayerGraph
                        ) -> tuple[LayerGraph, InterlayerCoupling, MonitorAssignment]:
    """Derive the monitor layer from a data layer.

    Data nodes are ordered by BFS from vertex 0 and cut into ceil(N/k)
    consecutive blocks, k = ceil(log2 N); sizes are balanced (within one
    node, never exceeding k). The virtual monitor topology chains the
    monitors in block order.

    Raises:
        GraphError: for data layers with fewer than 4 nodes.
    """
    n = data_layer.n_nodes
    if n < 4:
        raise GraphError("monitor layer construction needs at least 4 data nodes")
    k = monitor_fan_in(n)
    order = data_layer.bfs_order()
    n_monitors = math.ceil(n / k)
    base, extra = divmod(n, n_monitors)
    blocks = []
    start = 0
    for m in range(n_monitors):
        size = base + (1 if m < extra else 0)
        blocks.append(tuple(sorted(int(v) for v in order[start:start + size])))
        start += size
    assignment = MonitorAssignment(blocks=tuple(blocks), fan_in=k)
    monitor_of = assignment.monitor_of()

    chain = [(i, i + 1) for i in range(n_monitors - 1)]
    g2 = build_layer(range(n_monitors), chain,
                     roles=("monitor",) * n_monitors,
                     layer_index=MONITOR_LAYER_INDEX)
    g2 = LayerGraph(layer_index=MONITOR_LAYER_INDEX,
                    labels=tuple(f"m{i}" for i in range(n_monitors)),
                    adjacency=g2.adjacency, roles=g2.roles)

    membership = sp.csr_matrix(
        (np.ones(n), (np.arange(n), monitor_of)), shape=(n, n_monitors))
    coupling = InterlayerCoupling(layer_a=data_layer.layer_index,
                                  layer_b=MONITOR_LAYER_INDEX, matrix=membership)
    return g2, coupling, assignment


def aggregate(x1: GraphSignal, assignment: MonitorAssignment,
              ) -> GraphSignal:
    """Sum each monitor's block, in fixed ascending-id order.

    Total traffic is conserved: byte counters are integers, so the block sums
    are exact in float64.
    """
    if len(x1) != assignment.n_data_nodes:
        raise DimensionError(
            f"signal length {len(x1)} does not match the {assignment.n_data_nodes}"
            " monitored data nodes")
    if x1.values.min(initial=0.0) < 0:
        raise ValueError("traffic values must be nonnegative")
    values = np.array([x1.values[list(block)].sum() for block in assignment.blocks])
    return GraphSignal(layer_index=MONITOR_LAYER_INDEX, values=values,
                       interval_index=x1.interval_index)


def coarsest_ratio(x2: GraphSignal, g2: LayerGraph, levels: int,
                   cutoff_fraction: float = 0.5, degree: int = 4) -> float:
    """High-frequency energy ratio of the signal at the coarsest pyramid level."""
    p = build_pyramid(x2, g2, levels, degree=degree)
    return _level_ratio(p.coarsest, cutoff_fraction)


def _level_ratio(level: PyramidLevel, cutoff_fraction: float) -> float:
    basis = eigendecompose(level.laplacian)
    return high_frequency_ratio(gft(level.approx, basis), basis, cutoff_fraction)


def calibrate_threshold(baselines: Sequence[GraphSignal], g2: LayerGraph,
                        levels: int, cutoff_fraction: float = 0.5,
                        safety: float = 4.0, degree: int = 4) -> float:
    """Threshold tau = mean + safety * stddev of baseline coarse-level ratios.

    Raises:
        CalibrationError: with fewer than 5 baseline intervals.
    """
    if len(baselines) < 5:
        raise CalibrationError(
            f"calibration needs at least 5 baseline intervals, got {len(baselines)}")
    ratios = np.array([coarsest_ratio(x, g2, levels, cutoff_fraction, degree)
                       for x in baselines])
    return float(ratios.mean() + safety * ratios.std())


def detect(x: GraphSignal, graph: LayerGraph, tau: float,
           cutoff_fraction: float = 0.5) -> DetectionResult:
    """Flag a signal whose high-frequency ratio on the graph exceeds tau."""
    if graph.n_nodes < 2:
        raise GraphError("detection needs at least 2 vertices")
    basis = eigendecompose(laplacian(graph))
    ratio = high_frequency_ratio(gft(x, basis), basis, cutoff_fraction)
    return DetectionResult(detected=ratio > tau, hf_ratio=ratio, tau=tau)


def detect_on_pyramid(p: Pyramid, tau: float,
                      cutoff_fraction: float = 0.5) -> DetectionResult:
    """Detection at the coarsest pyramid level."""
    coarsest = p.coarsest
    return detect(coarsest.approx, coarsest.graph, tau, cutoff_fraction)


def _intensity(level: PyramidLevel) -> np.ndarray:
    """|detail| when available, else the centered approximation magnitude."""
    if level.detail is not None and np.abs(level.detail.values).max(initial=0.0) > 0.0:
        return np.abs(level.detail.values)
    v = level.approx.values
    return np.abs(v - v.mean())


def _top_ranked(candidates: np.ndarray, intensity: np.ndarray, top_m: int) -> list[int]:
    order = sorted(candidates, key=lambda v: (-intensity[v], v))
    return [int(v) for v in order[:top_m]]


def localize(p: Pyramid, assignment: MonitorAssignment,
             detection: DetectionResult, top_m: int = 1) -> AnomalyReport:
    """Coarse-to-fine search for the anomalous monitors and their blocks.

    Starting from the highest-intensity vertices of the coarsest level, each
    pick is mapped through the parent map and re-ranked against the parent's
    graph neighborhood one level finer, down to the monitor layer. Suspects
    expand to the monitored data nodes. ``nodes_examined`` counts every vertex
    whose intensity was compared.

    Raises:
        UsageError: when called without a positive detection.
    """
    if not detection.detected:
        raise UsageError("localization requires a positive detection")
    if top_m < 1:
        raise ValueError("top_m must be >= 1")

    levels = p.levels
    coarse = levels[-1]
    intensity = _intensity(coarse)
    examined = coarse.n_nodes
    picks = _top_ranked(np.arange(coarse.n_nodes), intensity, top_m)
    path = [(coarse.index, v, float(intensity[v])) for v in picks]

    for j in range(len(levels) - 1, 0, -1):
        child, parent_level = levels[j], levels[j - 1]
        parent_intensity = _intensity(parent_level)
        candidates: set[int] = set()
        for v in picks:
            pv = int(child.parent_map[v])
            candidates.add(pv)
            candidates.update(int(w) for w in parent_level.graph.neighbors(pv))
        cand = np.array(sorted(candidates), dtype=np.int64)
        examined += cand.size
        picks = _top_ranked(cand, parent_intensity, top_m)
        path.extend((parent_level.index, v, float(parent_intensity[v])) for v in picks)

    suspect_g2 = tuple(sorted(picks))
    suspect_g1 = tuple(sorted({node for m in suspect_g2
                               for node in assignment.blocks[m]}))
    return AnomalyReport(detected=True, hf_ratio=detection.hf_ratio,
                         tau=detection.tau, localization_path=tuple(path),
                         suspect_g2_nodes=suspect_g2, suspect_g1_nodes=suspect_g1,
                         nodes_examined=examined)


def reduction_report(n_data_nodes: int, levels: int) -> dict:
    """Node counts after the monitor-layer cut and ``levels`` halvings."""
    if n_data_nodes < 4:
        raise ValueError("reduction is defined for at least 4 data nodes")
    k = monitor_fan_in(n_data_nodes)
    g2_size = math.ceil(n_data_nodes / k)
    sizes = pyramid_level_sizes(g2_size, levels)
    return {
        "g1_size": n_data_nodes,
        "fan_in": k,
        "g2_size": g2_size,
        "level_sizes": list(sizes),
        "reduction_factor": n_data_nodes / sizes[-1],
    }
