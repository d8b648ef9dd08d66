"""Benchmark harness for the fast transform.

Times the Chebyshev path over edge-count doublings and polynomial degrees and
fits wall time against the work model M*|E| + M*N*(J+1). With the recurrence
shared across bands the matvec count equals the degree at every point, so a
good linear fit (R^2 near 1) is the expected signature.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from ._accel import active_backend, available_backends, warmup
from .graphs import GraphSignal, LayerGraph, build_layer
from .sgwt import design_filter_bank, sgwt_chebyshev
from .spectral import laplacian

DEFAULT_EDGE_COUNTS = (2000, 4000, 8000, 16000)
DEFAULT_DEGREES = (3, 4, 5, 6)


def random_connected_graph(n: int, n_edges: int, seed: int) -> LayerGraph:
    """Seeded random connected graph with exactly ``n_edges`` edges."""
    if n_edges < n - 1:
        raise ValueError(f"{n_edges} edges cannot connect {n} vertices")
    if n_edges > n * (n - 1) // 2:
        raise ValueError(f"{n_edges} edges exceed the simple-graph maximum for n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    edges: set[tuple[int, int]] = set()
    for i in range(1, n):  # random spanning tree first, so the graph connects
        j = int(rng.integers(0, i))
        a, b = int(perm[i]), int(perm[j])
        edges.add((min(a, b), max(a, b)))
    while len(edges) < n_edges:
        a, b = (int(v) for v in rng.integers(0, n, size=2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return build_layer(range(n), sorted(edges))


def bench_sweep(edge_counts=DEFAULT_EDGE_COUNTS, degrees=DEFAULT_DEGREES,
                n_scales: int = 4, edge_node_ratio: float = 4.0,
                repeats: int = 5, backends=None, seed: int = 7) -> dict:
    """Run the sweep and fit the complexity model per backend.

    Returns a dict with per-point rows {backend, N, E, M, J, wall_ns,
    matvec_count} and per-backend linear fits with their R^2.
    """
    if backends is None:
        backends = available_backends()
    rows = []
    for idx, e_target in enumerate(edge_counts):
        n = max(8, round(e_target / edge_node_ratio))
        g = random_connected_graph(n, e_target, seed + idx)
        lap = laplacian(g)
        bank = design_filter_bank(lap.lambda_max_estimate, n_scales)
        rng = np.random.default_rng(seed + 1000 + idx)
        x = GraphSignal(layer_index=1, values=rng.lognormal(11.5, 0.25, n))
        for backend in backends:
            warmup(backend)
            for degree in degrees:
                sgwt_chebyshev(x, lap, bank, degree, backend=backend)  # warm caches
                samples = []
                coeffs = None
                for _ in range(repeats):
                    t0 = time.perf_counter_ns()
                    coeffs = sgwt_chebyshev(x, lap, bank, degree, backend=backend)
                    samples.append(time.perf_counter_ns() - t0)
                rows.append({
                    "backend": backend,
                    "N": n,
                    "E": g.n_edges,
                    "M": degree,
                    "J": n_scales,
                    "wall_ns": int(np.median(samples)),
                    "matvec_count": coeffs.matvec_count,
                })
    return {"default_backend": active_backend(),
            "rows": rows,
            "fits": {b: fit_complexity([r for r in rows if r["backend"] == b])
                     for b in backends}}


def fit_complexity(rows) -> dict:
    """Least-squares fit of wall_ns against M*(|E| + N*(J+1))."""
    x = np.array([r["M"] * (r["E"] + r["N"] * (r["J"] + 1)) for r in rows],
                 dtype=np.float64)
    y = np.array([r["wall_ns"] for r in rows], dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(((y - predicted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return {"slope_ns_per_unit": float(slope), "intercept_ns": float(intercept),
            "r_squared": r_squared}


def write_benchmark(result: dict, path) -> None:
    Path(path).write_text(json.dumps(result, indent=1) + "\n")
