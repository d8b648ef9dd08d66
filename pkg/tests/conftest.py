import math

import numpy as np
import pytest

import gspnetmon as gm
from gspnetmon.bench import random_connected_graph


def path_graph(n):
    return gm.build_layer(range(n), [(i, i + 1) for i in range(n - 1)])


def complete_graph(n):
    return gm.build_layer(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])


@pytest.fixture(scope="session")
def leaf_spine_ref():
    """The frozen reference data layer: 2 spines, 8 leaves, 16 hosts per leaf."""
    return gm.gen_leaf_spine(gm.LeafSpineSpec(2, 8, 16))


REF_TARGET_HOST = 32  # h22, monitor block m4


@pytest.fixture(scope="session")
def reference_scenario():
    return gm.TrafficScenario(
        seed=42, intervals=21, baseline_mu=float(np.log(1e5)), baseline_sigma=0.25,
        events=(gm.CongestionEvent(start_interval=20, end_interval=20,
                                   target_host=REF_TARGET_HOST, amplification=20.0),))


@pytest.fixture(scope="session")
def reference_pipeline(leaf_spine_ref, reference_scenario):
    """Simulated, ingested and aggregated reference scenario, shared per session."""
    from gspnetmon.simulate import records_by_interval

    g1 = leaf_spine_ref
    grouped = records_by_interval(gm.simulate_traffic(g1, reference_scenario))
    signals1 = {t: gm.ingest_telemetry(batch, g1) for t, batch in grouped.items()}
    g2, coupling, assignment = gm.build_monitor_layer(g1)
    signals2 = {t: gm.aggregate(x, assignment) for t, x in signals1.items()}
    return {"g1": g1, "g2": g2, "coupling": coupling, "assignment": assignment,
            "signals1": signals1, "signals2": signals2}


def random_graph(n, extra_edges, seed):
    return random_connected_graph(n, n - 1 + extra_edges, seed)
