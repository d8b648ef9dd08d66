import numpy as np
import pytest

import gspnetmon as gm
from gspnetmon.errors import CalibrationError, DimensionError, GraphError, UsageError
from gspnetmon.monitor import (DetectionResult, coarsest_ratio, detect,
                               detect_on_pyramid, monitor_fan_in)
from gspnetmon.spectral import eigendecompose, laplacian
from conftest import REF_TARGET_HOST, path_graph, random_graph

# Frozen reference goldens (leaf-spine 2/8/16, seed 42, target host 32, L=2).
REF_TAU = 0.04013684460844554
REF_CONGESTED_RATIO = 0.46223172220509956
REF_BASELINE_MAX = 0.02668787296743787


class TestFanIn:
    @pytest.mark.parametrize("n,k", [(4, 2), (138, 8), (1024, 10), (16000, 14)])
    def test_values(self, n, k):
        assert monitor_fan_in(n) == k


class TestBuildMonitorLayer:
    def test_sizes_1024(self):
        g = random_graph(1024, 400, 0)
        g2, coupling, assignment = gm.build_monitor_layer(g)
        assert assignment.fan_in == 10
        assert g2.n_nodes == 103

    def test_sizes_16000(self):
        g = random_graph(16000, 200, 1)
        g2, _, assignment = gm.build_monitor_layer(g)
        assert assignment.fan_in == 14
        assert g2.n_nodes == 1143  # paper reports 1148; within the 1% tolerance
        assert abs(g2.n_nodes - 1148) <= 0.01 * 1148

    def test_partition_and_balance(self, leaf_spine_ref):
        _, _, assignment = gm.build_monitor_layer(leaf_spine_ref)
        seen = [v for block in assignment.blocks for v in block]
        assert sorted(seen) == list(range(leaf_spine_ref.n_nodes))
        sizes = {len(b) for b in assignment.blocks}
        assert max(sizes) <= assignment.fan_in
        assert max(sizes) - min(sizes) <= 1

    def test_blocks_are_bfs_consecutive(self, leaf_spine_ref):
        _, _, assignment = gm.build_monitor_layer(leaf_spine_ref)
        order = leaf_spine_ref.bfs_order()
        position = np.empty(leaf_spine_ref.n_nodes, dtype=int)
        position[order] = np.arange(leaf_spine_ref.n_nodes)
        starts = []
        for block in assignment.blocks:
            ps = sorted(position[v] for v in block)
            assert ps == list(range(ps[0], ps[0] + len(ps)))
            starts.append(ps[0])
        assert starts == sorted(starts)

    def test_monitor_chain_topology(self, leaf_spine_ref):
        g2, _, _ = gm.build_monitor_layer(leaf_spine_ref)
        assert g2.edges() == [(i, i + 1, 1.0) for i in range(g2.n_nodes - 1)]
        assert g2.roles == ("monitor",) * g2.n_nodes

    def test_connected_g2_over_seeded_graphs(self):
        for seed in range(20):
            g = random_graph(int(np.random.default_rng(seed).integers(8, 200)),
                             10, seed)
            g2, _, _ = gm.build_monitor_layer(g)
            assert g2.is_connected()

    def test_coupling_encodes_blocks(self, leaf_spine_ref):
        _, coupling, assignment = gm.build_monitor_layer(leaf_spine_ref)
        mat = coupling.matrix.toarray()
        assert mat.shape == (leaf_spine_ref.n_nodes, assignment.n_monitors)
        assert np.all(mat.sum(axis=1) == 1)
        for m, block in enumerate(assignment.blocks):
            assert set(np.flatnonzero(mat[:, m])) == set(block)

    def test_small_graph_rejected(self):
        with pytest.raises(GraphError):
            gm.build_monitor_layer(path_graph(3))


class TestAggregate:
    def test_block_sum(self):
        assignment = gm.MonitorAssignment(blocks=((0, 1, 2), (3,)), fan_in=3)
        x = gm.GraphSignal(1, np.array([10.0, 20.0, 30.0, 7.0]))
        out = gm.aggregate(x, assignment)
        np.testing.assert_array_equal(out.values, [60.0, 7.0])
        assert out.layer_index == 2

    def test_zeros(self):
        assignment = gm.MonitorAssignment(blocks=((0, 1), (2, 3)), fan_in=2)
        out = gm.aggregate(gm.GraphSignal(1, np.zeros(4)), assignment)
        assert not out.values.any()

    def test_conservation_reference(self, reference_pipeline):
        signals1 = reference_pipeline["signals1"]
        signals2 = reference_pipeline["signals2"]
        for t in signals1:
            assert signals2[t].values.sum() == signals1[t].values.sum()

    def test_length_mismatch(self):
        assignment = gm.MonitorAssignment(blocks=((0, 1), (2,)), fan_in=2)
        with pytest.raises(DimensionError):
            gm.aggregate(gm.GraphSignal(1, np.ones(5)), assignment)

    def test_negative_rejected(self):
        assignment = gm.MonitorAssignment(blocks=((0,), (1,)), fan_in=1)
        with pytest.raises(ValueError):
            gm.aggregate(gm.GraphSignal(1, np.array([1.0, -2.0])), assignment)


class TestCalibrate:
    def test_identical_baselines(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        x = reference_pipeline["signals2"][0]
        tau = gm.calibrate_threshold([x] * 6, g2, 2)
        assert tau == pytest.approx(coarsest_ratio(x, g2, 2), abs=1e-12)

    def test_constant_baselines_give_zero(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        const = gm.GraphSignal(2, np.full(g2.n_nodes, 9.0))
        assert gm.calibrate_threshold([const] * 5, g2, 2) == 0.0
        # any interval with nonzero high-frequency content now triggers
        basis = eigendecompose(laplacian(g2))
        bumpy = gm.GraphSignal(2, np.abs(basis.eigenvectors[:, -1]) + 1.0)
        pyramid = gm.build_pyramid(bumpy, g2, 2)
        assert detect_on_pyramid(pyramid, 0.0, 0.5).detected

    def test_too_few_baselines(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        x = reference_pipeline["signals2"][0]
        with pytest.raises(CalibrationError):
            gm.calibrate_threshold([x] * 4, g2, 2)

    def test_reference_tau_golden(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        baselines = [reference_pipeline["signals2"][t] for t in range(20)]
        tau = gm.calibrate_threshold(baselines, g2, 2)
        assert tau == pytest.approx(REF_TAU, rel=1e-6)


class TestDetect:
    def test_constant_signal_not_detected(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        x = gm.GraphSignal(2, np.full(g2.n_nodes, 4.0))
        result = detect(x, g2, tau=0.01)
        assert result == DetectionResult(False, 0.0, 0.01)

    def test_top_eigenvector_detected(self):
        g = random_graph(12, 18, 5)
        basis = eigendecompose(laplacian(g))
        result = detect(gm.GraphSignal(1, basis.eigenvectors[:, -1]), g, tau=0.9)
        assert result.detected
        assert result.hf_ratio == pytest.approx(1.0)

    def test_scale_invariant_decision(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        x = reference_pipeline["signals2"][3]
        scaled = gm.GraphSignal(2, 13.0 * x.values)
        assert detect(x, g2, 0.02).detected == detect(scaled, g2, 0.02).detected

    def test_reference_congested_detected(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        signals2 = reference_pipeline["signals2"]
        tau = gm.calibrate_threshold([signals2[t] for t in range(20)], g2, 2)
        pyramid = gm.build_pyramid(signals2[20], g2, 2)
        result = detect_on_pyramid(pyramid, tau, 0.5)
        assert result.detected
        assert result.hf_ratio == pytest.approx(REF_CONGESTED_RATIO, rel=1e-6)

    def test_tiny_graph_rejected(self):
        g = gm.build_layer([0], [])
        with pytest.raises(GraphError):
            detect(gm.GraphSignal(1, np.ones(1)), g, 0.5)


class TestLocalize:
    def _reference_report(self, reference_pipeline, top_m=1):
        g2 = reference_pipeline["g2"]
        assignment = reference_pipeline["assignment"]
        signals2 = reference_pipeline["signals2"]
        tau = gm.calibrate_threshold([signals2[t] for t in range(20)], g2, 2)
        pyramid = gm.build_pyramid(signals2[20], g2, 2)
        det = detect_on_pyramid(pyramid, tau, 0.5)
        return pyramid, gm.localize(pyramid, assignment, det, top_m=top_m)

    def test_requires_positive_detection(self, reference_pipeline):
        assignment = reference_pipeline["assignment"]
        pyramid = gm.build_pyramid(reference_pipeline["signals2"][0],
                                   reference_pipeline["g2"], 2)
        with pytest.raises(UsageError):
            gm.localize(pyramid, assignment, DetectionResult(False, 0.0, 1.0))

    def test_reference_suspects_contain_target_block(self, reference_pipeline):
        assignment = reference_pipeline["assignment"]
        _, report = self._reference_report(reference_pipeline)
        target_block = assignment.blocks[assignment.monitor_of()[REF_TARGET_HOST]]
        assert set(target_block) <= set(report.suspect_g1_nodes)
        assert report.detected

    def test_examined_bound_formula(self, reference_pipeline):
        pyramid, report = self._reference_report(reference_pipeline, top_m=2)
        bound = pyramid.coarsest.n_nodes
        for level in pyramid.levels[:-1]:
            degree = int(np.diff(level.graph.adjacency.indptr).max())
            bound += 2 * (1 + degree)
        assert report.nodes_examined <= bound
        assert report.nodes_examined <= pyramid.total_vertices

    def test_soundness_bound(self, reference_pipeline):
        g2 = reference_pipeline["g2"]
        pyramid, report = self._reference_report(reference_pipeline, top_m=1)
        max_degree = int(g2.degrees().max())
        assert 1 * (1 + max_degree) < -(-g2.n_nodes // 2)
        assert report.nodes_examined < g2.n_nodes

    def test_exhaustive_top_m(self, reference_pipeline):
        pyramid, report = self._reference_report(
            reference_pipeline, top_m=pyramid_size(reference_pipeline))
        assert len(report.suspect_g2_nodes) >= 1
        assert report.nodes_examined <= pyramid.total_vertices

    def test_path_is_coarse_to_fine(self, reference_pipeline):
        pyramid, report = self._reference_report(reference_pipeline)
        levels = [lv for lv, _, _ in report.localization_path]
        assert levels == sorted(levels, reverse=True)
        assert levels[0] == len(pyramid.levels) - 1
        assert levels[-1] == 0

    def test_report_json_schema(self, reference_pipeline):
        _, report = self._reference_report(reference_pipeline)
        doc = report.to_dict()
        assert set(doc) == {"detected", "hf_ratio", "tau", "path", "suspect_g2",
                            "suspect_g1", "nodes_examined"}
        assert all(set(p) == {"level", "vertex", "intensity"} for p in doc["path"])


def pyramid_size(reference_pipeline):
    import math

    g2 = reference_pipeline["g2"]
    return math.ceil(math.ceil(g2.n_nodes / 2) / 2)  # coarsest size for L=2


class TestReductionReport:
    def test_paper_16000(self):
        report = gm.reduction_report(16000, 2)
        assert report["fan_in"] == 14
        assert report["level_sizes"] == [1143, 572, 286]
        for ours, paper in zip(report["level_sizes"], (1148, 574, 287)):
            assert abs(ours - paper) <= 0.01 * paper

    def test_16_nodes_no_levels(self):
        report = gm.reduction_report(16, 0)
        assert report["g2_size"] == 4
        assert report["reduction_factor"] == 4.0

    def test_1024_three_levels(self):
        report = gm.reduction_report(1024, 3)
        assert report["level_sizes"] == [103, 52, 26, 13]
        assert report["reduction_factor"] == pytest.approx(1024 / 13)

    def test_too_small(self):
        with pytest.raises(ValueError):
            gm.reduction_report(3, 1)

    def test_too_deep(self):
        with pytest.raises(ValueError):
            gm.reduction_report(16, 3)  # 4 -> 2 -> 1 -> cannot halve again
