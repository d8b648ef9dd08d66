import numpy as np
import pytest

import gspnetmon as gm
from gspnetmon.errors import CapacityError, DimensionError
from gspnetmon.spectral import (eigendecompose, export_spectrum_csv, gft,
                                high_frequency_ratio, igft, laplacian)
from conftest import complete_graph, path_graph, random_graph

# Frozen from the reference scenario (seed 42, target host 32), ratios on the
# monitor layer; spiked/smooth > 5 is the anomaly-visibility property.
GOLDEN_SMOOTH_RATIO = 0.001971029582943248
GOLDEN_SPIKED_RATIO = 0.5447170207461989


class TestLaplacian:
    def test_path3(self):
        l = laplacian(path_graph(3))
        np.testing.assert_array_equal(
            l.matrix.toarray(), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])

    def test_isolated_node(self):
        l = laplacian(gm.build_layer([0], []))
        np.testing.assert_array_equal(l.matrix.toarray(), [[0.0]])
        assert l.lambda_max_estimate == 0.0

    def test_k3(self):
        l = laplacian(complete_graph(3))
        a = l.matrix.toarray()
        np.testing.assert_array_equal(np.diag(a), [2, 2, 2])
        assert np.all(a[~np.eye(3, dtype=bool)] == -1)

    def test_row_sums_zero(self):
        for seed in range(4):
            l = laplacian(random_graph(40, 60, seed))
            rows = np.asarray(l.matrix.sum(axis=1)).ravel()
            assert np.abs(rows).max() <= 1e-9 * max(1.0, l.matrix.diagonal().max())

    def test_lambda_max_estimate_bounds(self):
        for seed in range(4):
            g = random_graph(50, 80, seed)
            l = laplacian(g)
            true = eigendecompose(l).lambda_max
            assert true <= l.lambda_max_estimate <= 1.02 * true

    def test_cached_per_graph(self):
        g = path_graph(5)
        assert laplacian(g) is laplacian(g)

    def test_normalized_variant(self):
        l = laplacian(random_graph(30, 40, 1), normalized=True)
        vals = eigendecompose(l).eigenvalues
        assert vals[0] >= -1e-9
        assert vals[-1] <= 2.0 + 1e-9


class TestEigendecompose:
    def test_path3_eigenvalues(self):
        basis = eigendecompose(laplacian(path_graph(3)))
        np.testing.assert_allclose(basis.eigenvalues, [0.0, 1.0, 3.0], atol=1e-9)

    def test_k2_eigenvalues(self):
        basis = eigendecompose(laplacian(path_graph(2)))
        np.testing.assert_allclose(basis.eigenvalues, [0.0, 2.0], atol=1e-12)

    def test_edgeless_all_zero(self):
        basis = eigendecompose(laplacian(gm.build_layer(range(4), [])))
        np.testing.assert_array_equal(basis.eigenvalues, np.zeros(4))

    def test_capacity_error(self):
        l = laplacian(path_graph(10))
        with pytest.raises(CapacityError, match="Chebyshev"):
            eigendecompose(l, cap=8)

    def test_invariants_against_dense_oracle(self):
        for seed in range(5):
            g = random_graph(40, 70, seed)
            l = laplacian(g)
            basis = eigendecompose(l)
            n = g.n_nodes
            # ascending, orthonormal, residual small, lambda_0 ~ 0 (connected)
            assert np.all(np.diff(basis.eigenvalues) >= -1e-12)
            assert abs(basis.eigenvalues[0]) <= 1e-9
            gram = basis.eigenvectors.T @ basis.eigenvectors
            assert np.abs(gram - np.eye(n)).max() <= 1e-9
            resid = l.matrix.toarray() @ basis.eigenvectors - \
                basis.eigenvectors * basis.eigenvalues
            assert np.abs(resid).max() <= 1e-8 * basis.lambda_max
            oracle = np.linalg.eigvalsh(l.matrix.toarray())
            np.testing.assert_allclose(basis.eigenvalues, oracle, atol=1e-9)

    def test_sign_convention(self):
        basis = eigendecompose(laplacian(random_graph(30, 50, 2)))
        for j in range(basis.n_nodes):
            col = basis.eigenvectors[:, j]
            nz = np.flatnonzero(np.abs(col) > 1e-12)
            assert col[nz[0]] > 0

    def test_eigenvalue_degree_bound(self):
        for seed in range(6):
            g = random_graph(60, 120, seed)
            basis = eigendecompose(laplacian(g))
            assert basis.lambda_max <= 2.0 * g.degrees().max() + 1e-9


class TestGftIgft:
    def test_constant_signal_all_dc(self):
        g = path_graph(9)
        basis = eigendecompose(laplacian(g))
        spec = gft(gm.GraphSignal(1, np.full(9, 3.0)), basis)
        np.testing.assert_allclose(spec.coefficients[0], 3.0 * np.sqrt(9), atol=1e-9)
        assert np.abs(spec.coefficients[1:]).max() <= 1e-9

    def test_eigenvector_input_gives_unit_vector(self):
        basis = eigendecompose(laplacian(path_graph(6)))
        k = 4
        spec = gft(gm.GraphSignal(1, basis.eigenvectors[:, k]), basis)
        expected = np.zeros(6)
        expected[k] = 1.0
        np.testing.assert_allclose(spec.coefficients, expected, atol=1e-12)

    def test_round_trip_random(self):
        rng = np.random.default_rng(0)
        for seed in range(10):
            g = random_graph(int(rng.integers(8, 64)), int(rng.integers(5, 40)), seed)
            basis = eigendecompose(laplacian(g))
            x = gm.GraphSignal(1, rng.standard_normal(g.n_nodes))
            back = igft(gft(x, basis), basis)
            assert np.linalg.norm(back.values - x.values) <= \
                1e-9 * np.linalg.norm(x.values)

    def test_parseval(self):
        rng = np.random.default_rng(1)
        g = random_graph(40, 60, 7)
        basis = eigendecompose(laplacian(g))
        for _ in range(5):
            x = rng.standard_normal(40)
            spec = gft(gm.GraphSignal(1, x), basis)
            assert abs(np.linalg.norm(spec.coefficients) - np.linalg.norm(x)) <= \
                1e-9 * np.linalg.norm(x)

    def test_igft_of_dc_unit(self):
        basis = eigendecompose(laplacian(path_graph(4)))
        spec = gm.Spectrum(np.array([1.0, 0, 0, 0]))
        back = igft(spec, basis)
        np.testing.assert_allclose(back.values, np.full(4, 0.5), atol=1e-12)

    def test_zero_spectrum(self):
        basis = eigendecompose(laplacian(path_graph(4)))
        assert not igft(gm.Spectrum(np.zeros(4)), basis).values.any()

    def test_length_mismatch(self):
        basis = eigendecompose(laplacian(path_graph(4)))
        with pytest.raises(DimensionError):
            gft(gm.GraphSignal(1, np.ones(5)), basis)
        with pytest.raises(DimensionError):
            igft(gm.Spectrum(np.ones(5)), basis)


class TestHighFrequencyRatio:
    def test_constant_signal_zero(self):
        g = path_graph(8)
        basis = eigendecompose(laplacian(g))
        spec = gft(gm.GraphSignal(1, np.full(8, 5.0)), basis)
        assert high_frequency_ratio(spec, basis, 0.5) == 0.0

    def test_top_eigenvector_is_one(self):
        basis = eigendecompose(laplacian(random_graph(20, 30, 3)))
        spec = gft(gm.GraphSignal(1, basis.eigenvectors[:, -1]), basis)
        assert high_frequency_ratio(spec, basis, 0.9) == pytest.approx(1.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        g = random_graph(25, 40, 4)
        basis = eigendecompose(laplacian(g))
        x = rng.lognormal(10, 0.3, 25)
        r1 = high_frequency_ratio(gft(gm.GraphSignal(1, x), basis), basis, 0.5)
        r2 = high_frequency_ratio(gft(gm.GraphSignal(1, 7.5 * x), basis), basis, 0.5)
        assert abs(r1 - r2) <= 1e-12

    def test_cutoff_domain(self):
        basis = eigendecompose(laplacian(path_graph(4)))
        spec = gft(gm.GraphSignal(1, np.arange(4.0)), basis)
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                high_frequency_ratio(spec, basis, bad)

    def test_spike_visibility_on_monitor_layer(self, reference_pipeline):
        """Smooth baseline vs the 20x congested interval, aggregated onto the
        monitor layer of the seeded leaf-spine."""
        g2 = reference_pipeline["g2"]
        signals2 = reference_pipeline["signals2"]
        basis = eigendecompose(laplacian(g2))
        smooth = high_frequency_ratio(gft(signals2[0], basis), basis, 0.5)
        spiked = high_frequency_ratio(gft(signals2[20], basis), basis, 0.5)
        assert spiked > 5.0 * smooth
        assert smooth == pytest.approx(GOLDEN_SMOOTH_RATIO, rel=1e-6)
        assert spiked == pytest.approx(GOLDEN_SPIKED_RATIO, rel=1e-6)


class TestSpectrumExport:
    def test_csv_format(self, tmp_path):
        g = path_graph(3)
        basis = eigendecompose(laplacian(g))
        spec = gft(gm.GraphSignal(1, np.array([1.0, 2.0, 3.0])), basis)
        out = tmp_path / "spec.csv"
        export_spectrum_csv(spec, basis, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "j,lambda,coefficient"
        assert len(lines) == 4
        j, lam, coef = lines[2].split(",")
        assert j == "1"
        assert float(lam) == pytest.approx(1.0)
        # 17 significant digits survive a parse round trip
        assert float(coef) == spec.coefficients[1]
