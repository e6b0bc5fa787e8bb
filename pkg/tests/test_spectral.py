import numpy as np
import pytest

from gspkit import (FilterSpec, GraphLowPassFilter, SensorGraph, apply_filter,
                    basis_for, decompose, gft, igft, identity_filter,
                    laplacian, lowpass, total_variation)
from gspkit.errors import (DimensionMismatchError, NonFiniteGainError,
                           NotSymmetricError)
from gspkit.spectral import filter_signal_matrix


class TestDecompose:
    def test_path2_by_hand(self, path2):
        basis = decompose(laplacian(path2))
        assert np.allclose(basis.eigenvalues, [0.0, 2.0], atol=1e-12)
        r = 1.0 / np.sqrt(2.0)
        assert np.allclose(basis.eigenvectors[:, 0], [r, r])
        assert np.allclose(basis.eigenvectors[:, 1], [r, -r])

    def test_zero_matrix(self):
        basis = decompose(np.zeros((4, 4)))
        assert np.allclose(basis.eigenvalues, 0.0)
        assert np.array_equal(basis.eigenvectors, np.eye(4))

    def test_reconstruction_on_random_graphs(self, make_random_graph):
        rng = np.random.default_rng(11)
        for _ in range(20):
            g = make_random_graph(rng, 6)
            lap = laplacian(g)
            basis = decompose(lap)
            rebuilt = (basis.eigenvectors
                       @ np.diag(basis.eigenvalues)
                       @ basis.eigenvectors.T)
            assert np.allclose(rebuilt, lap, atol=1e-8)
            assert np.allclose(basis.eigenvectors.T @ basis.eigenvectors,
                               np.eye(g.n), atol=1e-9)
            assert np.all(np.diff(basis.eigenvalues) >= -1e-12)
            assert basis.eigenvalues[0] == pytest.approx(0.0, abs=1e-9)

    def test_sign_convention_deterministic(self, make_random_graph):
        rng = np.random.default_rng(12)
        g = make_random_graph(rng, 7)
        basis = decompose(laplacian(g))
        for col in range(g.n):
            v = basis.eigenvectors[:, col]
            assert v[np.argmax(np.abs(v))] > 0

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetricError):
            decompose(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestTransforms:
    def test_constant_signal_concentrates_at_zero(self, path3):
        basis = basis_for(path3)
        shat = gft(basis, np.full(3, 2.5))
        assert abs(shat[0]) == pytest.approx(2.5 * np.sqrt(3), abs=1e-10)
        assert np.allclose(shat[1:], 0.0, atol=1e-10)

    def test_eigenvector_maps_to_unit_coefficient(self, path3):
        basis = basis_for(path3)
        for k in range(3):
            shat = gft(basis, basis.eigenvectors[:, k])
            expected = np.zeros(3)
            expected[k] = 1.0
            assert np.allclose(shat, expected, atol=1e-12)

    def test_round_trips(self, path3):
        basis = basis_for(path3)
        rng = np.random.default_rng(13)
        for _ in range(10):
            s = rng.normal(size=3)
            assert np.allclose(igft(basis, gft(basis, s)), s, atol=1e-10)
            assert np.allclose(gft(basis, igft(basis, s)), s, atol=1e-10)

    def test_zero_spectrum(self, path3):
        basis = basis_for(path3)
        assert np.allclose(igft(basis, np.zeros(3)), 0.0)

    def test_e0_gives_constant(self, path3):
        basis = basis_for(path3)
        s = igft(basis, np.eye(3)[0])
        assert np.allclose(np.abs(s), 1.0 / np.sqrt(3), atol=1e-12)

    def test_parseval(self, make_random_graph):
        rng = np.random.default_rng(14)
        for _ in range(10):
            g = make_random_graph(rng, int(rng.integers(2, 9)))
            basis = basis_for(g)
            s = rng.normal(size=g.n)
            assert np.linalg.norm(gft(basis, s)) == pytest.approx(
                np.linalg.norm(s), abs=1e-9)

    def test_dimension_mismatch(self, path3):
        basis = basis_for(path3)
        with pytest.raises(DimensionMismatchError):
            gft(basis, np.ones(4))


class TestFiltering:
    def test_identity_filter_is_identity(self, path3):
        basis = basis_for(path3)
        rng = np.random.default_rng(15)
        s = rng.normal(size=3)
        assert np.allclose(apply_filter(basis, s, identity_filter()), s,
                           atol=1e-10)

    def test_lowpass_keeps_constants(self, path3):
        basis = basis_for(path3)
        s = np.full(3, 1.7)
        assert np.allclose(apply_filter(basis, s, lowpass(0.5)), s, atol=1e-10)

    def test_lowpass_halves_top_mode_of_path2(self, path2):
        basis = basis_for(path2)
        v = basis.eigenvectors[:, 1]  # eigenvalue 2 -> gain 1/(1+0.5*2)
        out = apply_filter(basis, v, lowpass(0.5))
        assert np.allclose(out, 0.5 * v, atol=1e-12)

    def test_lowpass_strictly_shrinks_nonzero_modes(self, make_random_graph):
        rng = np.random.default_rng(16)
        g = make_random_graph(rng, 8)
        basis = basis_for(g)
        s = rng.normal(size=8)
        before = gft(basis, s)
        after = gft(basis, apply_filter(basis, s, lowpass(0.5)))
        assert after[0] == pytest.approx(before[0], abs=1e-10)
        nz = basis.eigenvalues > 1e-9
        assert np.all(np.abs(after[nz]) < np.abs(before[nz]) + 1e-15)

    def test_non_finite_gain(self, path2):
        basis = basis_for(path2)
        bad = FilterSpec(response=lambda x: 1.0 / np.asarray(x), name="inv")
        with pytest.raises(NonFiniteGainError):
            apply_filter(basis, np.ones(2), bad)

    def test_matrix_filtering_matches_columns(self, path3):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(3, 5))
        basis = basis_for(path3)
        cols = np.stack([apply_filter(basis, x[:, j], lowpass(0.5))
                         for j in range(5)], axis=1)
        assert np.allclose(filter_signal_matrix(path3, x, lowpass(0.5)), cols,
                           atol=1e-12)


class TestTotalVariation:
    def test_constant_signal_zero(self, path3):
        assert total_variation(path3, np.full(3, 3.3)) == pytest.approx(0.0)

    def test_path2_hand_computed(self, path2):
        per = total_variation(path2, np.array([0.0, 1.0]), per_node=True)
        assert np.allclose(per, [1.0, 1.0])
        assert total_variation(path2, np.array([0.0, 1.0])) == pytest.approx(2.0)

    def test_isolated_node_zero(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 1.0
        g = SensorGraph(node_ids=("a", "b", "lonely"), weights=w)
        per = total_variation(g, np.array([0.0, 1.0, 9.0]), per_node=True)
        assert per[2] == 0.0

    def test_nonnegative(self, make_random_graph):
        rng = np.random.default_rng(18)
        for _ in range(10):
            g = make_random_graph(rng, 6)
            assert total_variation(g, rng.normal(size=6)) >= 0.0

    def test_raw_adjacency_mode(self, path2):
        s = np.array([1.0, 1.0])
        # literal |s - A s| scales constants by degree mismatch
        assert total_variation(path2, s, shift="adjacency") == pytest.approx(0.0)
        s2 = np.array([0.0, 2.0])
        assert total_variation(path2, s2, shift="adjacency") == pytest.approx(4.0)

    def test_matrix_input(self, path2):
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        per = total_variation(path2, x, per_node=True)
        assert per.shape == (2, 2)
        glob = total_variation(path2, x)
        assert np.allclose(glob, [2.0, 2.0])


class TestGraphLowPassFilter:
    def test_transform_matches_function(self, path3):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(7, 3))  # (timesteps, sensors)
        est = GraphLowPassFilter(graph=path3, alpha=0.5).fit()
        expected = filter_signal_matrix(path3, x.T, lowpass(0.5)).T
        assert np.allclose(est.transform(x), expected, atol=1e-12)
