import io

import numpy as np
import pytest

from adiascale import paths, spectral
from adiascale.errors import PathFileError
from adiascale.paths import (
    load_path_from_file,
    make_constant_path,
    make_random_trig_path,
    make_translation_path,
    random_antisymmetric,
    random_symmetric,
    save_path_to_file,
)

SQRT2 = np.sqrt(2.0)


class TestRandomSymmetric:
    def test_deterministic(self):
        a = random_symmetric(4, np.random.default_rng(123))
        b = random_symmetric(4, np.random.default_rng(123))
        assert np.array_equal(a, b)

    def test_symmetric(self):
        M = random_symmetric(4, np.random.default_rng(1))
        assert np.array_equal(M - M.T, np.zeros((4, 4)))

    def test_entry_statistics(self):
        n = 10_000
        rng = np.random.default_rng(99)
        stack = np.array([random_symmetric(4, rng) for _ in range(n)])
        mean = stack.mean(axis=0)
        var = stack.var(axis=0)
        assert np.max(np.abs(mean)) < 4.0 / np.sqrt(n)
        assert np.max(np.abs(var - 1.0)) < 0.1

    def test_invalid_dimension(self):
        with pytest.raises(ValueError):
            random_symmetric(1, np.random.default_rng(0))


class TestRandomTrigPath:
    def test_value_at_zero(self):
        path = make_random_trig_path(11, 4)
        H2 = path.metadata["H2"]
        assert np.max(np.abs(path.evaluate(0.0) - 3.7 * H2)) < 1e-14

    def test_derivative_at_zero(self):
        path = make_random_trig_path(11, 4)
        H1 = path.metadata["H1"]
        assert np.max(np.abs(path.derivative(0.0) - (2.1 + SQRT2) * H1)) < 1e-14

    def test_not_periodic_over_seeds(self):
        hits = 0
        for seed in range(100):
            path = make_random_trig_path(seed, 4)
            a, b = path.evaluate(0.0), path.evaluate(2.0 * np.pi)
            if np.linalg.norm(b - a) > 0.1 * np.linalg.norm(a):
                hits += 1
        assert hits >= 95

    def test_seed_determinism(self):
        a = make_random_trig_path(5, 4)
        b = make_random_trig_path(5, 4)
        for t in (0.0, 1.3, 77.7):
            assert np.array_equal(a.evaluate(t), b.evaluate(t))

    def test_gap_scale_sanity(self):
        # gaps of the same overall scale: the ratio of outer to inner gap
        # stays bounded over the ensemble
        medians = []
        ts = np.linspace(0.2, 9.8, 25)
        for seed in range(100):
            path = make_random_trig_path(seed, 4)
            E = np.linalg.eigvalsh(path.evaluate_many(ts))
            ratio = (E[:, 3] - E[:, 0]) / (E[:, 1] - E[:, 0])
            medians.append(np.median(ratio))
        assert np.all(np.isfinite(medians))
        assert max(medians) < 1e3


@pytest.mark.parametrize("make", [
    lambda: make_random_trig_path(2, 4),
    lambda: make_translation_path(
        random_symmetric(4, np.random.default_rng(3)),
        random_antisymmetric(4, np.random.default_rng(4)),
        0.3,
    ),
])
def test_derivative_matches_finite_difference(make):
    path = make()
    rng = np.random.default_rng(0)
    h = 1e-6
    for t in rng.uniform(0.0, 100.0, 100):
        fd = (path.evaluate(t + h) - path.evaluate(t - h)) / (2.0 * h)
        an = path.derivative(t)
        assert np.max(np.abs(fd - an)) < 1e-6 * (1.0 + np.max(np.abs(an)))


def test_evaluate_many_matches_scalar():
    path = make_random_trig_path(6, 4)
    ts = np.array([0.0, 0.7, 3.2])
    stacked = path.evaluate_many(ts)
    for i, t in enumerate(ts):
        assert np.array_equal(stacked[i], path.evaluate(t))


class TestTranslationPath:
    def setup_method(self):
        rng = np.random.default_rng(8)
        self.H0 = random_symmetric(4, rng)
        self.K = random_antisymmetric(4, rng)
        self.path = make_translation_path(self.H0, self.K, 0.25)

    def test_value_at_zero(self):
        assert np.max(np.abs(self.path.evaluate(0.0) - self.H0)) < 1e-14

    def test_isospectral(self):
        base = np.linalg.eigvalsh(self.H0)
        for t in (0.5, 5.0, 50.0):
            drift = np.max(np.abs(np.linalg.eigvalsh(self.path.evaluate(t)) - base))
            assert drift < 1e-10

    def test_rejects_annihilating_generator(self):
        # generator that moves nothing in the ground-state direction
        H0 = np.diag([0.0, 1.0, 2.0, 3.0])
        K = np.zeros((4, 4))
        K[2, 3], K[3, 2] = 1.0, -1.0  # acts only on the top levels
        with pytest.raises(ValueError, match="annihilates"):
            make_translation_path(H0, K, 0.1)

    def test_rejects_symmetric_generator(self):
        with pytest.raises(ValueError, match="antisymmetric"):
            make_translation_path(self.H0, np.eye(4), 0.1)

    def test_rejects_nonpositive_speed(self):
        with pytest.raises(ValueError, match="positive"):
            make_translation_path(self.H0, self.K, 0.0)


class TestConstantPath:
    def test_derivative_zero(self):
        path = make_constant_path(np.diag([0.0, 1.0, 3.0]))
        assert np.array_equal(path.derivative(7.3), np.zeros((3, 3)))

    def test_evaluate_constant(self):
        H0 = np.diag([0.0, 1.0, 3.0])
        path = make_constant_path(H0)
        assert np.array_equal(path.evaluate(123.4), H0)


class TestPathFiles:
    def test_trig_round_trip(self):
        path = make_random_trig_path(31, 4)
        buf = io.StringIO()
        save_path_to_file(path, buf)
        loaded = load_path_from_file(io.StringIO(buf.getvalue()))
        for t in np.linspace(0.0, 20.0, 17):
            assert np.max(np.abs(loaded.evaluate(t) - path.evaluate(t))) < 1e-12
            assert np.max(np.abs(loaded.derivative(t) - path.derivative(t))) < 1e-12

    def test_translation_round_trip(self):
        rng = np.random.default_rng(9)
        path = make_translation_path(
            random_symmetric(4, rng), random_antisymmetric(4, rng), 0.5
        )
        buf = io.StringIO()
        save_path_to_file(path, buf)
        loaded = load_path_from_file(io.StringIO(buf.getvalue()))
        for t in (0.0, 1.0, 9.0):
            assert np.max(np.abs(loaded.evaluate(t) - path.evaluate(t))) < 1e-12

    def test_constant_file_derivative_zero(self):
        buf = io.StringIO()
        save_path_to_file(make_constant_path(np.diag([1.0, 2.0])), buf)
        loaded = load_path_from_file(io.StringIO(buf.getvalue()))
        assert np.array_equal(loaded.derivative(3.0), np.zeros((2, 2)))

    def test_asymmetric_matrix_named(self):
        doc = """{"kind": "constant", "dimension": 2,
                  "matrices": [[0.0, 1.0, 0.5, 0.0]]}"""
        with pytest.raises(PathFileError, match=r"\(0,1\)"):
            load_path_from_file(io.StringIO(doc))

    def test_unknown_key_rejected(self):
        doc = """{"kind": "constant", "dimension": 2,
                  "matrices": [[0.0, 1.0, 1.0, 0.0]], "extra": 1}"""
        with pytest.raises(PathFileError, match="unknown keys"):
            load_path_from_file(io.StringIO(doc))

    def test_unknown_function_rejected(self):
        doc = """{"kind": "trig", "dimension": 2,
                  "matrices": [[0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]],
                  "terms": [{"target": 1, "function": "tan",
                             "amplitude": 1.0, "frequency": 1.0}]}"""
        with pytest.raises(PathFileError, match="tan"):
            load_path_from_file(io.StringIO(doc))

    def test_unknown_kind_rejected(self):
        with pytest.raises(PathFileError, match="kind"):
            load_path_from_file(io.StringIO('{"kind": "mystery"}'))

    def test_not_json_rejected(self):
        with pytest.raises(PathFileError, match="JSON"):
            load_path_from_file(io.StringIO("kind: trig"))

    def test_polynomial_terms(self):
        doc = """{"kind": "trig", "dimension": 2,
                  "matrices": [[0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]],
                  "terms": [{"target": 1, "function": "poly",
                             "amplitude": 2.0, "frequency": 3}]}"""
        path = load_path_from_file(io.StringIO(doc))
        H1 = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert np.max(np.abs(path.evaluate(2.0) - 16.0 * H1)) < 1e-12
        assert np.max(np.abs(path.derivative(2.0) - 24.0 * H1)) < 1e-12


def test_scale_path():
    path = make_random_trig_path(1, 4)
    scaled = paths.scale_path(path, 3.0)
    assert np.array_equal(scaled.evaluate(1.2), 3.0 * path.evaluate(1.2))
    assert np.array_equal(scaled.derivative(1.2), 3.0 * path.derivative(1.2))
    assert scaled.key != path.key
    with pytest.raises(ValueError):
        paths.scale_path(path, -1.0)


def test_spot_check_symmetry_on_grid():
    for make in (
        lambda: make_random_trig_path(10, 4),
        lambda: make_translation_path(
            random_symmetric(4, np.random.default_rng(1)),
            random_antisymmetric(4, np.random.default_rng(2)),
            0.1,
        ),
    ):
        path = make()
        for H in path.evaluate_many(np.linspace(0.0, 30.0, 12)):
            spectral._check_symmetric(H)
