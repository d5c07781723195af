import numpy as np
import pytest

from adiascale import paths, search
from adiascale.search import find_scale_factor, next_ladder


def dense_scan_root(error_fn, eps_th, s_lo, s_hi, n=10_000):
    """Oracle: largest crossing of error_fn(s) == eps_th on a dense log grid,
    refined by bisection on the bracketing pair."""
    grid = np.exp(np.linspace(np.log(s_lo), np.log(s_hi), n))
    vals = np.array([error_fn(s) for s in grid])
    above = np.nonzero(vals >= eps_th)[0]
    assert above.size > 0
    i = above[-1]
    lo, hi = grid[i], grid[min(i + 1, n - 1)]
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        if error_fn(mid) >= eps_th:
            lo = mid
        else:
            hi = mid
    return np.sqrt(lo * hi)


class TestSyntheticSearch:
    def test_power_law(self):
        # eps(s) = min(1, 1/s): eps = 0.1 exactly at s = 10
        err = lambda s: min(1.0, 1.0 / s)
        res = find_scale_factor(error_fn=err, eps_th=0.1, s_start=1.0)
        assert res.s_c == pytest.approx(10.0, rel=0.01)
        assert not res.too_easy
        assert abs(res.epsilon_achieved - 0.1) <= 0.001

    def test_oscillatory_matches_dense_scan(self):
        # multiple crossings; the conservative rule keeps the largest one
        err = lambda s: min(1.0, (1.0 / s) * (1.5 + np.sin(8.0 * np.log(s))))
        res = find_scale_factor(error_fn=err, eps_th=0.1, s_start=1.0)
        oracle = dense_scan_root(err, 0.1, 1e-2, 1e3)
        assert res.s_c == pytest.approx(oracle, rel=0.01)

    def test_too_easy(self):
        err = lambda s: 0.0
        res = find_scale_factor(error_fn=err, eps_th=0.1, s_start=1.0)
        assert res.too_easy
        assert res.s_c is None

    def test_scan_trace_decreasing(self):
        err = lambda s: min(1.0, 1.0 / s)
        res = find_scale_factor(error_fn=err, eps_th=0.1, s_start=1.0)
        scanned = [s for s, _ in res.scan_trace]
        assert all(b < a for a, b in zip(scanned, scanned[1:]))

    def test_doubling_when_start_too_hard(self):
        # starting point already below threshold: s_start must be raised first
        err = lambda s: min(1.0, 1.0 / s)
        res = find_scale_factor(error_fn=err, eps_th=0.1, s_start=100.0)
        assert res.s_c == pytest.approx(10.0, rel=0.01)

    def test_custom_tolerance(self):
        err = lambda s: min(1.0, 1.0 / s)
        res = find_scale_factor(error_fn=err, eps_th=0.1, s_start=1.0, eps_tol=1e-4)
        assert abs(res.epsilon_achieved - 0.1) <= 1e-4

    def test_bad_arguments(self):
        err = lambda s: 0.5
        with pytest.raises(ValueError):
            find_scale_factor(error_fn=err, eps_th=0.0)
        with pytest.raises(ValueError):
            find_scale_factor(error_fn=err, eps_th=0.1, s_start=-1.0)
        with pytest.raises(ValueError):
            find_scale_factor(error_fn=err, eps_th=0.1, gamma=1.0)


def cheap_path():
    # isospectral translation path: searches at T=10 finish in milliseconds
    rng = np.random.default_rng(4)
    H0 = paths.random_symmetric(4, rng)
    K = paths.random_antisymmetric(4, rng)
    return paths.make_translation_path(H0, K, 0.05)


class TestPathSearch:
    def test_determinism(self):
        path = cheap_path()
        a = find_scale_factor(path=path, T_end=10.0, eps_th=0.1)
        search.clear_caches()
        b = find_scale_factor(path=path, T_end=10.0, eps_th=0.1)
        assert a.s_c == b.s_c
        assert a.epsilon_achieved == b.epsilon_achieved

    def test_threshold_hit(self):
        res = find_scale_factor(path=cheap_path(), T_end=10.0, eps_th=0.1)
        assert abs(res.epsilon_achieved - 0.1) <= 0.001
        assert res.s_c > 0

    def test_rescaling_moves_root(self):
        # scaling H by alpha scales the critical s_c by 1/alpha
        path = cheap_path()
        base = find_scale_factor(path=path, T_end=10.0, eps_th=0.1)
        alpha = 3.0
        scaled = find_scale_factor(
            path=paths.scale_path(path, alpha), T_end=10.0, eps_th=0.1,
            s_start=1.0 / alpha,
        )
        assert scaled.s_c * alpha == pytest.approx(base.s_c, rel=0.01)

    def test_translation_too_easy(self):
        # a constant path never leaves the ground state
        path = paths.make_constant_path(np.diag([0.0, 1.0, 2.0, 3.0]))
        res = find_scale_factor(path=path, T_end=10.0, eps_th=0.1)
        assert res.too_easy


class TestLadder:
    def test_next_rung(self):
        assert next_ladder(10.0, 5.0, 1.5, 2.0) == (15.0, 10.0)

    def test_bad_multipliers(self):
        with pytest.raises(ValueError):
            next_ladder(10.0, 5.0, 1.0, 2.0)
        with pytest.raises(ValueError):
            next_ladder(10.0, 5.0, 1.5, 1.0)
