import numpy as np
import pytest

from adiascale import geometry, paths, spectral
from adiascale.errors import DegenerateSpectrumError
from adiascale.geometry import ground_tangent, path_length, qd_generic, qd_proxy


def fd_ground_tangent(path, t, h=1e-5):
    """Finite-difference ground-state derivative, sign-aligned, with the
    parallel component projected out.  Independent of perturbation theory."""
    a = spectral.eigh(path.evaluate(t - h))
    b = spectral.align_signs(a, spectral.eigh(path.evaluate(t + h)))
    dg = (b.ground_state - a.ground_state) / (2.0 * h)
    g = spectral.eigh(path.evaluate(t)).ground_state
    return dg - g * (g @ dg)


def rotating_two_level(delta, v):
    H0 = np.diag([0.0, delta])
    K = np.array([[0.0, -1.0], [1.0, 0.0]])
    return paths.make_translation_path(H0, K, v)


class TestGroundTangent:
    def test_constant_path_zero(self):
        tan = ground_tangent(paths.make_constant_path(np.diag([0.0, 1.0, 2.0])), 3.0)
        assert np.array_equal(tan.components, np.zeros(2))
        assert tan.speed == 0.0

    def test_translation_speed_equals_v(self):
        rng = np.random.default_rng(21)
        path = paths.make_translation_path(
            paths.random_symmetric(4, rng), paths.random_antisymmetric(4, rng), 0.7
        )
        for t in (0.0, 0.9, 13.0):
            assert ground_tangent(path, t).speed == pytest.approx(0.7, abs=1e-8)

    def test_finite_difference_oracle(self):
        path = paths.make_random_trig_path(23, 4)
        tan = ground_tangent(path, 1.0)
        spec = tan.spectrum
        fd = fd_ground_tangent(path, 1.0)
        fd_components = spec.eigenvectors[:, 1:].T @ fd
        assert np.max(np.abs(fd_components - tan.components)) < 1e-5

    def test_speed_is_component_norm(self):
        path = paths.make_random_trig_path(24, 4)
        tan = ground_tangent(path, 2.5)
        assert tan.speed**2 == pytest.approx(np.sum(tan.components**2), abs=1e-12)

    def test_gauge_no_parallel_part(self):
        # the finite-difference derivative, after projection, has no ground
        # component beyond the oracle tolerance
        path = paths.make_random_trig_path(25, 4)
        g = spectral.eigh(path.evaluate(1.0)).ground_state
        fd = fd_ground_tangent(path, 1.0)
        assert abs(g @ fd) < 1e-6

    def test_degenerate_rejected(self):
        path = paths.make_constant_path(np.diag([1.0, 1.0 + 1e-12, 2.0]))
        with pytest.raises(DegenerateSpectrumError):
            ground_tangent(path, 0.0)


class TestPathLength:
    def test_constant_path(self):
        assert path_length(paths.make_constant_path(np.diag([0.0, 1.0])), 0.0, 50.0) == 0.0

    def test_translation_linear(self):
        rng = np.random.default_rng(26)
        path = paths.make_translation_path(
            paths.random_symmetric(4, rng), paths.random_antisymmetric(4, rng), 0.4
        )
        L = path_length(path, 2.0, 12.0)
        assert L == pytest.approx(0.4 * 10.0, rel=1e-6)

    def test_reparametrization_invariance(self):
        T = 10.0
        path = paths.make_random_trig_path(27, 4)
        warped = paths.reparametrized_path(
            path, lambda t: t**2 / T, lambda t: 2.0 * t / T
        )
        # same endpoint image [0, T], monotone warp
        assert path_length(warped, 0.0, T) == pytest.approx(
            path_length(path, 0.0, T), rel=1e-5
        )

    def test_grid_doubling_converged(self):
        path = paths.make_random_trig_path(28, 4)
        coarse = path_length(path, 0.0, 10.0, quad_tol=1e-6)
        fine = path_length(path, 0.0, 10.0, quad_tol=1e-8)
        assert abs(fine - coarse) < 1e-5 * abs(fine)

    def test_bad_interval(self):
        path = paths.make_random_trig_path(28, 4)
        with pytest.raises(ValueError):
            path_length(path, 5.0, 1.0)


class TestQdProxy:
    def test_linear_in_scale_factor(self):
        path = paths.make_random_trig_path(29, 4)
        a = qd_proxy(path, 10.0, 3.0, "D1")
        b = qd_proxy(path, 10.0, 6.0, "D1")
        assert b == 2.0 * a

    @pytest.mark.parametrize("alpha", [0.1, 3.0, 42.0])
    def test_rescaling_invariance(self, alpha):
        path = paths.make_random_trig_path(30, 4)
        for variant in ("D1", "D2", "Dhalf"):
            base = qd_proxy(path, 10.0, 2.0, variant)
            scaled = qd_proxy(paths.scale_path(path, alpha), 10.0, 2.0 / alpha, variant)
            assert abs(scaled - base) < 1e-10 * max(1.0, abs(base))

    def test_two_level_closed_form(self):
        delta, v, s_c, t_end = 1.3, 0.05, 4.0, 10.0
        path = rotating_two_level(delta, v)
        # single excited state, constant gap: Q_D1 = s_c * gap * T_end
        assert qd_proxy(path, t_end, s_c, "D1") == pytest.approx(
            s_c * delta * t_end, rel=1e-6
        )

    def test_pointwise_ordering(self):
        path = paths.make_random_trig_path(31, 4)
        ts = np.linspace(0.05, 9.95, 60)
        gaps, c2 = geometry._tangent_arrays(
            path.evaluate_many(ts), path.derivative_many(ts)
        )
        d1 = geometry._variant_values("D1", gaps, c2)
        d2 = geometry._variant_values("D2", gaps, c2)
        dh = geometry._variant_values("Dhalf", gaps, c2)
        assert np.all(d2 >= d1 - 1e-10)
        assert np.all(d1 >= dh - 1e-10)

    def test_monotone_in_s(self):
        path = paths.make_random_trig_path(31, 4)
        vals = [qd_proxy(path, 5.0, s, "D2") for s in (1.0, 2.0, 5.0)]
        assert vals[0] < vals[1] < vals[2]

    def test_unknown_variant(self):
        path = paths.make_random_trig_path(31, 4)
        with pytest.raises(ValueError, match="variant"):
            qd_proxy(path, 5.0, 1.0, "D3")

    def test_grid_doubling_converged(self):
        path = paths.make_random_trig_path(32, 4)
        coarse = qd_proxy(path, 10.0, 2.0, "D1", quad_tol=1e-6)
        fine = qd_proxy(path, 10.0, 2.0, "D1", quad_tol=1e-8)
        assert abs(fine - coarse) < 1e-5 * abs(fine)


class TestQdGeneric:
    @pytest.mark.parametrize("variant,f,finv", [
        ("D1", lambda x: x, lambda x: x),
        ("D2", lambda x: x**2, np.sqrt),
        ("Dhalf", spectral.sqrt_clamped, lambda x: x**2),
    ])
    def test_matches_named_variant(self, variant, f, finv):
        path = paths.make_random_trig_path(33, 4)
        a = qd_proxy(path, 5.0, 2.0, variant)
        b = qd_generic(path, 5.0, 2.0, f, finv)
        assert abs(a - b) < 1e-10 * max(1.0, abs(a))

    def test_rejects_non_monotone(self):
        path = paths.make_random_trig_path(33, 4)
        with pytest.raises(ValueError, match="monotone"):
            qd_generic(path, 5.0, 2.0, np.cos, np.arccos)
