"""Built-in oracle/invariant suite behind `adiascale verify`.

Each check is quick (the whole suite runs in seconds) and independent of the
code path it validates where an oracle is available: finite differences for
analytic derivatives, closed forms for the two-level rotating path, a dense
scan for the search.
"""

from __future__ import annotations

import numpy as np

from . import evolution, geometry, paths, search, spectral


def _rotating_two_level(delta: float, v: float):
    H0 = np.diag([0.0, delta])
    K = np.array([[0.0, -1.0], [1.0, 0.0]])
    return paths.make_translation_path(H0, K, v)


def check_eigh_reconstruction():
    rng = np.random.default_rng(11)
    worst = 0.0
    for d in (2, 4, 8, 16):
        H = paths.random_symmetric(d, rng)
        spec = spectral.eigh(H)
        V = spec.eigenvectors
        rec = (V * spec.eigenvalues) @ V.T
        worst = max(worst, np.linalg.norm(rec - H) / (1.0 + np.linalg.norm(H)))
        worst = max(worst, np.max(np.abs(V.T @ V - np.eye(d))))
    return worst < 1e-10, f"max deviation {worst:.2e}"


def check_conjugation_invariance():
    rng = np.random.default_rng(12)
    H = paths.random_symmetric(6, rng)
    Q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
    dev = np.max(np.abs(
        spectral.eigh(Q @ H @ Q.T).eigenvalues - spectral.eigh(H).eigenvalues
    ))
    return dev < 1e-9, f"eigenvalue drift {dev:.2e}"


def check_derivative_consistency():
    path = paths.make_random_trig_path(5, 4)
    rng = np.random.default_rng(13)
    h = 1e-6
    worst = 0.0
    for t in rng.uniform(0.0, 100.0, 25):
        fd = (path.evaluate(t + h) - path.evaluate(t - h)) / (2 * h)
        an = path.derivative(t)
        worst = max(worst, np.max(np.abs(fd - an)) / (1.0 + np.max(np.abs(an))))
    return worst < 1e-6, f"max relative deviation {worst:.2e}"


def check_translation_isospectral():
    rng = np.random.default_rng(14)
    H0 = paths.random_symmetric(4, rng)
    K = paths.random_antisymmetric(4, rng)
    path = paths.make_translation_path(H0, K, 0.3)
    base = spectral.eigh(H0).eigenvalues
    drift = max(
        np.max(np.abs(spectral.eigh(path.evaluate(t)).eigenvalues - base))
        for t in (0.5, 5.0, 50.0)
    )
    speed_dev = max(
        abs(geometry.ground_tangent(path, t).speed - 0.3) for t in (0.0, 1.0, 7.0)
    )
    ok = drift < 1e-10 and speed_dev < 1e-8
    return ok, f"eigenvalue drift {drift:.2e}, speed deviation {speed_dev:.2e}"


def check_constant_path():
    H0 = np.diag([0.0, 1.0, 2.0, 3.0])
    path = paths.make_constant_path(H0)
    L = geometry.path_length(path, 0.0, 10.0)
    eps = evolution.evolve(path, 10.0, 3.0).error
    return L == 0.0 and eps < 1e-10, f"L={L}, eps={eps:.2e}"


def check_step_unitarity():
    path = paths.make_random_trig_path(3, 4)
    U = evolution.step_unitaries(path, 10.0, 2.0, 64, start=0, stop=8)
    dev = max(
        np.max(np.abs(u.conj().T @ u - np.eye(4))) for u in U
    )
    return dev < 1e-13, f"max |U^dag U - 1| = {dev:.2e}"


def check_rescaling_invariance():
    path = paths.make_random_trig_path(7, 4)
    base = evolution.evolve(path, 10.0, 4.0).error
    dev = max(
        abs(evolution.evolve(paths.scale_path(path, a), 10.0, 4.0 / a).error - base)
        for a in (0.1, 3.0)
    )
    return dev < 1e-12, f"max error deviation {dev:.2e}"


def check_proxy_ordering():
    path = paths.make_random_trig_path(9, 4)
    ts = np.linspace(0.1, 9.9, 40)
    gaps, c2 = geometry._tangent_arrays(
        path.evaluate_many(ts), path.derivative_many(ts)
    )
    d1 = geometry._variant_values("D1", gaps, c2)
    d2 = geometry._variant_values("D2", gaps, c2)
    dh = geometry._variant_values("Dhalf", gaps, c2)
    ok = np.all(d2 >= d1 - 1e-10) and np.all(d1 >= dh - 1e-10)
    return bool(ok), "power-mean ordering of pointwise integrands"


def check_generic_proxy():
    path = paths.make_random_trig_path(21, 4)
    dev = 0.0
    for variant, f, finv in (
        ("D1", lambda x: x, lambda x: x),
        ("D2", lambda x: x**2, np.sqrt),
        ("Dhalf", spectral.sqrt_clamped, lambda x: x**2),
    ):
        a = geometry.qd_proxy(path, 5.0, 2.0, variant)
        b = geometry.qd_generic(path, 5.0, 2.0, f, finv)
        dev = max(dev, abs(a - b) / abs(a))
    return dev < 1e-10, f"max relative deviation {dev:.2e}"


def check_two_level_oracle():
    delta, v, s_c, t_end = 1.0, 0.05, 3.0, 10.0
    path = _rotating_two_level(delta, v)
    eps = evolution.evolve(path, t_end, s_c, tolerance=1e-5).error
    omega = np.sqrt((s_c * delta / 2.0) ** 2 + v**2)
    exact = (v / omega) * abs(np.sin(omega * t_end))
    return abs(eps - exact) < 1e-6, f"|eps - exact| = {abs(eps - exact):.2e}"


def check_search_synthetic():
    res = search.find_scale_factor(
        error_fn=lambda s: min(1.0, 1.0 / s), eps_th=0.1, s_start=100.0
    )
    ok = abs(res.s_c - 10.0) / 10.0 < 0.01
    return ok, f"s_c = {res.s_c:.4f} (expect 10)"


CHECKS = [
    ("eigh reconstruction/orthogonality", check_eigh_reconstruction),
    ("eigenvalues invariant under rotation", check_conjugation_invariance),
    ("analytic path derivatives", check_derivative_consistency),
    ("translation path isospectral, speed=v", check_translation_isospectral),
    ("constant path trivial", check_constant_path),
    ("per-step unitarity", check_step_unitarity),
    ("rescaling invariance of error", check_rescaling_invariance),
    ("proxy integrand ordering", check_proxy_ordering),
    ("generic proxy consistency", check_generic_proxy),
    ("two-level closed-form error", check_two_level_oracle),
    ("synthetic search root", check_search_synthetic),
]


def run_all(echo=print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        echo(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
