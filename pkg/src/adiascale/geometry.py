"""Ground-state tangent vectors, path length, and the cost-proxy family.

The ground-state tangent is computed by first-order perturbation theory,
<k|dg/dt> = <k|dH/dt|g> / (E_g - E_k), which is automatically in the gauge
where <g|dg/dt> = 0.  Path length and every proxy integral share the same
composite-Simpson nodes (one eigendecomposition per node) with grid doubling
until convergence.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import ConvergenceError, DegenerateSpectrumError
from .paths import HamiltonianPath

DEFAULT_QUAD_TOL = 1e-6
_MAX_INTERVALS = 2**20
# A quadrature node is refused outright if any gap to the ground state falls
# below this fraction of the spectral norm (no silent regularization).
_GAP_FLOOR_FRACTION = 1e-8

_node_cache: "OrderedDict[tuple, tuple[np.ndarray, np.ndarray]]" = OrderedDict()
_NODE_CACHE_MAX = 64
_NODE_CACHE_BUDGET = 40_000_000  # total cached floats across entries
_NODE_CHUNK = 2048  # nodes diagonalized per batch (bounds transient memory)


def clear_caches() -> None:
    _node_cache.clear()


@dataclass(frozen=True)
class TangentData:
    """Perpendicular ground-state tangent at one path point (reference time).

    components[k-1] = <k|dH/dt|g> / (E_g - E_k) for excited level k; speed is
    the Euclidean norm of the components (path length per reference time).
    """

    components: np.ndarray
    speed: float
    spectrum: spectral.Spectrum


def _tangent_arrays(H_stack: np.ndarray, Hdot_stack: np.ndarray):
    """Gaps and squared tangent components for a stack of path points.

    Returns (gaps, c2) of shape (n, d-1): gaps[j, k-1] = E_k - E_g and
    c2[j, k-1] the squared tangent component onto excited level k.
    """
    E, V = np.linalg.eigh(H_stack)
    hnorm = np.max(np.abs(E), axis=1)
    gaps = E[:, 1:] - E[:, :1]
    bad = gaps < np.maximum(hnorm, 1.0)[:, None] * _GAP_FLOOR_FRACTION
    if np.any(bad):
        j = int(np.argmax(np.any(bad, axis=1)))
        raise DegenerateSpectrumError(float(np.min(gaps[j])))
    g = V[:, :, 0]
    w = np.einsum("nij,nj->ni", Hdot_stack, g)
    overlaps = np.einsum("nik,ni->nk", V, w)[:, 1:]
    c2 = (overlaps / gaps) ** 2
    return gaps, c2


def ground_tangent(path: HamiltonianPath, t: float) -> TangentData:
    """Perpendicular ground-state tangent of the path at time t."""
    spec = spectral.eigh(path.evaluate(t))
    Hdot = path.derivative(t)
    gaps = spec.eigenvalues[1:] - spec.eigenvalues[0]
    hnorm = max(1.0, float(np.max(np.abs(spec.eigenvalues))))
    if np.min(gaps) < hnorm * _GAP_FLOOR_FRACTION:
        raise DegenerateSpectrumError(float(np.min(gaps)))
    V = spec.eigenvectors
    overlaps = V[:, 1:].T @ (Hdot @ spec.ground_state)
    components = overlaps / (-gaps)
    return TangentData(
        components=components,
        speed=float(np.linalg.norm(components)),
        spectrum=spec,
    )


def _node_data(path: HamiltonianPath, t0: float, t1: float, n: int):
    """(gaps, c2) at the n+1 Simpson nodes of [t0, t1], cached."""
    key = (path.key, float(t0), float(t1), int(n))
    hit = _node_cache.get(key)
    if hit is not None:
        _node_cache.move_to_end(key)
        return hit
    ts = np.linspace(t0, t1, n + 1)
    pieces = []
    for lo in range(0, ts.size, _NODE_CHUNK):
        chunk = ts[lo:lo + _NODE_CHUNK]
        pieces.append(
            _tangent_arrays(path.evaluate_many(chunk), path.derivative_many(chunk))
        )
    if len(pieces) == 1:
        out = pieces[0]
    else:
        out = (
            np.concatenate([p[0] for p in pieces]),
            np.concatenate([p[1] for p in pieces]),
        )
    _node_cache[key] = out
    total = sum(g.size + c.size for g, c in _node_cache.values())
    while len(_node_cache) > 1 and (
        len(_node_cache) > _NODE_CACHE_MAX or total > _NODE_CACHE_BUDGET
    ):
        g, c = _node_cache.popitem(last=False)[1]
        total -= g.size + c.size
    return out


def _simpson(values: np.ndarray, t0: float, t1: float) -> float:
    n = values.shape[0] - 1
    h = (t1 - t0) / n
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(h / 3.0 * np.dot(w, values))


def _speed_values(gaps, c2):
    return np.sqrt(np.sum(c2, axis=1))


def _variant_values(variant: str, gaps, c2):
    S = np.sum(c2, axis=1)
    safe = np.where(S > 0.0, S, 1.0)
    if variant == "D1":
        vals = np.sum(gaps * c2, axis=1) / safe
    elif variant == "D2":
        vals = np.sqrt(np.sum(gaps**2 * c2, axis=1)) / np.sqrt(safe)
    elif variant == "Dhalf":
        vals = np.sum(spectral.sqrt_clamped(gaps) * c2, axis=1) ** 2 / safe**2
    else:
        raise ValueError(f"unknown proxy variant {variant!r}")
    return np.where(S > 0.0, vals, 0.0)


def _converge(path, t0, t1, tol, integrand, max_intervals=_MAX_INTERVALS) -> float:
    """Grid-doubled Simpson of integrand(gaps, c2) over [t0, t1]."""
    n = 16
    prev = None
    while n <= max_intervals:
        gaps, c2 = _node_data(path, t0, t1, n)
        val = _simpson(integrand(gaps, c2), t0, t1)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-12):
            return val
        prev = val
        n *= 2
    raise ConvergenceError(
        f"quadrature did not converge within {max_intervals} intervals",
        diagnostics={"last_value": prev},
    )


def path_length(
    path: HamiltonianPath,
    t0: float,
    t1: float,
    quad_tol: float = DEFAULT_QUAD_TOL,
    max_intervals: int = _MAX_INTERVALS,
) -> float:
    """Arc length of the ground state over reference times [t0, t1].

    `max_intervals` caps the quadrature grid; ensemble sampling passes a low
    cap so near-degenerate draws fail fast (and get redrawn) instead of
    grinding through enormous grids.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if t1 == t0:
        return 0.0
    return _converge(path, t0, t1, quad_tol, _speed_values, max_intervals)


def qd_proxy(
    path: HamiltonianPath,
    T_end: float,
    s_c: float,
    variant: str = "D1",
    quad_tol: float = DEFAULT_QUAD_TOL,
) -> float:
    """Dimensionless adiabaticity-cost proxy over [0, T_end].

    variant "D1": gap weighted by squared tangent components;
    "D2": root-mean-square gap; "Dhalf": squared mean of root gaps.  The
    scale factor s_c multiplies the integral.
    """
    if s_c <= 0:
        raise ValueError("s_c must be positive")
    if variant not in ("D1", "D2", "Dhalf"):
        raise ValueError(f"unknown proxy variant {variant!r}")
    val = _converge(
        path, 0.0, T_end, quad_tol, lambda g, c2: _variant_values(variant, g, c2)
    )
    return s_c * val


def qd_generic(
    path: HamiltonianPath,
    T_end: float,
    s_c: float,
    f,
    f_inverse,
    quad_tol: float = DEFAULT_QUAD_TOL,
) -> float:
    """Proxy for an arbitrary monotone weight function f (with its inverse).

    The integrand is f_inverse of the c^2-weighted mean of f(gap); f must be
    monotone increasing on the encountered gap range (checked by sampling).
    """
    if s_c <= 0:
        raise ValueError("s_c must be positive")

    def integrand(gaps, c2):
        xs = np.linspace(0.0, float(np.max(gaps)), 64)
        fx = np.asarray(f(xs), dtype=float)
        if np.any(np.diff(fx) < -1e-12):
            raise ValueError("f is not monotone increasing on the gap range")
        S = np.sum(c2, axis=1)
        safe = np.where(S > 0.0, S, 1.0)
        mean_f = np.sum(np.asarray(f(gaps), dtype=float) * c2, axis=1) / safe
        vals = np.asarray(f_inverse(mean_f), dtype=float)
        return np.where(S > 0.0, vals, 0.0)

    return s_c * _converge(path, 0.0, T_end, quad_tol, integrand)
