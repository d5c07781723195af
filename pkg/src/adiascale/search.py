"""Conservative scale-factor search and the ladder-advancement rule.

Starting from a scale factor with a small error, the search scans downward
geometrically until the diabatic error first reaches the threshold, then
bisects in log(s) on the final bracket.  Because the scan approaches from
the small-error side, the root returned is the largest threshold crossing:
the error can oscillate in s, and the conservative choice is the largest s
at which the threshold is met.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import evolution
from .errors import ConvergenceError
from .paths import HamiltonianPath

DEFAULT_GAMMA = 0.9
DEFAULT_DOUBLINGS = 20
_CONFIRMATIONS = 2
DEFAULT_FLOOR_FRACTION = 1e-6
_MAX_BISECTIONS = 200

# Diabatic-error evaluations keyed (path.key, T_end, s, tolerance); the sweep
# re-enters nearby scale factors constantly.
_error_cache: dict = {}


def clear_caches() -> None:
    _error_cache.clear()


def path_error_function(
    path: HamiltonianPath, T_end: float, tolerance: float = evolution.DEFAULT_TOLERANCE
) -> Callable[[float], float]:
    """Cached s -> diabatic error for one path and end time."""

    def err(s: float) -> float:
        key = (path.key, float(T_end), float(s), float(tolerance))
        hit = _error_cache.get(key)
        if hit is None:
            hit = evolution.evolve(path, T_end, s, tolerance=tolerance).error
            _error_cache[key] = hit
        return hit

    return err


@dataclass(frozen=True)
class ScaleSearchResult:
    s_c: Optional[float]
    epsilon_achieved: Optional[float]
    bracket: Optional[tuple]  # (s with error >= threshold, s with error below)
    scan_trace: tuple = field(default_factory=tuple)  # (s, error), s decreasing
    evaluations: int = 0
    too_easy: bool = False


def find_scale_factor(
    path: Optional[HamiltonianPath] = None,
    T_end: Optional[float] = None,
    eps_th: float = 0.1,
    s_start: float = 1.0,
    gamma: float = DEFAULT_GAMMA,
    eps_tol: Optional[float] = None,
    error_fn: Optional[Callable[[float], float]] = None,
    tolerance: float = evolution.DEFAULT_TOLERANCE,
) -> ScaleSearchResult:
    """Largest scale factor whose diabatic error matches the threshold.

    `error_fn` is a test seam: when given, it replaces the evolution-backed
    error evaluation entirely.
    """
    if not (0.0 < eps_th < 1.0):
        raise ValueError("eps_th must lie in (0, 1)")
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if s_start <= 0:
        raise ValueError("s_start must be positive")
    if eps_tol is None:
        eps_tol = 0.01 * eps_th
    if error_fn is None:
        if path is None or T_end is None:
            raise ValueError("either error_fn or (path, T_end) must be given")
        error_fn = path_error_function(path, T_end, tolerance)

    evaluations = 0

    def err(s):
        nonlocal evaluations
        evaluations += 1
        return float(error_fn(s))

    # Make sure the start is on the small-error side of the threshold.  A
    # single sub-threshold probe can sit in a dip between two crossings of
    # an oscillating error curve, so require _CONFIRMATIONS further
    # doublings to also land below the threshold, and start the scan from
    # the topmost confirmed probe.
    s_hi = s_start
    e_hi = err(s_hi)
    doublings = 0
    confirmed = 0
    while confirmed <= _CONFIRMATIONS:
        if e_hi < eps_th:
            confirmed += 1
        else:
            confirmed = 0
        if confirmed > _CONFIRMATIONS:
            break
        doublings += 1
        if doublings > DEFAULT_DOUBLINGS:
            raise ConvergenceError(
                f"error {e_hi:.3e} never settled below threshold {eps_th} "
                f"after {DEFAULT_DOUBLINGS} doublings of s_start",
                diagnostics={"s": s_hi, "error": e_hi},
            )
        s_hi *= 2.0
        e_hi = err(s_hi)

    # Geometric downward scan to the first threshold crossing.
    trace = [(s_hi, e_hi)]
    floor = DEFAULT_FLOOR_FRACTION * s_start
    s_lo, e_lo = None, None
    s = s_hi
    while True:
        s = gamma * s
        if s < floor:
            return ScaleSearchResult(
                s_c=None,
                epsilon_achieved=None,
                bracket=None,
                scan_trace=tuple(trace),
                evaluations=evaluations,
                too_easy=True,
            )
        e = err(s)
        trace.append((s, e))
        if e >= eps_th:
            s_lo, e_lo = s, e
            break
        s_hi, e_hi = s, e

    # Bisect in log s; the value criterion handles oscillatory error curves.
    s_c, eps_achieved = s_lo, e_lo
    if abs(e_lo - eps_th) > eps_tol:
        lo, hi = s_lo, s_hi
        for _ in range(_MAX_BISECTIONS):
            mid = float(np.sqrt(lo * hi))
            e_mid = err(mid)
            if abs(e_mid - eps_th) <= eps_tol:
                s_c, eps_achieved = mid, e_mid
                break
            if e_mid >= eps_th:
                lo = mid
            else:
                hi = mid
        else:
            raise ConvergenceError(
                "bisection failed to meet the error-value criterion",
                diagnostics={"bracket": (lo, hi)},
            )
    # Post-hoc check of the contract (cached, so this costs nothing new).
    assert abs(err(s_c) - eps_th) <= eps_tol
    return ScaleSearchResult(
        s_c=s_c,
        epsilon_achieved=eps_achieved,
        bracket=(s_lo, s_hi),
        scan_trace=tuple(trace),
        evaluations=evaluations,
        too_easy=False,
    )


def next_ladder(T_end: float, s_c: float, k: float, kappa: float):
    """Advance the ladder: next end time k*T_end, next start factor kappa*s_c."""
    if k <= 1.0:
        raise ValueError("k must be greater than 1")
    if kappa <= 1.0:
        raise ValueError("kappa must be greater than 1")
    return k * T_end, kappa * s_c
