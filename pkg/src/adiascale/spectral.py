"""Dense real-symmetric eigendecomposition and spectral matrix functions.

Everything downstream (gaps, tangent vectors, propagators) is built on the
decompositions produced here, so sign handling is made fully deterministic:
each eigenvector has its largest-magnitude component forced positive, and
`align_signs` carries that convention continuously along a path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError

# Adjacent eigenvalues closer than this mark the spectrum as degenerate.
DEGENERACY_GAP = 1e-10

# Tolerance for the symmetry check on input matrices.
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of one real symmetric matrix.

    eigenvalues are ascending; column k of `eigenvectors` belongs to
    eigenvalue k.  Vectors are orthonormal and sign-fixed.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def gap(self) -> float:
        """Gap between the ground state and the first excited state."""
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def degenerate(self) -> bool:
        return bool(np.min(np.diff(self.eigenvalues)) < DEGENERACY_GAP)

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def _check_symmetric(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if H.shape[0] < 2:
        raise ValueError("matrix dimension must be at least 2")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix contains non-finite entries")
    scale = 1.0 + np.max(np.abs(H))
    asym = np.abs(H - H.T)
    if np.max(asym) > SYMMETRY_TOL * scale:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise ValueError(
            f"matrix not symmetric: entry ({i},{j})={H[i, j]!r} vs "
            f"({j},{i})={H[j, i]!r}"
        )
    return H


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Force the largest-magnitude component of each column positive."""
    idx = np.argmax(np.abs(V), axis=0)
    flip = V[idx, np.arange(V.shape[1])] < 0.0
    V = V.copy()
    V[:, flip] *= -1.0
    return V


def eigh(H: np.ndarray) -> Spectrum:
    """Decompose a real symmetric matrix; deterministic for identical input."""
    H = _check_symmetric(H)
    vals, vecs = np.linalg.eigh(H)
    return Spectrum(eigenvalues=vals, eigenvectors=fix_signs(vecs))


def align_signs(previous: Spectrum, current: Spectrum) -> Spectrum:
    """Flip eigenvector signs of `current` to follow `previous` continuously.

    Raises ValueError when any corresponding overlap falls below 0.1 in
    magnitude: the step along the path was too large (or a level crossed)
    and the caller must refine.
    """
    if previous.dimension != current.dimension:
        raise ValueError("spectra have different dimensions")
    overlaps = np.sum(previous.eigenvectors * current.eigenvectors, axis=0)
    small = np.abs(overlaps) <= 0.1
    if np.any(small):
        k = int(np.argmax(small))
        raise ValueError(
            f"eigenvector {k} overlap {overlaps[k]:.3e} too small; refine the step"
        )
    V = current.eigenvectors.copy()
    V[:, overlaps < 0.0] *= -1.0
    return Spectrum(eigenvalues=current.eigenvalues, eigenvectors=V)


def sqrt_clamped(x):
    """Square root with roundoff-negative arguments (>= -1e-12) clamped to 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-12):
        raise ValueError(f"square root of negative value {np.min(x):.3e}")
    return np.sqrt(np.clip(x, 0.0, None))


def matrix_function(spec: Spectrum, f) -> np.ndarray:
    """Apply a scalar function to a matrix through its spectrum: V f(E) V^T."""
    try:
        fvals = np.asarray(f(spec.eigenvalues), dtype=float)
        if fvals.shape != spec.eigenvalues.shape:
            raise TypeError
    except (TypeError, ValueError):
        fvals = np.array([float(f(x)) for x in spec.eigenvalues])
    if not np.all(np.isfinite(fvals)):
        k = int(np.argmax(~np.isfinite(fvals)))
        raise ValueError(
            f"function undefined on eigenvalue {spec.eigenvalues[k]!r}"
        )
    V = spec.eigenvectors
    M = (V * fvals) @ V.T
    return 0.5 * (M + M.T)


def require_nondegenerate(spec: Spectrum) -> Spectrum:
    if spec.degenerate:
        raise DegenerateSpectrumError(float(np.min(np.diff(spec.eigenvalues))))
    return spec
