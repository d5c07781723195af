"""Hamiltonian path families: seeded random-trig paths, isospectral
translation paths, constants, and a strict file format for all of them.

All paths expose both `evaluate(t)` / `derivative(t)` for single times and
`evaluate_many(ts)` for stacked evaluation (the evolution and quadrature
modules live on the batched form).  Derivatives are analytic.

Randomness contract: every random draw goes through numpy's ``default_rng``
(PCG64) seeded explicitly; identical seeds reproduce matrices bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import spectral
from .errors import PathFileError

GENERATOR_IDENTITY = "numpy-PCG64"

# Coefficient functions of the random-trig family (Hamiltonian =
# c1(t) * H1 + c2(t) * H2).
_TRIG_TERMS = (
    {"target": 1, "function": "sin", "amplitude": 2.1, "frequency": 1.0},
    {"target": 1, "function": "sin", "amplitude": 1.0, "frequency": float(np.sqrt(2.0))},
    {"target": 2, "function": "cos", "amplitude": 2.7, "frequency": 1.0},
    {"target": 2, "function": "cos", "amplitude": 1.0, "frequency": float(np.sqrt(2.0))},
)


@dataclass(frozen=True)
class HamiltonianPath:
    """A differentiable map from (dimensionless) time to a real symmetric matrix."""

    dimension: int
    kind: str
    evaluate: Callable[[float], np.ndarray]
    derivative: Callable[[float], np.ndarray]
    evaluate_many: Callable[[np.ndarray], np.ndarray]
    derivative_many: Callable[[np.ndarray], np.ndarray]
    key: str
    metadata: dict = field(default_factory=dict)


def _content_key(kind: str, *arrays, extra=""):
    h = hashlib.sha256()
    h.update(kind.encode())
    h.update(extra.encode())
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return f"{kind}:{h.hexdigest()[:16]}"


def random_symmetric(d: int, rng: np.random.Generator) -> np.ndarray:
    """Real symmetric matrix with iid N(0,1) upper triangle (incl. diagonal)
    mirrored below, so every stored element has variance exactly 1."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    iu = np.triu_indices(d)
    M = np.zeros((d, d))
    M[iu] = rng.standard_normal(len(iu[0]))
    return M + np.triu(M, 1).T


def random_antisymmetric(d: int, rng: np.random.Generator) -> np.ndarray:
    """Real antisymmetric matrix with iid N(0,1) strict upper triangle."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    iu = np.triu_indices(d, k=1)
    M = np.zeros((d, d))
    M[iu] = rng.standard_normal(len(iu[0]))
    return M - M.T


def _term_values(terms, ts):
    """Coefficient values c1(ts), c2(ts) and their time derivatives."""
    ts = np.asarray(ts, dtype=float)
    c = [np.zeros_like(ts), np.zeros_like(ts)]
    dc = [np.zeros_like(ts), np.zeros_like(ts)]
    for term in terms:
        j = term["target"] - 1
        a = term["amplitude"]
        w = term["frequency"]
        fn = term["function"]
        if fn == "sin":
            c[j] = c[j] + a * np.sin(w * ts)
            dc[j] = dc[j] + a * w * np.cos(w * ts)
        elif fn == "cos":
            c[j] = c[j] + a * np.cos(w * ts)
            dc[j] = dc[j] - a * w * np.sin(w * ts)
        elif fn == "poly":
            # amplitude * t**frequency with an integer-like power
            c[j] = c[j] + a * ts**w
            if w == 0:
                pass
            else:
                dc[j] = dc[j] + a * w * ts ** (w - 1)
        else:  # pragma: no cover - guarded at construction
            raise ValueError(f"unknown coefficient function {fn!r}")
    return c, dc


def _validate_terms(terms):
    for term in terms:
        if set(term) != {"target", "function", "amplitude", "frequency"}:
            raise ValueError(f"bad coefficient term keys: {sorted(term)}")
        if term["target"] not in (1, 2):
            raise ValueError(f"coefficient target must be 1 or 2, got {term['target']}")
        if term["function"] not in ("sin", "cos", "poly"):
            raise ValueError(f"unknown coefficient function {term['function']!r}")


def make_trig_path(H1, H2, terms=_TRIG_TERMS, metadata=None) -> HamiltonianPath:
    """Path c1(t)*H1 + c2(t)*H2 with coefficients from a term catalog."""
    H1 = np.asarray(H1, dtype=float)
    H2 = np.asarray(H2, dtype=float)
    terms = tuple(dict(t) for t in terms)
    _validate_terms(terms)
    d = H1.shape[0]

    def evaluate_many(ts):
        (c1, c2), _ = _term_values(terms, ts)
        return c1[..., None, None] * H1 + c2[..., None, None] * H2

    def derivative_many(ts):
        _, (dc1, dc2) = _term_values(terms, ts)
        return dc1[..., None, None] * H1 + dc2[..., None, None] * H2

    meta = {"terms": terms}
    meta.update(metadata or {})
    return HamiltonianPath(
        dimension=d,
        kind="trig",
        evaluate=lambda t: evaluate_many(float(t)),
        derivative=lambda t: derivative_many(float(t)),
        evaluate_many=evaluate_many,
        derivative_many=derivative_many,
        key=_content_key("trig", H1, H2, extra=json.dumps(terms, sort_keys=True)),
        metadata={"H1": H1, "H2": H2, **meta},
    )


def make_random_trig_path(seed: int, d: int) -> HamiltonianPath:
    """Seeded random two-matrix trigonometric path (incommensurate
    frequencies 1 and sqrt(2), hence non-periodic)."""
    rng = np.random.default_rng(seed)
    H1 = random_symmetric(d, rng)
    H2 = random_symmetric(d, rng)
    path = make_trig_path(H1, H2, _TRIG_TERMS, metadata={"seed": int(seed)})
    return _replace(path, kind="random-trig", key=f"random-trig:{seed}:{d}")


def make_translation_path(H0, generator, v: float) -> HamiltonianPath:
    """Isospectral path H(t) = G(t) H0 G(t)^T with G(t) = exp(v K t / n).

    `generator` K is a real antisymmetric matrix; n = ||K g0|| with g0 the
    ground state of H0, so the ground state moves at constant speed v.  The
    eigenvalues of H(t) equal those of H0 for all t.
    """
    H0 = np.asarray(H0, dtype=float)
    K = np.asarray(generator, dtype=float)
    spectral._check_symmetric(H0)
    if np.max(np.abs(K + K.T)) > 1e-12 * (1.0 + np.max(np.abs(K))):
        raise ValueError("generator must be antisymmetric")
    if K.shape != H0.shape:
        raise ValueError("generator and H0 must have the same shape")
    if v <= 0:
        raise ValueError("v must be positive")
    g0 = spectral.eigh(H0).ground_state
    n = float(np.linalg.norm(K @ g0))
    if n <= 1e-12:
        raise ValueError(
            f"generator annihilates the ground state: ||K g0|| = {n:.3e}"
        )
    c = v / n
    # K is antisymmetric, so iK is Hermitian: diagonalize once and build
    # G(t) = W exp(mu c t) W^dagger (real orthogonal) from phases.
    mu, W = np.linalg.eigh(1j * K)
    Wc = W.conj()
    d = H0.shape[0]

    def _G_many(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        phases = np.exp(-1j * c * np.outer(ts, mu))
        G = np.einsum("ij,nj,kj->nik", W, phases, Wc)
        return np.ascontiguousarray(G.real)

    def evaluate_many(ts):
        scalar = np.isscalar(ts) or np.ndim(ts) == 0
        G = _G_many(ts)
        H = np.einsum("nij,jk,nlk->nil", G, H0, G)
        H = 0.5 * (H + np.transpose(H, (0, 2, 1)))
        return H[0] if scalar else H

    def derivative_many(ts):
        scalar = np.isscalar(ts) or np.ndim(ts) == 0
        H = np.atleast_3d(evaluate_many(np.atleast_1d(np.asarray(ts, dtype=float))))
        dH = c * (np.einsum("ij,njk->nik", K, H) - np.einsum("nij,jk->nik", H, K))
        return dH[0] if scalar else dH

    return HamiltonianPath(
        dimension=d,
        kind="translation",
        evaluate=lambda t: evaluate_many(float(t)),
        derivative=lambda t: derivative_many(float(t)),
        evaluate_many=evaluate_many,
        derivative_many=derivative_many,
        key=_content_key("translation", H0, K, extra=repr(float(v))),
        metadata={"H0": H0, "generator": K, "v": float(v)},
    )


def make_constant_path(H0) -> HamiltonianPath:
    """Degenerate baseline: H(t) = H0, derivative 0."""
    H0 = np.asarray(H0, dtype=float)
    spectral._check_symmetric(H0)
    d = H0.shape[0]
    Z = np.zeros((d, d))

    def const_many(M):
        def f(ts):
            if np.isscalar(ts) or np.ndim(ts) == 0:
                return M.copy()
            return np.broadcast_to(M, (len(ts), d, d)).copy()

        return f

    return HamiltonianPath(
        dimension=d,
        kind="constant",
        evaluate=lambda t: H0.copy(),
        derivative=lambda t: Z.copy(),
        evaluate_many=const_many(H0),
        derivative_many=const_many(Z),
        key=_content_key("constant", H0),
        metadata={"H0": H0},
    )


def scale_path(path: HamiltonianPath, alpha: float) -> HamiltonianPath:
    """The same path with the Hamiltonian multiplied by a positive constant."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return _replace(
        path,
        evaluate=lambda t: alpha * path.evaluate(t),
        derivative=lambda t: alpha * path.derivative(t),
        evaluate_many=lambda ts: alpha * path.evaluate_many(ts),
        derivative_many=lambda ts: alpha * path.derivative_many(ts),
        key=f"scaled:{alpha!r}:{path.key}",
        metadata={**path.metadata, "scale": float(alpha)},
    )


def reparametrized_path(path: HamiltonianPath, f, fprime) -> HamiltonianPath:
    """Path t -> H(f(t)) with analytic chain-rule derivative."""

    def evaluate_many(ts):
        return path.evaluate_many(f(np.asarray(ts, dtype=float)))

    def derivative_many(ts):
        ts = np.asarray(ts, dtype=float)
        dH = path.derivative_many(f(ts))
        fp = np.asarray(fprime(ts), dtype=float)
        if dH.ndim == 3:
            return fp[:, None, None] * dH
        return fp * dH

    return _replace(
        path,
        evaluate=lambda t: path.evaluate(float(f(t))),
        derivative=lambda t: float(fprime(t)) * path.derivative(float(f(t))),
        evaluate_many=evaluate_many,
        derivative_many=derivative_many,
        key=f"reparam:{path.key}",
    )


def _replace(path: HamiltonianPath, **kwargs) -> HamiltonianPath:
    fields = dict(
        dimension=path.dimension,
        kind=path.kind,
        evaluate=path.evaluate,
        derivative=path.derivative,
        evaluate_many=path.evaluate_many,
        derivative_many=path.derivative_many,
        key=path.key,
        metadata=path.metadata,
    )
    fields.update(kwargs)
    return HamiltonianPath(**fields)


# ---------------------------------------------------------------------------
# Path files.  JSON with a fixed, strictly checked schema:
#   kind: "trig" | "translation" | "constant"
#   dimension: int
#   seed: optional int (metadata only)
#   matrices: list of matrices, each a row-major flat list of d*d decimals
#             (trig: [H1, H2]; translation/constant: [H0])
#   terms: trig only; list of {target: 1|2, function: sin|cos|poly,
#          amplitude, frequency}.  "poly" means amplitude * t**frequency.
#   v: translation only, positive number
#   generator: translation only, row-major flat antisymmetric matrix
# ---------------------------------------------------------------------------

_KEYS_BY_KIND = {
    "trig": {"kind", "dimension", "matrices", "terms", "seed"},
    "translation": {"kind", "dimension", "matrices", "v", "generator", "seed"},
    "constant": {"kind", "dimension", "matrices", "seed"},
}


def _parse_matrix(flat, d, name):
    try:
        arr = np.asarray(flat, dtype=float)
    except (TypeError, ValueError) as exc:
        raise PathFileError(f"{name}: non-numeric entries") from exc
    if arr.shape != (d * d,):
        raise PathFileError(f"{name}: expected {d * d} entries, got {arr.shape}")
    M = arr.reshape(d, d)
    return M


def _require_symmetric(M, name):
    asym = np.abs(M - M.T)
    if np.max(asym) > spectral.SYMMETRY_TOL * (1.0 + np.max(np.abs(M))):
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise PathFileError(
            f"{name} not symmetric at entry ({i},{j}): {M[i, j]!r} vs {M[j, i]!r}"
        )
    return M


def load_path_from_file(file) -> HamiltonianPath:
    """Read a path definition file (strict: unknown keys rejected)."""
    if hasattr(file, "read"):
        text = file.read()
    else:
        with open(file, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PathFileError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise PathFileError("top level must be an object")
    kind = doc.get("kind")
    if kind not in _KEYS_BY_KIND:
        raise PathFileError(f"unknown kind {kind!r}")
    unknown = set(doc) - _KEYS_BY_KIND[kind]
    if unknown:
        raise PathFileError(f"unknown keys for kind {kind!r}: {sorted(unknown)}")
    for req in ("dimension", "matrices"):
        if req not in doc:
            raise PathFileError(f"missing required key {req!r}")
    d = doc["dimension"]
    if not isinstance(d, int) or d < 2:
        raise PathFileError(f"dimension must be an integer >= 2, got {d!r}")
    mats = doc["matrices"]
    if not isinstance(mats, list):
        raise PathFileError("matrices must be a list")

    if kind == "trig":
        if len(mats) != 2:
            raise PathFileError("trig paths need exactly two matrices")
        if "terms" not in doc:
            raise PathFileError("missing required key 'terms'")
        H1 = _require_symmetric(_parse_matrix(mats[0], d, "matrices[0]"), "matrices[0]")
        H2 = _require_symmetric(_parse_matrix(mats[1], d, "matrices[1]"), "matrices[1]")
        terms = doc["terms"]
        try:
            _validate_terms(terms)
        except (ValueError, TypeError, KeyError) as exc:
            raise PathFileError(f"bad terms: {exc}") from exc
        meta = {"seed": doc.get("seed")}
        return make_trig_path(H1, H2, terms, metadata=meta)

    if kind == "translation":
        for req in ("v", "generator"):
            if req not in doc:
                raise PathFileError(f"missing required key {req!r}")
        if len(mats) != 1:
            raise PathFileError("translation paths need exactly one matrix")
        H0 = _require_symmetric(_parse_matrix(mats[0], d, "matrices[0]"), "matrices[0]")
        K = _parse_matrix(doc["generator"], d, "generator")
        try:
            return make_translation_path(H0, K, float(doc["v"]))
        except ValueError as exc:
            raise PathFileError(str(exc)) from exc

    # constant
    if len(mats) != 1:
        raise PathFileError("constant paths need exactly one matrix")
    H0 = _require_symmetric(_parse_matrix(mats[0], d, "matrices[0]"), "matrices[0]")
    return make_constant_path(H0)


def save_path_to_file(path: HamiltonianPath, file) -> None:
    """Write a path definition file that `load_path_from_file` round-trips."""
    meta = path.metadata
    if path.kind in ("trig", "random-trig"):
        doc = {
            "kind": "trig",
            "dimension": path.dimension,
            "matrices": [meta["H1"].ravel().tolist(), meta["H2"].ravel().tolist()],
            "terms": [dict(t) for t in meta["terms"]],
        }
    elif path.kind == "translation":
        doc = {
            "kind": "translation",
            "dimension": path.dimension,
            "matrices": [meta["H0"].ravel().tolist()],
            "generator": meta["generator"].ravel().tolist(),
            "v": meta["v"],
        }
    elif path.kind == "constant":
        doc = {
            "kind": "constant",
            "dimension": path.dimension,
            "matrices": [meta["H0"].ravel().tolist()],
        }
    else:
        raise ValueError(f"cannot serialize path of kind {path.kind!r}")
    if meta.get("seed") is not None:
        doc["seed"] = int(meta["seed"])
    text = json.dumps(doc, indent=1)
    if hasattr(file, "write"):
        file.write(text)
    else:
        with open(file, "w", encoding="utf-8") as fh:
            fh.write(text)
