"""Experiment orchestration: ladder sweeps, dimension studies, log-linear
scaling fits, and flat-file reporting.

A sweep walks a geometric ladder of end times T, at each rung measuring the
path length L, searching for the conservative scale factor at the threshold
error, and evaluating the requested cost proxies.  Records are persisted
incrementally (jsonl) so interrupted runs resume bit-identically.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import evolution, geometry, search
from .errors import ConfigError, NumericalError
from .paths import (
    GENERATOR_IDENTITY,
    HamiltonianPath,
    load_path_from_file,
    make_random_trig_path,
    make_translation_path,
    random_antisymmetric,
    random_symmetric,
)

log = logging.getLogger("adiascale")

VARIANTS = ("D1", "D2", "Dhalf")
RECORDS_FILE = "records.jsonl"

_PATH_SPEC_KEYS = {
    "random-trig": {"kind", "seed", "dimension"},
    "translation": {"kind", "seed", "dimension", "v"},
    "file": {"kind", "file"},
}


def build_path(spec: dict) -> HamiltonianPath:
    """Construct a path from its config-file description (strict keys)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("path spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind not in _PATH_SPEC_KEYS:
        raise ConfigError(f"unknown path kind {kind!r}")
    unknown = set(spec) - _PATH_SPEC_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown path spec keys: {sorted(unknown)}")
    missing = _PATH_SPEC_KEYS[kind] - set(spec)
    if missing:
        raise ConfigError(f"missing path spec keys: {sorted(missing)}")
    if kind == "random-trig":
        return make_random_trig_path(int(spec["seed"]), int(spec["dimension"]))
    if kind == "translation":
        rng = np.random.default_rng(int(spec["seed"]))
        d = int(spec["dimension"])
        H0 = random_symmetric(d, rng)
        K = random_antisymmetric(d, rng)
        return make_translation_path(H0, K, float(spec["v"]))
    return load_path_from_file(spec["file"])


@dataclass(frozen=True)
class SweepConfig:
    path: dict
    eps_th: float = 0.1
    t0: float = 10.0
    k: float = 1.5
    kappa: float = 2.0
    ladder_points: int = 8
    variants: tuple = VARIANTS
    s_start: float = 1.0
    gamma: float = search.DEFAULT_GAMMA
    eps_tol: Optional[float] = None
    integrator_tolerance: float = 1e-3
    quad_tolerance: float = 1e-6
    out_dir: Optional[str] = None
    run_seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.eps_th < 1.0):
            raise ConfigError("eps_th must lie in (0, 1)")
        if self.k <= 1.0:
            raise ConfigError("ladder factor k must be greater than 1")
        if self.kappa <= 1.0:
            raise ConfigError("restart factor kappa must be greater than 1")
        if self.t0 <= 0.0:
            raise ConfigError("t0 must be positive")
        if self.ladder_points < 1:
            raise ConfigError("ladder_points must be at least 1")
        if not (0.0 < self.gamma < 1.0):
            raise ConfigError("gamma must lie in (0, 1)")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown proxy variant {v!r}")
        object.__setattr__(self, "variants", tuple(self.variants))
        build_path(self.path)  # fail fast on a bad path spec

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variants"] = list(self.variants)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be an object")
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "path" not in doc:
            raise ConfigError("config requires a 'path' spec")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, file) -> "SweepConfig":
        if hasattr(file, "read"):
            text = file.read()
        else:
            with open(file, "r", encoding="utf-8") as fh:
                text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class TraversalRecord:
    t_end: float
    length: float
    s_c: float
    epsilon: float
    qd: dict  # variant -> value
    qd_over_l: dict
    steps: int
    norm_drift: float
    wall_time: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "TraversalRecord":
        return cls(**doc)


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    residual: float
    stderr_a: float

    @property
    def superlinear(self) -> bool:
        return self.a > 2.0 * self.stderr_a


@dataclass(frozen=True)
class ScalingSeries:
    config: SweepConfig
    records: tuple
    fits: dict = field(default_factory=dict)  # variant -> FitResult
    failures: tuple = ()

    def verdicts(self) -> dict:
        return {v: fit.superlinear for v, fit in self.fits.items()}


def fit_loglinear(points: Sequence) -> FitResult:
    """Least squares of y against log L: y ~ a*log(L) + b."""
    pts = [(float(L), float(y)) for L, y in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    L = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(L <= 0.0):
        raise ValueError("all L must be positive")
    x = np.log(L)
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate design: all L equal")
    X = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    dof = len(pts) - 2
    sigma2 = ssr / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return FitResult(
        a=float(coef[0]),
        b=float(coef[1]),
        residual=float(np.sqrt(ssr)),
        stderr_a=float(np.sqrt(max(cov[0, 0], 0.0))),
    )


def _ladder_times(config: SweepConfig):
    t = config.t0
    out = []
    for _ in range(config.ladder_points):
        out.append(t)
        t = t * config.k
    return out


def _load_existing_records(out_dir) -> list:
    path = Path(out_dir) / RECORDS_FILE
    if not path.exists():
        return []
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(TraversalRecord.from_dict(json.loads(line)))
    return records


def run_sweep(config: SweepConfig, resume: bool = False) -> ScalingSeries:
    """Execute the ladder sweep described by the config.

    With `resume`, records already present in the output directory are kept
    and the ladder continues after them; the result is identical to an
    uninterrupted run because each rung's search start depends only on the
    previous rung's recorded scale factor.
    """
    path = build_path(config.path)
    out_dir = Path(config.out_dir) if config.out_dir else None
    records: list = []
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        if resume:
            records = _load_existing_records(out_dir)
        else:
            (out_dir / RECORDS_FILE).write_text("")

    times = _ladder_times(config)
    done = len(records)
    s_start = config.s_start if done == 0 else config.kappa * records[-1].s_c
    failures = []
    for i, t_end in enumerate(times):
        if i < done:
            continue
        t_wall = time.monotonic()
        try:
            length = geometry.path_length(path, 0.0, t_end, config.quad_tolerance)
            result = search.find_scale_factor(
                path,
                t_end,
                eps_th=config.eps_th,
                s_start=s_start,
                gamma=config.gamma,
                eps_tol=config.eps_tol,
                tolerance=config.integrator_tolerance,
            )
            if result.too_easy:
                raise NumericalError(
                    f"path too easy at T_end={t_end}: error never reached "
                    f"the threshold {config.eps_th}"
                )
            # re-run at the accepted s_c for integrator diagnostics
            # (cached midpoint spectra make this cheap)
            evo = evolution.evolve(
                path, t_end, result.s_c, config.integrator_tolerance
            )
            qd = {
                v: geometry.qd_proxy(path, t_end, result.s_c, v, config.quad_tolerance)
                for v in config.variants
            }
        except NumericalError as exc:
            log.warning("ladder point T_end=%.6g failed: %s", t_end, exc)
            failures.append((t_end, str(exc)))
            if len(failures) > config.ladder_points // 2:
                raise NumericalError(
                    f"{len(failures)} of {config.ladder_points} ladder points "
                    f"failed; aborting sweep"
                ) from exc
            s_start = config.s_start
            continue
        record = TraversalRecord(
            t_end=t_end,
            length=length,
            s_c=result.s_c,
            epsilon=result.epsilon_achieved,
            qd=qd,
            qd_over_l={v: qd[v] / length for v in config.variants},
            steps=evo.steps_taken,
            norm_drift=evo.norm_drift,
            wall_time=time.monotonic() - t_wall,
        )
        records.append(record)
        if out_dir is not None:
            with open(out_dir / RECORDS_FILE, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_dict()) + "\n")
        s_start = config.kappa * result.s_c
        log.info(
            "T_end=%.6g L=%.6g s_c=%.6g eps=%.4g", t_end, length, result.s_c,
            result.epsilon_achieved,
        )

    fits = {}
    if len(records) >= 3:
        for v in config.variants:
            fits[v] = fit_loglinear(
                [(r.length, r.qd_over_l[v]) for r in records]
            )
    return ScalingSeries(
        config=config, records=tuple(records), fits=fits, failures=tuple(failures)
    )


# ---------------------------------------------------------------------------
# Dimension study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimStudyResult:
    rows: tuple  # (dimension, mean L, std L)
    fit_log: Optional[FitResult]  # mean L ~ a*log(dim) + b; None below 3 dims
    fit_linear_residual: float  # residual of the competing linear-in-dim fit
    samples: int
    t_end: float
    seed: int


_SAMPLE_MAX_INTERVALS = 2**14


def _sample_length(dim, sample, t_end, seed, quad_tol):
    for attempt in range(4):
        child = np.random.SeedSequence([seed, dim, sample, attempt])
        path_seed = int(child.generate_state(1, dtype=np.uint64)[0])
        path = make_random_trig_path(path_seed, dim)
        try:
            return geometry.path_length(
                path, 0.0, t_end, quad_tol, max_intervals=_SAMPLE_MAX_INTERVALS
            )
        except NumericalError:
            log.info("redrawing sample %d at dim %d (near-degenerate draw)",
                     sample, dim)
    raise NumericalError(f"3 redraws exhausted at dim {dim}, sample {sample}")


def thread_count() -> int:
    env = os.environ.get("ADIASCALE_THREADS")
    return max(1, int(env)) if env else 1


def dim_study(
    dims: Sequence[int],
    samples: int,
    t_end: float,
    seed: int,
    quad_tol: float = 1e-6,
) -> DimStudyResult:
    """Mean ground-state path length per Hilbert-space dimension.

    Each (dimension, sample) pair gets its own deterministic sub-seed, so
    results are bit-identical for a fixed seed regardless of thread count.
    """
    dims = [int(d) for d in dims]
    if any(d < 2 for d in dims):
        raise ConfigError("all dimensions must be at least 2")
    if samples < 2:
        raise ConfigError("need at least 2 samples per dimension")
    rows = []
    workers = thread_count()
    for d in dims:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                lengths = list(
                    pool.map(
                        lambda j: _sample_length(d, j, t_end, seed, quad_tol),
                        range(samples),
                    )
                )
        else:
            lengths = [
                _sample_length(d, j, t_end, seed, quad_tol) for j in range(samples)
            ]
        arr = np.array(lengths)
        rows.append((d, float(np.mean(arr)), float(np.std(arr, ddof=1))))
        log.info("dim %d: mean L = %.6g (std %.3g)", d, rows[-1][1], rows[-1][2])
    pts = [(d, m) for d, m, _ in rows]
    if len(pts) >= 3:
        fit_log = fit_loglinear(pts)
        # competing straight-line fit in the raw dimension
        x = np.array([p[0] for p in pts], dtype=float)
        y = np.array([p[1] for p in pts])
        X = np.column_stack([x, np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        lin_resid = float(np.linalg.norm(y - X @ coef))
    else:
        fit_log = None
        lin_resid = float("nan")
    return DimStudyResult(
        rows=tuple(rows),
        fit_log=fit_log,
        fit_linear_residual=lin_resid,
        samples=samples,
        t_end=t_end,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def _format_float(x: float) -> str:
    digits = os.environ.get("ADIASCALE_PRECISION")
    if digits:
        return f"{x:.{int(digits)}g}"
    return repr(float(x))


def emit_report(result, fmt: str, out_dir) -> list:
    """Write csv / jsonl / plotdata files for a sweep series or dim study.

    Returns the list of files written.  plotdata means two-column (x, y)
    text files per figure panel plus a manifest naming the config hash and
    the RNG identity.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt not in ("csv", "jsonl", "plotdata"):
        raise ConfigError(f"unknown report format {fmt!r}")
    written = []

    if isinstance(result, ScalingSeries):
        if not result.records:
            raise ValueError("no records to report")
        variants = result.config.variants
        if fmt == "csv":
            cols = ["t_end", "length", "s_c", "epsilon", "steps", "norm_drift",
                    "wall_time"]
            cols += [f"qd_{v}" for v in variants]
            cols += [f"qd_over_l_{v}" for v in variants]
            lines = [",".join(cols)]
            for r in result.records:
                row = [r.t_end, r.length, r.s_c, r.epsilon, r.steps,
                       r.norm_drift, r.wall_time]
                row += [r.qd[v] for v in variants]
                row += [r.qd_over_l[v] for v in variants]
                lines.append(",".join(
                    str(int(x)) if isinstance(x, int) else _format_float(x)
                    for x in row
                ))
            f = out_dir / "records.csv"
            f.write_text("\n".join(lines) + "\n")
            written.append(f)
        elif fmt == "jsonl":
            f = out_dir / RECORDS_FILE
            with open(f, "w", encoding="utf-8") as fh:
                for r in result.records:
                    fh.write(json.dumps(r.to_dict()) + "\n")
            written.append(f)
        else:
            for v in variants:
                f = out_dir / f"qd_over_l_vs_length_{v}.dat"
                lines = [
                    f"{_format_float(r.length)} {_format_float(r.qd_over_l[v])}"
                    for r in result.records
                ]
                f.write_text("\n".join(lines) + "\n")
                written.append(f)
            written.append(_write_manifest(out_dir, result.config.config_hash()))
        return written

    if isinstance(result, DimStudyResult):
        if fmt == "csv":
            lines = ["dimension,mean_length,std_length"]
            for d, m, s in result.rows:
                lines.append(f"{d},{_format_float(m)},{_format_float(s)}")
            f = out_dir / "dim_study.csv"
            f.write_text("\n".join(lines) + "\n")
            written.append(f)
        elif fmt == "jsonl":
            f = out_dir / "dim_study.jsonl"
            with open(f, "w", encoding="utf-8") as fh:
                for d, m, s in result.rows:
                    fh.write(json.dumps(
                        {"dimension": d, "mean_length": m, "std_length": s}
                    ) + "\n")
            written.append(f)
        else:
            f = out_dir / "length_vs_dimension.dat"
            f.write_text("\n".join(
                f"{d} {_format_float(m)}" for d, m, _ in result.rows
            ) + "\n")
            written.append(f)
            canon = json.dumps(
                {"dims": [d for d, _, _ in result.rows],
                 "samples": result.samples, "t_end": result.t_end,
                 "seed": result.seed},
                sort_keys=True,
            )
            written.append(_write_manifest(
                out_dir, hashlib.sha256(canon.encode()).hexdigest()[:16]
            ))
        return written

    raise TypeError(f"cannot report object of type {type(result).__name__}")


def _write_manifest(out_dir: Path, config_hash: str) -> Path:
    f = out_dir / "manifest.json"
    f.write_text(json.dumps(
        {"config_hash": config_hash, "generator": GENERATOR_IDENTITY},
        indent=1,
    ) + "\n")
    return f
