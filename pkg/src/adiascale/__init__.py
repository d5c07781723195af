"""Numerical toolkit for measuring how adiabaticity-cost proxies scale with
ground-state path length at fixed diabatic error."""

from .errors import (
    AdiascaleError,
    ConfigError,
    ConvergenceError,
    DegenerateSpectrumError,
    NumericalError,
    PathFileError,
)
from .evolution import EvolutionResult, diabatic_error, evolve
from .geometry import TangentData, ground_tangent, path_length, qd_generic, qd_proxy
from .paths import (
    HamiltonianPath,
    load_path_from_file,
    make_constant_path,
    make_random_trig_path,
    make_translation_path,
    make_trig_path,
    random_antisymmetric,
    random_symmetric,
    save_path_to_file,
    scale_path,
)
from .search import ScaleSearchResult, find_scale_factor, next_ladder
from .spectral import Spectrum, align_signs, eigh, matrix_function
from .sweep import (
    DimStudyResult,
    FitResult,
    ScalingSeries,
    SweepConfig,
    TraversalRecord,
    dim_study,
    emit_report,
    fit_loglinear,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AdiascaleError", "ConfigError", "ConvergenceError",
    "DegenerateSpectrumError", "NumericalError", "PathFileError",
    "EvolutionResult", "diabatic_error", "evolve",
    "TangentData", "ground_tangent", "path_length", "qd_generic", "qd_proxy",
    "HamiltonianPath", "load_path_from_file", "make_constant_path",
    "make_random_trig_path", "make_translation_path", "make_trig_path",
    "random_antisymmetric", "random_symmetric", "save_path_to_file",
    "scale_path",
    "ScaleSearchResult", "find_scale_factor", "next_ladder",
    "Spectrum", "align_signs", "eigh", "matrix_function",
    "DimStudyResult", "FitResult", "ScalingSeries", "SweepConfig",
    "TraversalRecord", "dim_study", "emit_report", "fit_loglinear",
    "run_sweep",
]
