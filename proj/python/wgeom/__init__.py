"""Weighted affine connections on manifolds with density."""

import json as _json

from ._wgeom import (
    Chart,
    Error,
    SchemaError,
    Settings,
    algebra_element,
    build,
    bundle,
    catalog_manifest,
    christoffel,
    curvature_alpha,
    generated_algebra_dim,
    geodesic,
    holonomy,
    mean_curvature_check,
    one_dim_error,
    repar_distance,
    ric_f,
    task_names,
    volume_form_residual,
    weighted_symbols,
)
from ._wgeom import run_spec as _run_spec

__all__ = [
    "Chart",
    "Error",
    "SchemaError",
    "Settings",
    "algebra_element",
    "build",
    "bundle",
    "catalog_manifest",
    "christoffel",
    "curvature_alpha",
    "generated_algebra_dim",
    "geodesic",
    "holonomy",
    "mean_curvature_check",
    "one_dim_error",
    "repar_distance",
    "ric_f",
    "run",
    "task_names",
    "volume_form_residual",
    "weighted_symbols",
]


def run(spec):
    """Run an experiment spec (dict or JSON text); returns exit_code, status, csv, summary and log."""
    if not isinstance(spec, str):
        spec = _json.dumps(spec)
    return _run_spec(spec)
