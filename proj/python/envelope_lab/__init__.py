"""Wave-packet envelope approximation lab.

The heavy lifting lives in the C++ extension ``_core``; this module adds dict
conveniences around its JSON interface.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    NumericalFailure,
    dealiased_cubic,
    dual_route_gap,
    fit_slope,
    grid_points,
    kernel_integral,
    linear_deviation,
    make_profile,
    p_symbol,
    schrodinger_symbol,
)

__version__ = _core.__version__

STUDIES = (
    "converge-main",
    "converge-linear",
    "remainder-decay",
    "highfreq-core",
    "kernel-bound",
    "energy-drift",
    "decay-probe",
)


def default_config(study):
    """Defaults for a study as a dict."""
    return json.loads(_core.default_config(study))


def run_study(config, **overrides):
    """Run a study. `config` is a dict, a JSON string or a study name.

    Keyword overrides replace top-level keys. Returns the report as a dict.
    """
    if isinstance(config, str) and config in STUDIES:
        config = default_config(config)
    elif isinstance(config, str):
        config = json.loads(config)
    config = {**config, **overrides}
    return json.loads(_core.run_study(json.dumps(config)))


def emit_outputs(report, out_dir, formats="csv,json,svg"):
    """Write the report files for a report dict; returns the manifest path."""
    return _core.emit_outputs(json.dumps(report), formats, str(out_dir))


__all__ = [
    "ConfigError",
    "NumericalFailure",
    "STUDIES",
    "dealiased_cubic",
    "default_config",
    "dual_route_gap",
    "emit_outputs",
    "fit_slope",
    "grid_points",
    "kernel_integral",
    "linear_deviation",
    "make_profile",
    "p_symbol",
    "run_study",
    "schrodinger_symbol",
]
