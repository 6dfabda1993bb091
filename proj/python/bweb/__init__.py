"""Python bindings for the coalescing-walk / Brownian web toolkit.

Configs and check parameters are plain dicts; they travel to the C++ core
as JSON text.
"""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    Path,
    WindowOverflow,
    bridge_meet_prob,
    check_names,
    count,
    dedup,
    hausdorff,
    pair_meeting_cdf,
    path_metric,
    phi,
    psi,
    rho,
    theta,
)

__all__ = [
    "ConfigError",
    "Path",
    "WindowOverflow",
    "bridge_meet_prob",
    "check_names",
    "count",
    "dedup",
    "hausdorff",
    "pair_meeting_cdf",
    "path_metric",
    "phi",
    "psi",
    "rho",
    "run_check",
    "sample_skeleton",
    "simulate_continuous",
    "simulate_lattice",
    "theta",
]


def _dumps(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def simulate_lattice(system, starts, horizon, rescaled=True):
    """Discrete walks from (site, step) starts; `system` is a dict or JSON text."""
    return _core.simulate_lattice(_dumps(system), list(starts), int(horizon), rescaled)


def simulate_continuous(system, starts, horizon, rescaled=True):
    """Continuous-time walks from (site, time) starts."""
    return _core.simulate_continuous(_dumps(system), list(starts), float(horizon), rescaled)


def sample_skeleton(starts, step=1e-4, horizon=1.0, seed=0):
    """Coalescing Brownian motions from (x, t) starts.

    Returns (paths, records) with records as (survivor, absorbed, meet_time).
    """
    return _core.sample_skeleton(list(starts), step, horizon, seed)


def run_check(name, params=None, seed=1, workers=1, replicas=None):
    """Run a named check and return its report rows as dicts."""
    rows = _core.run_check(name, _dumps(params or {}), seed, workers, replicas)
    return [_json.loads(r) for r in rows]
