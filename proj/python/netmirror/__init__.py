"""Euclidean mirrors of network time series."""

import json as _json

from ._netmirror import (
    ConfigError,
    DataError,
    NetmirrorError,
    NumericalError,
    __version__,
    ase,
    cmds,
    distance_matrix,
    dmv_hat,
    dmv_oracle_bm,
    dmv_oracle_ibm,
    isomap_1d,
    procrustes_rotation,
    regression_band_scan,
    sample_rdpg,
    sbm_block_matrix_at,
    sbm_latents,
    select_dimension,
    set_thread_count,
    sigmage_scan,
    simulate_bm_drift,
    sin_theta_norm,
    spectral_norm,
    stress,
)
from . import _netmirror


def _as_json(config):
    return config if isinstance(config, str) else _json.dumps(config)


def parse_config(config):
    """Canonical configuration (all defaults filled in) as a dict."""
    return _json.loads(_netmirror.parse_config(_as_json(config)))


def run_pipeline(config):
    """Run the full pipeline; `config` is a dict or JSON string."""
    _netmirror.run_pipeline(_as_json(config))


def run_bootstrap(config, sample_sizes=(250, 500, 1000, 2000), replicates=10, write=True):
    return _netmirror.run_bootstrap(_as_json(config), list(sample_sizes), replicates, write)


__all__ = [name for name in dir() if not name.startswith("_")]
