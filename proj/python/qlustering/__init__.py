"""Clustering with steady-state currents of an open quantum network."""

import json as _json

from ._qlustering import (
    ConfigError,
    QlusteringError,
    adjusted_rand_index,
    compactness,
    consensus_cluster,
    consensus_matrix,
    currents,
    dunn_index,
    fit,
    ipr,
    kmeans,
    rand_index,
    silhouette,
    sphere_clusters,
    stability,
    steady_state,
)
from ._qlustering import run as _run


def run(command, config):
    """Run a runner command; `config` is a dict, the manifest comes back as a dict."""
    return _json.loads(_run(command, _json.dumps(config)))


__all__ = [
    "ConfigError",
    "QlusteringError",
    "adjusted_rand_index",
    "compactness",
    "consensus_cluster",
    "consensus_matrix",
    "currents",
    "dunn_index",
    "fit",
    "ipr",
    "kmeans",
    "rand_index",
    "run",
    "silhouette",
    "sphere_clusters",
    "stability",
    "steady_state",
]
