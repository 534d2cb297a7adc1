"""Clustering engine for vacation-rental listings."""

import json

from ._core import (
    VrclassError,
    __version__,
    adjusted_rand_index,
    calinski_harabasz,
    clara,
    crosstab,
    davies_bouldin,
    generate,
    kmeans,
    kneedle,
    pam,
    pca,
    skewness,
)
from ._core import _run


def run(config=None, **settings):
    """Run the whole pipeline and return its manifest as a dict.

    ``settings`` use the config-file keys with dots replaced by underscores
    after the first word, e.g. ``synthetic_n=500`` or ``kmeans_k=4``.
    """
    entries = []
    for key, value in settings.items():
        if key.startswith("synthetic_"):
            key = "synthetic." + key[len("synthetic_"):]
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        entries.append((key, str(value)))
    ok, manifest = _run(None if config is None else str(config), entries)
    manifest = json.loads(manifest)
    if not ok:
        raise VrclassError(f"stage {manifest.get('failed_stage')} failed: {manifest.get('error')}")
    return manifest


__all__ = [
    "VrclassError",
    "__version__",
    "adjusted_rand_index",
    "calinski_harabasz",
    "clara",
    "crosstab",
    "davies_bouldin",
    "generate",
    "kmeans",
    "kneedle",
    "pam",
    "pca",
    "run",
    "skewness",
]
