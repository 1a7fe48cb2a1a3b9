"""Binary checkpoint for trained graph transformer parameters."""
from __future__ import annotations

import numpy as np

from .. import serialization
from .model import HgtConfig, HgtParameters, Normalizer

CHECKPOINT_MAGIC = b"HKHGTCKP"
CHECKPOINT_VERSION = 1


def to_bytes(params: HgtParameters, extra=None) -> bytes:
    arrays = {f"w/{k}": v for k, v in params.weights.items()}
    arrays.update({f"r/{k}": v for k, v in params.running.items()})
    arrays.update({f"nm/{k}": v for k, v in params.norm.mean.items()})
    arrays.update({f"ns/{k}": v for k, v in params.norm.std.items()})
    meta = {"config": params.config.to_dict(), "relations": [list(r) for r in params.relations],
            "target_mean": params.norm.target_mean, "target_std": params.norm.target_std,
            "extra": extra or {}}
    return serialization.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, meta, arrays)


def from_bytes(data: bytes):
    """Returns (params, extra metadata)."""
    meta, arrays = serialization.unpack(data, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)

    def group(prefix):
        n = len(prefix)
        return {k[n:]: np.asarray(v, float) for k, v in arrays.items() if k.startswith(prefix)}
    norm = Normalizer(group("nm/"), group("ns/"), meta["target_mean"], meta["target_std"])
    params = HgtParameters(HgtConfig.from_dict(meta["config"]),
                           [list(r) for r in meta["relations"]], group("w/"), group("r/"), norm)
    params.validate()
    return params, meta["extra"]


def save(path, params, extra=None):
    serialization.write_atomic(path, to_bytes(params, extra))


def load(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
