"""Serialize fitted forests to the binary container format.

All trees are concatenated into six flat arrays with an offsets table, so a
500-tree model loads with a handful of array reads. The header carries the
hyperparameters, the seed (and the name of the per-tree seed mixer), the
category vocabulary, and build metadata. Field order and canonical JSON make
saves reproducible byte for byte.
"""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from . import container
from .dataset import CategoryVocab
from .forest import ForestModel, Hyperparams, SEED_MIXER, Tree

KIND = "forest_model"


def save_model(model: ForestModel, path: str | Path | None = None) -> bytes:
    """Pack the model; writes to ``path`` when given, returns the bytes."""
    offsets = np.zeros(len(model.trees) + 1, dtype=np.int64)
    for i, tree in enumerate(model.trees):
        offsets[i + 1] = offsets[i] + tree.n_nodes
    arrays = {
        "tree_offsets": offsets,
        "feature": np.concatenate([t.feature for t in model.trees]),
        "threshold": np.concatenate([t.threshold for t in model.trees]),
        "left": np.concatenate([t.left for t in model.trees]),
        "right": np.concatenate([t.right for t in model.trees]),
        "value": np.concatenate([t.value for t in model.trees]),
        "n_samples": np.concatenate([t.n_samples for t in model.trees]),
        "impurity_decrease": model.impurity_decrease,
    }
    meta = {
        "hyperparams": model.params.to_dict(),
        "master_seed": model.master_seed,
        "seed_mixer": SEED_MIXER,
        "n_features": model.n_features,
        "columns": list(model.columns) if model.columns else None,
        "vocab": model.vocab.to_dict() if model.vocab else None,
        "build": model.build_info,
    }
    data = container.pack(KIND, meta, arrays)
    if path is not None:
        Path(path).write_bytes(data)
    return data


def _load(meta: dict, arrays: dict[str, np.ndarray]) -> ForestModel:
    offsets = arrays["tree_offsets"]
    trees = []
    for i in range(len(offsets) - 1):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        trees.append(Tree(
            feature=arrays["feature"][lo:hi],
            threshold=arrays["threshold"][lo:hi],
            left=arrays["left"][lo:hi],
            right=arrays["right"][lo:hi],
            value=arrays["value"][lo:hi],
            n_samples=arrays["n_samples"][lo:hi],
        ))
    return ForestModel(
        trees=tuple(trees),
        params=Hyperparams.from_dict(meta["hyperparams"]),
        master_seed=meta["master_seed"],
        n_features=meta["n_features"],
        impurity_decrease=arrays["impurity_decrease"],
        vocab=CategoryVocab(meta["vocab"]) if meta.get("vocab") else None,
        columns=tuple(meta["columns"]) if meta.get("columns") else None,
        build_info=meta.get("build", {}),
    )


def load_model(path: str | Path) -> ForestModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such model file: {path}")
    meta, arrays = container.read(path, expected_kind=KIND)
    return _load(meta, arrays)


def load_model_bytes(data: bytes) -> ForestModel:
    meta, arrays = container.unpack(data, expected_kind=KIND)
    return _load(meta, arrays)


def model_fingerprint(data: bytes) -> str:
    """Short stable identifier of a serialized model, used as its version."""
    return hashlib.sha256(data).hexdigest()[:12]
