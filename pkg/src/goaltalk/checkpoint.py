"""Versioned text checkpoints for trainable policies.

JSON with hex-encoded float64 values, so save -> load round-trips
bit-exactly and files diff cleanly.
"""

import json

import numpy as np

from goaltalk.errors import ConfigError, DataError
from goaltalk.nets import GoalWeightNet, ScalarBlend
from goaltalk import policy as policy_mod

FORMAT_VERSION = 1


def _encode_array(arr):
    return {"shape": list(arr.shape), "data": [float(v).hex() for v in arr.ravel()]}


def _decode_array(blob):
    values = [float.fromhex(h) for h in blob["data"]]
    return np.array(values, dtype=np.float64).reshape(blob["shape"])


def save_checkpoint(path, kind, net, train_steps=0):
    if kind not in policy_mod.TRAINABLE_KINDS:
        raise ConfigError(f"checkpoints exist only for trainable kinds, got {kind!r}")
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "train_steps": int(train_steps),
        "disabled_factors": list(net.disabled_factors),
        "dims": {},
        "params": {k: _encode_array(v) for k, v in net.params.items()},
    }
    if kind == policy_mod.GOAL_WEIGHT:
        doc["dims"] = {"gru_hidden": net.gru_hidden, "mlp_hidden": net.mlp_hidden, "factors": 4}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    """Returns (kind, net, train_steps)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint format_version {doc.get('format_version')}")
    kind = doc.get("kind")
    params = {k: _decode_array(v) for k, v in doc.get("params", {}).items()}

    if kind == policy_mod.GOAL_WEIGHT:
        dims = doc.get("dims", {})
        net = GoalWeightNet(gru_hidden=int(dims.get("gru_hidden", 16)),
                            mlp_hidden=int(dims.get("mlp_hidden", 32)),
                            disabled_factors=tuple(doc.get("disabled_factors", ())))
        expected = set(net.params)
        if set(params) != expected:
            raise DataError(f"checkpoint parameter set mismatch: {sorted(set(params) ^ expected)}")
        for k, v in params.items():
            if v.shape != net.params[k].shape:
                raise DataError(f"checkpoint shape mismatch for {k}: {v.shape} != {net.params[k].shape}")
        net.params = params
    elif kind == policy_mod.SCALAR_BLEND:
        if set(params) != {"beta_raw"} or params["beta_raw"].shape != (1,):
            raise DataError("scalar-blend checkpoint must hold exactly beta_raw[1]")
        net = ScalarBlend(init_raw=float(params["beta_raw"][0]))
    else:
        raise DataError(f"unknown checkpoint kind {kind!r}")
    return kind, net, int(doc.get("train_steps", 0))
