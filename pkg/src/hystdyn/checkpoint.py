"""Bit-exact model persistence.

Checkpoints are JSON with every float stored in C99 hex notation
(``float.hex()``), so a save/load round trip reproduces parameters to the
last bit on any platform. Arrays are flattened row major next to their
shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .baseline import LinearModel
from .errors import CheckpointError
from .features import InputConfig, Scalers
from .lstm import DenseParams, LstmNetwork, LstmParams
from .numerics import BIT_GENERATOR

FORMAT_VERSION = 1
MODEL_TYPES = ("lstm", "linear")


def _encode_array(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape), "data": [v.hex() for v in a.ravel(order="C")]}


def _decode_array(obj, name: str) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in obj["shape"])
        flat = np.array([float.fromhex(v) for v in obj["data"]], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed array {name!r}: {exc}") from exc
    if flat.size != int(np.prod(shape)):
        raise CheckpointError(f"array {name!r} has {flat.size} values for shape {shape}")
    return flat.reshape(shape, order="C")


def _scalers_block(scalers: Scalers) -> dict:
    tmm = scalers.temperature_min_max()
    return {
        "theta_min": scalers.angle.theta_min_.hex(),
        "theta_max": scalers.angle.theta_max_.hex(),
        "temp_a_min": tmm["temp_a"][0].hex(),
        "temp_a_max": tmm["temp_a"][1].hex(),
        "temp_b_min": tmm["temp_b"][0].hex(),
        "temp_b_max": tmm["temp_b"][1].hex(),
    }


def _scalers_from_block(block) -> Scalers:
    try:
        return Scalers.from_min_max(
            theta_min=float.fromhex(block["theta_min"]),
            theta_max=float.fromhex(block["theta_max"]),
            temp_min_max={
                "temp_a": (float.fromhex(block["temp_a_min"]), float.fromhex(block["temp_a_max"])),
                "temp_b": (float.fromhex(block["temp_b_min"]), float.fromhex(block["temp_b_max"])),
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed scaler block: {exc}") from exc


@dataclass
class Checkpoint:
    """A loaded model plus the context required to run it."""

    model_type: str
    input_config: InputConfig
    scalers: Scalers
    network: LstmNetwork | None = None
    linear: LinearModel | None = None
    rng_seed: int | None = None


def save_lstm(
    path,
    network: LstmNetwork,
    scalers: Scalers,
    input_config: InputConfig,
    rng_seed: int | None = None,
) -> None:
    doc = {
        "version": FORMAT_VERSION,
        "model_type": "lstm",
        "input_config_k": input_config.k,
        "n": network.n,
        "hidden_size": network.hidden_size,
        "dense_size": network.dense_size,
        "rng_seed": rng_seed,
        "bit_generator": BIT_GENERATOR,
        "scalers": _scalers_block(scalers),
        "params": {name: _encode_array(a) for name, a in network.named_arrays().items()},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_linear(path, model: LinearModel, scalers: Scalers, input_config: InputConfig) -> None:
    doc = {
        "version": FORMAT_VERSION,
        "model_type": "linear",
        "input_config_k": input_config.k,
        "n": int(model.weights.shape[0]),
        "rank_deficient": bool(model.rank_deficient),
        "scalers": _scalers_block(scalers),
        "params": {
            "weights": _encode_array(model.weights),
            "intercept": _encode_array(np.array([model.intercept])),
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _require(doc: dict, key: str):
    if key not in doc:
        raise CheckpointError(f"checkpoint is missing required key {key!r}")
    return doc[key]


def load(path) -> Checkpoint:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CheckpointError("checkpoint root must be a JSON object")
    version = _require(doc, "version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version!r}")
    model_type = _require(doc, "model_type")
    if model_type not in MODEL_TYPES:
        raise CheckpointError(f"unknown model_type {model_type!r}")
    cfg = InputConfig(k=int(_require(doc, "input_config_k")))
    scalers = _scalers_from_block(_require(doc, "scalers"))
    params = _require(doc, "params")
    n = int(_require(doc, "n"))
    if n != cfg.window_dim:
        raise CheckpointError(
            f"stored input width {n} does not match k={cfg.k} (expects {cfg.window_dim})"
        )

    if model_type == "linear":
        weights = _decode_array(_require(params, "weights"), "weights")
        intercept = _decode_array(_require(params, "intercept"), "intercept")
        if weights.shape != (n,):
            raise CheckpointError(f"weights shape {weights.shape} does not match n={n}")
        model = LinearModel(
            weights=weights,
            intercept=float(intercept[0]),
            rank_deficient=bool(doc.get("rank_deficient", False)),
        )
        return Checkpoint(model_type="linear", input_config=cfg, scalers=scalers, linear=model)

    h = int(_require(doc, "hidden_size"))
    d = int(_require(doc, "dense_size"))
    expected = {
        "lstm_w_x": (4 * h, n),
        "lstm_u_h": (4 * h, h),
        "lstm_b": (4 * h,),
        "dense_w1": (d, h),
        "dense_b1": (d,),
        "dense_w2": (d,),
        "dense_b2": (1,),
    }
    arrays = {}
    for name, shape in expected.items():
        a = _decode_array(_require(params, name), name)
        if a.shape != shape:
            raise CheckpointError(f"array {name!r} has shape {a.shape}, expected {shape}")
        arrays[name] = a
    network = LstmNetwork(
        lstm=LstmParams(w_x=arrays["lstm_w_x"], u_h=arrays["lstm_u_h"], b=arrays["lstm_b"]),
        dense=DenseParams(
            w1=arrays["dense_w1"], b1=arrays["dense_b1"],
            w2=arrays["dense_w2"], b2=arrays["dense_b2"],
        ),
        n=n,
        hidden_size=h,
        dense_size=d,
    )
    seed = doc.get("rng_seed")
    return Checkpoint(
        model_type="lstm",
        input_config=cfg,
        scalers=scalers,
        network=network,
        rng_seed=None if seed is None else int(seed),
    )
