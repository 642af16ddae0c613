"""Save/load for trained ensembles and fitted gates.

Uses numpy's npz container with a small versioned header so old files
fail loudly instead of deserialising into garbage.  All arrays round-trip
at full float64 precision, so reloaded models predict bit-identically.
"""

from __future__ import annotations

import numpy as np

from .outlier_gate import Gate
from .regress import Activation, ElmModel, EnsembleModel, TrimPolicy

ENSEMBLE_FORMAT = "outreg-ensemble"
GATE_FORMAT = "outreg-gate"
FORMAT_VERSION = 1


def _seed_text(seed) -> str:
    return "none" if seed is None else str(int(seed))


def _seed_value(text) -> int | None:
    value = str(text)
    return None if value == "none" else int(value)


def _check_header(data, path, expected_format):
    for key in ("format", "version"):
        if key not in data:
            raise ValueError(f"{path}: not a recognised model file (missing {key!r})")
    found = str(data["format"])
    if found != expected_format:
        raise ValueError(f"{path}: expected format {expected_format!r}, found {found!r}")
    version = int(data["version"])
    if version != FORMAT_VERSION:
        raise ValueError(
            f"{path}: unsupported format version {version} (supported: {FORMAT_VERSION})"
        )


def save_ensemble(path, ensemble: EnsembleModel) -> None:
    # seeds are arbitrary-precision non-negative ints (derived seeds use the
    # full 64-bit range), so they travel as decimal strings; "none" marks an
    # absent seed
    payload = {
        "format": ENSEMBLE_FORMAT,
        "version": FORMAT_VERSION,
        "activation": ensemble.activation.value,
        "trim_policy": ensemble.trim_policy.value,
        "member_count": len(ensemble.members),
        "seed": _seed_text(ensemble.seed),
        "member_seeds": np.asarray(
            [_seed_text(m.seed) for m in ensemble.members]
        ),
    }
    for i, m in enumerate(ensemble.members):
        payload[f"hidden_weights_{i}"] = m.hidden_weights
        payload[f"hidden_biases_{i}"] = m.hidden_biases
        payload[f"output_weights_{i}"] = m.output_weights
    np.savez(path, **payload)


def load_ensemble(path) -> EnsembleModel:
    with np.load(path, allow_pickle=False) as data:
        _check_header(data, path, ENSEMBLE_FORMAT)
        activation = Activation(str(data["activation"]))
        trim = TrimPolicy(str(data["trim_policy"]))
        count = int(data["member_count"])
        seeds = data["member_seeds"]
        members = tuple(
            ElmModel(
                hidden_weights=data[f"hidden_weights_{i}"],
                hidden_biases=data[f"hidden_biases_{i}"],
                output_weights=data[f"output_weights_{i}"],
                activation=activation,
                seed=_seed_value(seeds[i]),
            )
            for i in range(count)
        )
        top_seed = _seed_value(data["seed"])
    return EnsembleModel(members=members, trim_policy=trim, seed=top_seed)


def save_gate(path, gate: Gate) -> None:
    np.savez(
        path,
        format=GATE_FORMAT,
        version=FORMAT_VERSION,
        mean=gate.mean,
        covariance=gate.covariance,
        covariance_inverse_factor=gate.covariance_inverse_factor,
        threshold_distance=gate.threshold_distance,
        percentile_q=gate.percentile_q,
        center=gate.center,
        training_inputs=gate.training_inputs,
    )


def load_gate(path) -> Gate:
    with np.load(path, allow_pickle=False) as data:
        _check_header(data, path, GATE_FORMAT)
        return Gate(
            mean=data["mean"],
            covariance=data["covariance"],
            covariance_inverse_factor=data["covariance_inverse_factor"],
            threshold_distance=float(data["threshold_distance"]),
            percentile_q=float(data["percentile_q"]),
            center=data["center"],
            training_inputs=data["training_inputs"],
        )
