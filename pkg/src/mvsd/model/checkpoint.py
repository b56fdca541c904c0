"""Checkpoint files: one JSON header line, then raw little-endian float64.

The header records the model config, the ordered parameter manifest
(name, shape, group), frozen groups, and an arbitrary extra dict (epoch,
metrics). Parameter payloads follow in manifest order with no padding, so
a round trip restores every array bit for bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ParseError, ValidationError

FORMAT_NAME = "mvsd-checkpoint"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: dict
    arrays: dict  # name -> float64 ndarray
    groups: dict  # name -> group
    frozen_groups: list
    extra: dict


def save_checkpoint(path, store, config, extra=None):
    """Write the store's current arrays plus config/extra metadata."""
    manifest = [
        {"name": name, "shape": list(t.data.shape), "group": store.group_of(name)}
        for name, t in store.items()
    ]
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": config.to_dict() if hasattr(config, "to_dict") else dict(config),
        "params": manifest,
        "frozen_groups": sorted(store.frozen_groups()),
        "extra": extra or {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for name, t in store.items():
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        if not header_line.endswith(b"\n"):
            raise ParseError("checkpoint header line is truncated")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"checkpoint header is not valid JSON: {exc}") from exc
        if header.get("format") != FORMAT_NAME:
            raise ParseError("not a recognized checkpoint file")
        if header.get("version") != FORMAT_VERSION:
            raise ParseError(f"unsupported checkpoint version {header.get('version')!r}")
        arrays = {}
        groups = {}
        for entry in header["params"]:
            name = entry["name"]
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ParseError(f"checkpoint payload truncated at parameter {name!r}")
            arrays[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
            groups[name] = entry.get("group", "head")
        trailing = fh.read(1)
        if trailing:
            raise ParseError("checkpoint has trailing bytes after last parameter")
    return Checkpoint(
        config=header["config"],
        arrays=arrays,
        groups=groups,
        frozen_groups=list(header.get("frozen_groups", [])),
        extra=header.get("extra", {}),
    )


def model_from_checkpoint(path, provider=None, embeddings_path=None):
    """Rebuild a FusionModel from a checkpoint file.

    The toy provider is reconstructed from the recorded config. A file
    provider cannot be reconstructed from the checkpoint alone, so either a
    ready provider or the embeddings path must be supplied.
    """
    from .fusion import FusionModel, ModelConfig
    from .providers import FileProvider, ToyProvider

    ckpt = load_checkpoint(path)
    cfg = ModelConfig(**ckpt.config)
    if provider is None:
        if cfg.provider == "toy":
            provider = ToyProvider(
                d=cfg.d, m=cfg.patches, vocab=cfg.vocab, seed=cfg.provider_seed
            )
        elif cfg.provider == "file":
            if embeddings_path is None:
                raise ConfigurationError(
                    "checkpoint uses a file provider; pass the embeddings path"
                )
            provider = FileProvider(embeddings_path)
        else:
            raise ConfigurationError(f"unknown provider kind {cfg.provider!r}")
    model = FusionModel(provider, cfg)
    expected = {name for name, _ in model.store.items()}
    missing = expected - set(ckpt.arrays)
    surplus = set(ckpt.arrays) - expected
    if missing or surplus:
        raise ValidationError(
            f"checkpoint parameters do not match model: missing {sorted(missing)[:5]}, "
            f"surplus {sorted(surplus)[:5]}"
        )
    model.store.load_arrays(ckpt.arrays)
    for group in ckpt.frozen_groups:
        model.store.freeze_group(group)
    return model
