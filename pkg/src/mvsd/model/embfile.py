"""Binary embedding file: precomputed per-sample text/image features.

Layout (all integers little-endian uint32, floats little-endian float32):

    magic b"MVEB" | version | d
    per sample:
        id_len | id bytes (utf-8) | n | m
        token_reps  n*d floats
        text_cls    d floats
        patch_reps  m*d floats
        image_cls   d floats

A converter that dumps a real text/image encoder only has to emit token-level
hidden states plus the summary (CLS) vector for each modality in this layout;
see the README for the mapping contract.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError

MAGIC = b"MVEB"
VERSION = 1


@dataclass
class SampleEmbedding:
    token_reps: np.ndarray  # (n, d) float64
    text_cls: np.ndarray  # (d,)
    patch_reps: np.ndarray  # (m, d)
    image_cls: np.ndarray  # (d,)


def write_embeddings(path: str | Path, d: int, entries: dict[str, SampleEmbedding]):
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, d))
        for sample_id, emb in entries.items():
            n = emb.token_reps.shape[0]
            m = emb.patch_reps.shape[0]
            if emb.token_reps.shape != (n, d) or emb.patch_reps.shape != (m, d):
                raise ValidationError(f"embedding shapes inconsistent for {sample_id!r}")
            if emb.text_cls.shape != (d,) or emb.image_cls.shape != (d,):
                raise ValidationError(f"cls shapes inconsistent for {sample_id!r}")
            if m < 1:
                raise ValidationError(f"sample {sample_id!r} needs at least one patch")
            raw_id = sample_id.encode("utf-8")
            fh.write(struct.pack("<III", len(raw_id), n, m))
            fh.write(raw_id)
            for arr in (emb.token_reps, emb.text_cls, emb.patch_reps, emb.image_cls):
                fh.write(np.asarray(arr, dtype="<f4").tobytes())


def read_embeddings(path: str | Path) -> tuple[int, dict[str, SampleEmbedding]]:
    """Returns (d, {sample_id: SampleEmbedding}); floats widened to float64."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ParseError(f"{path}: not an embedding file (bad magic)")
    version, d = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise ParseError(f"{path}: unsupported version {version}")
    offset = 12
    entries: dict[str, SampleEmbedding] = {}

    def take_floats(count: int) -> np.ndarray:
        nonlocal offset
        end = offset + 4 * count
        if end > len(data):
            raise ParseError(f"{path}: truncated at byte {offset}")
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        offset = end
        return arr.astype(np.float64)

    while offset < len(data):
        if offset + 12 > len(data):
            raise ParseError(f"{path}: truncated header at byte {offset}")
        id_len, n, m = struct.unpack_from("<III", data, offset)
        offset += 12
        sample_id = data[offset:offset + id_len].decode("utf-8")
        offset += id_len
        if sample_id in entries:
            raise ValidationError(f"{path}: duplicate embedding id {sample_id!r}")
        entries[sample_id] = SampleEmbedding(
            token_reps=take_floats(n * d).reshape(n, d),
            text_cls=take_floats(d),
            patch_reps=take_floats(m * d).reshape(m, d),
            image_cls=take_floats(d),
        )
    return d, entries
