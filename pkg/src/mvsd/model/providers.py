"""Embedding providers: precomputed-file lookup or a deterministic toy encoder.

Both produce token/patch sequences plus a CLS summary vector per modality.
The toy encoder exists so the full pipeline can run end to end without real
images: token vectors come from a hash-bucketed table, image patches from a
fixed seeded expansion of the image_ref string through a trainable projection.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..corpus import Sample
from ..errors import ValidationError
from ..numeric import ParamStore, Tensor, matmul, mean
from .embfile import read_embeddings

TEXT_BACKBONE = "text_backbone"
VISUAL_BACKBONE = "visual_backbone"


@dataclass
class TextEncoding:
    token_reps: Tensor  # (n, d)
    cls: Tensor  # (d,)
    n: int


@dataclass
class ImageEncoding:
    cls: Tensor  # (d,)
    patch_reps: Tensor  # (m, d)
    m: int


def stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


class FileProvider:
    """Serves precomputed embeddings; nothing here is trainable."""

    def __init__(self, path):
        self.d, self._entries = read_embeddings(path)
        self.trainable = False

    def register_params(self, store: ParamStore):
        pass

    def encode(self, sample: Sample, store: ParamStore | None = None):
        entry = self._entries.get(sample.id)
        if entry is None:
            raise ValidationError(f"no embedding for sample {sample.id!r}")
        text = TextEncoding(
            token_reps=Tensor(entry.token_reps),
            cls=Tensor(entry.text_cls),
            n=entry.token_reps.shape[0],
        )
        image = ImageEncoding(
            cls=Tensor(entry.image_cls),
            patch_reps=Tensor(entry.patch_reps),
            m=entry.patch_reps.shape[0],
        )
        return text, image


class ToyProvider:
    """Deterministic stand-in for a real text/image encoder.

    Token vectors are rows of a (vocab, d) table indexed by a stable hash of
    the token string; t_cls is their mean. Image patches are fixed seeded
    vectors derived from the image_ref, pushed through a (d, d) projection so
    the visual side has trainable backbone parameters too. Initial arrays
    live on the provider; each model gets its own copy via register_params.
    """

    def __init__(self, d: int = 16, m: int = 4, vocab: int = 256, seed: int = 0):
        self.d = d
        self.m = m
        self.vocab = vocab
        self.seed = seed
        self.trainable = True
        rng = np.random.Generator(np.random.PCG64(seed))
        # ~unit-norm rows so downstream logits start at a usable scale
        self._token_table_init = rng.normal(0.0, 1.0 / np.sqrt(d), size=(vocab, d))
        self._patch_cache: dict[str, np.ndarray] = {}

    def register_params(self, store: ParamStore):
        store.add("backbone.token_table", self._token_table_init, group=TEXT_BACKBONE)
        store.add("backbone.image_proj", np.eye(self.d), group=VISUAL_BACKBONE)

    def _raw_patches(self, image_ref: str) -> np.ndarray:
        cached = self._patch_cache.get(image_ref)
        if cached is None:
            digest = hashlib.blake2b(
                f"{self.seed}:{image_ref}".encode("utf-8"), digest_size=8
            ).digest()
            rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
            cached = rng.normal(0.0, 1.0 / np.sqrt(self.d), size=(self.m, self.d))
            self._patch_cache[image_ref] = cached
        return cached

    def encode(self, sample: Sample, store: ParamStore):
        table = store["backbone.token_table"]
        proj = store["backbone.image_proj"]
        n = len(sample.tokens)
        if n > 0:
            buckets = np.array([stable_hash(tok) % self.vocab for tok in sample.tokens])
            token_reps = table[buckets]
            t_cls = mean(token_reps, axis=0)
        else:
            token_reps = Tensor(np.zeros((0, self.d)))
            t_cls = Tensor(np.zeros(self.d))
        patch_reps = matmul(Tensor(self._raw_patches(sample.image_ref)), proj)
        v_cls = mean(patch_reps, axis=0)
        return (
            TextEncoding(token_reps=token_reps, cls=t_cls, n=n),
            ImageEncoding(cls=v_cls, patch_reps=patch_reps, m=self.m),
        )
