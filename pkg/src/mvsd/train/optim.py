"""AdamW with two learning-rate groups (backbone vs head).

Weight decay is decoupled: it scales the parameter directly instead of being
folded into the gradient, so the adaptive moments only ever see the loss
gradient. Frozen parameters are skipped entirely and keep no moment state.
"""
from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, NumericError


class AdamW:
    def __init__(
        self,
        store,
        lr_head: float = 5e-4,
        lr_backbone: float = 1e-6,
        weight_decay: float = 0.0,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if lr_head <= 0 or lr_backbone <= 0:
            raise ArgumentError("learning rates must be positive")
        if weight_decay < 0:
            raise ArgumentError("weight decay must be nonnegative")
        self.store = store
        self.lr_head = float(lr_head)
        self.lr_backbone = float(lr_backbone)
        self.weight_decay = float(weight_decay)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self._m = {}
        self._v = {}

    def lr_for(self, name: str) -> float:
        group = self.store.group_of(name)
        return self.lr_backbone if group.endswith("backbone") else self.lr_head

    def step(self):
        """One update over every trainable parameter; zero-grad params decay moments."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, tensor in self.store.trainable_items():
            g = tensor.grad
            if g is None:
                g = np.zeros_like(tensor.data)
            if not np.all(np.isfinite(g)):
                raise NumericError(f"non-finite gradient in parameter {name!r}")
            m = self._m.get(name)
            v = self._v.get(name)
            if m is None:
                m = np.zeros_like(tensor.data)
                v = np.zeros_like(tensor.data)
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * (g * g)
            self._m[name] = m
            self._v[name] = v
            lr = self.lr_for(name)
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            tensor.data = tensor.data - lr * update - lr * self.weight_decay * tensor.data
