"""Named trainable parameters with group tags and freeze support."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, ValidationError
from .tensor import Tensor


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: tuple
    group: str = "head"
    init: str = "xavier"  # xavier | zeros | ones


class ParamStore:
    """name -> Tensor plus a group tag per parameter; groups can be frozen.

    Freezing a group clears requires_grad on its tensors so no gradient is
    ever recorded for them; the optimizer additionally skips them.
    """

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._groups: dict[str, str] = {}
        self._frozen: set[str] = set()

    def add(self, name: str, data: np.ndarray, group: str = "head") -> Tensor:
        if name in self._params:
            raise ValidationError(f"duplicate parameter name {name!r}")
        t = Tensor(np.array(data, dtype=np.float64), requires_grad=group not in self._frozen)
        self._params[name] = t
        self._groups[name] = group
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def group_of(self, name: str) -> str:
        return self._groups[name]

    def groups(self) -> set[str]:
        return set(self._groups.values())

    def freeze_group(self, group: str):
        self._frozen.add(group)
        for name, t in self._params.items():
            if self._groups[name] == group:
                t.requires_grad = False

    def is_frozen(self, name: str) -> bool:
        return self._groups[name] in self._frozen

    def frozen_groups(self) -> set[str]:
        return set(self._frozen)

    def trainable_items(self):
        return [(n, t) for n, t in self._params.items() if not self.is_frozen(n)]

    def zero_grad(self):
        for t in self._params.values():
            t.zero_grad()

    def copy_arrays(self) -> dict[str, np.ndarray]:
        return {n: t.data.copy() for n, t in self._params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]):
        for n, arr in arrays.items():
            if n not in self._params:
                raise ValidationError(f"unknown parameter {n!r} in state")
            if self._params[n].data.shape != arr.shape:
                raise ValidationError(f"shape mismatch for {n!r}")
            self._params[n].data = np.array(arr, dtype=np.float64)


def xavier_bound(shape: tuple) -> float:
    if len(shape) == 2:
        fan_out, fan_in = shape
    else:
        fan_out = fan_in = int(np.prod(shape))
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(specs, seed: int) -> ParamStore:
    """Build a ParamStore: xavier-uniform weights, zero biases, unit scales.

    Draw order follows the spec list, so a fixed seed gives bit-identical
    parameters on every call.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    store = ParamStore()
    for spec in specs:
        if spec.init == "xavier":
            bound = xavier_bound(tuple(spec.shape))
            data = rng.uniform(-bound, bound, size=spec.shape)
        elif spec.init == "zeros":
            data = np.zeros(spec.shape)
        elif spec.init == "ones":
            data = np.ones(spec.shape)
        else:
            raise ArgumentError(f"unknown init {spec.init!r}")
        store.add(spec.name, data, group=spec.group)
    return store
