"""Central-difference verification of reverse-mode gradients."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError
from .params import ParamStore

REL_ERR_FLOOR = 1e-8


@dataclass
class GradCheckReport:
    tol: float
    step: float
    per_param: dict[str, float] = field(default_factory=dict)
    entries_checked: dict[str, int] = field(default_factory=dict)
    passed: bool = True

    @property
    def max_rel_error(self) -> float:
        return max(self.per_param.values()) if self.per_param else 0.0

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "step": self.step,
            "max_rel_error": self.max_rel_error,
            "passed": self.passed,
            "per_param": self.per_param,
            "entries_checked": self.entries_checked,
        }


def gradient_check(
    forward,
    store: ParamStore,
    tol: float = 1e-4,
    step: float = 1e-5,
    max_entries: int = 64,
    seed: int = 0,
    skip=(),
) -> GradCheckReport:
    """Compare analytic gradients of `forward()` (scalar Tensor) against
    central differences on every trainable parameter.

    Parameters larger than `max_entries` are spot-checked on a seeded random
    subset of entries. Relative error uses an absolute floor so near-zero
    gradient pairs do not blow up the ratio. `skip` names parameters to leave
    out entirely; use it for parameters whose true gradient is identically
    zero (central differences on those measure rounding noise, not gradients).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    skip = set(skip)
    store.zero_grad()
    loss = forward()
    if not np.isfinite(loss.data):
        raise NumericError("gradient check: loss is not finite")
    loss.backward()
    analytic = {name: t.grad.copy() for name, t in store.trainable_items()}

    report = GradCheckReport(tol=tol, step=step)
    for name, t in store.trainable_items():
        if name in skip:
            continue
        flat = t.data.reshape(-1)
        n = flat.size
        if n > max_entries:
            idxs = np.sort(rng.choice(n, size=max_entries, replace=False))
        else:
            idxs = np.arange(n)
        worst = 0.0
        ga_flat = analytic[name].reshape(-1)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + step
            f_plus = forward().data
            flat[i] = orig - step
            f_minus = forward().data
            flat[i] = orig
            g_num = (f_plus - f_minus) / (2.0 * step)
            g_ana = ga_flat[i]
            denom = max(abs(g_ana), abs(g_num), REL_ERR_FLOOR)
            worst = max(worst, abs(g_ana - g_num) / denom)
        report.per_param[name] = float(worst)
        report.entries_checked[name] = int(len(idxs))
        if worst >= tol:
            report.passed = False
    return report
