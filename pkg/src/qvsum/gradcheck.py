"""Finite-difference verification of autodiff gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .tensor import Tensor

FD_STEP = 1e-5


@dataclass
class GradCheckReport:
    max_rel_error: Dict[str, float]
    tolerance: float

    @property
    def worst(self) -> float:
        return max(self.max_rel_error.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def grad_check(
    f: Callable[[Dict[str, Tensor]], Tensor],
    params: Dict[str, Tensor],
    tolerance: float = 1e-4,
    step: float = FD_STEP,
) -> GradCheckReport:
    """Compare analytic gradients of scalar f against central differences.

    Relative error per scalar is |a - n| / max(|a|, |n|, 1e-8); the report
    carries the per-parameter maximum.
    """
    for p in params.values():
        p.zero_grad()
    loss = f(params)
    loss.backward()
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.array))
        for name, p in params.items()
    }

    errors: Dict[str, float] = {}
    for name, p in params.items():
        flat = p.array.ravel()
        num = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            hi = f(params).item()
            flat[i] = orig - step
            lo = f(params).item()
            flat[i] = orig
            num[i] = (hi - lo) / (2.0 * step)
        a = analytic[name].ravel()
        denom = np.maximum(np.maximum(np.abs(a), np.abs(num)), 1e-8)
        errors[name] = float(np.max(np.abs(a - num) / denom))
    return GradCheckReport(max_rel_error=errors, tolerance=tolerance)
