"""Translational-equivariance measure for token maps.

mu_T(phi, x, T) compares translate-then-apply against apply-then-translate:
strip the prefix tokens, roll to the patch grid, translate, unroll, re-attach
the prefix, run phi on both the translated and the original sequence, then
translate phi(x)'s spatial tokens the same way. The result is the mean
squared error between the two spatial slabs; prefix tokens are excluded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .tokens import TokenBatch, Translation, translate_tokens


def mu_T(phi, x: TokenBatch, t: Translation) -> float:
    tx = translate_tokens(x, t)
    f_tx = phi(tx)
    f_x = phi(x)
    t_fx = translate_tokens(f_x, t)
    diff = t_fx.spatial() - f_tx.spatial()
    return float(np.mean(diff * diff))


def unit_circular_shifts() -> list[Translation]:
    """All eight one-patch circular shifts."""
    return [
        Translation(dy, dx)
        for dy in (-1, 0, 1)
        for dx in (-1, 0, 1)
        if (dy, dx) != (0, 0)
    ]


@dataclass(frozen=True)
class SuiteReport:
    phi_id: str
    translations: tuple
    mean: float
    std: float
    n: int

    def to_json_dict(self) -> dict:
        return {
            "phi_id": self.phi_id,
            "translations": [
                {"dy": t.dy, "dx": t.dx, "mode": t.mode} for t in self.translations
            ],
            "mean": self.mean,
            "std": self.std,
            "n": self.n,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def mu_T_suite(phi, batches, translations) -> SuiteReport:
    """Mean and population std of mu_T over every (batch, translation) pair."""
    batches = list(batches)
    translations = list(translations)
    if not batches or not translations:
        raise InputError("mu_T_suite needs at least one batch and one translation")
    values = [mu_T(phi, x, t) for x in batches for t in translations]
    arr = np.asarray(values)
    name = getattr(phi, "name", phi.__class__.__name__)
    return SuiteReport(
        name, tuple(translations), float(arr.mean()), float(arr.std()), arr.size
    )
