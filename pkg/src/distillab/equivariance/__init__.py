"""Translational-equivariance measurement for token-sequence maps."""

from .maps import (
    CircularConvMixer,
    IdentityMap,
    SelfAttentionMap,
    TokenMap,
    TokenwiseMlp,
)
from .measure import SuiteReport, mu_T, mu_T_suite, unit_circular_shifts
from .tokens import (
    TRANSLATION_MODES,
    TokenBatch,
    Translation,
    load_token_batch,
    roll_to_grid,
    save_token_batch,
    translate_grid,
    translate_tokens,
    unroll_grid,
)

__all__ = [
    "TRANSLATION_MODES",
    "CircularConvMixer",
    "IdentityMap",
    "SelfAttentionMap",
    "SuiteReport",
    "TokenBatch",
    "TokenMap",
    "TokenwiseMlp",
    "Translation",
    "load_token_batch",
    "mu_T",
    "mu_T_suite",
    "roll_to_grid",
    "save_token_batch",
    "translate_grid",
    "translate_tokens",
    "unit_circular_shifts",
    "unroll_grid",
]
