"""distillab: a desk-scale laboratory for feature-distillation recipes.

Verifies the projector + normalization + soft-maximum pipeline and its
supporting theory: projector weight dynamics, singular-value evolution,
feature decorrelation, the low-rank subspace loss, and a translational
equivariance measure. Everything runs in float64 on seeded synthetic
data so every gradient and every qualitative mechanism is checkable at
a desk.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    dynamics,
    equivariance,
    errors,
    gradcheck,
    kdcore,
    linalg,
    matrixio,
    trainlab,
)
