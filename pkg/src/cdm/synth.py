"""Synthetic heterogeneous two-domain benchmark.

Class prototypes are vertices of a regular simplex (unit circumradius) in
the first ``c - 1`` axes of a ground-truth latent space of dimension
``latent_dim``. Every instance is ``prototype + noise * N(0, I)`` pushed
through a domain-specific random linear map: ``A`` (``m x latent_dim``) for
LTM and ``B`` (``n x latent_dim``) for SM. Each map scales latent axis ``i``
by a gain rising log-linearly from 1 (class axes) to ``condition`` (the
last, class-free axes) and then mixes the result into its own random
orthonormal feature basis. Raw Euclidean geometry in either domain is thus
dominated by class-irrelevant variation, and the domains share no features.
"""

from dataclasses import dataclass

import numpy as np

from cdm.dataset import LabeledDataset
from cdm.discriminant import simplex_vertices


@dataclass(frozen=True)
class SynthParams:
    n_classes: int = 3
    latent_dim: int = 5
    ltm_dim: int = 40
    sm_dim: int = 25
    ltm_per_class: int = 50
    sm_per_class: int = 3
    test_per_class: int = 100
    noise: float = 0.1
    condition: float = 30.0
    seed: int = 0

    def __post_init__(self):
        c = self.n_classes
        if c < 2:
            raise ValueError("need at least two classes")
        if self.latent_dim < c - 1:
            raise ValueError(f"latent_dim must be >= c-1 = {c - 1}")
        if self.ltm_dim < self.latent_dim or self.sm_dim < self.latent_dim:
            raise ValueError("domain dimensions must be >= latent_dim for full-rank maps")
        if self.ltm_per_class < 1 or self.sm_per_class < 1 or self.test_per_class < 0:
            raise ValueError("per-class counts must be positive")
        if self.noise < 0 or self.condition < 1:
            raise ValueError("noise must be >= 0 and condition >= 1")


def random_map(rng, rows, cols, condition):
    """``rows x cols`` map with orthonormal random columns scaled by rising gains."""
    U, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
    return U * np.geomspace(1.0, condition, cols)


def _draw(rng, prototypes, per_class, noise, M):
    c, d = prototypes.shape
    labels = np.repeat(np.arange(c), per_class)
    Z = prototypes[labels] + noise * rng.standard_normal((labels.size, d))
    return Z @ M.T, labels


def generate(params: SynthParams = SynthParams()):
    """Return ``(ltm, sm)`` datasets; SM holds ``sm_per_class + test_per_class`` rows per class."""
    p = params
    rng = np.random.default_rng(p.seed)
    prototypes = simplex_vertices(p.n_classes, p.latent_dim)
    A = random_map(rng, p.ltm_dim, p.latent_dim, p.condition)
    B = random_map(rng, p.sm_dim, p.latent_dim, p.condition)
    X, lx = _draw(rng, prototypes, p.ltm_per_class, p.noise, A)
    Y, ly = _draw(rng, prototypes, p.sm_per_class + p.test_per_class, p.noise, B)
    classes = tuple(range(p.n_classes))
    return LabeledDataset(X, lx, classes, "ltm"), LabeledDataset(Y, ly, classes, "sm")
