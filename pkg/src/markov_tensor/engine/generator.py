"""
Test tensors: the two DNA-sequence fixtures and seeded random positive tensors.

Random draws use NumPy's PCG64 generator (``numpy.random.default_rng``) so a
seed reproduces the same tensor or vector on every platform.
"""
from __future__ import annotations
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .types import TransitionTensor, SimplexVector
from .tensor_core import validate
from .errors import InfeasibleDelta

FIXTURE_TOLERANCE = 1e-3

# Slices P(:, :, k) for k = 1, 2, 3; row i, column j holds p_ijk.
DNA_I_SLICES = (
    ((0.6000, 0.4083, 0.4935),
     (0.2000, 0.2568, 0.2426),
     (0.2000, 0.3349, 0.2639)),
    ((0.5217, 0.3300, 0.4152),
     (0.2232, 0.2800, 0.2658),
     (0.2551, 0.3900, 0.3190)),
    ((0.5565, 0.3648, 0.4500),
     (0.2174, 0.2742, 0.2600),
     (0.2261, 0.3610, 0.2900)),
)

DNA_II_SLICES = (
    ((0.5200, 0.2986, 0.4462),
     (0.2700, 0.3930, 0.3192),
     (0.2100, 0.3084, 0.2346)),
    ((0.6514, 0.4300, 0.5776),
     (0.1970, 0.3200, 0.2462),
     (0.1516, 0.2500, 0.1762)),
    ((0.5638, 0.3424, 0.4900),
     (0.2408, 0.3638, 0.2900),
     (0.1954, 0.2938, 0.2200)),
)

FIXTURES = {
    "dna_i": DNA_I_SLICES,
    "dna_ii": DNA_II_SLICES,
}

FIXTURE_SOURCE = "DNA sequence transition tensors, 4-decimal transcription"


def entries_from_slices(slices) -> np.ndarray:
    """Stack P(:, :, k) matrices into entries[i, j, k]."""
    return np.stack([np.asarray(s, dtype=float) for s in slices], axis=2)


def fixture(name: str) -> TransitionTensor:
    """Return one of the embedded 3x3x3 fixtures ('dna_i' or 'dna_ii')."""
    try:
        slices = FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}") from None
    return validate(entries_from_slices(slices), tol=FIXTURE_TOLERANCE)


def fixture_path(name: str) -> Path:
    """Path of the fixture shipped as a tensor file inside the package."""
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return Path(str(resources.files("markov_tensor") / "data" / f"{name}.json"))


@dataclass(frozen=True)
class RandomTensorSpec:
    """Recipe parameters; delta defaults to 13/(20n), which gives n*delta = 0.65."""
    n: int
    delta: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.delta is None:
            object.__setattr__(self, "delta", 13.0 / (20.0 * self.n))
        if not 0.0 < self.delta < 1.0 / self.n:
            raise InfeasibleDelta(self.n, self.delta)


def _open_unit_draws(rng: np.random.Generator, shape) -> np.ndarray:
    u = rng.random(shape)
    zeros = u == 0.0
    while zeros.any():
        u[zeros] = rng.random(int(zeros.sum()))
        zeros = u == 0.0
    return u


def random_positive(spec: RandomTensorSpec) -> TransitionTensor:
    """
    Random tensor with every entry at least spec.delta.

    Draw entries uniformly on (0, 1), normalize each fiber, add
    delta/(1 - n*delta) to every entry, normalize each fiber again. The second
    normalization multiplies by (1 - n*delta), so every entry ends >= delta.
    """
    n, delta = spec.n, spec.delta
    rng = np.random.default_rng(spec.seed)
    p = _open_unit_draws(rng, (n, n, n))
    p /= p.sum(axis=0, keepdims=True)
    p += delta / (1.0 - n * delta)
    p /= p.sum(axis=0, keepdims=True)
    return validate(p)


def random_simplex(n: int, seed) -> SimplexVector:
    """Dirichlet(1, ..., 1) point built from normalized exponential spacings."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    return SimplexVector.normalized(rng.standard_exponential(n))
