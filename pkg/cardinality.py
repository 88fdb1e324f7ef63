"""
Truncated cardinality distributions
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from exceptions import DataError, NumericalError

SUM_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class CardinalityDistribution:
    """Probability vector over object counts n = 0..N_card_max, renormalized on construction"""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.size < 1:
            raise DataError("Cardinality distribution needs at least one entry")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise DataError("Cardinality probabilities must be finite and non-negative")

        total = probs.sum()
        if total <= 0:
            raise NumericalError("Cardinality distribution has no mass")
        probs = probs / total
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, n: int, n_max: int) -> "CardinalityDistribution":
        if not 0 <= n <= n_max:
            raise DataError(f"Point mass at {n} lies outside the support 0..{n_max}")
        probs = np.zeros(n_max + 1)
        probs[n] = 1.0
        return cls(probs)

    @classmethod
    def poisson(cls, rate: float, n_max: int) -> "CardinalityDistribution":
        """Poisson(rate) truncated at n_max and renormalized."""
        if rate < 0:
            raise DataError("Poisson rate cannot be negative")
        return cls(poisson.pmf(np.arange(n_max + 1), rate))

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    @property
    def map_estimate(self) -> int:
        """Most probable count; ties resolve to the smaller n."""
        return int(np.argmax(self.probs))

    def resized(self, n_max: int) -> "CardinalityDistribution":
        """Pad with zeros or truncate to the support 0..n_max, then renormalize."""
        if n_max == self.n_max:
            return self
        probs = np.zeros(n_max + 1)
        keep = min(n_max, self.n_max) + 1
        probs[:keep] = self.probs[:keep]
        return CardinalityDistribution(probs)

    def __getitem__(self, n: int) -> float:
        return float(self.probs[n])

    def __len__(self) -> int:
        return self.probs.size
