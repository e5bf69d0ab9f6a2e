"""Numerical tolerances used as defaults throughout the package."""
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    #: equality of reals (dedup, membership at lattice points)
    equality: float = 1e-9
    #: minimal gap for a patch to count as uniformly discrete
    discreteness: float = 1e-6
    #: unit-circle check for character values
    unit_circle: float = 1e-12
    #: homomorphism check for characters
    homomorphism: float = 1e-10

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT = Tolerances()

#: chunk size (number of float64 entries) for vectorised pair / frequency scans
CHUNK_ENTRIES = 2_000_000
