"""Buoyancy trim: neutral ballast arithmetic and discrete weight selection."""

import itertools
from dataclasses import dataclass


@dataclass(frozen=True)
class WeightInventory:
    """Available trim weights as (mass_kg, count) entries."""

    items: tuple[tuple[float, int], ...]

    def __post_init__(self):
        total = 0
        for mass, count in self.items:
            if not mass > 0.0:
                raise ValueError("weight masses must be > 0")
            if count < 0:
                raise ValueError("counts must be >= 0")
            total += count
        if total > 64:
            raise ValueError("inventory limited to 64 pieces")


@dataclass(frozen=True)
class TrimSelection:
    """Chosen weight multiset (sorted ascending) and the residual error."""

    weights: tuple[float, ...]
    total_mass: float
    error: float
    inventory_exhausted: bool = False


def neutral_ballast_mass(fluid_density: float, displaced_volume: float, dry_mass: float) -> float:
    """Ballast needed for neutral buoyancy: rho*V - dry_mass (negative = too heavy)."""
    if not (fluid_density > 0 and displaced_volume > 0 and dry_mass > 0):
        raise ValueError("fluid_density, displaced_volume and dry_mass must be > 0")
    return fluid_density * displaced_volume - dry_mass


def trim_select(residual_mass: float, inv: WeightInventory) -> TrimSelection:
    """Weight subset minimizing |residual_mass - subset sum|.

    Ties break toward fewer pieces, then the lexicographically smallest sorted
    mass multiset.  Enumerates per-mass counts (distinct masses are few even
    when piece counts are not).
    """
    if residual_mass < 0.0:
        raise ValueError("residual_mass must be >= 0")
    masses = [m for m, _ in inv.items]
    ranges = [range(c + 1) for _, c in inv.items]
    if not any(c for _, c in inv.items):
        return TrimSelection(
            weights=(),
            total_mass=0.0,
            error=residual_mass,
            inventory_exhausted=residual_mass > 0.0,
        )
    best = None
    for counts in itertools.product(*ranges):
        total = sum(m * k for m, k in zip(masses, counts))
        pieces = sum(counts)
        multiset = tuple(
            sorted(m for m, k in zip(masses, counts) for _ in range(k))
        )
        key = (abs(residual_mass - total), pieces, multiset)
        if best is None or key < best[0]:
            best = (key, multiset, total)
    _, multiset, total = best
    return TrimSelection(weights=multiset, total_mass=total, error=abs(residual_mass - total))
