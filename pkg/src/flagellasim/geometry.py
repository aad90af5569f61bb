"""Dodecahedral arm-mount geometry: 12 face-normal mounts in 6 antipodal pairs."""

from dataclasses import dataclass

import numpy as np

PHI = (1.0 + np.sqrt(5.0)) / 2.0

# Pairs whose axes have zero body-x component carry crossed wiring and act as
# reaction-torque pairs; the rest are thrust pairs (see chirality/spin notes in
# hydro.py).  Pair ids follow the canonical (z, y, x)-descending axis ordering.
TORQUE_PAIR_IDS = (0, 1)


@dataclass(frozen=True)
class FrameParams:
    """Hull frame dimensions.

    frame_radius: center-to-face-center distance (m).
    arm_root_offset: mount offset beyond the face along the outward normal (m).
    """

    frame_radius: float = 0.15
    arm_root_offset: float = 0.02

    def __post_init__(self):
        if not self.frame_radius > 0.0:
            raise ValueError("frame_radius must be > 0")
        if not self.arm_root_offset > 0.0:
            raise ValueError("arm_root_offset must be > 0")


@dataclass(frozen=True)
class ArmMount:
    """Placement and sign conventions of one flagellar arm.

    axis is the outward face normal (unit). handedness = chirality * spin_sign is
    the thrust sign relating commanded shaft speed to axial force; spin_sign is the
    wiring polarity (physical rotation about `axis` per unit commanded speed) and
    chirality the intrinsic helix handedness.
    """

    index: int
    pair_id: int
    mount_point: np.ndarray
    axis: np.ndarray
    handedness: int
    spin_sign: int

    @property
    def chirality(self) -> int:
        return self.handedness * self.spin_sign


def _face_normals() -> np.ndarray:
    """The 12 unit face normals of a regular dodecahedron.

    Normalized cyclic permutations of (0, +/-1, +/-phi), ordered by
    (z, y, x) descending with each antipode at index + 6.
    """
    base = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            base.append((0.0, s1, s2 * PHI))
            base.append((s2 * PHI, 0.0, s1))
            base.append((s1, s2 * PHI, 0.0))
    normals = np.array(base) / np.sqrt(1.0 + PHI**2)
    order = np.lexsort((-normals[:, 0], -normals[:, 1], -normals[:, 2]))
    normals = normals[order]
    top = normals[:6]
    # antipode of arm i gets index i + 6
    bottom = np.array([-a for a in top])
    return np.vstack([top, bottom])


def dodecahedron_mounts(frame: FrameParams = FrameParams()) -> list[ArmMount]:
    """Build the 12 arm mounts.

    Arms 0..5 are the canonical pair representatives (positive z, ties broken by
    y then x); arm i+6 is the antipode of arm i and shares pair_id = i.

    Sign conventions: thrust pairs get (handedness, spin) = (+1, +1) on the
    canonical arm and (-1, +1) on the antipode (opposite chirality, straight
    wiring: counter-rotating, torques cancel).  Torque pairs get (+1, +1) and
    (+1, -1) (crossed wiring: co-rotating, thrusts cancel, reaction torques add).
    """
    normals = _face_normals()
    r = frame.frame_radius + frame.arm_root_offset
    mounts = []
    for i in range(12):
        pair = i % 6
        canonical = i < 6
        if pair in TORQUE_PAIR_IDS:
            hand, spin = (1, 1) if canonical else (1, -1)
        else:
            hand, spin = (1, 1) if canonical else (-1, 1)
        axis = normals[i]
        mounts.append(
            ArmMount(
                index=i,
                pair_id=pair,
                mount_point=r * axis,
                axis=axis,
                handedness=hand,
                spin_sign=spin,
            )
        )
    return mounts


def pair_of(index: int) -> int:
    """Pair id of arm `index` under the index+6 antipode convention."""
    if not 0 <= index <= 11:
        raise ValueError(f"arm index {index} out of range 0..11")
    return index % 6
