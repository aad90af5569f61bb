import numpy as np
import pytest

from flagellasim.actuation import MotorParams
from flagellasim.geometry import FrameParams, dodecahedron_mounts
from flagellasim.hydro import HelixParams, ResistiveHelix


@pytest.fixture(scope="session")
def frame():
    return FrameParams()


@pytest.fixture(scope="session")
def mounts(frame):
    return dodecahedron_mounts(frame)


@pytest.fixture(scope="session")
def helix():
    # the worked example parameters; defaults in the shipped config differ
    return HelixParams(
        radius=0.02,
        pitch_angle=0.6,
        contour_length=0.15,
        drag_normal=1.0,
        drag_tangential=0.5,
    )


@pytest.fixture(scope="session")
def model(helix):
    return ResistiveHelix(helix)


@pytest.fixture(scope="session")
def motor():
    return MotorParams()


@pytest.fixture(scope="session")
def rest():
    return (np.zeros(3), np.zeros(3))
