"""6-DOF simulator and teleoperation stack for a 12-arm flagellar underwater robot."""

__version__ = "0.1.0"
