"""Curriculum-driven PIELM solver with Gaussian RBF feature layers.

Single-pass least-squares PDE solving: a fixed radial-basis input layer
turns PDE and boundary residuals into an overdetermined linear system in
the outer-layer weights, and nonlinear problems are handled by marching
through a curriculum of quasi-linear solves (time blocks for Burgers,
a Reynolds-number ladder for steady Navier-Stokes).
"""

from pielm.basis import FieldWeights, KernelSet, eval_features, predict_field
from pielm.geometry import (
    CavitySquare,
    PointCloud,
    Rectangle,
    ShockWindow,
    StenoticChannel,
    UnitDisk,
    detect_shock_window,
    place_centers,
)
from pielm.lsq import LsqReport, solve_least_squares

__all__ = [
    "CavitySquare",
    "FieldWeights",
    "KernelSet",
    "LsqReport",
    "PointCloud",
    "Rectangle",
    "ShockWindow",
    "StenoticChannel",
    "UnitDisk",
    "detect_shock_window",
    "eval_features",
    "place_centers",
    "predict_field",
    "solve_least_squares",
]

__version__ = "0.1.0"
