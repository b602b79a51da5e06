"""Simulation and PDE toolkit for diffusions with small pockets of large diffusivity.

Submodules:

* ``geometry``: periodic unit torus, pocket shapes, regions, projections.
* ``diffusivity``: the pocket coefficient field and the shell barrier.
* ``sde_sim``: adaptive Euler simulation of the diffusion, Monte Carlo stats.
* ``limit_walk``: the small-noise limit process (Brownian motion with
  deterministic holds at pocket boundaries).
* ``elliptic``: finite-difference boundary value problems on the same domain.
* ``lab_cli``: the ``lab`` command line driver for the packaged experiments.

The compiled kernels live in ``_engine`` and are shared by ``sde_sim`` and
``limit_walk``; importing them pulls in numba, so the heavy submodules are
not imported here.
"""

from . import errors, geometry, diffusivity
from .errors import PocketLabError
from .geometry import Disk, Geometry, Interval, Pocket, RegionKind, RegionTag
from .diffusivity import BarrierParams, DiffusivityField

__all__ = [
    "errors",
    "geometry",
    "diffusivity",
    "PocketLabError",
    "Disk",
    "Geometry",
    "Interval",
    "Pocket",
    "RegionKind",
    "RegionTag",
    "BarrierParams",
    "DiffusivityField",
]

__version__ = "0.1.0"
