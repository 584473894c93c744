"""Brownian trajectories as IFSM fixed points.

Generators (Euler, Kac-Siegert), the collage inverse problem on wavelet-type
maps, a constrained QP solver, and the pipeline that turns a simulated base
path into a self-affine fractal trajectory.
"""

from ifsm._core import *  # noqa: F401,F403
from ifsm._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
