"""Finite-volume simulation of reaction-diffusion systems across a
permeable membrane, with numerical checks of the associated a priori
estimates."""
from .elliptic import (MembraneOperator, assemble, bilinear_form, dual_norm, poincare_constant,
                       solve_poisson)
from .errors import (ConfigError, DimensionError, InsufficientDataError, InvalidDataError,
                     InvalidGeometryError, InvalidParameterError, KKMembraneError,
                     NoConvergenceError, OpenProblemError, PositivityError)
from .mesh import MembraneMesh, build_interval_mesh, build_rect_mesh, membrane_traces
from .parabolic import (MeshSpec, MonitorSpec, SimConfig, SimState, SpeciesSpec, Trajectory,
                        simulate, steady_state, step_imex)
from .reactions import (ReactionSystem, RegularizedReaction, builtin_annihilation,
                        builtin_transport_demo, check_hypotheses, make_truncation, regularize)

__version__ = "0.1.0"
