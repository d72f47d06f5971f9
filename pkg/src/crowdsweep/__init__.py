"""Particle-based solver for crowds in moving prox-regular viability regions."""

__version__ = "0.1.0"

from . import errors
from .estimator import ParticleSweeper
from .fields import (CongestionField, ConstantDrift, DriftField, ExitParabolaDrift,
                     MorseField, probe_constants)
from .geometry import (Ball, BallComplement, Box, EllipseComplement, HalfSpace,
                       IntersectionSet, MovingSet, WallWithExit, Workspace,
                       composite_moving_set, hausdorff, moving_ellipse_complement,
                       static_set, translating_halfspace)
from .scenarios import (Scenario, braess_scenario, braess_suite, halfspace_sweep_scenario,
                        mass_in_region, optimize_obstacle, run_scenario, sample_initial,
                        swarm_crossing_scenario)
from .scenario_io import load_scenario, parse_scenario, serialize_scenario
from .sweeper import (Trajectory, noflux_residual, normal_cone_residual, run,
                      stability_gap, transport_substep)
from .transport import (Assignment, ParticleCloud, geodesic, project_measure, w2,
                        w2_derivative_check, w2_distance)

__all__ = [
    "ParticleSweeper", "ParticleCloud", "Assignment", "Trajectory", "Scenario",
    "MorseField", "CongestionField", "DriftField", "ConstantDrift", "ExitParabolaDrift",
    "HalfSpace", "Ball", "BallComplement", "Box", "EllipseComplement", "WallWithExit",
    "IntersectionSet", "MovingSet", "Workspace",
    "w2", "w2_distance", "geodesic", "project_measure", "w2_derivative_check",
    "run", "transport_substep", "normal_cone_residual", "noflux_residual",
    "stability_gap", "hausdorff", "static_set", "translating_halfspace",
    "moving_ellipse_complement", "composite_moving_set", "probe_constants",
    "sample_initial", "mass_in_region", "braess_scenario", "braess_suite",
    "swarm_crossing_scenario", "halfspace_sweep_scenario", "run_scenario",
    "optimize_obstacle", "load_scenario", "parse_scenario", "serialize_scenario",
    "errors",
]
