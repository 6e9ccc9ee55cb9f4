"""Friction-aware energy maps, caging scores and manipulation metrics for
two-phalanx underactuated graspers."""
__version__ = "0.1.0"

from .caging import CagingScore, Trajectory, caging_score, classify_endpoint, follow_gradient  # noqa: E402
from .contact_solver import ActuationCommand, FingerSolution, finger_configuration  # noqa: E402
from .energy_map import EnergyMap, GridSpec, build_energy_map  # noqa: E402
from .estimator import GraspEnergyMap  # noqa: E402
from .kinematics import FingerConfig, GrasperDesign, ObjectSpec  # noqa: E402
from .manipulation import GrasperFamily, inscribed_radius, manipulation_metric  # noqa: E402
from .sweep import SweepConfig, SweepResult, run_sweep  # noqa: E402

__all__ = [
    "ActuationCommand", "CagingScore", "EnergyMap", "FingerConfig", "FingerSolution",
    "GraspEnergyMap", "GrasperDesign", "GrasperFamily", "GridSpec", "ObjectSpec",
    "SweepConfig", "SweepResult", "Trajectory", "build_energy_map", "caging_score",
    "classify_endpoint", "finger_configuration", "follow_gradient", "inscribed_radius",
    "manipulation_metric", "run_sweep",
]
