"""Mission-wide types and pure decision functions shared by every module."""

from stratobc.domain.automaton import Stimulus, TransitionResult, mode_transition
from stratobc.domain.config import MissionConfig, flight_config, load_config, tvac_config
from stratobc.domain.tasks import (
    TaskKind,
    TaskSetReport,
    TaskSpec,
    compute_ceilings,
    flight_task_specs,
    validate_task_set,
)
from stratobc.domain.types import (
    ControlAuthority,
    Event,
    EventKind,
    OperatingMode,
    TcId,
    Telecommand,
)

__all__ = [
    "ControlAuthority",
    "Event",
    "EventKind",
    "MissionConfig",
    "OperatingMode",
    "Stimulus",
    "TaskKind",
    "TaskSetReport",
    "TaskSpec",
    "TcId",
    "Telecommand",
    "TransitionResult",
    "compute_ceilings",
    "flight_config",
    "flight_task_specs",
    "load_config",
    "mode_transition",
    "tvac_config",
    "validate_task_set",
]
