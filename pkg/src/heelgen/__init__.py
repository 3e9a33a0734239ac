"""heelgen: shoe-heel electromagnetic energy harvester simulation toolkit.

Co-simulates a bistable spring/magnet/coil generator driven by walking-gait
force pulses with a Schottky bridge rectifier and storage stage, and
optimizes harvester designs for harvested power.
"""

from .model import (
    BatteryModel,
    CircuitConfig,
    ConfigError,
    DiodeModel,
    GaitProfile,
    HarvesterDesign,
    SimConfig,
    load_config,
    reference_design,
    save_config,
)
from .generator import MechState, Stage
from .circuit import CircuitState, SolverError
from .engine import (
    EnergyLedger,
    SimResult,
    export_csv,
    run,
    run_batch,
    run_pulse_source,
    settle_time,
)
from .optimize import (
    CalibrationError,
    OptimizationProblem,
    OptimizationReport,
    calibrate,
    evaluate,
    grid_search,
    nelder_mead,
)

__version__ = "0.1.0"

__all__ = [
    "BatteryModel", "CircuitConfig", "ConfigError", "DiodeModel",
    "GaitProfile", "HarvesterDesign", "SimConfig", "load_config",
    "reference_design", "save_config", "MechState", "Stage", "CircuitState",
    "SolverError", "EnergyLedger", "SimResult", "export_csv", "run",
    "run_batch", "run_pulse_source", "settle_time", "CalibrationError",
    "OptimizationProblem", "OptimizationReport", "calibrate", "evaluate",
    "grid_search", "nelder_mead", "__version__",
]
