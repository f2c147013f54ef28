from .config import ExperimentConfig, load_config, parse_config
from .experiments import run_attack_sweep, run_auth_sweep, run_calibration, tabulate_bounds

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "run_attack_sweep",
    "run_auth_sweep",
    "run_calibration",
    "tabulate_bounds",
]
