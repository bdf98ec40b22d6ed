"""
Configuration manager for chronon runs.
Handles reading/writing run config JSON with validation.
"""

import copy
import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

EXPERIMENTS = (
    "continuity",
    "control",
    "commutator",
    "disturbance",
    "conjecture1",
    "peres_figure",
    "epsv_figure",
    "sweep",
)


class ConfigError(ValueError):
    """Raised for malformed or unknown configuration entries."""


class ConfigManager:
    """Manages a chronon run configuration."""

    DEFAULT_CONFIG = {
        "experiment": "continuity",
        "seed": 1234,
        "threads": None,
        "clock": {
            "d": 20,
            "T0": 20.0,
            "sigma": None,  # None means sqrt(d)
            "n0": None,  # None means (d - 1) / 2
            "k0": 0.0
        },
        "potential": {
            "type": "cosine",
            "n": 60,
            "omega": 1.0,
            "x0": math.pi
        },
        "system": {
            "energies": [0.0, 0.0],
            "interaction_phases": [0.0, math.pi / 2],
            "state": "random_pure"
        },
        "grids": {
            "t_points": 21,
            "sigma_rule": "sqrt_d"
        },
        "output": {
            "dir": None,
            "dry_run": False,
            "svg": True
        },
        "experiments": {
            "continuity": {
                "d_grid": [8, 12, 16, 20, 24, 28, 32],
                "T0": 1.0,
                "fit_time_fraction": 0.5
            },
            "conjecture1": {
                "d_grid": [8, 12, 16, 20, 24, 28, 32, 36],
                "T0": 1.0,
                "floor": 1e-13
            },
            "epsv_figure": {
                "x0_list": [math.pi, math.pi / 2, 3 * math.pi / 2],
                "t_points": 201
            },
            "peres_figure": {
                "d": 8,
                "T0": 1.0,
                "t_points": 401
            },
            "commutator": {
                "d_grid": [9, 17, 33],
                "T0_list": [1.0, 7.3]
            },
            "control": {
                "t_points": 201
            },
            "disturbance": {
                "d_grid": [12, 16, 20, 24],
                "n_compare": [10, 100]
            },
            "sweep": {
                "d_grid": [12, 16, 20],
                "n_grid": [10, 30, 60, 100],
                "pulse_fraction": 0.5,
                "schedule_d_grid": [16, 32, 64, 128, 256],
                "schedule_x_vr": math.pi / 2
            }
        }
    }

    def __init__(self, config_path: Optional[Path] = None):
        """Initialize config manager.

        Args:
            config_path: Optional JSON config path; defaults are used when absent
        """
        self.config_path = Path(config_path) if config_path else None
        self._config: Dict[str, Any] = {}
        self._config = self.load()

    def _deep_merge_defaults(self, config: dict, defaults: dict):
        """Deep merge defaults into config, preserving existing values.

        Args:
            config: Existing configuration dictionary (modified in place)
            defaults: Default configuration dictionary
        """
        for key, default_value in defaults.items():
            if key not in config:
                config[key] = copy.deepcopy(default_value)
            elif isinstance(default_value, dict) and isinstance(config[key], dict):
                self._deep_merge_defaults(config[key], default_value)

    def _reject_unknown(self, config: dict, defaults: dict, path: str = ""):
        for key, value in config.items():
            where = f"{path}{key}"
            if key not in defaults:
                raise ConfigError(f"Unknown config field: {where}")
            if isinstance(defaults[key], dict):
                if not isinstance(value, dict):
                    raise ConfigError(f"Config field {where} must be an object")
                self._reject_unknown(value, defaults[key], where + ".")

    def validate(self, config: Dict[str, Any]):
        """Check a merged config; raises ConfigError on the first problem."""
        if config["experiment"] not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment: {config['experiment']!r}")
        if not isinstance(config["seed"], int):
            raise ConfigError(f"seed must be an integer, got {config['seed']!r}")
        threads = config["threads"]
        if threads is not None and (not isinstance(threads, int) or threads < 1):
            raise ConfigError(f"threads must be a positive integer, got {threads!r}")
        clock = config["clock"]
        if not isinstance(clock["d"], int) or clock["d"] < 2:
            raise ConfigError(f"clock.d must be an integer >= 2, got {clock['d']!r}")
        if not clock["T0"] > 0:
            raise ConfigError(f"clock.T0 must be positive, got {clock['T0']!r}")
        system = config["system"]
        if len(system["energies"]) != len(system["interaction_phases"]):
            raise ConfigError("system.energies and system.interaction_phases differ in length")
        if system["state"] not in ("random_pure", "maximally_mixed", "plus"):
            raise ConfigError(f"Unknown system.state: {system['state']!r}")
        if config["grids"]["sigma_rule"] not in ("sqrt_d", "fixed"):
            raise ConfigError(f"Unknown grids.sigma_rule: {config['grids']['sigma_rule']!r}")

    def load(self) -> Dict[str, Any]:
        """Load configuration from file.

        Returns:
            Configuration dictionary

        Raises:
            ConfigError: for malformed JSON or unknown fields
        """
        if self.config_path is None or not self.config_path.exists():
            self._config = copy.deepcopy(self.DEFAULT_CONFIG)
            return self._config

        try:
            with open(self.config_path, 'r') as f:
                loaded = json.load(f)
        except (json.JSONDecodeError, IOError) as e:
            raise ConfigError(f"{self.config_path}: {e}")
        if not isinstance(loaded, dict):
            raise ConfigError(f"{self.config_path}: top level must be an object")
        self._reject_unknown(loaded, self.DEFAULT_CONFIG)
        self._deep_merge_defaults(loaded, self.DEFAULT_CONFIG)
        self.validate(loaded)
        self._config = loaded
        return self._config

    def save(self, path: Optional[Path] = None) -> bool:
        """Save configuration to file.

        Returns:
            True if successful, False otherwise
        """
        target = Path(path) if path else self.config_path
        if target is None:
            print("Error saving config: no path given")
            return False
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, 'w') as f:
                json.dump(self._config, f, indent=2)
            return True
        except IOError as e:
            print(f"Error saving config: {e}")
            return False

    def set_experiment(self, name: str):
        if name not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment: {name!r}")
        self._config["experiment"] = name

    def set_output_dir(self, path: str):
        self._config["output"]["dir"] = str(path)

    def set_dry_run(self, enabled: bool):
        self._config["output"]["dry_run"] = bool(enabled)

    def set_threads(self, threads: Optional[int]):
        if threads is not None and threads < 1:
            raise ConfigError(f"threads must be a positive integer, got {threads}")
        self._config["threads"] = threads

    def get_experiment(self) -> str:
        return self._config["experiment"]

    def get_experiment_config(self, name: Optional[str] = None) -> Dict[str, Any]:
        """Get the parameter block of one experiment."""
        name = name or self.get_experiment()
        if name not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment: {name!r}")
        return copy.deepcopy(self._config["experiments"].get(name, {}))

    def get_clock(self) -> Dict[str, Any]:
        """Get clock parameters with sigma and n0 resolved."""
        clock = dict(self._config["clock"])
        d = clock["d"]
        if clock["sigma"] is None:
            clock["sigma"] = math.sqrt(d)
        if clock["n0"] is None:
            clock["n0"] = (d - 1) / 2
        return clock

    def get_potential(self) -> Dict[str, Any]:
        return dict(self._config["potential"])

    def get_system(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config["system"])

    def get_grids(self) -> Dict[str, Any]:
        return dict(self._config["grids"])

    def get_seed(self) -> int:
        return self._config["seed"]

    def get_threads(self) -> Optional[int]:
        return self._config["threads"]

    def is_dry_run(self) -> bool:
        return bool(self._config["output"]["dry_run"])

    def wants_svg(self) -> bool:
        return bool(self._config["output"]["svg"])

    def get_output_dir(self, experiment: Optional[str] = None) -> Path:
        """Configured output directory, or ./out/<experiment>-<timestamp>."""
        configured = self._config["output"]["dir"]
        if configured:
            return Path(configured)
        stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        return Path("out") / f"{experiment or self.get_experiment()}-{stamp}"

    def get_all(self) -> Dict[str, Any]:
        """Get entire configuration."""
        return copy.deepcopy(self._config)

    def list_experiments(self) -> List[str]:
        return list(EXPERIMENTS)
