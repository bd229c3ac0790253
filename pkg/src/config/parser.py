import copy
import json
import logging

from src.errors import ConfigError


DEFAULT_CONFIG = {
    "nonlinearity": {
        "family": "power",
        "p": 3.0,
        "expr": None,
        "a": 0.0,
        "tail": {"kind": "PowerLaw", "amplitude": None, "exponent_or_rate": None, "cutoff": 1.0},
    },
    "run": {
        "N": 3,
        "r_sequence": [0.99, 0.999, 0.9999],
        "seed": 12345,
        "output": "data/results",
    },
    "quadrature": {"rel_tol": 1e-11, "abs_tol": 1e-300, "max_subdivisions": 200},
    "phase_plane": {
        "tol_radius": 1e-8,
        "rtol": 1e-10,
        "samples_per_decade": 64,
        "stop_distance": 1e-8,
    },
    "picard": {
        "rho": 0.2,
        "grid_density": 32,
        "sup_tol": 1e-10,
        "max_iters": 50,
        "tail_fraction": 1e-5,
        "refine_tol": 2e-7,
        "max_refinements": 8,
        "k": 2,
    },
    "expansion": {"order": 4, "U_grid": [1e2, 1e3, 1e4, 1e5, 1e6]},
    "universality": {"max_doublings": 400, "ceiling": 1e200},
    "logging": {"level": "INFO", "format": "%(levelname)s %(name)s: %(message)s"},
    "jobs": [],
}


def merge_config(base, override):
    """
    Recursively merges two configuration dictionaries.

    Args:
        base (dict): Lower-priority configuration.
        override (dict): Higher-priority configuration; its leaves win.

    Returns:
        dict: A new merged dictionary (inputs are not modified).
    """
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class ConfigParser:
    """
    Utility class to parse and manage run configurations.
    """

    def __init__(self, config_file=None, overrides=None):
        """
        Initializes the ConfigParser.

        Args:
            config_file (str): Path to the JSON configuration file, or None for defaults only.
            overrides (dict): Values layered on top of the file (typically CLI flags).
        """
        self.config_file = config_file
        self.config = merge_config(merge_config(DEFAULT_CONFIG, self._load_config()), overrides)

    def _load_config(self):
        """
        Loads the configuration from the JSON file.

        Returns:
            dict: Parsed configuration data (empty when no file was given).
        """
        if self.config_file is None:
            return {}
        try:
            with open(self.config_file, "r") as file:
                return json.load(file)
        except FileNotFoundError:
            raise ConfigError(f"Configuration file '{self.config_file}' not found.")
        except json.JSONDecodeError as e:
            raise ConfigError(f"Error parsing JSON configuration file: {e}")

    def get(self, key, default=None):
        """
        Retrieves a configuration value.

        Args:
            key (str): Dot-separated key path (e.g., "picard.rho").
            default: Default value if the key does not exist.

        Returns:
            Any: Configuration value or the default value.
        """
        value = self.config
        try:
            for k in key.split("."):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def as_dict(self):
        """
        Returns the entire configuration as a dictionary.
        """
        return self.config

    @staticmethod
    def get_config():
        if _config_instance is None:
            return init_config()
        return _config_instance

    @staticmethod
    def get_config_dict():
        return ConfigParser.get_config().as_dict()


def configure_logging(config):
    """
    Configures the root logger from the `logging` section.

    Args:
        config (ConfigParser): Loaded configuration.
    """
    level = str(config.get("logging.level", "INFO")).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ConfigError(f"Unknown logging level '{level}'.")
    logging.basicConfig(level=level, format=config.get("logging.format"), force=True)


def init_config(config_file=None, overrides=None, reload=False):
    """
    Initializes and returns the singleton ConfigParser instance.

    The configuration is loaded once; pass reload=True to replace it
    (the command line does so after parsing flags).

    Args:
        config_file (str): Path to the JSON configuration file. Defaults to built-in values.
        overrides (dict): Values that take precedence over the file.
        reload (bool): Discard a previously loaded instance.

    Returns:
        ConfigParser: Singleton instance with the loaded configuration.
    """
    global _config_instance
    if _config_instance is None or reload:
        _config_instance = ConfigParser(config_file, overrides)
        logger.debug(f"Configuration initialized from {config_file or 'defaults'}.")
    return _config_instance


logger = logging.getLogger(__name__)
_config_instance = None
