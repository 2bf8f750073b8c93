"""Code related to the run configuration that fair-noma uses."""
import yaml
import copy
import os
import logging
import math
from typing import Any
from ergodic_analysis import QuadratureConfig
from monte_carlo import McConfig
CONFIG_DICT_TYPE = dict[str, Any]

logger = logging.getLogger(__name__)

WORKERS_ENVIRONMENT_VARIABLE = "FAIR_NOMA_WORKERS"


class ConfigError(Exception):
    """Exception raised when the run configuration is invalid."""

    pass


class Configuration:
    """The config or a sub-config of a fair-noma run."""

    def __init__(self, parameters: CONFIG_DICT_TYPE) -> None:
        """:param parameters: A `dict` containing the config."""
        self.config = parameters

    def __getattr__(self, name: str) -> Any:
        """Read a section or a setting as an attribute, e.g. `config.monte_carlo.seed`."""
        return self.lookup(name)

    def lookup(self, name: str) -> Any:
        """
        Get a section or a setting.

        :param name: The section or setting name.
        :return: A `Configuration` for a section, the plain value for a setting, or None if it is missing.
        """
        data = self.config.get(name)
        return Configuration(data) if isinstance(data, dict) else data

    def __bool__(self) -> bool:
        """Whether this section holds any settings."""
        return bool(self.config)

    def quadrature_config(self) -> QuadratureConfig:
        """Get the quadrature settings."""
        section = self.config["quadrature"]
        return QuadratureConfig(abs_tol=section["abs_tol"], rel_tol=section["rel_tol"],
                                truncation_multiplier=section["truncation_multiplier"], limit=section["limit"])

    def mc_config(self) -> McConfig:
        """Get the Monte Carlo work split."""
        section = self.config["monte_carlo"]
        return McConfig(block_size=section["block_size"], workers=section["workers"])


def config_assert(assertion: bool, error_message: str) -> None:
    """Raise an exception if an assertion is false."""
    if not assertion:
        raise ConfigError(error_message)


def set_config_default(config: CONFIG_DICT_TYPE, *sections: str, key: str, default: Any,
                       force_empty_values: bool = False) -> CONFIG_DICT_TYPE:
    """
    Fill a specific config key with the default value if it is missing.

    :param config: The run config.
    :param sections: The sections that the key is in.
    :param key: The key to set.
    :param default: The default value.
    :param force_empty_values: Whether an empty value should be replaced with the default value.
    :return: The new config with the default value inserted if needed.
    """
    subconfig = config
    for section in sections:
        subconfig = subconfig.setdefault(section, {})
        if not isinstance(subconfig, dict):
            raise ConfigError(f"The {section} section in {sections} should hold a set of key-value pairs, not a value.")
    if force_empty_values:
        if subconfig.get(key) in [None, ""]:
            subconfig[key] = default
    else:
        subconfig.setdefault(key, default)
    return subconfig


def insert_default_values(CONFIG: CONFIG_DICT_TYPE) -> None:
    """
    Insert the default values of all keys that are missing or empty.

    :param CONFIG: The run config.
    """
    set_config_default(CONFIG, "system", key="beta", default=1.0, force_empty_values=True)
    set_config_default(CONFIG, "quadrature", key="abs_tol", default=1e-8, force_empty_values=True)
    set_config_default(CONFIG, "quadrature", key="rel_tol", default=1e-8, force_empty_values=True)
    set_config_default(CONFIG, "quadrature", key="truncation_multiplier", default=60.0, force_empty_values=True)
    set_config_default(CONFIG, "quadrature", key="limit", default=200, force_empty_values=True)
    set_config_default(CONFIG, "monte_carlo", key="samples", default=1_000_000, force_empty_values=True)
    set_config_default(CONFIG, "monte_carlo", key="seed", default=20160101, force_empty_values=True)
    set_config_default(CONFIG, "monte_carlo", key="block_size", default=65536, force_empty_values=True)
    set_config_default(CONFIG, "monte_carlo", key="workers", default=1, force_empty_values=True)
    set_config_default(CONFIG, "output", key="format", default="csv", force_empty_values=True)
    set_config_default(CONFIG, "output", key="path", default="-", force_empty_values=True)


def log_config(CONFIG: CONFIG_DICT_TYPE) -> None:
    """Log the effective settings as YAML at debug level."""
    logger.debug(f"Config:\n{yaml.dump(CONFIG, sort_keys=False)}")


def validate_config(CONFIG: CONFIG_DICT_TYPE) -> None:
    """Reject settings outside their allowed ranges."""
    beta = CONFIG["system"]["beta"]
    config_assert(isinstance(beta, (int, float)) and math.isfinite(beta) and beta > 0,
                  f"`--beta` must be a positive number, got {beta}.")

    quadrature = CONFIG["quadrature"]
    config_assert(quadrature["abs_tol"] > 0 and quadrature["rel_tol"] > 0, "Quadrature tolerances must be positive.")
    config_assert(quadrature["truncation_multiplier"] >= 30,
                  f"The truncation multiplier must be at least 30, got {quadrature['truncation_multiplier']}.")

    monte_carlo = CONFIG["monte_carlo"]
    config_assert(isinstance(monte_carlo["samples"], int) and monte_carlo["samples"] >= 1,
                  f"`--samples` must be a positive integer, got {monte_carlo['samples']}.")
    config_assert(isinstance(monte_carlo["seed"], int) and 0 <= monte_carlo["seed"] < 2 ** 64,
                  f"`--seed` must be an unsigned 64-bit integer, got {monte_carlo['seed']}.")
    config_assert(isinstance(monte_carlo["workers"], int) and monte_carlo["workers"] >= 1,
                  f"`--workers` must be a positive integer, got {monte_carlo['workers']}.")
    config_assert(monte_carlo["block_size"] >= 1, f"The block size must be positive, got {monte_carlo['block_size']}.")

    output_format = CONFIG["output"]["format"]
    format_choices = ["csv", "json", "text"]
    config_assert(output_format in format_choices,
                  f"`{output_format}` is not a valid `--format` value. Please choose from {format_choices}.")


def load_config(overrides: CONFIG_DICT_TYPE) -> Configuration:
    """
    Build the run config from the command-line flags.

    :param overrides: The values given on the command line, by section. `None` values take the default.
    :return: A `Configuration` object containing the config.
    """
    CONFIG = copy.deepcopy(overrides)

    if WORKERS_ENVIRONMENT_VARIABLE in os.environ and not (CONFIG.get("monte_carlo") or {}).get("workers"):
        try:
            set_config_default(CONFIG, "monte_carlo", key="workers", default=None)
            CONFIG["monte_carlo"]["workers"] = int(os.environ[WORKERS_ENVIRONMENT_VARIABLE])
        except ValueError:
            raise ConfigError(f"{WORKERS_ENVIRONMENT_VARIABLE} must be an integer, "
                              f"got {os.environ[WORKERS_ENVIRONMENT_VARIABLE]!r}.")

    insert_default_values(CONFIG)
    log_config(CONFIG)
    validate_config(CONFIG)

    return Configuration(CONFIG)
