"""
Configuration loader for the shape scaling toolkit.

This module handles loading and validating JSON or TOML configuration files.
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    try:
        import tomli as tomllib
    except ImportError:
        raise ImportError(
            "tomli package is required for Python < 3.11. "
            "Install it with: pip install tomli"
        )

from pydantic import ValidationError

from .config import ToolConfig
from .exceptions import ConfigurationError

CONFIG_FILENAMES = ("shape_scaling.toml", "shape_scaling.json")


def _read_config_data(config_path: Path) -> Dict[str, Any]:
    if config_path.suffix == ".json":
        with open(config_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    elif config_path.suffix == ".toml":
        with open(config_path, "rb") as f:
            data = tomllib.load(f)
    else:
        raise ConfigurationError(
            f"Unsupported configuration format: {config_path.suffix or '<none>'} "
            "(expected .json or .toml)",
            config_path=str(config_path),
        )
    if not isinstance(data, dict):
        raise ConfigurationError(
            "Configuration root must be an object", config_path=str(config_path)
        )
    return data


def _validation_messages(error: ValidationError) -> list:
    return [
        f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}"
        for item in error.errors()
    ]


def load_config(config_path: Union[str, Path]) -> ToolConfig:
    """
    Load configuration from a JSON or TOML file.

    Args:
        config_path: Path to the configuration file.

    Returns:
        Parsed and validated configuration.

    Raises:
        ConfigurationError: If configuration file cannot be loaded or is invalid.
    """
    config_path = Path(config_path)

    if not config_path.exists():
        raise ConfigurationError(
            f"Configuration file not found: {config_path}",
            config_path=str(config_path)
        )

    try:
        config_data = _read_config_data(config_path)
    except ConfigurationError:
        raise
    except Exception as e:
        raise ConfigurationError(
            f"Failed to parse configuration: {e}",
            config_path=str(config_path)
        ) from e

    try:
        return ToolConfig.model_validate(config_data)
    except ValidationError as e:
        raise ConfigurationError(
            f"Invalid configuration: {e}",
            config_path=str(config_path),
            validation_errors=_validation_messages(e),
        ) from e


def load_config_from_dict(config_data: Dict[str, Any]) -> ToolConfig:
    """
    Load configuration from a dictionary.

    Raises:
        ConfigurationError: If configuration is invalid.
    """
    try:
        return ToolConfig.model_validate(config_data)
    except ValidationError as e:
        raise ConfigurationError(
            f"Invalid configuration: {e}", validation_errors=_validation_messages(e)
        ) from e


def find_config_file(start_dir: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """
    Search for a configuration file in the start directory and its parents.

    Args:
        start_dir: Directory to start searching from. Defaults to current directory.

    Returns:
        Path to configuration file if found, None otherwise.
    """
    current = (Path(start_dir) if start_dir is not None else Path.cwd()).resolve()

    while True:
        for filename in CONFIG_FILENAMES:
            config_path = current / filename
            if config_path.exists():
                return config_path
        parent = current.parent
        if parent == current:
            break
        current = parent

    return None


def validate_config_file(config_path: Union[str, Path]) -> Tuple[bool, Optional[str]]:
    """
    Validate a configuration file.

    Returns:
        Tuple of (is_valid, error_message). error_message is None if valid.
    """
    try:
        load_config(config_path)
        return (True, None)
    except ConfigurationError as e:
        return (False, str(e))
