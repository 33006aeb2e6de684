"""Configuration management for vddp (JSON file + environment overrides)."""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

CONFIG_FILE = Path(os.getenv("VDDP_CONFIG_FILE", "./vddp_config.json"))
DEFAULT_CONFIG: Dict[str, Any] = {
    "group_backend": "bls12_381",
    "seed": None,
    "retain_trapdoor": False,
    "mask_degree": 1,
    "challenge_mode": "interactive",
    "lprf_bit_budget": 1 << 20,
    "log_level": "WARNING",
    "accountant": {
        "max_gamma": 24,
        "exact_max_gamma": 16,
        "search_nus": [16, 24, 32],
    },
}

_ENV_OVERRIDES = {
    "VDDP_GROUP_BACKEND": ("group_backend", str),
    "VDDP_SEED": ("seed", int),
    "VDDP_RETAIN_TRAPDOOR": ("retain_trapdoor", lambda v: v.strip().lower() in ("1", "true", "yes")),
    "VDDP_MASK_DEGREE": ("mask_degree", int),
    "VDDP_CHALLENGE_MODE": ("challenge_mode", str),
    "VDDP_LOG_LEVEL": ("log_level", str),
}


def load_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load configuration from a JSON file, merged over defaults and environment.

    Args:
        path: Optional config file; defaults to CONFIG_FILE

    Returns:
        Dictionary containing configuration. Missing keys fall back to DEFAULT_CONFIG.
    """
    merged = copy.deepcopy(DEFAULT_CONFIG)
    config_path = Path(path) if path is not None else CONFIG_FILE
    if config_path.exists():
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                config = json.load(f)
            merged.update({k: v for k, v in config.items() if k != "accountant"})
            # Nested sections are merged key by key
            if "accountant" in config:
                merged["accountant"].update(config["accountant"])
        except (json.JSONDecodeError, IOError) as e:
            logger.warning("Error loading config %s: %s. Using defaults.", config_path, e)

    for env_name, (key, cast) in _ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if raw is None or raw == "":
            continue
        try:
            merged[key] = cast(raw)
        except ValueError:
            logger.warning("Ignoring %s=%r: not a valid value", env_name, raw)
    return merged


def save_config(config: Dict[str, Any], path: Optional[Path] = None) -> None:
    """
    Save configuration to a JSON file.

    Args:
        config: Configuration dictionary to save
        path: Target file; defaults to CONFIG_FILE
    """
    target = Path(path) if path is not None else CONFIG_FILE
    try:
        with open(target, "w", encoding="utf-8") as f:
            json.dump(config, f, indent=2, ensure_ascii=False)
    except IOError as e:
        raise IOError(f"Error saving config: {e}")


def get_backend_name() -> str:
    """Name of the group backend used when callers do not pass one."""
    return load_config().get("group_backend", DEFAULT_CONFIG["group_backend"])


def get_seed() -> Optional[int]:
    """Top-level seed, or None for OS entropy."""
    return load_config().get("seed")


def get_mask_degree() -> int:
    """Degree of the random mask polynomial in hiding KZG commitments."""
    return int(load_config().get("mask_degree", DEFAULT_CONFIG["mask_degree"]))


def get_retain_trapdoor() -> bool:
    """Whether setup keeps τ (test mode only)."""
    return bool(load_config().get("retain_trapdoor", False))


def get_challenge_mode() -> str:
    """Default challenge mode: 'interactive' or 'fiat-shamir'."""
    return load_config().get("challenge_mode", DEFAULT_CONFIG["challenge_mode"])


def get_lprf_bit_budget() -> int:
    """Maximum number of LPRF bits one server may draw in a session."""
    return int(load_config().get("lprf_bit_budget", DEFAULT_CONFIG["lprf_bit_budget"]))


def get_accountant_settings() -> Dict[str, Any]:
    """Enumeration bounds and search grid for the accountant."""
    return load_config().get("accountant", DEFAULT_CONFIG["accountant"])
