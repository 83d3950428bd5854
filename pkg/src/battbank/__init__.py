"""Heterogeneous battery bank dispatch as an MDP: simulator, greedy /
proportional / learned policies, semi-gradient Q-learning with a compact
kernel feature basis, and an exact small-instance solver."""

from .core import (Action, BankConfig, BackgroundChain, BatteryConfig, State,
                   ValidationReport, clip, config_fingerprint, load_config,
                   validate_config)

__all__ = [
    "Action", "BankConfig", "BackgroundChain", "BatteryConfig", "State",
    "ValidationReport", "clip", "config_fingerprint", "load_config",
    "validate_config",
]

__version__ = "0.1.0"
