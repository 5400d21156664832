"""Numerical Aharonov-Bohm phases for a capacitor-solenoid setup whose
charging turns on the magnetic flux of two fluxons."""

from .model import (
    BranchCutError,
    ConfigError,
    FluxonCoreError,
    PathError,
    PhaseBreakdown,
    PolyPath,
    RegularizationParams,
    SetupConfig,
    SpacetimePoint,
    load_config,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "BranchCutError",
    "ConfigError",
    "FluxonCoreError",
    "PathError",
    "PhaseBreakdown",
    "PolyPath",
    "RegularizationParams",
    "SetupConfig",
    "SpacetimePoint",
    "load_config",
    "validate_config",
]
