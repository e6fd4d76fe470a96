"""Artificial magnetic monopole felt by a trapped Lambda-type atom in the dark state."""

from .fields import AtomConfig, BeamConfig, EigenFrame, HarmonicTrap, NoTrap, Position, SphericalTrap

__version__ = "0.1.0"

__all__ = [
    "AtomConfig",
    "BeamConfig",
    "EigenFrame",
    "HarmonicTrap",
    "NoTrap",
    "Position",
    "SphericalTrap",
]
