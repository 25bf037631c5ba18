"""Side-lobe interference analysis for UAV air-to-ground links."""

from .channel import ENVIRONMENTS, ChannelParams, Environment, LinkMode
from .field import SystemParams, per_km2
from .numerics import NumericsConfig

__all__ = ["ENVIRONMENTS", "ChannelParams", "Environment", "LinkMode", "NumericsConfig",
           "SystemParams", "per_km2"]
__version__ = "0.1.0"
