"""Version information for shape_scaling."""

__version__ = "0.1.0"
