"""Active Pareto-front learning workbench with linguistic and visual explanations."""

__version__ = "0.1.0"

from . import bench, campaign, embed, fls, gp, pal  # noqa: F401
