"""Pose-regression loss family, desk-scale trainers, localization metrics,
and an occupancy-grid MCL/Dijkstra navigation simulator."""

__version__ = "0.1.0"
